//! SAT-based bounded model checking for word-level designs with embedded
//! multi-port memories.
//!
//! Instead of expanding a memory into `2^aw * dw` state bits, the checker
//! keeps the memory interface signals (address, data, enables) and emits
//! per-depth constraints that preserve data-forwarding semantics: a read
//! returns the most recently written data at the same address, or the
//! initial word if the address was never written. The same engine can run
//! against an explicit-memory expansion for cross-validation, prove
//! properties by forward-diameter or backward-induction termination checks,
//! and shrink models with proof-based abstraction driven by unsat cores.

pub mod bitblast;
pub mod corpus;
pub mod emm;
pub mod engine;
pub mod explicit;
pub mod fuzz;
pub mod gen;
pub mod memsim;
pub mod netlist;
pub mod parser;
pub mod pba;
pub mod report;
pub mod sat;
pub mod sim;
pub mod unroll;
pub mod witness;

