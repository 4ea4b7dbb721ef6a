//! Hybrid constraint store and solver contract.
//!
//! Constraints are held in two forms: 2-input AND gates (inverters are free,
//! encoded as complemented literal edges) and plain CNF clauses. Gates are
//! lowered to the 3-clause AND encoding internally, but clause and gate
//! counts are tracked separately, per category, so that the memory-modeling
//! constraint accounting can be checked against the closed-form predictions.
//!
//! Solving is backed by batsat (a MiniSat-style CDCL solver). Unsat cores
//! are assumption cores: a subset of the assumption literals sufficient for
//! unsatisfiability. Core minimality is not guaranteed, only sufficiency.

use batsat::{lbool, Callbacks, Lit as BLit, Solver, SolverInterface, SolverOpts};
use std::fmt;
use std::io::Write;
use std::time::Instant;

/// A literal: variable index plus polarity. Variable 0 is the constant-true
/// variable, asserted by a unit clause at store construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const TRUE: Lit = Lit(0);
    pub const FALSE: Lit = Lit(1);

    fn positive(var: u32) -> Lit {
        Lit(var << 1)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Literal with polarity applied: `lit.with_sign(false)` negates.
    pub fn with_sign(self, keep: bool) -> Lit {
        if keep {
            self
        } else {
            !self
        }
    }

    /// DIMACS encoding: 1-based, negative when negated.
    pub fn dimacs(self) -> i64 {
        let v = (self.var() + 1) as i64;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "!v{}", self.var())
        } else {
            write!(f, "v{}", self.var())
        }
    }
}

/// Constraint category tags. Every clause or gate added to the store is
/// charged to the active category; counters must sum to the store totals.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Category {
    Transition,
    Property,
    InitState,
    AddrCompare,
    Exclusivity,
    ReadData,
    InitConsistency,
}

pub const ALL_CATEGORIES: [Category; 7] = [
    Category::Transition,
    Category::Property,
    Category::InitState,
    Category::AddrCompare,
    Category::Exclusivity,
    Category::ReadData,
    Category::InitConsistency,
];

impl Category {
    fn index(self) -> usize {
        match self {
            Category::Transition => 0,
            Category::Property => 1,
            Category::InitState => 2,
            Category::AddrCompare => 3,
            Category::Exclusivity => 4,
            Category::ReadData => 5,
            Category::InitConsistency => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Transition => "transition",
            Category::Property => "property",
            Category::InitState => "init-state",
            Category::AddrCompare => "address-compare",
            Category::Exclusivity => "exclusivity",
            Category::ReadData => "read-data",
            Category::InitConsistency => "init-consistency",
        }
    }
}

/// Clause and gate counts, by category.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Counts {
    pub clauses: u64,
    pub gates: u64,
}

#[derive(Clone, Default, Debug, PartialEq, Eq)]
pub struct CountsByCategory {
    counts: [Counts; 7],
}

impl CountsByCategory {
    pub fn get(&self, cat: Category) -> Counts {
        self.counts[cat.index()]
    }

    pub fn total(&self) -> Counts {
        let mut t = Counts::default();
        for c in &self.counts {
            t.clauses += c.clauses;
            t.gates += c.gates;
        }
        t
    }

    /// Component-wise difference `self - earlier`.
    pub fn delta(&self, earlier: &CountsByCategory) -> CountsByCategory {
        let mut d = CountsByCategory::default();
        for i in 0..7 {
            d.counts[i].clauses = self.counts[i].clauses - earlier.counts[i].clauses;
            d.counts[i].gates = self.counts[i].gates - earlier.counts[i].gates;
        }
        d
    }
}

/// A satisfying assignment, indexed by variable.
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, lit: Lit) -> bool {
        let v = self
            .values
            .get(lit.var() as usize)
            .copied()
            .unwrap_or(false);
        v ^ lit.is_negated()
    }

    pub fn word(&self, bits: &[Lit]) -> u64 {
        let mut w = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            if self.value(b) {
                w |= 1 << i;
            }
        }
        w
    }
}

/// Result of a solve call. `Unknown` means a resource budget was exhausted,
/// reported distinctly from UNSAT.
pub enum SolveResult {
    Sat(Model),
    Unsat { core: Vec<Lit> },
    Unknown,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat { .. })
    }
}

#[derive(Debug)]
pub enum SatError {
    UnallocatedVariable(u32),
}

impl fmt::Display for SatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatError::UnallocatedVariable(v) => write!(f, "literal references variable {v} which was never allocated"),
        }
    }
}

impl std::error::Error for SatError {}

/// Budget hooks polled by the solver search loop.
#[derive(Default)]
struct BudgetCb {
    conflicts: u64,
    conflict_budget: Option<u64>,
    deadline: Option<Instant>,
    poll: std::cell::Cell<u32>,
    tripped: std::cell::Cell<bool>,
}

impl Callbacks for BudgetCb {
    fn on_new_clause(&mut self, _c: &[BLit], k: batsat::ClauseKind) {
        if k == batsat::ClauseKind::Learnt {
            self.conflicts += 1;
        }
    }

    fn stop(&self) -> bool {
        if let Some(b) = self.conflict_budget {
            if self.conflicts >= b {
                self.tripped.set(true);
                return true;
            }
        }
        if let Some(d) = self.deadline {
            // Check the clock every 1024 polls; stop() is on the hot path.
            let n = self.poll.get().wrapping_add(1);
            self.poll.set(n);
            if n % 1024 == 0 && Instant::now() >= d {
                self.tripped.set(true);
                return true;
            }
        }
        false
    }
}

/// The hybrid store plus a single solver instance. One store is
/// single-threaded; independent stores may run concurrently.
pub struct ConstraintStore {
    solver: Solver<BudgetCb>,
    nvars: u32,
    counters: CountsByCategory,
    active: Category,
    /// Clause log for DIMACS export, including gate lowerings. Only kept
    /// when recording is enabled; the explicit-memory runs get large.
    recorded: Option<Vec<Vec<Lit>>>,
    last_assumptions: Vec<Lit>,
    clause_buf: Vec<BLit>,
}

impl Default for ConstraintStore {
    fn default() -> Self {
        Self::new()
    }
}

impl ConstraintStore {
    pub fn new() -> Self {
        let mut solver = Solver::new(SolverOpts::default(), BudgetCb::default());
        let t = solver.new_var_default();
        debug_assert_eq!(t.idx(), 0);
        let mut unit = vec![BLit::new(t, true)];
        solver.add_clause_reuse(&mut unit);
        ConstraintStore {
            solver,
            nvars: 1,
            counters: CountsByCategory::default(),
            active: Category::Transition,
            recorded: None,
            last_assumptions: Vec::new(),
            clause_buf: Vec::new(),
        }
    }

    /// Enable the clause log needed for DIMACS export.
    pub fn enable_recording(&mut self) {
        if self.recorded.is_none() {
            self.recorded = Some(vec![vec![Lit::TRUE]]);
        }
    }

    pub fn set_category(&mut self, cat: Category) {
        self.active = cat;
    }

    pub fn category(&self) -> Category {
        self.active
    }

    pub fn counts(&self) -> &CountsByCategory {
        &self.counters
    }

    pub fn num_vars(&self) -> u32 {
        self.nvars
    }

    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.solver.cb_mut().conflict_budget = budget;
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.solver.cb_mut().deadline = deadline;
    }

    pub fn new_var(&mut self) -> Lit {
        let v = self.solver.new_var_default();
        self.nvars += 1;
        Lit::positive(v.idx())
    }

    fn check_lits(&self, lits: &[Lit]) -> Result<(), SatError> {
        for l in lits {
            if l.var() >= self.nvars {
                return Err(SatError::UnallocatedVariable(l.var()));
            }
        }
        Ok(())
    }

    /// Add a CNF clause, charged to the active category. Clauses are counted
    /// as emitted even if the solver simplifies or discards them internally.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        self.check_lits(lits)?;
        self.counters.counts[self.active.index()].clauses += 1;
        self.push_solver_clause(lits);
        Ok(())
    }

    fn to_batsat(&mut self, l: Lit) -> BLit {
        let v = self.solver.var_of_int(l.var());
        BLit::new(v, !l.is_negated())
    }

    fn push_solver_clause(&mut self, lits: &[Lit]) {
        if let Some(rec) = &mut self.recorded {
            rec.push(lits.to_vec());
        }
        self.clause_buf.clear();
        for i in 0..lits.len() {
            let bl = self.to_batsat(lits[i]);
            self.clause_buf.push(bl);
        }
        let mut buf = std::mem::take(&mut self.clause_buf);
        self.solver.add_clause_reuse(&mut buf);
        self.clause_buf = buf;
    }

    /// Constrain `out = a AND b`, charged as one 2-input gate (the internal
    /// 3-clause lowering is not added to the clause counters). No constant
    /// folding happens here: the gate is emitted as-is so gate counts match
    /// the generator's accounting exactly.
    pub fn add_and(&mut self, out: Lit, a: Lit, b: Lit) -> Result<(), SatError> {
        self.check_lits(&[out, a, b])?;
        self.counters.counts[self.active.index()].gates += 1;
        self.push_solver_clause(&[!out, a]);
        self.push_solver_clause(&[!out, b]);
        self.push_solver_clause(&[out, !a, !b]);
        Ok(())
    }

    /// Fresh variable constrained to `a AND b`.
    pub fn and(&mut self, a: Lit, b: Lit) -> Result<Lit, SatError> {
        let out = self.new_var();
        self.add_and(out, a, b)?;
        Ok(out)
    }

    /// Fresh variable constrained to `a OR b` (one gate, complemented edges).
    pub fn or(&mut self, a: Lit, b: Lit) -> Result<Lit, SatError> {
        Ok(!self.and(!a, !b)?)
    }

    /// Solve under the given assumptions. Returns SAT with a total model,
    /// UNSAT with an assumption core, or Unknown on budget exhaustion.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveResult, SatError> {
        self.check_lits(assumptions)?;
        self.last_assumptions = assumptions.to_vec();
        self.solver.cb_mut().tripped.set(false);
        let assumps: Vec<BLit> = assumptions.iter().map(|l| self.to_batsat(*l)).collect();
        let res = self.solver.solve_limited(&assumps);
        if res == lbool::TRUE {
            let values = self
                .solver
                .get_model()
                .iter()
                .map(|&v| v == lbool::TRUE)
                .collect();
            Ok(SolveResult::Sat(Model { values }))
        } else if res == lbool::FALSE {
            // The final conflict clause is expressed over negated assumption
            // literals; flip it back into assumption space.
            let core: Vec<Lit> = self
                .solver
                .unsat_core()
                .iter()
                .map(|bl| {
                    let lit = Lit::positive(bl.var().idx()).with_sign(bl.sign());
                    !lit
                })
                .collect();
            Ok(SolveResult::Unsat { core })
        } else {
            Ok(SolveResult::Unknown)
        }
    }

    /// Write everything added so far as DIMACS CNF, with the most recent
    /// solve's assumptions appended as unit clauses. Requires recording.
    pub fn dump_dimacs<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let clauses = self.recorded.as_deref().unwrap_or(&[]);
        let n = clauses.len() + self.last_assumptions.len();
        writeln!(w, "p cnf {} {}", self.nvars, n)?;
        for c in clauses {
            for l in c {
                write!(w, "{} ", l.dimacs())?;
            }
            writeln!(w, "0")?;
        }
        for a in &self.last_assumptions {
            writeln!(w, "{} 0", a.dimacs())?;
        }
        Ok(())
    }
}
