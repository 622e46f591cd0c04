//! Bit-vector SAT back end.
//!
//! Everything both verification phases prove or refute goes through this
//! module: [`lower_expr`] bit-blasts typed expressions into CNF with
//! Tseitin encoding and structural sharing, and [`solve`] runs the
//! built-in CDCL solver (two-watched-literal propagation, first-UIP
//! clause learning, activity-driven decisions, geometric restarts,
//! learned-clause reduction).
//!
//! The solver is deterministic for a fixed seed. Before a `Sat` result
//! is ever returned the model is checked against every input clause;
//! a failure there is an internal error and panics rather than
//! propagating an unsound answer.

mod dimacs;
mod external;
mod lower;
mod solver;

pub use dimacs::{from_dimacs, to_dimacs, DimacsError};
pub use external::{solve_with_external, ExternalError};
pub use lower::{lower_expr, Bit, Lowering};
pub use solver::solve;

use std::fmt;
use std::ops::Not;
use std::time::Duration;

/// A literal: variable index plus polarity, packed in one word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var << 1 | (!positive) as u32)
    }

    pub fn positive(var: u32) -> Lit {
        Lit(var << 1)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for watch lists (two slots per variable).
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS form: 1-based, negative when the polarity is negative.
    pub fn to_dimacs(self) -> i64 {
        let v = (self.var() + 1) as i64;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A CNF formula under construction plus bookkeeping that maps named
/// bit-vector groups to their literals, so models can be read back as
/// values.
#[derive(Clone, Debug, Default)]
pub struct SatProblem {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    /// Named little-endian literal groups (inputs, probes) for model
    /// extraction and DIMACS comments.
    names: Vec<(String, Vec<Lit>)>,
}

impl SatProblem {
    pub fn new() -> Self {
        SatProblem::default()
    }

    pub fn fresh_lit(&mut self) -> Lit {
        let v = self.num_vars;
        self.num_vars += 1;
        Lit::positive(v)
    }

    /// Adds a clause. Tautologies are dropped, duplicate literals
    /// removed. An empty clause makes the problem trivially
    /// unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        for pair in c.windows(2) {
            if pair[0].var() == pair[1].var() {
                return; // l and !l in one clause
            }
        }
        for l in &c {
            assert!(l.var() < self.num_vars, "literal for unallocated variable");
        }
        self.clauses.push(c);
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn name_bits(&mut self, name: impl Into<String>, bits: Vec<Lit>) {
        self.names.push((name.into(), bits));
    }

    pub fn names(&self) -> &[(String, Vec<Lit>)] {
        &self.names
    }

    /// True if some clause is empty (no satisfying assignment exists).
    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }
}

/// Satisfying assignment, total over all variables of the problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub(crate) fn new(values: Vec<bool>) -> Self {
        Model { values }
    }

    pub fn value(&self, lit: Lit) -> bool {
        self.values[lit.var() as usize] == lit.is_positive()
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    /// True when every clause has at least one satisfied literal.
    pub fn satisfies(&self, problem: &SatProblem) -> bool {
        problem.clauses.iter().all(|c| c.iter().any(|&l| self.value(l)))
    }
}

/// Why the solver gave up without an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    Conflicts,
    Time,
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stop::Conflicts => write!(f, "conflict budget exhausted"),
            Stop::Time => write!(f, "time budget exhausted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Model),
    Unsat,
    Unknown(Stop),
}

/// Resource limits per obligation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_conflicts: u64,
    pub timeout: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_conflicts: 1_000_000, timeout: Duration::from_secs(60) }
    }
}

impl Budget {
    pub fn with_timeout_ms(ms: u64) -> Self {
        Budget { timeout: Duration::from_millis(ms), ..Budget::default() }
    }
}

/// Counters reported with every solver run; `conflicts` and the clause
/// count feed the benchmark CSV.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
    pub removed: u64,
}

impl SolverStats {
    /// Accumulates another run's counters into this one.
    pub fn absorb(&mut self, s: SolverStats) {
        self.conflicts += s.conflicts;
        self.decisions += s.decisions;
        self.propagations += s.propagations;
        self.restarts += s.restarts;
        self.learned += s.learned;
        self.removed += s.removed;
    }
}

/// Solves `problem` with extra single-bit assumptions asserted on a
/// clone. Both verification phases use this to ask several questions of
/// one lowered circuit: constant-true bits are dropped, a constant
/// false assumption makes the problem trivially unsatisfiable.
pub fn solve_under(
    problem: &SatProblem,
    assumptions: &[Bit],
    budget: &Budget,
    seed: u64,
) -> (SatOutcome, SolverStats) {
    let mut p = problem.clone();
    for b in assumptions {
        match b {
            Bit::Const(true) => {}
            Bit::Const(false) => p.add_clause(&[]),
            Bit::Lit(l) => p.add_clause(&[*l]),
        }
    }
    solve(&p, budget, seed)
}
