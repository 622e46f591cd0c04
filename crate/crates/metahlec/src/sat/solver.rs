//! CDCL solver.
//!
//! A conventional conflict-driven clause-learning loop: two-watched
//! literal propagation with blockers, first-UIP learning with local
//! clause minimization, exponential variable activity with a
//! heap-backed decision order, phase saving, geometric restarts and
//! activity-based reduction of the learned clause database.
//!
//! Determinism: for a fixed problem, budget and seed the solver visits
//! the same search tree and returns the same model. The seed only
//! perturbs branching (occasional random decisions and initial
//! polarity), never correctness.

use std::time::Instant;

use super::{Budget, Lit, Model, SatOutcome, SatProblem, SolverStats, Stop};

const NO_REASON: u32 = u32::MAX;
const RESTART_BASE: u64 = 100;
const RANDOM_DECISION_PERMIL: u64 = 20;

#[derive(Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

/// Max-heap over variable activity, with a position index so that
/// arbitrary variables can be re-inserted after backtracking. Ties
/// break toward the lower variable index to keep runs reproducible.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn new(n: u32) -> Self {
        VarHeap { heap: (0..n).collect(), pos: (0..n as usize).collect() }
    }

    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn before(activity: &[f64], a: u32, b: u32) -> bool {
        let (xa, xb) = (activity[a as usize], activity[b as usize]);
        xa > xb || (xa == xb && a < b)
    }

    fn sift_up(&mut self, activity: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::before(activity, v, self.heap[parent]) {
                self.heap[i] = self.heap[parent];
                self.pos[self.heap[i] as usize] = i;
                i = parent;
            } else {
                break;
            }
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, activity: &[f64], mut i: usize) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && Self::before(activity, self.heap[right], self.heap[left])
            {
                right
            } else {
                left
            };
            if Self::before(activity, self.heap[child], v) {
                self.heap[i] = self.heap[child];
                self.pos[self.heap[i] as usize] = i;
                i = child;
            } else {
                break;
            }
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn build(&mut self, activity: &[f64]) {
        for i in (0..self.heap.len() / 2).rev() {
            self.sift_down(activity, i);
        }
    }

    fn push(&mut self, activity: &[f64], v: u32) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v as usize] = self.heap.len() - 1;
        self.sift_up(activity, self.heap.len() - 1);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        self.pos[top as usize] = NOT_IN_HEAP;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(activity, 0);
        }
        Some(top)
    }

    fn update(&mut self, activity: &[f64], v: u32) {
        if self.contains(v) {
            let i = self.pos[v as usize];
            self.sift_up(activity, i);
            self.sift_down(activity, self.pos[v as usize]);
        }
    }

    fn peek_at(&self, i: usize) -> u32 {
        self.heap[i % self.heap.len()]
    }

    fn len(&self) -> usize {
        self.heap.len()
    }
}

struct XorShift(u64);

impl XorShift {
    fn new(seed: u64) -> Self {
        XorShift(seed.wrapping_mul(2685821657736338717).max(1))
    }

    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<LBool>,
    levels: Vec<u32>,
    reasons: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    rng: XorShift,
    stats: SolverStats,
    unsat: bool,
}

impl Solver {
    fn new(problem: &SatProblem, seed: u64) -> Self {
        let n = problem.num_vars() as usize;
        let mut rng = XorShift::new(seed);
        let phase: Vec<bool> = (0..n).map(|_| rng.next() & 1 == 1).collect();
        let mut s = Solver {
            clauses: Vec::with_capacity(problem.num_clauses()),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![LBool::Undef; n],
            levels: vec![0; n],
            reasons: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::new(n as u32),
            phase,
            seen: vec![false; n],
            rng,
            stats: SolverStats::default(),
            unsat: false,
        };
        s.order.build(&s.activity);
        for c in problem.clauses() {
            s.add_input_clause(c);
            if s.unsat {
                break;
            }
        }
        s
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[l.var() as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.is_positive() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
            LBool::False => {
                if l.is_positive() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
        }
    }

    fn level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn add_input_clause(&mut self, lits: &[Lit]) {
        match lits.len() {
            0 => self.unsat = true,
            1 => {
                match self.value(lits[0]) {
                    LBool::True => {}
                    LBool::False => self.unsat = true,
                    LBool::Undef => self.enqueue(lits[0], NO_REASON),
                }
            }
            _ => {
                self.attach(Clause {
                    lits: lits.to_vec(),
                    learnt: false,
                    deleted: false,
                    activity: 0.0,
                });
            }
        }
    }

    fn attach(&mut self, clause: Clause) -> u32 {
        let idx = self.clauses.len() as u32;
        let (w0, w1) = (clause.lits[0], clause.lits[1]);
        self.watches[(!w0).index()].push(Watch { clause: idx, blocker: w1 });
        self.watches[(!w1).index()].push(Watch { clause: idx, blocker: w0 });
        self.clauses.push(clause);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert!(self.value(l) == LBool::Undef);
        let v = l.var() as usize;
        self.assigns[v] = if l.is_positive() { LBool::True } else { LBool::False };
        self.levels[v] = self.level();
        self.reasons[v] = reason;
        self.trail.push(l);
    }

    /// Propagates all enqueued assignments; returns a conflicting
    /// clause index if one is found.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut kept = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == LBool::True {
                    ws[kept] = w;
                    kept += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci].deleted {
                    continue; // drop the watch of a reduced clause
                }
                let false_lit = !p;
                if self.clauses[ci].lits[0] == false_lit {
                    self.clauses[ci].lits.swap(0, 1);
                }
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[kept] = Watch { clause: w.clause, blocker: first };
                    kept += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[ci].lits.len() {
                    if self.value(self.clauses[ci].lits[k]) != LBool::False {
                        self.clauses[ci].lits.swap(1, k);
                        let new_watch = self.clauses[ci].lits[1];
                        self.watches[(!new_watch).index()]
                            .push(Watch { clause: w.clause, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                // Unit or conflicting.
                ws[kept] = Watch { clause: w.clause, blocker: first };
                kept += 1;
                if self.value(first) == LBool::False {
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                    conflict = Some(w.clause);
                } else {
                    self.stats.propagations += 1;
                    self.enqueue(first, w.clause);
                }
            }
            ws.truncate(kept);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.update(&self.activity, v);
    }

    fn bump_clause(&mut self, ci: u32) {
        let c = &mut self.clauses[ci as usize];
        if c.learnt {
            c.activity += self.cla_inc;
            if c.activity > 1e20 {
                for cl in self.clauses.iter_mut().filter(|cl| cl.learnt) {
                    cl.activity *= 1e-20;
                }
                self.cla_inc *= 1e-20;
            }
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause (with
    /// the asserting literal first) and the level to backtrack to.
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::positive(0)]; // slot for the UIP
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut reason = conflict;
        let mut index = self.trail.len();

        loop {
            self.bump_clause(reason);
            let lits = self.clauses[reason as usize].lits.clone();
            let skip = p.map(|l| l.var());
            for q in lits {
                let v = q.var();
                if Some(v) == skip || self.seen[v as usize] || self.levels[v as usize] == 0 {
                    continue;
                }
                self.seen[v as usize] = true;
                self.bump_var(v);
                if self.levels[v as usize] == self.level() {
                    counter += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var() as usize] {
                    break;
                }
            }
            let uip = self.trail[index];
            self.seen[uip.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !uip;
                break;
            }
            p = Some(uip);
            reason = self.reasons[uip.var() as usize];
            debug_assert!(reason != NO_REASON);
        }

        // The clauses below may shrink `learnt`; remember every marked
        // variable so no stale `seen` flag survives into the next
        // analysis.
        let to_clear: Vec<u32> = learnt.iter().map(|l| l.var()).collect();
        self.minimize(&mut learnt);

        let back_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[learnt[i].var() as usize] > self.levels[learnt[max_i].var() as usize]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.levels[learnt[1].var() as usize]
        };

        for v in to_clear {
            self.seen[v as usize] = false;
        }
        (learnt, back_level)
    }

    /// Local minimization: drops a literal whose reason clause is
    /// entirely covered by the remaining literals (or level 0).
    fn minimize(&mut self, learnt: &mut Vec<Lit>) {
        let mut keep = vec![true; learnt.len()];
        for i in 1..learnt.len() {
            let v = learnt[i].var() as usize;
            let reason = self.reasons[v];
            if reason == NO_REASON {
                continue;
            }
            let lits = &self.clauses[reason as usize].lits;
            let redundant = lits.iter().all(|&q| {
                q.var() as usize == v
                    || self.levels[q.var() as usize] == 0
                    || self.seen[q.var() as usize]
            });
            if redundant {
                keep[i] = false;
            }
        }
        let mut w = 0;
        learnt.retain(|_| {
            w += 1;
            keep[w - 1]
        });
    }

    fn backtrack(&mut self, level: u32) {
        while self.trail_lim.len() as u32 > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                let v = l.var() as usize;
                self.phase[v] = l.is_positive();
                self.assigns[v] = LBool::Undef;
                self.reasons[v] = NO_REASON;
                self.order.push(&self.activity, l.var());
            }
        }
        self.qhead = self.trail.len();
    }

    fn learn(&mut self, learnt: Vec<Lit>) {
        self.stats.learned += 1;
        let asserting = learnt[0];
        if learnt.len() == 1 {
            self.enqueue(asserting, NO_REASON);
        } else {
            let idx = self.attach(Clause {
                lits: learnt,
                learnt: true,
                deleted: false,
                activity: self.cla_inc,
            });
            self.enqueue(asserting, idx);
        }
    }

    fn decide(&mut self) -> bool {
        let pick = loop {
            let candidate = if !self.order.is_empty()
                && self.rng.next() % 1000 < RANDOM_DECISION_PERMIL
            {
                let i = self.rng.next() as usize % self.order.len();
                let v = self.order.peek_at(i);
                if self.assigns[v as usize] == LBool::Undef {
                    Some(v)
                } else {
                    None
                }
            } else {
                None
            };
            let v = match candidate {
                Some(v) => v,
                None => match self.order.pop(&self.activity) {
                    Some(v) => v,
                    None => return false,
                },
            };
            if self.assigns[v as usize] == LBool::Undef {
                break v;
            }
        };
        self.stats.decisions += 1;
        self.trail_lim.push(self.trail.len());
        self.enqueue(Lit::new(pick, self.phase[pick as usize]), NO_REASON);
        true
    }

    /// Removes the less active half of the learned clauses. Binary and
    /// locked clauses (currently a reason) survive.
    fn reduce_db(&mut self) {
        let mut learnt_idx: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&i| {
                let c = &self.clauses[i as usize];
                c.learnt && !c.deleted && c.lits.len() > 2
            })
            .collect();
        learnt_idx.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .partial_cmp(&self.clauses[b as usize].activity)
                .unwrap()
                .then(a.cmp(&b))
        });
        for &i in &learnt_idx[..learnt_idx.len() / 2] {
            let locked = {
                let lit0 = self.clauses[i as usize].lits[0];
                self.value(lit0) == LBool::True && self.reasons[lit0.var() as usize] == i
            };
            if !locked {
                self.clauses[i as usize].deleted = true;
                self.clauses[i as usize].lits.clear();
                self.clauses[i as usize].lits.shrink_to_fit();
                self.stats.removed += 1;
            }
        }
    }

    fn run(&mut self, problem: &SatProblem, budget: &Budget) -> SatOutcome {
        if self.unsat {
            return SatOutcome::Unsat;
        }
        let start = Instant::now();
        let mut restart_target = RESTART_BASE;
        let mut conflicts_since_restart = 0u64;
        let mut max_learnts = (problem.num_clauses() as u64 / 3).max(2000);

        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.level() == 0 {
                    return SatOutcome::Unsat;
                }
                let (learnt, back_level) = self.analyze(conflict);
                self.backtrack(back_level);
                self.learn(learnt);
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;

                if self.stats.conflicts >= budget.max_conflicts {
                    return SatOutcome::Unknown(Stop::Conflicts);
                }
                if self.stats.conflicts % 1024 == 0 && start.elapsed() >= budget.timeout {
                    return SatOutcome::Unknown(Stop::Time);
                }
                if conflicts_since_restart >= restart_target {
                    conflicts_since_restart = 0;
                    restart_target = restart_target * 3 / 2;
                    self.stats.restarts += 1;
                    self.backtrack(0);
                    if self.stats.learned - self.stats.removed > max_learnts {
                        self.reduce_db();
                        max_learnts = max_learnts * 6 / 5;
                    }
                }
            } else if !self.decide() {
                let values = self
                    .assigns
                    .iter()
                    .map(|a| match a {
                        LBool::True => true,
                        LBool::False => false,
                        LBool::Undef => unreachable!("complete assignment expected"),
                    })
                    .collect();
                let model = Model::new(values);
                assert!(
                    model.satisfies(problem),
                    "solver produced a model that violates an input clause; \
                     this is a bug in the solver"
                );
                return SatOutcome::Sat(model);
            }
        }
    }
}

/// Solves the problem within the budget. The seed perturbs branching
/// only; two runs with identical arguments return identical results.
pub fn solve(problem: &SatProblem, budget: &Budget, seed: u64) -> (SatOutcome, SolverStats) {
    if problem.num_vars() == 0 {
        let outcome = if problem.has_empty_clause() {
            SatOutcome::Unsat
        } else {
            SatOutcome::Sat(Model::new(Vec::new()))
        };
        return (outcome, SolverStats::default());
    }
    let mut solver = Solver::new(problem, seed);
    let outcome = solver.run(problem, budget);
    (outcome, solver.stats)
}
