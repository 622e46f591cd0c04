//! Phase two: the pipelined RTL against the untimed algorithm.
//!
//! The port mapping turns the timing-free interface of the algorithm
//! into a schedule over RTL cycles. Cycle 0 is a free prologue: every
//! RTL input is unconstrained there, so the check starts from an
//! arbitrary reachable-from-reset state rather than a convenient one.
//! An input mapped with delay `d` is driven with the transaction value
//! at cycle `1 + d`; an output mapped with delay `D` is sampled at
//! cycle `1 + D + s`, where `s` is the number of stall cycles inserted
//! into the schedule. At a stall cycle the stalling expression is
//! pinned true, at every other cycle from 1 to the horizon it is pinned
//! false, and undriven inputs stay free everywhere.
//!
//! [`check_equivalence`] unrolls the RTL to the horizon, lowers the
//! algorithm over the same transaction variables and asserts that some
//! sampled output differs from its algorithm counterpart or some helper
//! fails at a sampling cycle. Unsatisfiable means equivalent. A model
//! is replayed cycle by cycle through the RTL simulator before it is
//! reported, so every counterexample trace in a report actually
//! reproduces the disagreement.
//!
//! [`check_property_on_rtl`] reuses the same unrolling to prove a
//! requirement directly on the RTL, with the algorithm out of the
//! picture: guard and action are evaluated over the driven inputs and
//! the sampled outputs. This is the flow a property checker would run
//! on the finished design, and it is handy for cross-checking what
//! phase one proved about the algorithm.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use thiserror::Error;

use crate::bmc::{
    assumptions, check_interface, typed_requirement, BmcError, MAX_EXHAUSTIVE_BITS,
};
use crate::design::{simulate_alg, simulate_rtl, CheckedAlg, CheckedRtl};
use crate::expr::{
    eval_expr, for_each_assignment, parse_expr, typecheck_expr, Bindings, BitVec, EvalError,
    ParseError, TypeEnv, TypeError, TypedExpr,
};
use crate::model::{Instance, Requirement};
use crate::sat::{
    solve, solve_under, Bit, Budget, Lowering, Model, SatOutcome, SolverStats, Stop,
};

#[derive(Clone, Debug)]
pub struct HlecOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Stall cycles to insert, absolute cycle numbers. Requires a
    /// stalling element in the instance when non-empty.
    pub stalls: Vec<u32>,
}

impl Default for HlecOptions {
    fn default() -> Self {
        HlecOptions { budget: Budget::default(), seed: 1, stalls: Vec::new() }
    }
}

#[derive(Debug, Error)]
pub enum HlecError {
    #[error(transparent)]
    Spec(#[from] BmcError),
    #[error("mapping: {0}")]
    Mapping(String),
    #[error("{context}: {err}")]
    Parse { context: String, err: ParseError },
    #[error("{context}: {err}")]
    Type { context: String, err: TypeError },
    #[error("{context}: {err}")]
    Eval { context: String, err: EvalError },
}

/// One transaction input entering the RTL.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Drive {
    pub alg: String,
    pub rtl: String,
    pub cycle: u32,
}

/// One transaction output leaving the RTL.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub alg: String,
    pub rtl: String,
    pub cycle: u32,
}

/// The mapping resolved against a stall schedule: who is driven when,
/// who is sampled when, and how far the RTL must be unrolled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingPlan {
    pub horizon: u32,
    pub drives: Vec<Drive>,
    pub samples: Vec<Sample>,
    pub stalls: Vec<u32>,
}

/// Resolves the instance's port mapping against a stall schedule.
///
/// Stalls must be distinct, fall after the last input drive (a stalled
/// drive would never be captured) and before the first output sample
/// (the samples have already been shifted past them).
pub fn mapping_plan(instance: &Instance, stalls: &[u32]) -> Result<MappingPlan, HlecError> {
    if !stalls.is_empty() && instance.stalling.is_none() {
        return Err(HlecError::Mapping(
            "stall cycles requested but the instance has no stalling element".to_string(),
        ));
    }
    let shift = stalls.len() as u32;
    let mut drives = Vec::new();
    let mut samples = Vec::new();
    for m in &instance.mappings {
        if instance.inputs.iter().any(|p| p.name == m.alg) {
            drives.push(Drive { alg: m.alg.clone(), rtl: m.rtl.clone(), cycle: 1 + m.delay });
        } else if instance.outputs.iter().any(|p| p.name == m.alg) {
            samples.push(Sample {
                alg: m.alg.clone(),
                rtl: m.rtl.clone(),
                cycle: 1 + m.delay + shift,
            });
        } else {
            return Err(HlecError::Mapping(format!(
                "`{}` is not a declared port",
                m.alg
            )));
        }
    }
    for p in &instance.inputs {
        if !drives.iter().any(|d| d.alg == p.name) {
            return Err(HlecError::Mapping(format!("input `{}` has no mapping", p.name)));
        }
    }
    for p in &instance.outputs {
        if !samples.iter().any(|s| s.alg == p.name) {
            return Err(HlecError::Mapping(format!("output `{}` has no mapping", p.name)));
        }
    }
    let last_drive = drives.iter().map(|d| d.cycle).max().unwrap_or(0);
    let first_sample = samples.iter().map(|s| s.cycle).min().unwrap_or(u32::MAX);
    let mut seen = BTreeSet::new();
    for &c in stalls {
        if !seen.insert(c) {
            return Err(HlecError::Mapping(format!("stall cycle {c} listed twice")));
        }
        if c <= last_drive {
            return Err(HlecError::Mapping(format!(
                "stall at cycle {c} would freeze an input drive (last drive is at cycle {last_drive})"
            )));
        }
        if c >= first_sample {
            return Err(HlecError::Mapping(format!(
                "stall at cycle {c} lands at or after the first output sample (cycle {first_sample})"
            )));
        }
    }
    let horizon = samples.iter().map(|s| s.cycle).max().unwrap_or(1);
    Ok(MappingPlan { horizon, drives, samples, stalls: seen.into_iter().collect() })
}

/// A sampled output that disagrees with the algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub alg: String,
    pub rtl: String,
    pub cycle: u32,
    pub want: BitVec,
    pub got: BitVec,
}

/// A helper expression that is false at a sampling cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperFailure {
    pub name: String,
    pub cycle: u32,
}

/// A complete replayed counterexample: the transaction, every RTL input
/// at every cycle (driven or free), and the full simulated response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CexTrace {
    pub alg_inputs: Bindings,
    pub alg_outputs: Bindings,
    pub rtl_inputs: Vec<Bindings>,
    pub rtl_outputs: Vec<Bindings>,
    pub mismatches: Vec<Mismatch>,
    pub helper_failures: Vec<HelperFailure>,
}

impl fmt::Display for CexTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "transaction:")?;
        for (name, v) in &self.alg_inputs {
            write!(f, " {name} = {v:?}")?;
        }
        writeln!(f)?;
        for m in &self.mismatches {
            writeln!(
                f,
                "  cycle {}: {} is {:?}, algorithm says {} = {:?}",
                m.cycle, m.rtl, m.got, m.alg, m.want
            )?;
        }
        for h in &self.helper_failures {
            writeln!(f, "  cycle {}: helper `{}` is false", h.cycle, h.name)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EcVerdict {
    Equivalent,
    NotEquivalent(Box<CexTrace>),
    Unknown(Stop),
    /// The condition, constraints and stall pinning admit no
    /// transaction at all; the equivalence statement is empty.
    VacuousAssumptions,
}

#[derive(Clone, Debug)]
pub struct EcReport {
    pub verdict: EcVerdict,
    pub stats: SolverStats,
    pub vars: u32,
    pub clauses: usize,
    pub plan: MappingPlan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceStatus {
    Proved,
    Violated(Box<CexTrace>),
    Unknown(Stop),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub label: String,
    pub status: TraceStatus,
}

/// Result of proving one requirement directly on the RTL.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub name: String,
    pub vacuous: bool,
    pub checks: Vec<PropertyCheck>,
    pub stats: SolverStats,
    pub vars: u32,
    pub clauses: usize,
}

impl PropertyReport {
    pub fn proved(&self) -> bool {
        self.checks.iter().all(|c| c.status == TraceStatus::Proved)
    }
}

fn checked(src: &str, env: &TypeEnv, context: &str) -> Result<TypedExpr, HlecError> {
    let e = parse_expr(src)
        .map_err(|err| HlecError::Parse { context: context.to_string(), err })?;
    typecheck_expr(&e, env).map_err(|err| HlecError::Type { context: context.to_string(), err })
}

/// The RTL unrolled to the horizon inside one lowering: per-cycle input
/// bits (driven inputs share the transaction variables, everything else
/// is fresh), output bits at the sampling cycles, one holds-bit per
/// helper and sampling cycle, and the typed side expressions kept for
/// replay.
struct Unrolled {
    cycle_inputs: Vec<IndexMap<String, Vec<Bit>>>,
    cycle_outputs: Vec<IndexMap<String, Vec<Bit>>>,
    helper_holds: Vec<(String, u32, Bit)>,
    stalling: Option<TypedExpr>,
    helpers: Vec<(String, TypedExpr)>,
}

fn unroll(
    rtl: &CheckedRtl,
    instance: &Instance,
    plan: &MappingPlan,
    lw: &mut Lowering,
    transaction: &IndexMap<String, Vec<Bit>>,
) -> Result<Unrolled, HlecError> {
    // Mapping targets must exist on the RTL side at the declared types.
    for d in &plan.drives {
        let decl = instance.inputs.iter().find(|p| p.name == d.alg).expect("classified");
        match rtl.inputs.iter().find(|p| p.name == d.rtl) {
            None => {
                return Err(HlecError::Mapping(format!(
                    "rtl has no input `{}` (mapped from `{}`)",
                    d.rtl, d.alg
                )));
            }
            Some(p) if p.ty != decl.ty() => {
                return Err(HlecError::Mapping(format!(
                    "`{}` is {} but rtl input `{}` is {}",
                    d.alg,
                    decl.ty(),
                    d.rtl,
                    p.ty
                )));
            }
            Some(_) => {}
        }
    }
    for s in &plan.samples {
        let decl = instance.outputs.iter().find(|p| p.name == s.alg).expect("classified");
        match rtl.outputs.iter().find(|(p, _)| p.name == s.rtl) {
            None => {
                return Err(HlecError::Mapping(format!(
                    "rtl has no output `{}` (mapped from `{}`)",
                    s.rtl, s.alg
                )));
            }
            Some((p, _)) if p.ty != decl.ty() => {
                return Err(HlecError::Mapping(format!(
                    "`{}` is {} but rtl output `{}` is {}",
                    s.alg,
                    decl.ty(),
                    s.rtl,
                    p.ty
                )));
            }
            Some(_) => {}
        }
    }

    let input_env: TypeEnv = rtl.inputs.iter().map(|p| (p.name.clone(), p.ty)).collect();
    let stalling = instance
        .stalling
        .as_ref()
        .map(|s| checked(&s.expr, &input_env, &format!("stalling `{}`", s.name)))
        .transpose()?;
    let full_env = rtl.full_env();
    let helpers = instance
        .helpers
        .iter()
        .map(|h| {
            checked(&h.expr, &full_env, &format!("helper `{}`", h.name))
                .map(|t| (h.name.clone(), t))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let sample_cycles: BTreeSet<u32> = plan.samples.iter().map(|s| s.cycle).collect();
    let mut state: IndexMap<String, Vec<Bit>> = rtl
        .regs
        .iter()
        .map(|r| (r.name.clone(), Lowering::const_bits(r.reset)))
        .collect();
    let mut cycle_inputs = Vec::with_capacity(plan.horizon as usize + 1);
    let mut cycle_outputs = vec![IndexMap::new(); plan.horizon as usize + 1];
    let mut helper_holds = Vec::new();

    for t in 0..=plan.horizon {
        let mut ins = IndexMap::new();
        for p in &rtl.inputs {
            let bits = match plan.drives.iter().find(|d| d.rtl == p.name && d.cycle == t) {
                Some(d) => transaction[&d.alg].clone(),
                None => lw.declare_var(&format!("{}@{t}", p.name), p.ty.width),
            };
            lw.rebind_var(&p.name, bits.clone());
            ins.insert(p.name.clone(), bits);
        }
        for (name, bits) in &state {
            lw.rebind_var(name, bits.clone());
        }
        if let Some(st) = &stalling {
            if t >= 1 {
                let bits = lw.lower(st);
                let stalled = lw.or_reduce(&bits);
                let want = plan.stalls.contains(&t);
                lw.assert_bit(if want { stalled } else { !stalled });
            }
        }
        if sample_cycles.contains(&t) {
            let mut outs = IndexMap::new();
            for (p, e) in &rtl.outputs {
                let bits = lw.lower(e);
                lw.rebind_var(&p.name, bits.clone());
                outs.insert(p.name.clone(), bits);
            }
            for (name, h) in &helpers {
                let bits = lw.lower(h);
                let holds = lw.or_reduce(&bits);
                helper_holds.push((name.clone(), t, holds));
            }
            cycle_outputs[t as usize] = outs;
        }
        cycle_inputs.push(ins);
        if t < plan.horizon {
            state = rtl
                .regs
                .iter()
                .map(|r| (r.name.clone(), lw.lower(&r.next)))
                .collect();
        }
    }
    Ok(Unrolled { cycle_inputs, cycle_outputs, helper_holds, stalling, helpers })
}

/// Extracts every variable of the unrolling from a model and replays
/// it: the algorithm on the transaction, the RTL cycle by cycle. The
/// returned trace is built entirely from the replay; the model only
/// supplies the input values. Panics if the replay fails to reproduce
/// a disagreement, because that would mean the solver and the
/// simulator disagree about the semantics.
#[allow(clippy::too_many_arguments)]
fn replay_equivalence(
    alg: &CheckedAlg,
    rtl: &CheckedRtl,
    plan: &MappingPlan,
    un: &Unrolled,
    transaction: &IndexMap<String, Vec<Bit>>,
    assume: &[(String, TypedExpr)],
    model: &Model,
) -> Result<CexTrace, HlecError> {
    let ctx = |err| HlecError::Eval { context: "counterexample replay".to_string(), err };
    let alg_inputs: Bindings = transaction
        .iter()
        .map(|(name, bits)| (name.clone(), Lowering::value_of(bits, model)))
        .collect();
    let rtl_inputs: Vec<Bindings> = un
        .cycle_inputs
        .iter()
        .map(|ins| {
            ins.iter()
                .map(|(name, bits)| (name.clone(), Lowering::value_of(bits, model)))
                .collect()
        })
        .collect();
    let alg_env = simulate_alg(alg, &alg_inputs).map_err(ctx)?;
    let trace = simulate_rtl(rtl, &rtl_inputs).map_err(ctx)?;

    for (name, e) in assume {
        let v = eval_expr(e, &alg_inputs).map_err(ctx)?;
        assert!(!v.is_zero(), "counterexample violates assumption `{name}` on replay");
    }
    if let Some(st) = &un.stalling {
        for t in 1..=plan.horizon {
            let v = eval_expr(st, &rtl_inputs[t as usize]).map_err(ctx)?;
            assert_eq!(
                !v.is_zero(),
                plan.stalls.contains(&t),
                "stall pinning does not replay at cycle {t}"
            );
        }
    }

    let mut mismatches = Vec::new();
    for s in &plan.samples {
        let want = alg_env[&s.alg];
        let got = trace.outputs[s.cycle as usize][&s.rtl];
        if want != got {
            mismatches.push(Mismatch {
                alg: s.alg.clone(),
                rtl: s.rtl.clone(),
                cycle: s.cycle,
                want,
                got,
            });
        }
    }
    let mut helper_failures = Vec::new();
    for (name, cycle, _) in &un.helper_holds {
        let t = *cycle as usize;
        let mut env = rtl_inputs[t].clone();
        env.extend(trace.regs[t].clone());
        env.extend(trace.outputs[t].clone());
        let typed = &un.helpers.iter().find(|(n, _)| n == name).expect("kept").1;
        if eval_expr(typed, &env).map_err(ctx)?.is_zero() {
            helper_failures.push(HelperFailure { name: name.clone(), cycle: *cycle });
        }
    }
    assert!(
        !mismatches.is_empty() || !helper_failures.is_empty(),
        "equivalence counterexample does not replay"
    );
    let alg_outputs =
        alg.outputs.iter().map(|(p, _)| (p.name.clone(), alg_env[&p.name])).collect();
    Ok(CexTrace {
        alg_inputs,
        alg_outputs,
        rtl_inputs,
        rtl_outputs: trace.outputs,
        mismatches,
        helper_failures,
    })
}

/// Checks that the RTL implements the algorithm under the mapping.
pub fn check_equivalence(
    alg: &CheckedAlg,
    rtl: &CheckedRtl,
    instance: &Instance,
    opts: &HlecOptions,
) -> Result<EcReport, HlecError> {
    check_interface(alg, instance)?;
    let plan = mapping_plan(instance, &opts.stalls)?;
    let assume = assumptions(instance)?;

    let mut lw = Lowering::new();
    let mut transaction = IndexMap::new();
    for p in &alg.inputs {
        transaction.insert(p.name.clone(), lw.declare_var(&p.name, p.ty.width));
    }
    for (_, e) in &assume {
        let bits = lw.lower(e);
        let holds = lw.or_reduce(&bits);
        lw.assert_bit(holds);
    }
    let un = unroll(rtl, instance, &plan, &mut lw, &transaction)?;

    // The unrolling rebinds RTL names cycle by cycle, so restore the
    // transaction bindings before lowering the algorithm cone.
    for (name, bits) in &transaction {
        lw.rebind_var(name, bits.clone());
    }
    for (name, e) in &alg.locals {
        let bits = lw.lower(e);
        lw.rebind_var(name, bits);
    }
    let mut alg_out = IndexMap::new();
    for (p, e) in &alg.outputs {
        let bits = lw.lower(e);
        lw.rebind_var(&p.name, bits.clone());
        alg_out.insert(p.name.clone(), bits);
    }

    let mut disagree = Vec::new();
    for s in &plan.samples {
        let want = alg_out[&s.alg].clone();
        let got = un.cycle_outputs[s.cycle as usize][&s.rtl].clone();
        let eq = lw.eq(&want, &got);
        disagree.push(!eq);
    }
    for (_, _, holds) in &un.helper_holds {
        disagree.push(!*holds);
    }
    let violated = lw.or_reduce(&disagree);

    let mut stats = SolverStats::default();
    let (reach, s) = solve(lw.problem(), &opts.budget, opts.seed);
    stats.absorb(s);
    if matches!(reach, SatOutcome::Unsat) {
        let problem = lw.problem();
        return Ok(EcReport {
            verdict: EcVerdict::VacuousAssumptions,
            stats,
            vars: problem.num_vars(),
            clauses: problem.num_clauses(),
            plan,
        });
    }

    lw.assert_bit(violated);
    let problem = lw.problem();
    let (out, s) = solve(problem, &opts.budget, opts.seed);
    stats.absorb(s);
    let verdict = match out {
        SatOutcome::Unsat => EcVerdict::Equivalent,
        SatOutcome::Unknown(stop) => EcVerdict::Unknown(stop),
        SatOutcome::Sat(model) => {
            let trace =
                replay_equivalence(alg, rtl, &plan, &un, &transaction, &assume, &model)?;
            EcVerdict::NotEquivalent(Box::new(trace))
        }
    };
    Ok(EcReport {
        verdict,
        stats,
        vars: problem.num_vars(),
        clauses: problem.num_clauses(),
        plan,
    })
}

/// Verdict of the enumeration oracle, mirroring [`EcVerdict`] without
/// the solver-specific outcomes.
#[derive(Clone, Debug, PartialEq)]
pub enum ExhaustiveVerdict {
    Equivalent,
    NotEquivalent(Box<CexTrace>),
    Vacuous,
}

fn typed_vars(e: &TypedExpr, out: &mut BTreeSet<String>) {
    use crate::expr::TypedExprKind as K;
    match &e.kind {
        K::Literal(_) => {}
        K::Var(name) => {
            out.insert(name.clone());
        }
        K::Unary(_, a) | K::Slice(a, _, _) | K::Extend(_, a) | K::Cast(a) => typed_vars(a, out),
        K::Binary(_, a, b) => {
            typed_vars(a, out);
            typed_vars(b, out);
        }
        K::Ite(c, t, o) => {
            typed_vars(c, out);
            typed_vars(t, out);
            typed_vars(o, out);
        }
        K::Concat(parts) => {
            for p in parts {
                typed_vars(p, out);
            }
        }
    }
}

/// Re-derives an equivalence verdict by enumerating every transaction
/// and simulating both sides. Undriven RTL inputs are held at zero,
/// except the free ports the stalling expression reads at a pinned
/// cycle: those are searched for a value realizing the pin, and a
/// transaction whose pins cannot be realized is excluded, mirroring
/// the solver-side assumptions. The oracle covers designs whose
/// sampled outputs depend only on the driven transaction; it exists to
/// cross-check the solver path, not to replace it.
pub fn exhaustive_equivalence(
    alg: &CheckedAlg,
    rtl: &CheckedRtl,
    instance: &Instance,
    stalls: &[u32],
) -> Result<ExhaustiveVerdict, HlecError> {
    check_interface(alg, instance)?;
    let plan = mapping_plan(instance, stalls)?;
    let assume = assumptions(instance)?;
    let bits: u32 = alg.inputs.iter().map(|p| p.ty.width).sum();
    if bits > MAX_EXHAUSTIVE_BITS {
        return Err(BmcError::TooWide { bits }.into());
    }

    let input_env: TypeEnv = rtl.inputs.iter().map(|p| (p.name.clone(), p.ty)).collect();
    let stalling = instance
        .stalling
        .as_ref()
        .map(|s| checked(&s.expr, &input_env, &format!("stalling `{}`", s.name)))
        .transpose()?;
    let full_env = rtl.full_env();
    let helpers = instance
        .helpers
        .iter()
        .map(|h| {
            checked(&h.expr, &full_env, &format!("helper `{}`", h.name))
                .map(|t| (h.name.clone(), t))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let support: Vec<String> = match &stalling {
        Some(st) => {
            let mut s = BTreeSet::new();
            typed_vars(st, &mut s);
            s.into_iter().collect()
        }
        None => Vec::new(),
    };

    let vars: Vec<(String, u32)> =
        alg.inputs.iter().map(|p| (p.name.clone(), p.ty.width)).collect();
    let mut admitted = false;
    let mut found: Option<CexTrace> = None;
    let mut failure: Option<HlecError> = None;

    for_each_assignment(&vars, |alg_inputs| {
        let ctx = |err| HlecError::Eval { context: "exhaustive check".to_string(), err };
        let step = (|| -> Result<Option<CexTrace>, HlecError> {
            for (_, e) in &assume {
                if eval_expr(e, alg_inputs).map_err(ctx)?.is_zero() {
                    return Ok(None);
                }
            }
            let mut rtl_inputs: Vec<Bindings> = (0..=plan.horizon)
                .map(|t| {
                    rtl.inputs
                        .iter()
                        .map(|p| {
                            let v = plan
                                .drives
                                .iter()
                                .find(|d| d.rtl == p.name && d.cycle == t)
                                .map(|d| alg_inputs[&d.alg])
                                .unwrap_or_else(|| BitVec::zero(p.ty.width));
                            (p.name.clone(), v)
                        })
                        .collect()
                })
                .collect();
            if let Some(st) = &stalling {
                for t in 1..=plan.horizon {
                    let want = plan.stalls.contains(&t);
                    let free: Vec<(String, u32)> = support
                        .iter()
                        .filter(|name| {
                            !plan.drives.iter().any(|d| d.rtl == **name && d.cycle == t)
                        })
                        .map(|name| {
                            let p = rtl
                                .inputs
                                .iter()
                                .find(|p| p.name == *name)
                                .expect("stalling is typed over rtl inputs");
                            (p.name.clone(), p.ty.width)
                        })
                        .collect();
                    let mut chosen: Option<Bindings> = None;
                    let mut pin_err: Option<EvalError> = None;
                    for_each_assignment(&free, |cand| {
                        let mut env = rtl_inputs[t as usize].clone();
                        env.extend(cand.clone());
                        match eval_expr(st, &env) {
                            Ok(v) if !v.is_zero() == want => {
                                chosen = Some(env);
                                false
                            }
                            Ok(_) => true,
                            Err(e) => {
                                pin_err = Some(e);
                                false
                            }
                        }
                    });
                    if let Some(e) = pin_err {
                        return Err(ctx(e));
                    }
                    match chosen {
                        Some(env) => rtl_inputs[t as usize] = env,
                        None => return Ok(None),
                    }
                }
            }
            admitted = true;

            let alg_env = simulate_alg(alg, alg_inputs).map_err(ctx)?;
            let trace = simulate_rtl(rtl, &rtl_inputs).map_err(ctx)?;
            let mut mismatches = Vec::new();
            for s in &plan.samples {
                let want = alg_env[&s.alg];
                let got = trace.outputs[s.cycle as usize][&s.rtl];
                if want != got {
                    mismatches.push(Mismatch {
                        alg: s.alg.clone(),
                        rtl: s.rtl.clone(),
                        cycle: s.cycle,
                        want,
                        got,
                    });
                }
            }
            let sample_cycles: BTreeSet<u32> = plan.samples.iter().map(|s| s.cycle).collect();
            let mut helper_failures = Vec::new();
            for &t in &sample_cycles {
                for (name, h) in &helpers {
                    let mut env = rtl_inputs[t as usize].clone();
                    env.extend(trace.regs[t as usize].clone());
                    env.extend(trace.outputs[t as usize].clone());
                    if eval_expr(h, &env).map_err(ctx)?.is_zero() {
                        helper_failures.push(HelperFailure { name: name.clone(), cycle: t });
                    }
                }
            }
            if mismatches.is_empty() && helper_failures.is_empty() {
                return Ok(None);
            }
            let alg_outputs =
                alg.outputs.iter().map(|(p, _)| (p.name.clone(), alg_env[&p.name])).collect();
            Ok(Some(CexTrace {
                alg_inputs: alg_inputs.clone(),
                alg_outputs,
                rtl_inputs,
                rtl_outputs: trace.outputs,
                mismatches,
                helper_failures,
            }))
        })();
        match step {
            Ok(None) => true,
            Ok(Some(trace)) => {
                found = Some(trace);
                false
            }
            Err(err) => {
                failure = Some(err);
                false
            }
        }
    });

    if let Some(err) = failure {
        return Err(err);
    }
    Ok(match found {
        Some(trace) => ExhaustiveVerdict::NotEquivalent(Box::new(trace)),
        None if !admitted => ExhaustiveVerdict::Vacuous,
        None => ExhaustiveVerdict::Equivalent,
    })
}

/// Replays a property counterexample: the boundary view binds each
/// algorithm input name to the value driven into the RTL and each
/// output name to the value sampled from it.
#[allow(clippy::too_many_arguments)]
fn replay_property(
    rtl: &CheckedRtl,
    plan: &MappingPlan,
    un: &Unrolled,
    transaction: &IndexMap<String, Vec<Bit>>,
    assume: &[(String, TypedExpr)],
    guard: &TypedExpr,
    conj: &TypedExpr,
    model: &Model,
) -> Result<CexTrace, HlecError> {
    let ctx = |err| HlecError::Eval { context: "counterexample replay".to_string(), err };
    let alg_inputs: Bindings = transaction
        .iter()
        .map(|(name, bits)| (name.clone(), Lowering::value_of(bits, model)))
        .collect();
    let rtl_inputs: Vec<Bindings> = un
        .cycle_inputs
        .iter()
        .map(|ins| {
            ins.iter()
                .map(|(name, bits)| (name.clone(), Lowering::value_of(bits, model)))
                .collect()
        })
        .collect();
    let trace = simulate_rtl(rtl, &rtl_inputs).map_err(ctx)?;

    let mut boundary = alg_inputs.clone();
    let mut alg_outputs = Bindings::new();
    for s in &plan.samples {
        let v = trace.outputs[s.cycle as usize][&s.rtl];
        boundary.insert(s.alg.clone(), v);
        alg_outputs.insert(s.alg.clone(), v);
    }
    for (name, e) in assume {
        let v = eval_expr(e, &alg_inputs).map_err(ctx)?;
        assert!(!v.is_zero(), "counterexample violates assumption `{name}` on replay");
    }
    let g = eval_expr(guard, &boundary).map_err(ctx)?;
    let a = eval_expr(conj, &boundary).map_err(ctx)?;
    assert!(!g.is_zero(), "counterexample does not fire the guard on replay");
    assert!(a.is_zero(), "counterexample does not fail the action on replay");
    Ok(CexTrace {
        alg_inputs,
        alg_outputs,
        rtl_inputs,
        rtl_outputs: trace.outputs,
        mismatches: Vec::new(),
        helper_failures: Vec::new(),
    })
}

/// Proves one requirement directly on the RTL through the mapping.
pub fn check_property_on_rtl(
    rtl: &CheckedRtl,
    instance: &Instance,
    req: &Requirement,
    opts: &HlecOptions,
) -> Result<PropertyReport, HlecError> {
    let plan = mapping_plan(instance, &opts.stalls)?;
    let assume = assumptions(instance)?;
    let (guard, conjs) = typed_requirement(instance, req)?;

    let mut lw = Lowering::new();
    let mut transaction = IndexMap::new();
    for p in &instance.inputs {
        transaction.insert(p.name.clone(), lw.declare_var(&p.name, p.width));
    }
    for (_, e) in &assume {
        let bits = lw.lower(e);
        let holds = lw.or_reduce(&bits);
        lw.assert_bit(holds);
    }
    let un = unroll(rtl, instance, &plan, &mut lw, &transaction)?;

    for (name, bits) in &transaction {
        lw.rebind_var(name, bits.clone());
    }
    for s in &plan.samples {
        let bits = un.cycle_outputs[s.cycle as usize][&s.rtl].clone();
        lw.rebind_var(&s.alg, bits);
    }
    let gbits = lw.lower(&guard);
    let fired = lw.or_reduce(&gbits);
    let violations: Vec<Bit> = conjs
        .iter()
        .map(|c| {
            let bits = lw.lower(c);
            !lw.or_reduce(&bits)
        })
        .collect();

    let base = lw.problem();
    let mut stats = SolverStats::default();
    let (vac, s) = solve_under(base, &[fired], &opts.budget, opts.seed);
    stats.absorb(s);
    let vacuous = matches!(vac, SatOutcome::Unsat);

    let n = conjs.len();
    let mut checks = Vec::new();
    for (i, (conj, viol)) in conjs.iter().zip(&violations).enumerate() {
        let status = if vacuous {
            TraceStatus::Proved
        } else {
            let (out, s) = solve_under(base, &[fired, *viol], &opts.budget, opts.seed);
            stats.absorb(s);
            match out {
                SatOutcome::Unsat => TraceStatus::Proved,
                SatOutcome::Unknown(stop) => TraceStatus::Unknown(stop),
                SatOutcome::Sat(model) => {
                    let trace = replay_property(
                        rtl,
                        &plan,
                        &un,
                        &transaction,
                        &assume,
                        &guard,
                        conj,
                        &model,
                    )?;
                    TraceStatus::Violated(Box::new(trace))
                }
            }
        };
        checks.push(PropertyCheck { label: req.label(i, n), status });
    }
    Ok(PropertyReport {
        name: req.name.clone(),
        vacuous,
        checks,
        stats,
        vars: base.num_vars(),
        clauses: base.num_clauses(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{mk_design, mk_mutant, Selector};
    use crate::model::NamedExpr;

    fn ec(selector: &str, mutant: Option<&str>, stalls: &[u32]) -> EcReport {
        let sel = Selector::parse(selector).unwrap();
        let bundle = match mutant {
            None => mk_design(&sel).unwrap(),
            Some(m) => mk_mutant(&sel, m).unwrap(),
        };
        let opts = HlecOptions { stalls: stalls.to_vec(), ..HlecOptions::default() };
        check_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &opts).unwrap()
    }

    #[test]
    fn divider_pipeline_is_equivalent() {
        let report = ec("divider:w=3", None, &[]);
        assert_eq!(report.verdict, EcVerdict::Equivalent, "{report:?}");
        assert_eq!(report.plan.horizon, 5);
    }

    #[test]
    fn broken_stage_yields_a_replayed_trace() {
        let report = ec("divider:w=4", Some("rtl_stage_subtract_disabled"), &[]);
        let EcVerdict::NotEquivalent(trace) = &report.verdict else {
            panic!("expected a counterexample: {report:?}");
        };
        assert!(!trace.mismatches.is_empty());
        let m = &trace.mismatches[0];
        assert_eq!(m.cycle, report.plan.horizon);
        assert_eq!(m.alg, "quotient_o");
        assert_ne!(m.want, m.got);
    }

    #[test]
    fn multi_tap_stream_mapping_is_equivalent() {
        let report = ec("fir:n=2,w=4", None, &[]);
        assert_eq!(report.verdict, EcVerdict::Equivalent, "{report:?}");
        // taps drive the same rtl input at three different cycles
        let drive_cycles: Vec<u32> = report.plan.drives.iter().map(|d| d.cycle).collect();
        assert_eq!(drive_cycles, vec![3, 2, 1]);
    }

    #[test]
    fn stalled_schedule_still_proves_the_correct_design() {
        assert_eq!(ec("enable_pipe", None, &[]).verdict, EcVerdict::Equivalent);
        let stalled = ec("enable_pipe", None, &[2]);
        assert_eq!(stalled.verdict, EcVerdict::Equivalent, "{stalled:?}");
        assert_eq!(stalled.plan.horizon, 4);
    }

    #[test]
    fn hold_bug_is_invisible_without_a_stall_and_caught_with_one() {
        let smooth = ec("enable_pipe", Some("rtl_hold_broken"), &[]);
        assert_eq!(smooth.verdict, EcVerdict::Equivalent, "{smooth:?}");

        let stalled = ec("enable_pipe", Some("rtl_hold_broken"), &[2]);
        let EcVerdict::NotEquivalent(trace) = &stalled.verdict else {
            panic!("stall should expose the broken hold: {stalled:?}");
        };
        let m = &trace.mismatches[0];
        assert_eq!(m.got.value(), 1, "cleared register feeds the increment");
        assert_eq!(m.want.value(), trace.alg_inputs["x_i"].value() + 1);
    }

    #[test]
    fn lane_crossing_mutant_fails_in_half_mode() {
        let report = ec("simd_mul:w=8", Some("rtl_lane_cross"), &[]);
        let EcVerdict::NotEquivalent(trace) = &report.verdict else {
            panic!("expected a counterexample: {report:?}");
        };
        assert_eq!(trace.alg_inputs["mode_i"].value(), 1, "only half mode swaps lanes");
    }

    #[test]
    fn helper_violations_are_reported_even_when_outputs_agree() {
        let bundle = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        let mut instance = bundle.instance.clone();
        instance.helpers[0].expr = "s2_y == 1".to_string();
        let report =
            check_equivalence(&bundle.alg, &bundle.rtl, &instance, &HlecOptions::default())
                .unwrap();
        let EcVerdict::NotEquivalent(trace) = &report.verdict else {
            panic!("helper cannot hold: {report:?}");
        };
        assert!(trace.mismatches.is_empty());
        assert_eq!(trace.helper_failures, vec![HelperFailure {
            name: "result_bounded".to_string(),
            cycle: 3,
        }]);
    }

    #[test]
    fn contradictory_assumptions_are_flagged() {
        let bundle = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        let mut instance = bundle.instance.clone();
        instance.constraints.push(crate::model::NamedExpr {
            name: "impossible".to_string(),
            expr: "x_i > 250".to_string(),
        });
        let report =
            check_equivalence(&bundle.alg, &bundle.rtl, &instance, &HlecOptions::default())
                .unwrap();
        assert_eq!(report.verdict, EcVerdict::VacuousAssumptions);
    }

    #[test]
    fn stall_schedule_is_validated() {
        let bundle = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        for (stalls, needle) in [
            (vec![1u32], "freeze an input drive"),
            (vec![2, 2], "listed twice"),
            (vec![4], "at or after the first output sample"),
        ] {
            let err = mapping_plan(&bundle.instance, &stalls).unwrap_err();
            assert!(err.to_string().contains(needle), "{stalls:?}: {err}");
        }
        let bundle = mk_design(&Selector::parse("divider:w=3").unwrap()).unwrap();
        let err = mapping_plan(&bundle.instance, &[2]).unwrap_err();
        assert!(err.to_string().contains("no stalling element"), "{err}");
    }

    #[test]
    fn properties_prove_directly_on_the_rtl() {
        let bundle = mk_design(&Selector::parse("divider:w=4").unwrap()).unwrap();
        for req in &bundle.instance.requirements {
            let report =
                check_property_on_rtl(&bundle.rtl, &bundle.instance, req, &HlecOptions::default())
                    .unwrap();
            assert!(report.proved() && !report.vacuous, "{}: {report:?}", req.name);
        }
    }

    #[test]
    fn rtl_flag_bug_shows_up_as_a_property_violation() {
        let bundle =
            mk_mutant(&Selector::parse("divider:w=4").unwrap(), "rtl_flag_inverted").unwrap();
        let req = &bundle.instance.requirements[0];
        let report =
            check_property_on_rtl(&bundle.rtl, &bundle.instance, req, &HlecOptions::default())
                .unwrap();
        let TraceStatus::Violated(trace) = &report.checks[0].status else {
            panic!("expected the flag conjunct to fail: {report:?}");
        };
        assert!(trace.alg_inputs["b_i"].is_zero());
        assert!(trace.mismatches.is_empty());
    }

    #[test]
    fn enumeration_agrees_with_the_solver_on_the_divider() {
        let bundle = mk_design(&Selector::parse("divider:w=2").unwrap()).unwrap();
        let solver = check_equivalence(
            &bundle.alg,
            &bundle.rtl,
            &bundle.instance,
            &HlecOptions::default(),
        )
        .unwrap();
        assert_eq!(solver.verdict, EcVerdict::Equivalent);
        let brute =
            exhaustive_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &[]).unwrap();
        assert_eq!(brute, ExhaustiveVerdict::Equivalent);
    }

    #[test]
    fn enumeration_finds_the_same_kind_of_bug_as_the_solver() {
        let bundle =
            mk_mutant(&Selector::parse("divider:w=2").unwrap(), "rtl_stage_subtract_disabled")
                .unwrap();
        let brute =
            exhaustive_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &[]).unwrap();
        let ExhaustiveVerdict::NotEquivalent(trace) = brute else {
            panic!("expected a disagreement: {brute:?}");
        };
        assert!(!trace.mismatches.is_empty());
        let solver = ec("divider:w=2", Some("rtl_stage_subtract_disabled"), &[]);
        assert!(matches!(solver.verdict, EcVerdict::NotEquivalent(_)));
    }

    #[test]
    fn enumeration_realizes_stall_pins_on_the_enable_input() {
        let bundle = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        let brute =
            exhaustive_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &[2]).unwrap();
        assert_eq!(brute, ExhaustiveVerdict::Equivalent);
        let broken = mk_mutant(&Selector::parse("enable_pipe").unwrap(), "rtl_hold_broken")
            .unwrap();
        let caught =
            exhaustive_equivalence(&broken.alg, &broken.rtl, &broken.instance, &[2]).unwrap();
        assert!(matches!(caught, ExhaustiveVerdict::NotEquivalent(_)), "{caught:?}");
    }

    #[test]
    fn enumeration_reports_empty_assumptions_as_vacuous() {
        let mut bundle = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        bundle.instance.constraints.push(NamedExpr {
            name: "impossible".to_string(),
            expr: "x_i > 250".to_string(),
        });
        let brute =
            exhaustive_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &[]).unwrap();
        assert_eq!(brute, ExhaustiveVerdict::Vacuous);
    }

    #[test]
    fn enumeration_refuses_wide_interfaces() {
        let bundle = mk_design(&Selector::parse("divider:w=16").unwrap()).unwrap();
        let err = exhaustive_equivalence(&bundle.alg, &bundle.rtl, &bundle.instance, &[])
            .unwrap_err();
        assert!(err.to_string().contains("exhaustive"), "{err}");
    }
}
