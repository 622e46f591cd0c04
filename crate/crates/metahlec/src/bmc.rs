//! Phase one: checking requirements against the untimed algorithm.
//!
//! Every requirement is a guard/action pair over the interface ports.
//! The algorithm's output cone is lowered to CNF once per requirement,
//! the condition and constraints are asserted as assumptions over the
//! transaction inputs, and each action conjunct becomes its own proof
//! obligation: guard holds and the conjunct does not. An unsatisfiable
//! obligation is a proof; a satisfying assignment is a counterexample,
//! which is replayed through the algorithm simulator before it is
//! reported, so a result is never built on an unverified model.
//!
//! Two extra safeguards round the phase off. A vacuity check first asks
//! whether the guard is reachable at all under the assumptions, because
//! a requirement whose guard never fires proves nothing. And for small
//! interfaces [`exhaustive_requirement`] re-derives every verdict by
//! brute-force enumeration, which the tests use to cross-check the
//! solver path bit for bit.

use std::fmt;

use thiserror::Error;

use crate::design::{simulate_alg, CheckedAlg};
use crate::expr::{
    conjuncts, eval_expr, for_each_assignment, parse_expr, typecheck_expr, Bindings, EvalError,
    ParseError, TypeEnv, TypeError, TypedExpr,
};
use crate::model::{input_env, interface_env, Instance, Requirement};
use crate::sat::{solve_under, Bit, Budget, Lowering, SatOutcome, SolverStats, Stop};

/// Widest total input interface the exhaustive oracle will enumerate.
pub const MAX_EXHAUSTIVE_BITS: u32 = 20;

#[derive(Clone, Debug)]
pub struct BmcOptions {
    pub budget: Budget,
    pub seed: u64,
}

impl Default for BmcOptions {
    fn default() -> Self {
        BmcOptions { budget: Budget::default(), seed: 1 }
    }
}

/// A concrete transaction on which a requirement conjunct fails: the
/// input values and the outputs the algorithm computes from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgCex {
    pub inputs: Bindings,
    pub outputs: Bindings,
}

impl fmt::Display for AlgCex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, b: &Bindings| -> fmt::Result {
            for (i, (name, v)) in b.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{name} = {v:?}")?;
            }
            Ok(())
        };
        list(f, &self.inputs)?;
        write!(f, " => ")?;
        list(f, &self.outputs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Proved,
    Violated(Box<AlgCex>),
    Unknown(Stop),
}

/// Result for one labelled action conjunct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub label: String,
    pub status: CheckStatus,
}

/// Result for one requirement: the vacuity verdict and one check per
/// action conjunct. When the guard is unreachable the conjuncts are
/// reported proved, and `vacuous` flags how hollow that proof is.
#[derive(Clone, Debug, PartialEq)]
pub struct RequirementReport {
    pub name: String,
    pub vacuous: bool,
    pub checks: Vec<CheckReport>,
    pub stats: SolverStats,
}

impl RequirementReport {
    pub fn proved(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Proved)
    }

    pub fn violated(&self) -> bool {
        self.checks.iter().any(|c| matches!(c.status, CheckStatus::Violated(_)))
    }
}

#[derive(Debug, Error)]
pub enum BmcError {
    #[error("algorithm and instance interfaces disagree: {0}")]
    Interface(String),
    #[error("{context}: {err}")]
    Parse { context: String, err: ParseError },
    #[error("{context}: {err}")]
    Type { context: String, err: TypeError },
    #[error("{context}: {err}")]
    Eval { context: String, err: EvalError },
    #[error("interface has {bits} input bits, exhaustive checking stops at {MAX_EXHAUSTIVE_BITS}")]
    TooWide { bits: u32 },
}

/// Checks that the algorithm exposes exactly the ports the instance
/// declares, at the declared types.
pub(crate) fn check_interface(alg: &CheckedAlg, instance: &Instance) -> Result<(), BmcError> {
    let mismatch = |what: &str| Err(BmcError::Interface(what.to_string()));
    if alg.inputs.len() != instance.inputs.len() {
        return mismatch("input port counts differ");
    }
    if alg.outputs.len() != instance.outputs.len() {
        return mismatch("output port counts differ");
    }
    for decl in &instance.inputs {
        match alg.inputs.iter().find(|p| p.name == decl.name) {
            None => return mismatch(&format!("algorithm has no input `{}`", decl.name)),
            Some(p) if p.ty != decl.ty() => {
                return mismatch(&format!(
                    "input `{}` is {} in the algorithm, {} in the instance",
                    decl.name,
                    p.ty,
                    decl.ty()
                ));
            }
            Some(_) => {}
        }
    }
    for decl in &instance.outputs {
        match alg.outputs.iter().find(|(p, _)| p.name == decl.name) {
            None => return mismatch(&format!("algorithm has no output `{}`", decl.name)),
            Some((p, _)) if p.ty != decl.ty() => {
                return mismatch(&format!(
                    "output `{}` is {} in the algorithm, {} in the instance",
                    decl.name,
                    p.ty,
                    decl.ty()
                ));
            }
            Some(_) => {}
        }
    }
    Ok(())
}

fn checked(src: &str, env: &TypeEnv, context: &str) -> Result<TypedExpr, BmcError> {
    let e = parse_expr(src)
        .map_err(|err| BmcError::Parse { context: context.to_string(), err })?;
    typecheck_expr(&e, env).map_err(|err| BmcError::Type { context: context.to_string(), err })
}

/// The typed assumptions of an instance: the condition (if any)
/// followed by the constraints, all over input ports only.
pub(crate) fn assumptions(instance: &Instance) -> Result<Vec<(String, TypedExpr)>, BmcError> {
    let env = input_env(instance);
    let mut out = Vec::new();
    if let Some(c) = &instance.condition {
        let context = format!("condition `{}`", c.name);
        out.push((c.name.clone(), checked(&c.expr, &env, &context)?));
    }
    for k in &instance.constraints {
        let context = format!("constraint `{}`", k.name);
        out.push((k.name.clone(), checked(&k.expr, &env, &context)?));
    }
    Ok(out)
}

/// Typed guard and action conjuncts of a requirement.
pub(crate) fn typed_requirement(
    instance: &Instance,
    req: &Requirement,
) -> Result<(TypedExpr, Vec<TypedExpr>), BmcError> {
    let env = interface_env(instance);
    let gctx = format!("requirement `{}` guard", req.name);
    let guard = checked(&req.guard, &env, &gctx)?;
    let actx = format!("requirement `{}` action", req.name);
    let action =
        parse_expr(&req.action).map_err(|err| BmcError::Parse { context: actx.clone(), err })?;
    let conjs = conjuncts(&action)
        .into_iter()
        .map(|c| typecheck_expr(c, &env).map_err(|err| BmcError::Type { context: actx.clone(), err }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((guard, conjs))
}

/// One requirement lowered to CNF: the algorithm cone with assumptions
/// asserted, the guard bit, and one violation bit per conjunct.
struct LoweredRequirement {
    lw: Lowering,
    guard: Bit,
    violations: Vec<Bit>,
}

fn lower_requirement(
    alg: &CheckedAlg,
    assume: &[(String, TypedExpr)],
    guard: &TypedExpr,
    conjs: &[TypedExpr],
) -> LoweredRequirement {
    let mut lw = Lowering::new();
    for p in &alg.inputs {
        lw.declare_var(&p.name, p.ty.width);
    }
    for (name, e) in &alg.locals {
        let bits = lw.lower(e);
        lw.bind_var(name, bits);
    }
    for (port, e) in &alg.outputs {
        let bits = lw.lower(e);
        lw.bind_var(&port.name, bits);
    }
    for (_, e) in assume {
        let bits = lw.lower(e);
        let hold = lw.or_reduce(&bits);
        lw.assert_bit(hold);
    }
    let gbits = lw.lower(guard);
    let guard = lw.or_reduce(&gbits);
    let violations = conjs
        .iter()
        .map(|c| {
            let bits = lw.lower(c);
            !lw.or_reduce(&bits)
        })
        .collect();
    LoweredRequirement { lw, guard, violations }
}

/// Extracts the model's input assignment, replays it through the
/// algorithm and checks that the guard really fires, the conjunct
/// really fails and every assumption really holds. A mismatch would
/// mean the lowering and the evaluator disagree, which is a bug, not a
/// result; it panics rather than reporting an unsound counterexample.
fn replayed_cex(
    alg: &CheckedAlg,
    lowered: &LoweredRequirement,
    assume: &[(String, TypedExpr)],
    guard: &TypedExpr,
    conj: &TypedExpr,
    model: &crate::sat::Model,
) -> Result<AlgCex, BmcError> {
    let mut inputs = Bindings::new();
    for p in &alg.inputs {
        let bits = lowered.lw.var_bits(&p.name).expect("input was declared");
        inputs.insert(p.name.clone(), Lowering::value_of(bits, model));
    }
    let ctx = |err| BmcError::Eval { context: "counterexample replay".to_string(), err };
    let env = simulate_alg(alg, &inputs).map_err(ctx)?;
    for (name, e) in assume {
        let v = eval_expr(e, &env).map_err(ctx)?;
        assert!(!v.is_zero(), "counterexample violates assumption `{name}` on replay");
    }
    let g = eval_expr(guard, &env).map_err(ctx)?;
    let a = eval_expr(conj, &env).map_err(ctx)?;
    assert!(!g.is_zero(), "counterexample does not fire the guard on replay");
    assert!(a.is_zero(), "counterexample does not fail the action on replay");
    let outputs =
        alg.outputs.iter().map(|(p, _)| (p.name.clone(), env[&p.name])).collect();
    Ok(AlgCex { inputs, outputs })
}

/// Checks one requirement against the algorithm.
pub fn check_requirement(
    alg: &CheckedAlg,
    instance: &Instance,
    req: &Requirement,
    opts: &BmcOptions,
) -> Result<RequirementReport, BmcError> {
    check_interface(alg, instance)?;
    let assume = assumptions(instance)?;
    let (guard, conjs) = typed_requirement(instance, req)?;
    let lowered = lower_requirement(alg, &assume, &guard, &conjs);
    let base = lowered.lw.problem();
    let mut stats = SolverStats::default();

    let (vac, s) = solve_under(base, &[lowered.guard], &opts.budget, opts.seed);
    stats.absorb(s);
    let vacuous = matches!(vac, SatOutcome::Unsat);

    let n = conjs.len();
    let mut checks = Vec::new();
    for (i, (conj, viol)) in conjs.iter().zip(&lowered.violations).enumerate() {
        let status = if vacuous {
            CheckStatus::Proved
        } else {
            let (out, s) =
                solve_under(base, &[lowered.guard, *viol], &opts.budget, opts.seed);
            stats.absorb(s);
            match out {
                SatOutcome::Unsat => CheckStatus::Proved,
                SatOutcome::Unknown(stop) => CheckStatus::Unknown(stop),
                SatOutcome::Sat(model) => {
                    let cex = replayed_cex(alg, &lowered, &assume, &guard, conj, &model)?;
                    CheckStatus::Violated(Box::new(cex))
                }
            }
        };
        checks.push(CheckReport { label: req.label(i, n), status });
    }
    Ok(RequirementReport { name: req.name.clone(), vacuous, checks, stats })
}

/// Checks every requirement of the instance in order.
pub fn check_all(
    alg: &CheckedAlg,
    instance: &Instance,
    opts: &BmcOptions,
) -> Result<Vec<RequirementReport>, BmcError> {
    instance
        .requirements
        .iter()
        .map(|req| check_requirement(alg, instance, req, opts))
        .collect()
}

/// Re-derives a requirement verdict by enumerating every input
/// assignment. Only sensible for small interfaces; refuses anything
/// wider than [`MAX_EXHAUSTIVE_BITS`] total input bits.
pub fn exhaustive_requirement(
    alg: &CheckedAlg,
    instance: &Instance,
    req: &Requirement,
) -> Result<RequirementReport, BmcError> {
    check_interface(alg, instance)?;
    let bits: u32 = alg.inputs.iter().map(|p| p.ty.width).sum();
    if bits > MAX_EXHAUSTIVE_BITS {
        return Err(BmcError::TooWide { bits });
    }
    let assume = assumptions(instance)?;
    let (guard, conjs) = typed_requirement(instance, req)?;
    let vars: Vec<(String, u32)> =
        alg.inputs.iter().map(|p| (p.name.clone(), p.ty.width)).collect();

    let n = conjs.len();
    let mut guard_fired = false;
    let mut found: Vec<Option<AlgCex>> = vec![None; n];
    let mut failure = None;
    for_each_assignment(&vars, |inputs| {
        let res = (|| -> Result<bool, EvalError> {
            let env = simulate_alg(alg, inputs)?;
            for (_, e) in &assume {
                if eval_expr(e, &env)?.is_zero() {
                    return Ok(true);
                }
            }
            if eval_expr(&guard, &env)?.is_zero() {
                return Ok(true);
            }
            guard_fired = true;
            for (i, c) in conjs.iter().enumerate() {
                if found[i].is_none() && eval_expr(c, &env)?.is_zero() {
                    let outputs = alg
                        .outputs
                        .iter()
                        .map(|(p, _)| (p.name.clone(), env[&p.name]))
                        .collect();
                    found[i] = Some(AlgCex { inputs: inputs.clone(), outputs });
                }
            }
            Ok(found.iter().any(|f| f.is_none()))
        })();
        match res {
            Ok(keep_going) => keep_going,
            Err(err) => {
                failure = Some(err);
                false
            }
        }
    });
    if let Some(err) = failure {
        return Err(BmcError::Eval { context: "exhaustive check".to_string(), err });
    }

    let vacuous = !guard_fired;
    let checks = found
        .into_iter()
        .enumerate()
        .map(|(i, f)| CheckReport {
            label: req.label(i, n),
            status: match f {
                Some(cex) => CheckStatus::Violated(Box::new(cex)),
                None => CheckStatus::Proved,
            },
        })
        .collect();
    Ok(RequirementReport { name: req.name.clone(), vacuous, checks, stats: SolverStats::default() })
}

#[cfg(test)]
mod tests {
    use std::time::Duration;

    use super::*;
    use crate::design::{check_alg, mk_design, mk_mutant, AlgSpec, Port, Selector};
    use crate::expr::Ty;
    use crate::model::{NamedExpr, PortDecl};

    fn increment_alg() -> CheckedAlg {
        check_alg(&AlgSpec {
            name: "inc".into(),
            inputs: vec![Port::new("x_i", Ty::unsigned(8))],
            locals: vec![],
            outputs: vec![(Port::new("y_o", Ty::unsigned(8)), "x_i + 1".into())],
        })
        .unwrap()
    }

    fn increment_instance(constraint: Option<&str>) -> Instance {
        Instance {
            name: "inc".into(),
            inputs: vec![PortDecl { name: "x_i".into(), width: 8, signed: false }],
            outputs: vec![PortDecl { name: "y_o".into(), width: 8, signed: false }],
            requirements: vec![Requirement {
                name: "Nonzero result".into(),
                guard: "1'd1".into(),
                action: "y_o != 0".into(),
                labels: Vec::new(),
            }],
            constraints: constraint
                .map(|e| NamedExpr { name: "bound".into(), expr: e.into() })
                .into_iter()
                .collect(),
            ..Instance::default()
        }
    }

    #[test]
    fn divider_requirements_all_prove() {
        let bundle = mk_design(&Selector::parse("divider:w=4").unwrap()).unwrap();
        let reports =
            check_all(&bundle.alg, &bundle.instance, &BmcOptions::default()).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert!(r.proved() && !r.vacuous, "{}: {:?}", r.name, r);
            assert_eq!(r.checks.len(), 2);
        }
    }

    #[test]
    fn inverted_flag_mutant_yields_a_replayed_counterexample() {
        let bundle =
            mk_mutant(&Selector::parse("divider:w=4").unwrap(), "alg_flag_inverted").unwrap();
        let reports =
            check_all(&bundle.alg, &bundle.instance, &BmcOptions::default()).unwrap();
        let by_zero = &reports[0];
        assert!(by_zero.violated());
        let CheckStatus::Violated(cex) = &by_zero.checks[0].status else {
            panic!("expected the flag conjunct to fail: {by_zero:?}");
        };
        assert!(cex.inputs["b_i"].is_zero());
        // the quotient conjunct is untouched by the flag mutation
        assert_eq!(by_zero.checks[1].status, CheckStatus::Proved);
    }

    #[test]
    fn constraints_are_assumed_during_proofs() {
        let alg = increment_alg();
        let unbounded = increment_instance(None);
        let free = check_requirement(
            &alg,
            &unbounded,
            &unbounded.requirements[0],
            &BmcOptions::default(),
        )
        .unwrap();
        let CheckStatus::Violated(cex) = &free.checks[0].status else {
            panic!("wrap-around should be found: {free:?}");
        };
        assert_eq!(cex.inputs["x_i"].value(), 255);

        let bounded = increment_instance(Some("x_i <= 200"));
        let report = check_requirement(
            &alg,
            &bounded,
            &bounded.requirements[0],
            &BmcOptions::default(),
        )
        .unwrap();
        assert!(report.proved() && !report.vacuous);
    }

    #[test]
    fn unreachable_guard_is_flagged_vacuous() {
        let alg = increment_alg();
        let mut instance = increment_instance(Some("x_i < 10"));
        instance.requirements[0].guard = "x_i > 200".into();
        let report = check_requirement(
            &alg,
            &instance,
            &instance.requirements[0],
            &BmcOptions::default(),
        )
        .unwrap();
        assert!(report.vacuous);
        assert!(report.proved());
    }

    #[test]
    fn conflict_budget_exhaustion_reports_unknown() {
        let alg = check_alg(&AlgSpec {
            name: "mul".into(),
            inputs: vec![
                Port::new("a_i", Ty::unsigned(8)),
                Port::new("b_i", Ty::unsigned(8)),
            ],
            locals: vec![],
            outputs: vec![(Port::new("y_o", Ty::unsigned(8)), "a_i * b_i".into())],
        })
        .unwrap();
        let instance = Instance {
            name: "mul".into(),
            inputs: vec![
                PortDecl { name: "a_i".into(), width: 8, signed: false },
                PortDecl { name: "b_i".into(), width: 8, signed: false },
            ],
            outputs: vec![PortDecl { name: "y_o".into(), width: 8, signed: false }],
            requirements: vec![Requirement {
                name: "Commutes".into(),
                guard: "1'd1".into(),
                action: "y_o == b_i * a_i".into(),
                labels: Vec::new(),
            }],
            ..Instance::default()
        };
        let opts = BmcOptions {
            budget: Budget { max_conflicts: 1, timeout: Duration::from_secs(60) },
            ..BmcOptions::default()
        };
        let report =
            check_requirement(&alg, &instance, &instance.requirements[0], &opts).unwrap();
        assert!(matches!(report.checks[0].status, CheckStatus::Unknown(Stop::Conflicts)));
    }

    #[test]
    fn exhaustive_oracle_agrees_with_the_solver() {
        for (selector, mutant) in [
            ("divider:w=4", None),
            ("divider:w=4", Some("alg_flag_inverted")),
            ("enable_pipe", None),
        ] {
            let sel = Selector::parse(selector).unwrap();
            let bundle = match mutant {
                None => mk_design(&sel).unwrap(),
                Some(m) => mk_mutant(&sel, m).unwrap(),
            };
            for req in &bundle.instance.requirements {
                let solved =
                    check_requirement(&bundle.alg, &bundle.instance, req, &BmcOptions::default())
                        .unwrap();
                let brute =
                    exhaustive_requirement(&bundle.alg, &bundle.instance, req).unwrap();
                assert_eq!(solved.vacuous, brute.vacuous, "{selector} {}", req.name);
                for (a, b) in solved.checks.iter().zip(&brute.checks) {
                    assert_eq!(a.label, b.label);
                    let same = matches!(
                        (&a.status, &b.status),
                        (CheckStatus::Proved, CheckStatus::Proved)
                            | (CheckStatus::Violated(_), CheckStatus::Violated(_))
                    );
                    assert!(same, "{selector} {}: {:?} vs {:?}", a.label, a.status, b.status);
                }
            }
        }
    }

    #[test]
    fn interface_mismatch_is_reported() {
        let alg = increment_alg();
        let mut instance = increment_instance(None);
        instance.inputs[0].width = 4;
        let err = check_requirement(&alg, &instance, &instance.requirements[0], &BmcOptions::default())
            .unwrap_err();
        assert!(matches!(err, BmcError::Interface(_)), "{err}");
    }
}
