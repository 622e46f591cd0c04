//! The bundled design pairs: untimed algorithms, pipelined RTL, and
//! the metamodel instance that ties each pair together.
//!
//! A design family is a parameterized builder (`divider:w=8`,
//! `fir:n=3,w=8`, ...) that produces a [`DesignBundle`]. The source
//! forms ([`AlgSpec`], [`RtlSpec`]) carry expressions as text; checking
//! parses and types every expression and yields the [`CheckedAlg`] and
//! [`CheckedRtl`] the verification phases and the simulators work on.
//!
//! Each family also registers named mutants: deliberately broken
//! variants of the algorithm or the RTL used to demonstrate that the
//! flow catches real bugs.

mod divider;
mod ecc;
mod enable_pipe;
mod fir;
mod minifloat;
mod quadratic;
mod simd;
mod text;

pub use text::{parse_alg, parse_rtl, write_alg, write_rtl, TextError};

use indexmap::IndexMap;

use thiserror::Error;

use crate::expr::{
    eval_expr, parse_expr, typecheck_expr, Bindings, BitVec, EvalError, ParseError, Ty, TypeEnv,
    TypeError, TypedExpr,
};
use crate::model::Instance;

/// A named, typed interface signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub ty: Ty,
}

impl Port {
    pub fn new(name: impl Into<String>, ty: Ty) -> Self {
        Port { name: name.into(), ty }
    }
}

/// Untimed algorithm source: straight-line locals followed by output
/// definitions, expressions as text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgSpec {
    pub name: String,
    pub inputs: Vec<Port>,
    pub locals: Vec<(String, String)>,
    pub outputs: Vec<(Port, String)>,
}

/// Synchronous RTL source: registers with reset values and next-state
/// expressions, combinational outputs, expressions as text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RtlSpec {
    pub name: String,
    pub clock: String,
    pub reset: String,
    pub reset_active_high: bool,
    pub inputs: Vec<Port>,
    pub regs: Vec<RegSpec>,
    pub outputs: Vec<(Port, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegSpec {
    pub name: String,
    pub ty: Ty,
    pub reset: BitVec,
    pub next: String,
}

/// A checked algorithm: every expression parsed and typed, locals in
/// dependency order.
#[derive(Clone, Debug)]
pub struct CheckedAlg {
    pub name: String,
    pub inputs: Vec<Port>,
    pub locals: Vec<(String, TypedExpr)>,
    pub outputs: Vec<(Port, TypedExpr)>,
}

impl CheckedAlg {
    /// Interface environment: inputs and outputs, no locals.
    pub fn interface_env(&self) -> TypeEnv {
        self.inputs
            .iter()
            .chain(self.outputs.iter().map(|(p, _)| p))
            .map(|p| (p.name.clone(), p.ty))
            .collect()
    }

    pub fn input_env(&self) -> TypeEnv {
        self.inputs.iter().map(|p| (p.name.clone(), p.ty)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CheckedReg {
    pub name: String,
    pub ty: Ty,
    pub reset: BitVec,
    pub next: TypedExpr,
}

/// Checked RTL: typed next-state and output functions over the inputs
/// and registers.
#[derive(Clone, Debug)]
pub struct CheckedRtl {
    pub name: String,
    pub clock: String,
    pub reset: String,
    pub reset_active_high: bool,
    pub inputs: Vec<Port>,
    pub regs: Vec<CheckedReg>,
    pub outputs: Vec<(Port, TypedExpr)>,
}

impl CheckedRtl {
    /// Environment a next-state or output expression is evaluated in.
    pub fn state_env(&self) -> TypeEnv {
        self.inputs
            .iter()
            .map(|p| (p.name.clone(), p.ty))
            .chain(self.regs.iter().map(|r| (r.name.clone(), r.ty)))
            .collect()
    }

    /// Environment for helper expressions: state plus outputs.
    pub fn full_env(&self) -> TypeEnv {
        let mut env = self.state_env();
        for (p, _) in &self.outputs {
            env.insert(p.name.clone(), p.ty);
        }
        env
    }
}

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("{design}: duplicate signal name `{name}`")]
    DuplicateSignal { design: String, name: String },
    #[error("{design}: {context}: {err}")]
    Parse { design: String, context: String, err: ParseError },
    #[error("{design}: {context}: {err}")]
    Type { design: String, context: String, err: TypeError },
    #[error("{design}: {context} has type {inferred}, declared {declared}")]
    DeclaredTypeMismatch { design: String, context: String, declared: Ty, inferred: Ty },
    #[error("{design}: register `{name}` reset value has width {got}, register is {want} wide")]
    ResetWidth { design: String, name: String, got: u32, want: u32 },
    #[error("unknown design kind `{0}`")]
    UnknownKind(String),
    #[error("bad selector `{0}`: expected `kind` or `kind:name=value,...`")]
    BadSelector(String),
    #[error("{kind}: unknown parameter `{name}`")]
    UnknownParam { kind: &'static str, name: String },
    #[error("{kind}: parameter `{name}` = {value} out of range ({reason})")]
    BadParam { kind: &'static str, name: &'static str, value: u32, reason: &'static str },
    #[error("{kind}: no mutant named `{name}`")]
    UnknownMutant { kind: &'static str, name: String },
}

/// Parses and type-checks an algorithm source.
pub fn check_alg(spec: &AlgSpec) -> Result<CheckedAlg, DesignError> {
    let design = spec.name.clone();
    let mut env = TypeEnv::new();
    for p in &spec.inputs {
        if env.contains(&p.name) {
            return Err(DesignError::DuplicateSignal { design, name: p.name.clone() });
        }
        env.insert(p.name.clone(), p.ty);
    }
    let mut locals = Vec::new();
    for (name, src) in &spec.locals {
        if env.contains(name) {
            return Err(DesignError::DuplicateSignal { design, name: name.clone() });
        }
        let typed = check_expr(&design, &format!("local `{name}`"), src, &env)?;
        env.insert(name.clone(), typed.ty);
        locals.push((name.clone(), typed));
    }
    let mut outputs = Vec::new();
    for (port, src) in &spec.outputs {
        if env.contains(&port.name) {
            return Err(DesignError::DuplicateSignal { design, name: port.name.clone() });
        }
        let context = format!("output `{}`", port.name);
        let typed = check_expr(&design, &context, src, &env)?;
        if typed.ty != port.ty {
            return Err(DesignError::DeclaredTypeMismatch {
                design,
                context,
                declared: port.ty,
                inferred: typed.ty,
            });
        }
        env.insert(port.name.clone(), port.ty);
        outputs.push((port.clone(), typed));
    }
    Ok(CheckedAlg { name: spec.name.clone(), inputs: spec.inputs.clone(), locals, outputs })
}

/// Parses and type-checks an RTL source.
pub fn check_rtl(spec: &RtlSpec) -> Result<CheckedRtl, DesignError> {
    let design = spec.name.clone();
    let mut env = TypeEnv::new();
    for p in &spec.inputs {
        if env.contains(&p.name) {
            return Err(DesignError::DuplicateSignal { design, name: p.name.clone() });
        }
        env.insert(p.name.clone(), p.ty);
    }
    for r in &spec.regs {
        if env.contains(&r.name) {
            return Err(DesignError::DuplicateSignal { design, name: r.name.clone() });
        }
        if r.reset.width() != r.ty.width {
            return Err(DesignError::ResetWidth {
                design,
                name: r.name.clone(),
                got: r.reset.width(),
                want: r.ty.width,
            });
        }
        env.insert(r.name.clone(), r.ty);
    }
    let mut regs = Vec::new();
    for r in &spec.regs {
        let context = format!("register `{}`", r.name);
        let typed = check_expr(&design, &context, &r.next, &env)?;
        if typed.ty != r.ty {
            return Err(DesignError::DeclaredTypeMismatch {
                design,
                context,
                declared: r.ty,
                inferred: typed.ty,
            });
        }
        regs.push(CheckedReg { name: r.name.clone(), ty: r.ty, reset: r.reset, next: typed });
    }
    let mut outputs = Vec::new();
    for (port, src) in &spec.outputs {
        if env.contains(&port.name) {
            return Err(DesignError::DuplicateSignal { design, name: port.name.clone() });
        }
        let context = format!("output `{}`", port.name);
        let typed = check_expr(&design, &context, src, &env)?;
        if typed.ty != port.ty {
            return Err(DesignError::DeclaredTypeMismatch {
                design,
                context,
                declared: port.ty,
                inferred: typed.ty,
            });
        }
        outputs.push((port.clone(), typed));
    }
    Ok(CheckedRtl {
        name: spec.name.clone(),
        clock: spec.clock.clone(),
        reset: spec.reset.clone(),
        reset_active_high: spec.reset_active_high,
        inputs: spec.inputs.clone(),
        regs,
        outputs,
    })
}

fn check_expr(
    design: &str,
    context: &str,
    src: &str,
    env: &TypeEnv,
) -> Result<TypedExpr, DesignError> {
    let parsed = parse_expr(src).map_err(|err| DesignError::Parse {
        design: design.to_string(),
        context: context.to_string(),
        err,
    })?;
    typecheck_expr(&parsed, env).map_err(|err| DesignError::Type {
        design: design.to_string(),
        context: context.to_string(),
        err,
    })
}

/// Runs the algorithm on one transaction. The result contains the
/// inputs, every local and every output.
pub fn simulate_alg(alg: &CheckedAlg, inputs: &Bindings) -> Result<Bindings, EvalError> {
    let mut env = inputs.clone();
    for (name, e) in &alg.locals {
        let v = eval_expr(e, &env)?;
        env.insert(name.clone(), v);
    }
    for (port, e) in &alg.outputs {
        let v = eval_expr(e, &env)?;
        env.insert(port.name.clone(), v);
    }
    Ok(env)
}

/// Cycle-accurate RTL trace: `regs[t]` is the state at the start of
/// cycle `t` (so `regs[0]` holds the reset values) and `outputs[t]`
/// the combinational outputs during cycle `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RtlTrace {
    pub regs: Vec<Bindings>,
    pub outputs: Vec<Bindings>,
}

/// Steps the RTL once per entry of `inputs_per_cycle`, starting from
/// reset state.
pub fn simulate_rtl(rtl: &CheckedRtl, inputs_per_cycle: &[Bindings]) -> Result<RtlTrace, EvalError> {
    let mut state: Bindings =
        rtl.regs.iter().map(|r| (r.name.clone(), r.reset)).collect();
    let mut trace = RtlTrace::default();
    for cycle_inputs in inputs_per_cycle {
        let mut env = cycle_inputs.clone();
        for (k, v) in &state {
            env.insert(k.clone(), *v);
        }
        let mut outs = Bindings::new();
        for (port, e) in &rtl.outputs {
            outs.insert(port.name.clone(), eval_expr(e, &env)?);
        }
        let mut next = Bindings::new();
        for r in &rtl.regs {
            next.insert(r.name.clone(), eval_expr(&r.next, &env)?);
        }
        trace.regs.push(state);
        trace.outputs.push(outs);
        state = next;
    }
    Ok(trace)
}

/// The design families shipped with the tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DesignKind {
    Divider,
    Fir,
    SimdMul,
    Quadratic,
    EccSecded,
    MinifloatMul,
    EnablePipe,
}

impl DesignKind {
    pub const ALL: [DesignKind; 7] = [
        DesignKind::Divider,
        DesignKind::Fir,
        DesignKind::SimdMul,
        DesignKind::Quadratic,
        DesignKind::EccSecded,
        DesignKind::MinifloatMul,
        DesignKind::EnablePipe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Divider => "divider",
            DesignKind::Fir => "fir",
            DesignKind::SimdMul => "simd_mul",
            DesignKind::Quadratic => "quadratic",
            DesignKind::EccSecded => "ecc_secded",
            DesignKind::MinifloatMul => "minifloat_mul",
            DesignKind::EnablePipe => "enable_pipe",
        }
    }

    pub fn from_name(name: &str) -> Option<DesignKind> {
        DesignKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for DesignKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed `kind:name=value,...` selector with defaults applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selector {
    pub kind: DesignKind,
    pub params: IndexMap<String, u32>,
}

impl Selector {
    /// One representative selector per design family, in catalog order.
    pub const CANONICAL: [&'static str; 7] = [
        "divider:w=16",
        "fir:n=4,w=8",
        "simd_mul:w=8",
        "quadratic:f=4",
        "ecc_secded",
        "minifloat_mul",
        "enable_pipe",
    ];

    pub fn parse(text: &str) -> Result<Selector, DesignError> {
        let (kind_str, params_str) = match text.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (text, None),
        };
        let kind = DesignKind::from_name(kind_str.trim())
            .ok_or_else(|| DesignError::UnknownKind(kind_str.trim().to_string()))?;
        let mut params = IndexMap::new();
        if let Some(p) = params_str {
            for item in p.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (name, value) = item
                    .split_once('=')
                    .ok_or_else(|| DesignError::BadSelector(text.to_string()))?;
                let value: u32 = value
                    .trim()
                    .parse()
                    .map_err(|_| DesignError::BadSelector(text.to_string()))?;
                params.insert(name.trim().to_string(), value);
            }
        }
        Ok(Selector { kind, params })
    }

    fn take(&self, kind: &'static str, allowed: &[&str]) -> Result<(), DesignError> {
        for name in self.params.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(DesignError::UnknownParam { kind, name: name.clone() });
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str, default: u32) -> u32 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

/// One buildable design: source and checked forms of the algorithm and
/// the RTL plus the metamodel instance binding them.
#[derive(Clone, Debug)]
pub struct DesignBundle {
    /// Canonical selector, e.g. `divider:w=8`.
    pub selector: String,
    pub mutant: Option<String>,
    pub alg_src: AlgSpec,
    pub rtl_src: RtlSpec,
    pub alg: CheckedAlg,
    pub rtl: CheckedRtl,
    pub instance: Instance,
    /// Stall cycles the bundle suggests for equivalence checking
    /// (empty for designs without flow control).
    pub suggested_stalls: Vec<u32>,
}

/// Description of one registered mutant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MutantInfo {
    pub name: &'static str,
    /// Which side the bug lives on; decides which phase must catch it.
    pub side: MutantSide,
    pub description: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutantSide {
    Alg,
    Rtl,
}

/// Builds the design selected by `selector` ("divider", "fir:n=4,w=8",
/// ...).
pub fn mk_design(selector: &Selector) -> Result<DesignBundle, DesignError> {
    build(selector, None)
}

/// Builds a registered mutant of the selected design.
pub fn mk_mutant(selector: &Selector, mutant: &str) -> Result<DesignBundle, DesignError> {
    let kind = selector.kind;
    if !mutants_for(kind).iter().any(|m| m.name == mutant) {
        return Err(DesignError::UnknownMutant { kind: kind.name(), name: mutant.to_string() });
    }
    build(selector, Some(mutant))
}

/// The mutants registered for a design kind.
pub fn mutants_for(kind: DesignKind) -> &'static [MutantInfo] {
    match kind {
        DesignKind::Divider => divider::MUTANTS,
        DesignKind::Fir => fir::MUTANTS,
        DesignKind::SimdMul => simd::MUTANTS,
        DesignKind::Quadratic => quadratic::MUTANTS,
        DesignKind::EccSecded => ecc::MUTANTS,
        DesignKind::MinifloatMul => minifloat::MUTANTS,
        DesignKind::EnablePipe => enable_pipe::MUTANTS,
    }
}

fn build(selector: &Selector, mutant: Option<&str>) -> Result<DesignBundle, DesignError> {
    let (alg_src, rtl_src, instance, canonical, stalls) = match selector.kind {
        DesignKind::Divider => divider::build(selector, mutant)?,
        DesignKind::Fir => fir::build(selector, mutant)?,
        DesignKind::SimdMul => simd::build(selector, mutant)?,
        DesignKind::Quadratic => quadratic::build(selector, mutant)?,
        DesignKind::EccSecded => ecc::build(selector, mutant)?,
        DesignKind::MinifloatMul => minifloat::build(selector, mutant)?,
        DesignKind::EnablePipe => enable_pipe::build(selector, mutant)?,
    };
    let alg = check_alg(&alg_src)?;
    let rtl = check_rtl(&rtl_src)?;
    crate::model::validate_instance(&instance).unwrap_or_else(|e| {
        panic!("builder for {canonical} produced an invalid instance: {e}")
    });
    Ok(DesignBundle {
        selector: canonical,
        mutant: mutant.map(str::to_string),
        alg_src,
        rtl_src,
        alg,
        rtl,
        instance,
        suggested_stalls: stalls,
    })
}

/// What the family builders return: sources, instance, canonical
/// selector string and suggested stall cycles.
pub(crate) type BuildParts = (AlgSpec, RtlSpec, Instance, String, Vec<u32>);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_parses_kind_and_params() {
        let s = Selector::parse("fir:n=4, w=8").unwrap();
        assert_eq!(s.kind, DesignKind::Fir);
        assert_eq!(s.get("n", 3), 4);
        assert_eq!(s.get("w", 16), 8);
        assert_eq!(s.get("missing", 7), 7);
    }

    #[test]
    fn selector_rejects_unknown_kind_and_garbage() {
        assert!(matches!(Selector::parse("divder"), Err(DesignError::UnknownKind(_))));
        assert!(matches!(Selector::parse("fir:n"), Err(DesignError::BadSelector(_))));
        assert!(matches!(Selector::parse("fir:n=x"), Err(DesignError::BadSelector(_))));
    }

    #[test]
    fn every_kind_builds_with_defaults() {
        for kind in DesignKind::ALL {
            let selector = Selector::parse(kind.name()).unwrap();
            let bundle = mk_design(&selector).unwrap_or_else(|e| panic!("{kind}: {e}"));
            assert!(bundle.selector.starts_with(kind.name()));
            assert!(!bundle.alg.outputs.is_empty());
            assert!(!bundle.instance.requirements.is_empty());
        }
    }

    #[test]
    fn every_mutant_builds() {
        for kind in DesignKind::ALL {
            let selector = Selector::parse(kind.name()).unwrap();
            for m in mutants_for(kind) {
                let bundle = mk_mutant(&selector, m.name)
                    .unwrap_or_else(|e| panic!("{kind}/{}: {e}", m.name));
                assert_eq!(bundle.mutant.as_deref(), Some(m.name));
            }
        }
    }

    #[test]
    fn unknown_mutant_is_rejected() {
        let selector = Selector::parse("divider").unwrap();
        assert!(matches!(
            mk_mutant(&selector, "nonsense"),
            Err(DesignError::UnknownMutant { .. })
        ));
    }

    #[test]
    fn check_alg_rejects_type_drift() {
        let spec = AlgSpec {
            name: "t".into(),
            inputs: vec![Port::new("a", Ty::unsigned(8))],
            locals: vec![],
            outputs: vec![(Port::new("y", Ty::unsigned(4)), "a + 8'd1".into())],
        };
        assert!(matches!(check_alg(&spec), Err(DesignError::DeclaredTypeMismatch { .. })));
    }

    #[test]
    fn check_rtl_rejects_reset_width_mismatch() {
        let spec = RtlSpec {
            name: "t".into(),
            clock: "clk_i".into(),
            reset: "rst_i".into(),
            reset_active_high: true,
            inputs: vec![Port::new("a", Ty::unsigned(8))],
            regs: vec![RegSpec {
                name: "r".into(),
                ty: Ty::unsigned(8),
                reset: BitVec::zero(4),
                next: "a".into(),
            }],
            outputs: vec![],
        };
        assert!(matches!(check_rtl(&spec), Err(DesignError::ResetWidth { .. })));
    }

    #[test]
    fn rtl_simulation_applies_reset_then_steps() {
        let spec = RtlSpec {
            name: "count".into(),
            clock: "clk_i".into(),
            reset: "rst_i".into(),
            reset_active_high: true,
            inputs: vec![Port::new("inc", Ty::unsigned(4))],
            regs: vec![RegSpec {
                name: "c".into(),
                ty: Ty::unsigned(4),
                reset: BitVec::new(4, 3),
                next: "c + inc".into(),
            }],
            outputs: vec![(Port::new("c_o", Ty::unsigned(4)), "c".into())],
        };
        let rtl = check_rtl(&spec).unwrap();
        let mk = |v: u128| {
            let mut b = Bindings::new();
            b.insert("inc".to_string(), BitVec::new(4, v));
            b
        };
        let trace = simulate_rtl(&rtl, &[mk(1), mk(2), mk(4)]).unwrap();
        let c = |t: usize| trace.outputs[t]["c_o"].value();
        assert_eq!((c(0), c(1), c(2)), (3, 4, 6));
        assert_eq!(trace.regs[0]["c"].value(), 3);
        assert_eq!(trace.regs[2]["c"].value(), 6);
    }
}
