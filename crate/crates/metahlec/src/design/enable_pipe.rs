//! Enable-gated two-stage pipeline.
//!
//! The algorithm is a one-liner (`y = x + 1`); the interesting part is
//! the flow control. Both stages hold their value while `en_i` is low,
//! so the result is only correct if the equivalence run models the
//! stall: the bundle's stalling expression says what "stalled" means
//! (`en_i == 0`) and `suggested_stalls` proposes a cycle to stall on.
//! The `rtl_hold_broken` mutant clears stage one instead of holding it,
//! a bug that is invisible without stalls and fatal with them.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, NamedExpr, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[MutantInfo {
    name: "rtl_hold_broken",
    side: MutantSide::Rtl,
    description: "stage one clears to zero instead of holding while disabled",
}];

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("enable_pipe", &["w"])?;
    let w = selector.get("w", 8);
    if !(2..=64).contains(&w) {
        return Err(DesignError::BadParam {
            kind: "enable_pipe",
            name: "w",
            value: w,
            reason: "supported widths are 2..=64",
        });
    }
    let name = format!("enable_pipe_w{w}");
    let u = Ty::unsigned;
    let cap: u128 = 200.min((1u128 << w) - 2);

    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![Port::new("x_i", u(w))],
        locals: vec![],
        outputs: vec![(Port::new("y_o", u(w)), format!("x_i + {w}'d1"))],
    };

    let s1_next = match mutant {
        Some("rtl_hold_broken") => format!("en_i ? x_in : {w}'d0"),
        _ => "en_i ? x_in : s1_x".to_string(),
    };
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![Port::new("x_in", u(w)), Port::new("en_i", u(1))],
        regs: vec![
            RegSpec { name: "s1_x".into(), ty: u(w), reset: BitVec::zero(w), next: s1_next },
            RegSpec {
                name: "s2_y".into(),
                ty: u(w),
                reset: BitVec::zero(w),
                next: format!("en_i ? s1_x + {w}'d1 : s2_y"),
            },
        ],
        outputs: vec![(Port::new("y_out", u(w)), "s2_y".into())],
    };

    let instance = Instance {
        name: name.clone(),
        inputs: vec![PortDecl { name: "x_i".into(), width: w, signed: false }],
        outputs: vec![PortDecl { name: "y_o".into(), width: w, signed: false }],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "x_i".into(), rtl: "x_in".into(), delay: 0 },
            PortMap { alg: "y_o".into(), rtl: "y_out".into(), delay: 2 },
        ],
        requirements: vec![Requirement {
            name: "Increment".into(),
            guard: "x_i != 0".into(),
            action: format!("y_o == x_i + {w}'d1"),
            labels: Vec::new(),
        }],
        condition: Some(NamedExpr { name: "nonzero".into(), expr: "x_i != 0".into() }),
        stalling: Some(NamedExpr { name: "disabled".into(), expr: "en_i == 0".into() }),
        constraints: vec![NamedExpr {
            name: "bounded".into(),
            expr: format!("x_i <= {w}'d{cap}"),
        }],
        helpers: vec![NamedExpr {
            name: "result_bounded".into(),
            expr: format!("s2_y <= {w}'d{}", cap + 1),
        }],
    };

    Ok((alg, rtl, instance, format!("enable_pipe:w={w}"), vec![2]))
}
