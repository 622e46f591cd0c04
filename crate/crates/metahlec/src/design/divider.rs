//! Unsigned restoring divider.
//!
//! The algorithm is one line per output: quotient with the all-ones
//! division-by-zero convention, plus a flag. The RTL computes the same
//! thing with a classic restoring-division pipeline, one stage per
//! quotient bit after an input register, so the latency is `w + 1`
//! cycles. Division by zero needs no special path in the pipeline:
//! with a zero divisor every trial subtraction succeeds and the
//! quotient register fills with ones on its own.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[
    MutantInfo {
        name: "alg_flag_inverted",
        side: MutantSide::Alg,
        description: "algorithm drives divide_by_0_o from b_i != 0 instead of b_i == 0",
    },
    MutantInfo {
        name: "rtl_flag_inverted",
        side: MutantSide::Rtl,
        description: "pipeline captures the zero flag inverted at the input stage",
    },
    MutantInfo {
        name: "rtl_stage_subtract_disabled",
        side: MutantSide::Rtl,
        description: "one pipeline stage keeps the shifted remainder without restoring",
    },
];

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("divider", &["w"])?;
    let w = selector.get("w", 8);
    if !(2..=16).contains(&w) {
        return Err(DesignError::BadParam {
            kind: "divider",
            name: "w",
            value: w,
            reason: "supported widths are 2..=16",
        });
    }
    let name = format!("divider_w{w}");
    let u = Ty::unsigned;
    let ones = (1u128 << w) - 1;

    let alg_flag = match mutant {
        Some("alg_flag_inverted") => "b_i != 0",
        _ => "b_i == 0",
    };
    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![Port::new("a_i", u(w)), Port::new("b_i", u(w))],
        locals: vec![],
        outputs: vec![
            (
                Port::new("quotient_o", u(w)),
                format!("b_i == 0 ? {w}'d{ones} : a_i / b_i"),
            ),
            (Port::new("divide_by_0_o", u(1)), alg_flag.to_string()),
        ],
    };

    let rw = w + 1;
    let rtl_flag = match mutant {
        Some("rtl_flag_inverted") => "b_i != 0",
        _ => "b_i == 0",
    };
    let broken_stage = match mutant {
        Some("rtl_stage_subtract_disabled") => Some(1 + w / 2),
        _ => None,
    };
    let mut regs = vec![
        RegSpec { name: "s0_r".into(), ty: u(rw), reset: BitVec::zero(rw), next: format!("{rw}'d0") },
        RegSpec { name: "s0_q".into(), ty: u(w), reset: BitVec::zero(w), next: format!("{w}'d0") },
        RegSpec { name: "s0_a".into(), ty: u(w), reset: BitVec::zero(w), next: "a_i".into() },
        RegSpec { name: "s0_b".into(), ty: u(w), reset: BitVec::zero(w), next: "b_i".into() },
        RegSpec { name: "s0_z".into(), ty: u(1), reset: BitVec::zero(1), next: rtl_flag.into() },
    ];
    for s in 1..=w {
        let p = s - 1;
        let shifted = format!("(s{p}_r << 1) | zext(s{p}_a[{}], {rw})", w - 1);
        let ge = format!("({shifted}) >= zext(s{p}_b, {rw})");
        let r_next = if broken_stage == Some(s) {
            shifted.clone()
        } else {
            format!("({ge}) ? ({shifted}) - zext(s{p}_b, {rw}) : ({shifted})")
        };
        regs.push(RegSpec {
            name: format!("s{s}_r"),
            ty: u(rw),
            reset: BitVec::zero(rw),
            next: r_next,
        });
        regs.push(RegSpec {
            name: format!("s{s}_q"),
            ty: u(w),
            reset: BitVec::zero(w),
            next: format!("(s{p}_q << 1) | zext({ge}, {w})"),
        });
        regs.push(RegSpec {
            name: format!("s{s}_a"),
            ty: u(w),
            reset: BitVec::zero(w),
            next: format!("s{p}_a << 1"),
        });
        regs.push(RegSpec {
            name: format!("s{s}_b"),
            ty: u(w),
            reset: BitVec::zero(w),
            next: format!("s{p}_b"),
        });
        regs.push(RegSpec {
            name: format!("s{s}_z"),
            ty: u(1),
            reset: BitVec::zero(1),
            next: format!("s{p}_z"),
        });
    }
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![Port::new("a_i", u(w)), Port::new("b_i", u(w))],
        regs,
        outputs: vec![
            (Port::new("quotient_o", u(w)), format!("s{w}_q")),
            (Port::new("divide_by_0_o", u(1)), format!("s{w}_z")),
        ],
    };

    let delay = w + 1;
    let instance = Instance {
        name: name.clone(),
        inputs: vec![
            PortDecl { name: "a_i".into(), width: w, signed: false },
            PortDecl { name: "b_i".into(), width: w, signed: false },
        ],
        outputs: vec![
            PortDecl { name: "quotient_o".into(), width: w, signed: false },
            PortDecl { name: "divide_by_0_o".into(), width: 1, signed: false },
        ],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "a_i".into(), rtl: "a_i".into(), delay: 0 },
            PortMap { alg: "b_i".into(), rtl: "b_i".into(), delay: 0 },
            PortMap { alg: "quotient_o".into(), rtl: "quotient_o".into(), delay },
            PortMap { alg: "divide_by_0_o".into(), rtl: "divide_by_0_o".into(), delay },
        ],
        requirements: vec![
            Requirement {
                name: "Division by zero".into(),
                guard: "b_i == 0".into(),
                action: "(divide_by_0_o == 1) && ((~ quotient_o) == 0)".into(),
                labels: vec!["Flag set".into(), "Division by zero".into()],
            },
            Requirement {
                name: "Divisor not 0".into(),
                guard: "b_i != 0".into(),
                action: "(divide_by_0_o == 0) && (quotient_o == a_i / b_i)".into(),
                labels: vec!["Flag clear".into(), "Quotient".into()],
            },
        ],
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, format!("divider:w={w}"), Vec::new()))
}
