//! Mode-selected SIMD multiplier.
//!
//! One data path, four products: full width, two half-width lanes, four
//! quarter-width lanes, or plain bitwise AND, selected by `mode_i`.
//! Lane products wrap at the lane width, which the expression language
//! gives us for free: a slice is typed at its own width, so the lane
//! multiply never sees the neighbours. The RTL computes all four
//! candidates in stage one and registers the selected one in stage two.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[MutantInfo {
    name: "rtl_lane_cross",
    side: MutantSide::Rtl,
    description: "half-width lanes are swapped when assembled into the result",
}];

/// Lane-by-lane product at lane width `lw`, most significant lane first.
fn lanes(w: u32, lw: u32, swap: bool) -> String {
    let mut parts: Vec<String> = (0..w / lw)
        .rev()
        .map(|lane| {
            let hi = lane * lw + lw - 1;
            let lo = lane * lw;
            format!("a_i[{hi}:{lo}] * b_i[{hi}:{lo}]")
        })
        .collect();
    if swap {
        parts.reverse();
    }
    format!("{{{}}}", parts.join(", "))
}

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("simd_mul", &["w"])?;
    let w = selector.get("w", 8);
    if w != 8 && w != 16 {
        return Err(DesignError::BadParam {
            kind: "simd_mul",
            name: "w",
            value: w,
            reason: "lane splitting needs w = 8 or 16",
        });
    }
    let name = format!("simd_mul_w{w}");
    let u = Ty::unsigned;
    let h = w / 2;
    let q = w / 4;

    let select = |full: &str, half: &str, quarter: &str, bits: &str, mode: &str| {
        format!(
            "{mode} == 0 ? {full} : {mode} == 1 ? {half} : {mode} == 2 ? {quarter} : {bits}"
        )
    };
    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![
            Port::new("a_i", u(w)),
            Port::new("b_i", u(w)),
            Port::new("mode_i", u(2)),
        ],
        locals: vec![],
        outputs: vec![(
            Port::new("r_o", u(w)),
            select(
                "a_i * b_i",
                &lanes(w, h, false),
                &lanes(w, q, false),
                "a_i & b_i",
                "mode_i",
            ),
        )],
    };

    let swap_half = mutant == Some("rtl_lane_cross");
    let regs = vec![
        RegSpec { name: "m1".into(), ty: u(2), reset: BitVec::zero(2), next: "mode_i".into() },
        RegSpec {
            name: "p_full".into(),
            ty: u(w),
            reset: BitVec::zero(w),
            next: "a_i * b_i".into(),
        },
        RegSpec {
            name: "p_half".into(),
            ty: u(w),
            reset: BitVec::zero(w),
            next: lanes(w, h, swap_half),
        },
        RegSpec {
            name: "p_quarter".into(),
            ty: u(w),
            reset: BitVec::zero(w),
            next: lanes(w, q, false),
        },
        RegSpec {
            name: "p_bits".into(),
            ty: u(w),
            reset: BitVec::zero(w),
            next: "a_i & b_i".into(),
        },
        RegSpec {
            name: "r2".into(),
            ty: u(w),
            reset: BitVec::zero(w),
            next: select("p_full", "p_half", "p_quarter", "p_bits", "m1"),
        },
    ];
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![
            Port::new("a_i", u(w)),
            Port::new("b_i", u(w)),
            Port::new("mode_i", u(2)),
        ],
        regs,
        outputs: vec![(Port::new("r_o", u(w)), "r2".into())],
    };

    let lane_one = (1u128 << h) + 1;
    let instance = Instance {
        name: name.clone(),
        inputs: vec![
            PortDecl { name: "a_i".into(), width: w, signed: false },
            PortDecl { name: "b_i".into(), width: w, signed: false },
            PortDecl { name: "mode_i".into(), width: 2, signed: false },
        ],
        outputs: vec![PortDecl { name: "r_o".into(), width: w, signed: false }],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "a_i".into(), rtl: "a_i".into(), delay: 0 },
            PortMap { alg: "b_i".into(), rtl: "b_i".into(), delay: 0 },
            PortMap { alg: "mode_i".into(), rtl: "mode_i".into(), delay: 0 },
            PortMap { alg: "r_o".into(), rtl: "r_o".into(), delay: 2 },
        ],
        requirements: vec![
            Requirement {
                name: "Full width product".into(),
                guard: "mode_i == 0".into(),
                action: "r_o == a_i * b_i".into(),
                labels: Vec::new(),
            },
            Requirement {
                name: "Bitwise mode".into(),
                guard: "mode_i == 3".into(),
                action: "r_o == (a_i & b_i)".into(),
                labels: Vec::new(),
            },
            Requirement {
                name: "Lane identity".into(),
                guard: format!("(mode_i == 1) && (b_i == {w}'d{lane_one})"),
                action: "r_o == a_i".into(),
                labels: Vec::new(),
            },
        ],
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, format!("simd_mul:w={w}"), Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::super::{mk_design, mk_mutant, simulate_alg, simulate_rtl, Selector};
    use crate::expr::{Bindings, BitVec};

    fn reference(w: u32, a: u128, b: u128, mode: u128) -> u128 {
        let mask = |bits: u32| (1u128 << bits) - 1;
        let lane_mul = |lw: u32| {
            (0..w / lw).fold(0u128, |acc, lane| {
                let sa = (a >> (lane * lw)) & mask(lw);
                let sb = (b >> (lane * lw)) & mask(lw);
                acc | ((sa * sb) & mask(lw)) << (lane * lw)
            })
        };
        match mode {
            0 => (a * b) & mask(w),
            1 => lane_mul(w / 2),
            2 => lane_mul(w / 4),
            _ => a & b,
        }
    }

    fn inputs(w: u32, a: u128, b: u128, mode: u128) -> Bindings {
        [
            ("a_i".to_string(), BitVec::new(w, a)),
            ("b_i".to_string(), BitVec::new(w, b)),
            ("mode_i".to_string(), BitVec::new(2, mode)),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn algorithm_matches_the_lane_reference_exhaustively_small() {
        let bundle = mk_design(&Selector::parse("simd_mul:w=8").unwrap()).unwrap();
        for a in (0..256u128).step_by(7) {
            for b in (0..256u128).step_by(11) {
                for mode in 0..4u128 {
                    let out = simulate_alg(&bundle.alg, &inputs(8, a, b, mode)).unwrap();
                    assert_eq!(
                        out["r_o"].value(),
                        reference(8, a, b, mode),
                        "a={a:#x} b={b:#x} mode={mode}"
                    );
                }
            }
        }
    }

    #[test]
    fn wide_variant_checks_out_on_samples() {
        let bundle = mk_design(&Selector::parse("simd_mul:w=16").unwrap()).unwrap();
        for (a, b) in [(0x1234u128, 0x0101u128), (0xffff, 0xffff), (0xa5a5, 0x0302)] {
            for mode in 0..4u128 {
                let out = simulate_alg(&bundle.alg, &inputs(16, a, b, mode)).unwrap();
                assert_eq!(out["r_o"].value(), reference(16, a, b, mode));
            }
        }
    }

    #[test]
    fn pipeline_result_appears_after_two_cycles() {
        let bundle = mk_design(&Selector::parse("simd_mul:w=8").unwrap()).unwrap();
        for (a, b, mode) in [(0x34u128, 0x12u128, 0u128), (0xff, 0x11, 1), (0xaa, 0xbb, 2), (0xf0, 0x3c, 3)] {
            let cycles = vec![inputs(8, a, b, mode); 3];
            let trace = simulate_rtl(&bundle.rtl, &cycles).unwrap();
            assert_eq!(trace.outputs[2]["r_o"].value(), reference(8, a, b, mode));
        }
    }

    #[test]
    fn lane_cross_mutant_breaks_half_mode_only() {
        let selector = Selector::parse("simd_mul:w=8").unwrap();
        let bad = mk_mutant(&selector, "rtl_lane_cross").unwrap();
        let run = |a: u128, b: u128, mode: u128| {
            let cycles = vec![inputs(8, a, b, mode); 3];
            simulate_rtl(&bad.rtl, &cycles).unwrap().outputs[2]["r_o"].value()
        };
        // asymmetric operands expose the swap in half mode
        assert_ne!(run(0x30, 0x11, 1), reference(8, 0x30, 0x11, 1));
        // full and bitwise modes are untouched
        assert_eq!(run(0x30, 0x11, 0), reference(8, 0x30, 0x11, 0));
        assert_eq!(run(0x30, 0x11, 3), reference(8, 0x30, 0x11, 3));
    }
}
