//! Signed fixed-point quadratic evaluator: `y = a*x^2 + b*x + c`.
//!
//! All operands are signed `w`-bit fixed-point values with `f`
//! fractional bits. Products are formed at double width and rescaled by
//! `2^f` with truncation toward zero: add `2^f - 1` first when the
//! value is negative, then shift arithmetically. The final sum is cut
//! back to `w` bits. The RTL spreads exactly this computation over four
//! stages with the same intermediate widths, so the two sides agree
//! bit for bit even where the fixed-point range overflows.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[MutantInfo {
    name: "alg_b_term_dropped",
    side: MutantSide::Alg,
    description: "algorithm sums only the quadratic and constant terms",
}];

/// Rescale `name` (a signed double-width signal) by `2^f`, truncating
/// toward zero.
fn tz(name: &str, w2: u32, f: u32) -> String {
    let bias = (1u128 << f) - 1;
    format!(
        "(({name} + signed({name}[{msb}] ? {w2}'d{bias} : {w2}'d0)) >> {f})",
        msb = w2 - 1
    )
}

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("quadratic", &["f", "w"])?;
    let w = selector.get("w", 16);
    if !(4..=32).contains(&w) {
        return Err(DesignError::BadParam {
            kind: "quadratic",
            name: "w",
            value: w,
            reason: "supported widths are 4..=32",
        });
    }
    let f = selector.get("f", 4);
    if f == 0 || f >= w {
        return Err(DesignError::BadParam {
            kind: "quadratic",
            name: "f",
            value: f,
            reason: "fractional bits must satisfy 1 <= f < w",
        });
    }
    let name = format!("quadratic_f{f}_w{w}");
    let s = Ty::signed;
    let w2 = 2 * w;
    let one = 1u128 << f;

    let sum = match mutant {
        Some("alg_b_term_dropped") => "t_a + cw".to_string(),
        _ => "t_a + t_b + cw".to_string(),
    };
    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![
            Port::new("a_i", s(w)),
            Port::new("b_i", s(w)),
            Port::new("c_i", s(w)),
            Port::new("x_i", s(w)),
        ],
        locals: vec![
            ("xw".into(), format!("sext(x_i, {w2})")),
            ("aw".into(), format!("sext(a_i, {w2})")),
            ("bw".into(), format!("sext(b_i, {w2})")),
            ("cw".into(), format!("sext(c_i, {w2})")),
            ("p_xx".into(), "xw * xw".into()),
            ("xx".into(), tz("p_xx", w2, f)),
            ("p_axx".into(), "aw * xx".into()),
            ("t_a".into(), tz("p_axx", w2, f)),
            ("p_bx".into(), "bw * xw".into()),
            ("t_b".into(), tz("p_bx", w2, f)),
            ("sum".into(), sum),
        ],
        outputs: vec![(
            Port::new("y_o", s(w)),
            format!("signed(sum[{}:0])", w - 1),
        )],
    };

    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![
            Port::new("a_i", s(w)),
            Port::new("b_i", s(w)),
            Port::new("c_i", s(w)),
            Port::new("x_i", s(w)),
        ],
        regs: vec![
            RegSpec { name: "r1_a".into(), ty: s(w), reset: BitVec::zero(w), next: "a_i".into() },
            RegSpec { name: "r1_b".into(), ty: s(w), reset: BitVec::zero(w), next: "b_i".into() },
            RegSpec { name: "r1_c".into(), ty: s(w), reset: BitVec::zero(w), next: "c_i".into() },
            RegSpec { name: "r1_x".into(), ty: s(w), reset: BitVec::zero(w), next: "x_i".into() },
            RegSpec {
                name: "p1_xx".into(),
                ty: s(w2),
                reset: BitVec::zero(w2),
                next: format!("sext(x_i, {w2}) * sext(x_i, {w2})"),
            },
            RegSpec {
                name: "p2_ax2".into(),
                ty: s(w2),
                reset: BitVec::zero(w2),
                next: format!("sext(r1_a, {w2}) * {}", tz("p1_xx", w2, f)),
            },
            RegSpec {
                name: "p2_bx".into(),
                ty: s(w2),
                reset: BitVec::zero(w2),
                next: format!("sext(r1_b, {w2}) * sext(r1_x, {w2})"),
            },
            RegSpec { name: "r2_c".into(), ty: s(w), reset: BitVec::zero(w), next: "r1_c".into() },
            RegSpec {
                name: "t3_a".into(),
                ty: s(w2),
                reset: BitVec::zero(w2),
                next: tz("p2_ax2", w2, f),
            },
            RegSpec {
                name: "t3_b".into(),
                ty: s(w2),
                reset: BitVec::zero(w2),
                next: tz("p2_bx", w2, f),
            },
            RegSpec { name: "r3_c".into(), ty: s(w), reset: BitVec::zero(w), next: "r2_c".into() },
            RegSpec {
                name: "y4".into(),
                ty: s(w),
                reset: BitVec::zero(w),
                next: format!("signed((t3_a + t3_b + sext(r3_c, {w2}))[{}:0])", w - 1),
            },
        ],
        outputs: vec![(Port::new("y_o", s(w)), "y4".into())],
    };

    let instance = Instance {
        name: name.clone(),
        inputs: vec![
            PortDecl { name: "a_i".into(), width: w, signed: true },
            PortDecl { name: "b_i".into(), width: w, signed: true },
            PortDecl { name: "c_i".into(), width: w, signed: true },
            PortDecl { name: "x_i".into(), width: w, signed: true },
        ],
        outputs: vec![PortDecl { name: "y_o".into(), width: w, signed: true }],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "a_i".into(), rtl: "a_i".into(), delay: 0 },
            PortMap { alg: "b_i".into(), rtl: "b_i".into(), delay: 0 },
            PortMap { alg: "c_i".into(), rtl: "c_i".into(), delay: 0 },
            PortMap { alg: "x_i".into(), rtl: "x_i".into(), delay: 0 },
            PortMap { alg: "y_o".into(), rtl: "y_o".into(), delay: 4 },
        ],
        requirements: vec![
            Requirement {
                name: "Unit input".into(),
                guard: format!("x_i == {w}'d{one}"),
                action: format!(
                    "y_o == signed((sext(a_i, {w2}) + sext(b_i, {w2}) + sext(c_i, {w2}))[{}:0])",
                    w - 1
                ),
                labels: Vec::new(),
            },
            Requirement {
                name: "Zero input".into(),
                guard: "x_i == 0".into(),
                action: "y_o == c_i".into(),
                labels: Vec::new(),
            },
        ],
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, format!("quadratic:f={f},w={w}"), Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::super::{mk_design, mk_mutant, simulate_alg, simulate_rtl, Selector};
    use crate::expr::{Bindings, BitVec};

    /// Two's complement wrap of `v` into `bits` bits.
    fn wrap(v: i128, bits: u32) -> i128 {
        let m = 1i128 << bits;
        let r = v.rem_euclid(m);
        if r >= m / 2 {
            r - m
        } else {
            r
        }
    }

    /// Division by `2^f` truncating toward zero.
    fn tz_i(v: i128, f: u32) -> i128 {
        let bias = if v < 0 { (1i128 << f) - 1 } else { 0 };
        (v + bias) >> f
    }

    /// Independent model of the datapath, including its wrap points.
    fn reference(a: i128, b: i128, c: i128, x: i128, w: u32, f: u32) -> i128 {
        let w2 = 2 * w;
        let p_xx = wrap(x * x, w2);
        let xx = tz_i(p_xx, f);
        let p_axx = wrap(a * xx, w2);
        let t_a = tz_i(p_axx, f);
        let p_bx = wrap(b * x, w2);
        let t_b = tz_i(p_bx, f);
        wrap(t_a + t_b + c, w)
    }

    fn inputs(w: u32, a: i128, b: i128, c: i128, x: i128) -> Bindings {
        [("a_i", a), ("b_i", b), ("c_i", c), ("x_i", x)]
            .into_iter()
            .map(|(n, v)| (n.to_string(), BitVec::from_i128(w, v)))
            .collect()
    }

    const SAMPLES: &[(i128, i128, i128, i128)] = &[
        (0, 0, 0, 0),
        (16, 16, 16, 16),
        (-16, 16, -3, 16),
        (5, -7, 9, -32),
        (-128, 127, -128, 127),
        (127, -128, 127, -127),
        (3, 3, 3, -1),
        (-1, -1, -1, -1),
        (100, -100, 50, 48),
    ];

    #[test]
    fn algorithm_matches_the_wrapped_fixed_point_model() {
        let w = 8;
        let f = 4;
        let bundle = mk_design(&Selector::parse("quadratic:f=4,w=8").unwrap()).unwrap();
        for &(a, b, c, x) in SAMPLES {
            let out = simulate_alg(&bundle.alg, &inputs(w, a, b, c, x)).unwrap();
            assert_eq!(
                out["y_o"].to_i128(),
                reference(a, b, c, x, w, f),
                "a={a} b={b} c={c} x={x}"
            );
        }
    }

    #[test]
    fn fixed_point_identities_hold_in_range() {
        // with one = 2^f and inputs small enough not to wrap, the result
        // is the plain quadratic scaled by one
        let bundle = mk_design(&Selector::parse("quadratic:f=4,w=16").unwrap()).unwrap();
        let one = 16i128;
        for &(a, b, c, xq) in &[(2i128, 3i128, -4i128, 5i128), (-3, 1, 7, -2), (0, -6, 2, 3)] {
            // whole numbers: value v is represented as v * one
            let out = simulate_alg(
                &bundle.alg,
                &inputs(16, a * one, b * one, c * one, xq * one),
            )
            .unwrap();
            let expect = (a * xq * xq + b * xq + c) * one;
            assert_eq!(out["y_o"].to_i128(), expect, "a={a} b={b} c={c} x={xq}");
        }
    }

    #[test]
    fn pipeline_matches_algorithm_after_four_cycles() {
        let bundle = mk_design(&Selector::parse("quadratic:f=4,w=8").unwrap()).unwrap();
        for &(a, b, c, x) in SAMPLES {
            let cycles = vec![inputs(8, a, b, c, x); 5];
            let trace = simulate_rtl(&bundle.rtl, &cycles).unwrap();
            let alg_out = simulate_alg(&bundle.alg, &inputs(8, a, b, c, x)).unwrap();
            assert_eq!(
                trace.outputs[4]["y_o"],
                alg_out["y_o"],
                "a={a} b={b} c={c} x={x}"
            );
        }
    }

    #[test]
    fn dropped_term_mutant_skews_results_when_b_matters() {
        let bundle = mk_mutant(
            &Selector::parse("quadratic:f=4,w=16").unwrap(),
            "alg_b_term_dropped",
        )
        .unwrap();
        let one = 16i128;
        // x = 1.0, b = 2.0: the mutant misses exactly b
        let out = simulate_alg(&bundle.alg, &inputs(16, one, 2 * one, 3 * one, one)).unwrap();
        assert_eq!(out["y_o"].to_i128(), (1 + 3) * one);
        // x = 0 is blind to the missing term
        let out = simulate_alg(&bundle.alg, &inputs(16, one, 2 * one, 3 * one, 0)).unwrap();
        assert_eq!(out["y_o"].to_i128(), 3 * one);
    }
}
