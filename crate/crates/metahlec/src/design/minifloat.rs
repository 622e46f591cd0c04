//! 8-bit floating-point multiplier (1 sign, 4 exponent, 3 mantissa
//! bits, bias 7), rounding to nearest even.
//!
//! The format follows the usual conventions: exponent 15 encodes
//! infinity (zero mantissa) and NaN (any other mantissa), exponent 0
//! encodes zero and subnormals, every NaN result is the canonical quiet
//! pattern `8'd124`. The algorithm multiplies the integer significands,
//! shifts the product into a 40-bit accumulator so that no information
//! is ever discarded before rounding, then finds the result binade with
//! a priority chain over the accumulator bits. The RTL takes a
//! different route: it normalizes both significands first, so its
//! stage-three rounding shift is almost constant. The two agree bit for
//! bit; proving that is what the equivalence phase is for.
//!
//! Only the 1-4-3 format is bundled; the interesting structure (two
//! rounding implementations that must agree) does not grow with the
//! field widths.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[MutantInfo {
    name: "rtl_round_truncate",
    side: MutantSide::Rtl,
    description: "stage three truncates instead of rounding to nearest even",
}];

/// Field helpers over an 8-bit operand name.
fn sign(v: &str) -> String {
    format!("{v}[7]")
}
fn expf(v: &str) -> String {
    format!("{v}[6:3]")
}
fn frac(v: &str) -> String {
    format!("{v}[2:0]")
}
fn is_nan(v: &str) -> String {
    format!("(({} == 15) && ({} != 0))", expf(v), frac(v))
}
fn is_inf(v: &str) -> String {
    format!("(({} == 15) && ({} == 0))", expf(v), frac(v))
}
fn is_zero(v: &str) -> String {
    format!("(({} == 0) && ({} == 0))", expf(v), frac(v))
}
/// Integer significand: implicit one for normals, bare mantissa for
/// subnormals.
fn mant(v: &str) -> String {
    format!("({} == 0 ? zext({}, 4) : {{1'd1, {}}})", expf(v), frac(v), frac(v))
}
/// Effective exponent field (subnormals share exponent 1).
fn eadj(v: &str) -> String {
    format!("({} == 0 ? 4'd1 : {})", expf(v), expf(v))
}
/// Leading-zero count of a 4-bit significand expression (0..3).
fn clz4(m: &str) -> String {
    format!("({m}[3] ? 3'd0 : {m}[2] ? 3'd1 : {m}[1] ? 3'd2 : 3'd3)")
}

fn nan_case() -> String {
    format!(
        "{nx} || {ny} || ({ix} && {zy}) || ({iy} && {zx})",
        nx = is_nan("x_i"),
        ny = is_nan("y_i"),
        ix = is_inf("x_i"),
        iy = is_inf("y_i"),
        zx = is_zero("x_i"),
        zy = is_zero("y_i")
    )
}

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("minifloat_mul", &["e", "m"])?;
    let e = selector.get("e", 4);
    let m = selector.get("m", 3);
    if e != 4 || m != 3 {
        return Err(DesignError::BadParam {
            kind: "minifloat_mul",
            name: if e != 4 { "e" } else { "m" },
            value: if e != 4 { e } else { m },
            reason: "the bundled datapath is the 1-4-3 format",
        });
    }
    let name = "minifloat_mul_e4_m3".to_string();
    let u = Ty::unsigned;

    // Result binade from the accumulator: bit b set and nothing above
    // it means exponent b - 13 (0 stands for the subnormal range).
    // acc = prod << esum with prod <= 225 and esum <= 28 for finite
    // operands, so bit 35 is the highest that matters.
    let mut binade = String::from("6'd0");
    for b in 14..=35 {
        binade = format!("acc[{b}] ? 6'd{} : {binade}", b - 13);
    }

    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![Port::new("x_i", u(8)), Port::new("y_i", u(8))],
        locals: vec![
            ("sr".into(), format!("{} ^ {}", sign("x_i"), sign("y_i"))),
            ("mx".into(), mant("x_i")),
            ("my".into(), mant("y_i")),
            ("prod".into(), "zext(mx, 8) * zext(my, 8)".into()),
            (
                "esum".into(),
                format!("zext({}, 6) + zext({}, 6)", eadj("x_i"), eadj("y_i")),
            ),
            ("acc".into(), "zext(prod, 40) << esum".into()),
            ("er_raw".into(), binade),
            ("sh".into(), "er_raw == 0 ? 6'd11 : 6'd10 + er_raw".into()),
            ("q".into(), "acc >> sh".into()),
            ("rem".into(), "acc & ((40'd1 << sh) - 1)".into()),
            ("half".into(), "40'd1 << (sh - 1)".into()),
            (
                "roundup".into(),
                "(rem > half) || ((rem == half) && (q[0] == 1))".into(),
            ),
            ("qr".into(), "q + zext(roundup, 40)".into()),
            (
                "er2".into(),
                "er_raw == 0 ? (qr == 8 ? 6'd1 : 6'd0) : (qr == 16 ? er_raw + 6'd1 : er_raw)"
                    .into(),
            ),
            ("fr".into(), "qr == 16 ? 40'd8 : qr".into()),
            ("body".into(), "{er2[3:0], fr[2:0]}".into()),
            ("nan_case".into(), nan_case()),
            (
                "inf_case".into(),
                format!("{} || {} || (er2 >= 15)", is_inf("x_i"), is_inf("y_i")),
            ),
            (
                "zero_case".into(),
                format!("{} || {}", is_zero("x_i"), is_zero("y_i")),
            ),
        ],
        outputs: vec![(
            Port::new("p_o", u(8)),
            "nan_case ? 8'd124 : {sr, inf_case ? 7'd120 : zero_case ? 7'd0 : body}".into(),
        )],
    };

    // RTL: normalize-early pipeline. Stage one brings both significands
    // to [8, 15] and tracks the exponent with a +6 offset so it stays
    // nonnegative; stage two multiplies (product in [64, 225]) and
    // renormalizes by at most one position; stage three rounds with a
    // shift that is 4 for normal results and 18 - e2 for subnormals.
    let p = "(zext(s1_mx, 8) * zext(s1_my, 8))";
    let shift3 = "(s2_e >= 14 ? 7'd4 : 7'd18 - s2_e)";
    let m2w = "zext(s2_m, 24)";
    let rem3 = format!("({m2w} & ((24'd1 << {shift3}) - 1))");
    let half3 = format!("(24'd1 << ({shift3} - 1))");
    let q3 = format!("({m2w} >> {shift3})");
    let roundup3 = match mutant {
        Some("rtl_round_truncate") => "1'd0".to_string(),
        _ => format!("(({rem3} > {half3}) || (({rem3} == {half3}) && ({q3}[0] == 1)))"),
    };
    let qf = format!("({q3} + zext({roundup3}, 24))");
    let er3 = format!(
        "(s2_e >= 14 ? s2_e - 7'd13 + ({qf} == 16 ? 7'd1 : 7'd0) : ({qf} == 8 ? 7'd1 : 7'd0))"
    );
    let body3 = format!("{{{er3}[3:0], ({qf} == 16 ? 24'd8 : {qf})[2:0]}}");
    let p3_next = format!(
        "s2_nan ? 8'd124 : {{s2_s, (s2_inf || ({er3} >= 15)) ? 7'd120 : s2_zero ? 7'd0 : {body3}}}"
    );

    let one = |name: &str, next: String| RegSpec {
        name: name.into(),
        ty: u(1),
        reset: BitVec::zero(1),
        next,
    };
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![Port::new("x_i", u(8)), Port::new("y_i", u(8))],
        regs: vec![
            one("s1_s", format!("{} ^ {}", sign("x_i"), sign("y_i"))),
            one("s1_nan", nan_case()),
            one("s1_inf", format!("{} || {}", is_inf("x_i"), is_inf("y_i"))),
            one("s1_zero", format!("{} || {}", is_zero("x_i"), is_zero("y_i"))),
            RegSpec {
                name: "s1_mx".into(),
                ty: u(4),
                reset: BitVec::zero(4),
                next: format!("{m} << {c}", m = mant("x_i"), c = clz4(&mant("x_i"))),
            },
            RegSpec {
                name: "s1_my".into(),
                ty: u(4),
                reset: BitVec::zero(4),
                next: format!("{m} << {c}", m = mant("y_i"), c = clz4(&mant("y_i"))),
            },
            RegSpec {
                name: "s1_e".into(),
                ty: u(7),
                reset: BitVec::zero(7),
                next: format!(
                    "zext({ex}, 7) + zext({ey}, 7) + 7'd6 - zext({cx}, 7) - zext({cy}, 7)",
                    ex = eadj("x_i"),
                    ey = eadj("y_i"),
                    cx = clz4(&mant("x_i")),
                    cy = clz4(&mant("y_i"))
                ),
            },
            one("s2_s", "s1_s".into()),
            one("s2_nan", "s1_nan".into()),
            one("s2_inf", "s1_inf".into()),
            one("s2_zero", "s1_zero".into()),
            RegSpec {
                name: "s2_m".into(),
                ty: u(8),
                reset: BitVec::zero(8),
                next: format!("{p}[7] ? {p} : {p} << 1"),
            },
            RegSpec {
                name: "s2_e".into(),
                ty: u(7),
                reset: BitVec::zero(7),
                next: format!("s1_e + zext({p}[7], 7)"),
            },
            RegSpec { name: "p3".into(), ty: u(8), reset: BitVec::zero(8), next: p3_next },
        ],
        outputs: vec![(Port::new("p_o", u(8)), "p3".into())],
    };

    let instance = Instance {
        name: name.clone(),
        inputs: vec![
            PortDecl { name: "x_i".into(), width: 8, signed: false },
            PortDecl { name: "y_i".into(), width: 8, signed: false },
        ],
        outputs: vec![PortDecl { name: "p_o".into(), width: 8, signed: false }],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "x_i".into(), rtl: "x_i".into(), delay: 0 },
            PortMap { alg: "y_i".into(), rtl: "y_i".into(), delay: 0 },
            PortMap { alg: "p_o".into(), rtl: "p_o".into(), delay: 3 },
        ],
        requirements: vec![
            Requirement {
                name: "NaN propagates".into(),
                guard: format!("{} || {}", is_nan("x_i"), is_nan("y_i")),
                action: "p_o == 8'd124".into(),
                labels: Vec::new(),
            },
            Requirement {
                name: "Infinity times zero".into(),
                guard: format!(
                    "({} && {}) || ({} && {})",
                    is_inf("x_i"),
                    is_zero("y_i"),
                    is_inf("y_i"),
                    is_zero("x_i")
                ),
                action: "p_o == 8'd124".into(),
                labels: Vec::new(),
            },
            Requirement {
                name: "One is identity".into(),
                guard: format!("(y_i == 8'd56) && !{}", is_nan("x_i")),
                action: "p_o == x_i".into(),
                labels: Vec::new(),
            },
            Requirement {
                name: "Zero times finite".into(),
                guard: format!(
                    "{} && !{} && !{}",
                    is_zero("x_i"),
                    is_nan("y_i"),
                    is_inf("y_i")
                ),
                action: "p_o == {x_i[7] ^ y_i[7], 7'd0}".into(),
                labels: Vec::new(),
            },
        ],
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, "minifloat_mul:e=4,m=3".to_string(), Vec::new()))
}
