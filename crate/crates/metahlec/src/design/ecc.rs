//! SECDED encode/corrupt/decode round trip over a (39,32) Hsiao code.
//!
//! Every data bit contributes to exactly three parity bits (the
//! weight-3 columns in [`COLS`]); the seven parity bits form an
//! identity block. That makes deciding errors purely a matter of
//! syndrome weight: zero means clean, a data column or a single bit
//! means one flip (correctable), anything else even means two flips
//! (detect only). The algorithm runs the whole loop on one transaction:
//! encode `d_i`, XOR in the error mask `e_i`, decode. The RTL does the
//! same in three pipeline stages.
//!
//! Status codes on `status_o`: 0 no error, 1 corrected, 2 uncorrectable.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

/// Parity-check columns of the 32 data bits: distinct weight-3 7-bit
/// values, so no data column collides with the weight-1 parity columns.
pub(super) const COLS: [u8; 32] = [
    7, 11, 13, 14, 19, 21, 22, 25, 26, 28, 35, 37, 38, 41, 42, 44, 49, 50, 52, 56, 67, 69, 70,
    73, 74, 76, 81, 82, 84, 88, 97, 98,
];

pub(super) const MUTANTS: &[MutantInfo] = &[MutantInfo {
    name: "rtl_hcol_swap",
    side: MutantSide::Rtl,
    description: "decoder swaps the parity columns of data bits 3 and 7",
}];

/// XOR chain of the data bits feeding parity row `bit`, with each data
/// bit `j` rendered as `{base}[j]`.
fn parity_terms(base: &str, bit: u32, cols: &[u8; 32]) -> String {
    let terms: Vec<String> = (0..32)
        .filter(|&j| cols[j] >> bit & 1 == 1)
        .map(|j| format!("{base}[{j}]"))
        .collect();
    terms.join(" ^ ")
}

/// `{q6, ..., q0}` with `qi` the parity of row `i` over `base`.
fn parity_concat(base: &str, cols: &[u8; 32]) -> String {
    let rows: Vec<String> =
        (0..7).rev().map(|i| format!("({})", parity_terms(base, i, cols))).collect();
    format!("{{{}}}", rows.join(", "))
}

/// 32-bit mask with bit `j` set iff the syndrome equals column `j`.
fn flip_concat(syn: &str, cols: &[u8; 32]) -> String {
    let bits: Vec<String> =
        (0..32).rev().map(|j| format!("{syn} == 7'd{}", cols[j])).collect();
    format!("{{{}}}", bits.join(", "))
}

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("ecc_secded", &["d"])?;
    let d = selector.get("d", 32);
    if d != 32 {
        return Err(DesignError::BadParam {
            kind: "ecc_secded",
            name: "d",
            value: d,
            reason: "the bundled parity matrix is for 32 data bits",
        });
    }
    let name = "ecc_secded_d32".to_string();
    let u = Ty::unsigned;

    // The decoder's view of the matrix; the mutant swaps two columns
    // there while the encoder keeps the real one.
    let mut dec_cols = COLS;
    if mutant == Some("rtl_hcol_swap") {
        dec_cols.swap(3, 7);
    }

    let mut locals: Vec<(String, String)> = Vec::new();
    for i in 0..7u32 {
        locals.push((format!("p{i}"), parity_terms("d_i", i, &COLS)));
    }
    locals.push(("c".into(), "{p6, p5, p4, p3, p2, p1, p0, d_i}".into()));
    locals.push(("r".into(), "c ^ e_i".into()));
    locals.push(("rd".into(), "r[31:0]".into()));
    locals.push(("rp".into(), "r[38:32]".into()));
    locals.push(("s".into(), format!("{} ^ rp", parity_concat("rd", &COLS))));
    locals.push(("flipmask".into(), flip_concat("s", &COLS)));
    locals.push(("any".into(), "orr(s)".into()));
    locals.push(("col_hit".into(), "orr(flipmask)".into()));
    locals.push(("unit1".into(), "(s != 0) && ((s & (s - 1)) == 0)".into()));
    let alg = AlgSpec {
        name: name.clone(),
        inputs: vec![Port::new("d_i", u(32)), Port::new("e_i", u(39))],
        locals,
        outputs: vec![
            (Port::new("corrected_o", u(32)), "rd ^ flipmask".into()),
            (
                Port::new("status_o", u(2)),
                "any == 0 ? 2'd0 : (col_hit || unit1) ? 2'd1 : 2'd2".into(),
            ),
        ],
    };

    let received = "(c1 ^ e1)";
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![Port::new("d_i", u(32)), Port::new("e_i", u(39))],
        regs: vec![
            RegSpec {
                name: "c1".into(),
                ty: u(39),
                reset: BitVec::zero(39),
                next: format!("{{{}, d_i}}", parity_concat("d_i", &COLS)),
            },
            RegSpec { name: "e1".into(), ty: u(39), reset: BitVec::zero(39), next: "e_i".into() },
            RegSpec {
                name: "rd2".into(),
                ty: u(32),
                reset: BitVec::zero(32),
                next: format!("{received}[31:0]"),
            },
            RegSpec {
                name: "syn2".into(),
                ty: u(7),
                reset: BitVec::zero(7),
                next: format!(
                    "{} ^ ({received}[38:32])",
                    parity_concat(received, &dec_cols)
                ),
            },
            RegSpec {
                name: "corrected3".into(),
                ty: u(32),
                reset: BitVec::zero(32),
                next: format!("rd2 ^ {}", flip_concat("syn2", &dec_cols)),
            },
            RegSpec {
                name: "status3".into(),
                ty: u(2),
                reset: BitVec::zero(2),
                next: format!(
                    "syn2 == 0 ? 2'd0 : (orr({}) || ((syn2 != 0) && ((syn2 & (syn2 - 1)) == 0))) ? 2'd1 : 2'd2",
                    flip_concat("syn2", &dec_cols)
                ),
            },
        ],
        outputs: vec![
            (Port::new("corrected_o", u(32)), "corrected3".into()),
            (Port::new("status_o", u(2)), "status3".into()),
        ],
    };

    let two_flips =
        "((e_i & (e_i - 1)) != 0) && (((e_i & (e_i - 1)) & ((e_i & (e_i - 1)) - 1)) == 0)";
    let instance = Instance {
        name: name.clone(),
        inputs: vec![
            PortDecl { name: "d_i".into(), width: 32, signed: false },
            PortDecl { name: "e_i".into(), width: 39, signed: false },
        ],
        outputs: vec![
            PortDecl { name: "corrected_o".into(), width: 32, signed: false },
            PortDecl { name: "status_o".into(), width: 2, signed: false },
        ],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings: vec![
            PortMap { alg: "d_i".into(), rtl: "d_i".into(), delay: 0 },
            PortMap { alg: "e_i".into(), rtl: "e_i".into(), delay: 0 },
            PortMap { alg: "corrected_o".into(), rtl: "corrected_o".into(), delay: 3 },
            PortMap { alg: "status_o".into(), rtl: "status_o".into(), delay: 3 },
        ],
        requirements: vec![
            Requirement {
                name: "No error".into(),
                guard: "e_i == 0".into(),
                action: "(status_o == 0) && (corrected_o == d_i)".into(),
                labels: vec!["Clean status".into(), "Data intact".into()],
            },
            Requirement {
                name: "Single error corrected".into(),
                guard: "(e_i != 0) && ((e_i & (e_i - 1)) == 0)".into(),
                action: "(status_o == 1) && (corrected_o == d_i)".into(),
                labels: vec!["Corrected status".into(), "Data recovered".into()],
            },
            Requirement {
                name: "Double error detected".into(),
                guard: two_flips.into(),
                action: "status_o == 2".into(),
                labels: Vec::new(),
            },
        ],
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, "ecc_secded:d=32".to_string(), Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::super::{mk_design, mk_mutant, simulate_alg, simulate_rtl, Selector};
    use super::COLS;
    use crate::expr::{Bindings, BitVec};

    /// Host-side encoder, bit math only.
    fn encode(d: u64) -> u64 {
        let mut par = 0u64;
        for i in 0..7 {
            let row: u64 =
                (0..32).filter(|&j| COLS[j] >> i & 1 == 1).map(|j| (d >> j) & 1).sum::<u64>() & 1;
            par |= row << i;
        }
        (par << 32) | d
    }

    /// Host-side decoder returning (corrected data, status).
    fn decode(r: u64) -> (u64, u64) {
        let rd = r & 0xffff_ffff;
        let syn = (encode(rd) >> 32) ^ (r >> 32);
        if syn == 0 {
            return (rd, 0);
        }
        if let Some(j) = (0..32).find(|&j| u64::from(COLS[j]) == syn) {
            return (rd ^ (1 << j), 1);
        }
        if syn.count_ones() == 1 {
            return (rd, 1);
        }
        (rd, 2)
    }

    fn run_alg(d: u64, e: u64) -> (u64, u64) {
        use std::sync::OnceLock;
        static BUNDLE: OnceLock<super::super::DesignBundle> = OnceLock::new();
        let bundle = BUNDLE
            .get_or_init(|| mk_design(&Selector::parse("ecc_secded").unwrap()).unwrap());
        let inputs: Bindings = [
            ("d_i".to_string(), BitVec::new(32, d.into())),
            ("e_i".to_string(), BitVec::new(39, e.into())),
        ]
        .into_iter()
        .collect();
        let out = simulate_alg(&bundle.alg, &inputs).unwrap();
        (out["corrected_o"].value() as u64, out["status_o"].value() as u64)
    }

    #[test]
    fn matrix_columns_are_distinct_weight_three_non_identity() {
        for (j, &c) in COLS.iter().enumerate() {
            assert_eq!(c.count_ones(), 3, "column {j}");
            assert!(c < 128);
            assert_eq!(COLS.iter().filter(|&&o| o == c).count(), 1, "column {j} repeats");
        }
    }

    #[test]
    fn clean_word_passes_through() {
        for d in [0u64, 1, 0xdead_beef, 0xffff_ffff, 0x8000_0001] {
            assert_eq!(run_alg(d, 0), (d, 0));
        }
    }

    #[test]
    fn every_single_flip_is_corrected() {
        for d in [0u64, 0xdead_beef, 0xffff_ffff] {
            for j in 0..39 {
                let (corrected, status) = run_alg(d, 1 << j);
                assert_eq!((corrected, status), (d, 1), "d={d:#x} flip bit {j}");
            }
        }
    }

    #[test]
    fn double_flips_are_detected_not_miscorrected() {
        let d = 0x1234_5678u64;
        for (i, j) in [(0u32, 1u32), (0, 38), (31, 32), (5, 17), (37, 38)] {
            let (_, status) = run_alg(d, (1 << i) | (1 << j));
            assert_eq!(status, 2, "flips {i},{j}");
        }
    }

    #[test]
    fn algorithm_agrees_with_host_decoder_on_arbitrary_masks() {
        // any error mass at all, not only the patterns the requirements
        // talk about; both sides must implement the same total function
        let mut x = 0x9e3779b97f4a7c15u64;
        let mut step = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        for _ in 0..200 {
            let d = step() & 0xffff_ffff;
            let e = step() & 0x7f_ffff_ffff;
            let r = encode(d) ^ e;
            assert_eq!(run_alg(d, e), decode(r), "d={d:#x} e={e:#x}");
        }
    }

    #[test]
    fn pipeline_matches_algorithm_after_three_cycles() {
        let bundle = mk_design(&Selector::parse("ecc_secded").unwrap()).unwrap();
        for (d, e) in [(0xdead_beefu64, 0u64), (0xdead_beef, 1 << 20), (0x0f0f_0f0f, 0b11 << 7)] {
            let inputs: Bindings = [
                ("d_i".to_string(), BitVec::new(32, (d).into())),
                ("e_i".to_string(), BitVec::new(39, (e).into())),
            ]
            .into_iter()
            .collect();
            let trace = simulate_rtl(&bundle.rtl, &vec![inputs.clone(); 4]).unwrap();
            let alg_out = simulate_alg(&bundle.alg, &inputs).unwrap();
            assert_eq!(trace.outputs[3]["corrected_o"], alg_out["corrected_o"]);
            assert_eq!(trace.outputs[3]["status_o"], alg_out["status_o"]);
        }
    }

    #[test]
    fn column_swap_mutant_reports_phantom_errors() {
        let bad = mk_mutant(&Selector::parse("ecc_secded").unwrap(), "rtl_hcol_swap").unwrap();
        // data where bits 3 and 7 differ confuses the mutant decoder
        // even with no error injected at all
        let d = 1u64 << 3;
        let inputs: Bindings = [
            ("d_i".to_string(), BitVec::new(32, d.into())),
            ("e_i".to_string(), BitVec::new(39, 0)),
        ]
        .into_iter()
        .collect();
        let trace = simulate_rtl(&bad.rtl, &vec![inputs; 4]).unwrap();
        assert_ne!(trace.outputs[3]["status_o"].value(), 0);
    }
}
