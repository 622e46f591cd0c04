//! FIR filter with a shift-register tap line.
//!
//! The algorithm sees one whole input window `x0_i..xN_i` at once and
//! computes the dot product with fixed odd coefficients. The RTL has a
//! single stream input `x_in`; the window exists only implicitly, as
//! the last `n + 1` values that went past. The port map encodes the
//! stream timing: tap `k` of the window is the stream input from `k`
//! cycles before the newest one, so alg input `xk_i` maps to `x_in`
//! with delay `n - k`. This is the one bundled design where a single
//! RTL input is legitimately mapped at several delays.

use crate::expr::{BitVec, Ty};
use crate::model::{
    ClockSpec, Instance, PortDecl, PortMap, Requirement, ResetSpec,
};

use super::{AlgSpec, BuildParts, DesignError, MutantInfo, MutantSide, Port, RegSpec, RtlSpec, Selector};

pub(super) const MUTANTS: &[MutantInfo] = &[
    MutantInfo {
        name: "alg_coefficient_off",
        side: MutantSide::Alg,
        description: "algorithm uses an even coefficient for the newest tap",
    },
    MutantInfo {
        name: "rtl_tap_shift",
        side: MutantSide::Rtl,
        description: "accumulator pairs every coefficient with the neighbouring tap",
    },
];

/// Coefficient of tap `k`: the odd numbers, wrapped to the data width.
fn coeff(k: u32, w: u32) -> u128 {
    u128::from(2 * k + 1) & ((1u128 << w) - 1)
}

pub(super) fn build(selector: &Selector, mutant: Option<&str>) -> Result<BuildParts, DesignError> {
    selector.take("fir", &["n", "w"])?;
    let n = selector.get("n", 3);
    if !(1..=8).contains(&n) {
        return Err(DesignError::BadParam {
            kind: "fir",
            name: "n",
            value: n,
            reason: "supported filter orders are 1..=8",
        });
    }
    let w = selector.get("w", 8);
    if !(2..=16).contains(&w) {
        return Err(DesignError::BadParam {
            kind: "fir",
            name: "w",
            value: w,
            reason: "supported widths are 2..=16",
        });
    }
    let name = format!("fir_n{n}_w{w}");
    let u = Ty::unsigned;

    let alg_coeff = |k: u32| match mutant {
        Some("alg_coefficient_off") if k == 0 => coeff(0, w) + 1,
        _ => coeff(k, w),
    };
    let dot: Vec<String> =
        (0..=n).map(|k| format!("x{k}_i * {w}'d{}", alg_coeff(k))).collect();
    let alg = AlgSpec {
        name: name.clone(),
        inputs: (0..=n).map(|k| Port::new(format!("x{k}_i"), u(w))).collect(),
        locals: vec![],
        outputs: vec![(Port::new("y_o", u(w)), dot.join(" + "))],
    };

    let zero_guard: Vec<String> = (0..=n).map(|k| format!("x{k}_i == 0")).collect();
    let tail_guard: Vec<String> = (1..=n).map(|k| format!("x{k}_i == 0")).collect();
    let head_guard: Vec<String> = (0..n).map(|k| format!("x{k}_i == 0")).collect();
    let requirements = vec![
        Requirement {
            name: "Zero window".into(),
            guard: zero_guard.join(" && "),
            action: "y_o == 0".into(),
            labels: Vec::new(),
        },
        Requirement {
            name: "Impulse response".into(),
            guard: tail_guard.join(" && "),
            action: format!("y_o == x0_i * {w}'d{}", coeff(0, w)),
            labels: Vec::new(),
        },
        Requirement {
            name: "Oldest tap".into(),
            guard: head_guard.join(" && "),
            action: format!("y_o == x{n}_i * {w}'d{}", coeff(n, w)),
            labels: Vec::new(),
        },
    ];

    // win0 holds the newest sample, win{n} the oldest; acc registers the
    // dot product one cycle later.
    let rtl_tap = |k: u32| match mutant {
        Some("rtl_tap_shift") => (k + 1) % (n + 1),
        _ => k,
    };
    let mut regs: Vec<RegSpec> = (0..=n)
        .map(|k| RegSpec {
            name: format!("win{k}"),
            ty: u(w),
            reset: BitVec::zero(w),
            next: if k == 0 { "x_in".to_string() } else { format!("win{}", k - 1) },
        })
        .collect();
    let acc: Vec<String> =
        (0..=n).map(|k| format!("win{} * {w}'d{}", rtl_tap(k), coeff(k, w))).collect();
    regs.push(RegSpec {
        name: "acc".into(),
        ty: u(w),
        reset: BitVec::zero(w),
        next: acc.join(" + "),
    });
    let rtl = RtlSpec {
        name: name.clone(),
        clock: "clk_i".into(),
        reset: "rst_i".into(),
        reset_active_high: true,
        inputs: vec![Port::new("x_in", u(w))],
        regs,
        outputs: vec![(Port::new("y_o", u(w)), "acc".into())],
    };

    // Tap k is the stream value from k cycles before the newest sample,
    // and the dot product takes two cycles to reach y_o after the
    // newest sample enters.
    let mut mappings: Vec<PortMap> = (0..=n)
        .map(|k| PortMap { alg: format!("x{k}_i"), rtl: "x_in".into(), delay: n - k })
        .collect();
    mappings.push(PortMap { alg: "y_o".into(), rtl: "y_o".into(), delay: n + 2 });

    let instance = Instance {
        name: name.clone(),
        inputs: (0..=n)
            .map(|k| PortDecl { name: format!("x{k}_i"), width: w, signed: false })
            .collect(),
        outputs: vec![PortDecl { name: "y_o".into(), width: w, signed: false }],
        clock: Some(ClockSpec { rtl: "clk_i".into() }),
        reset: Some(ResetSpec { rtl: "rst_i".into(), active_high: true }),
        mappings,
        requirements,
        condition: None,
        stalling: None,
        constraints: Vec::new(),
        helpers: Vec::new(),
    };

    Ok((alg, rtl, instance, format!("fir:n={n},w={w}"), Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::super::{mk_design, simulate_alg, simulate_rtl, Selector};
    use super::coeff;
    use crate::expr::{Bindings, BitVec};

    fn dot(window: &[u128], w: u32) -> u128 {
        let mask = (1u128 << w) - 1;
        window
            .iter()
            .enumerate()
            .fold(0u128, |acc, (k, x)| (acc + x * coeff(k as u32, w)) & mask)
    }

    #[test]
    fn algorithm_is_the_masked_dot_product() {
        let n = 3u32;
        let w = 8u32;
        let bundle = mk_design(&Selector::parse(&format!("fir:n={n},w={w}")).unwrap()).unwrap();
        for window in [[0u128, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [10, 20, 30, 40], [255, 255, 255, 255]] {
            let inputs: Bindings = window
                .iter()
                .enumerate()
                .map(|(k, x)| (format!("x{k}_i"), BitVec::new(w, *x)))
                .collect();
            let out = simulate_alg(&bundle.alg, &inputs).unwrap();
            assert_eq!(out["y_o"].value(), dot(&window, w), "window {window:?}");
        }
    }

    #[test]
    fn stream_timing_matches_the_port_map() {
        // Feed a stream and check that the output at cycle t is the dot
        // product of the window that entered by cycle t - 2, exactly the
        // relation the mapping delays promise.
        let n = 3usize;
        let w = 8u32;
        let bundle = mk_design(&Selector::parse(&format!("fir:n={n},w={w}")).unwrap()).unwrap();
        let stream: Vec<u128> = vec![7, 1, 0, 200, 13, 5, 89, 2, 250, 77];
        let cycles: Vec<Bindings> = stream
            .iter()
            .map(|x| [("x_in".to_string(), BitVec::new(w, *x))].into_iter().collect())
            .collect();
        let trace = simulate_rtl(&bundle.rtl, &cycles).unwrap();
        for t in (n + 2)..stream.len() {
            // window tap k = stream value k cycles before the newest
            // one, which entered at cycle t - 2
            let window: Vec<u128> = (0..=n).map(|k| stream[t - 2 - k]).collect();
            assert_eq!(trace.outputs[t]["y_o"].value(), dot(&window, w), "cycle {t}");
        }
    }

    #[test]
    fn mutants_disagree_with_the_reference_on_some_window() {
        let selector = Selector::parse("fir:n=2,w=8").unwrap();
        let good = mk_design(&selector).unwrap();
        for m in super::MUTANTS {
            let bad = super::super::mk_mutant(&selector, m.name).unwrap();
            let mut differs = false;
            for x0 in [0u128, 1, 3] {
                for x1 in [0u128, 1, 5] {
                    for x2 in [0u128, 1, 7] {
                        let inputs: Bindings = [
                            ("x0_i".to_string(), BitVec::new(8, x0)),
                            ("x1_i".to_string(), BitVec::new(8, x1)),
                            ("x2_i".to_string(), BitVec::new(8, x2)),
                        ]
                        .into_iter()
                        .collect();
                        let g = simulate_alg(&good.alg, &inputs).unwrap()["y_o"];
                        let b = match m.side {
                            super::MutantSide::Alg => {
                                simulate_alg(&bad.alg, &inputs).unwrap()["y_o"]
                            }
                            super::MutantSide::Rtl => {
                                // run the window through the stream input
                                let cycles: Vec<Bindings> = [x2, x1, x0, 0, 0]
                                    .iter()
                                    .map(|x| {
                                        [("x_in".to_string(), BitVec::new(8, *x))]
                                            .into_iter()
                                            .collect()
                                    })
                                    .collect();
                                simulate_rtl(&bad.rtl, &cycles).unwrap().outputs[4]["y_o"]
                            }
                        };
                        if g != b {
                            differs = true;
                        }
                    }
                }
            }
            assert!(differs, "{} is indistinguishable", m.name);
        }
    }
}
