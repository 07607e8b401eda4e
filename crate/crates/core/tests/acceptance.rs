//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) before asserting, so the full verdict list appears in
//! the test log whether or not a criterion holds.

use std::io::Write;
use std::time::{Duration, Instant};

use collres::oracle::{compare_signal, comparison_points, worst_relative};
use collres::propagators::Propagators;
use collres::scan::{
    find_extrema, ridge_detect_matrix, scan_1d, scan_2d, ExtremaOptions, RidgeKind, RidgeOptions, RowAxis,
};
use collres::setups::{self, Species};
use collres::{
    CouplingContext, Include, PhaseProfile, QuadratureSpec, Sample, SignalModel, SignalOptions, Site, TermGroups, C64,
};

fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!("criterion {n}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    // bypasses the harness capture so every verdict is logged
    std::io::stderr().write_all(line.as_bytes()).expect("stderr");
}

fn census_options() -> ExtremaOptions<f64> {
    ExtremaOptions { pair_window: 3.0 * (setups::GAMMA + setups::GAMMA), ..ExtremaOptions::for_gamma(setups::GAMMA) }
}

fn features(samples: &[Sample], field: impl Fn(&Sample) -> f64) -> Vec<f64> {
    let w: Vec<f64> = samples.iter().map(|s| s.omega).collect();
    let v: Vec<f64> = samples.iter().map(field).collect();
    find_extrema(&w, &v, &census_options()).unwrap().into_iter().map(|e| e.omega).collect()
}

fn near(found: &[f64], target: f64, tol: f64) -> bool {
    found.iter().any(|x| (x - target).abs() <= tol)
}

#[test]
fn criterion_1_resonance_census() {
    let t = Instant::now();
    let sys = setups::reference_pair();
    let pulse = setups::pulse(PhaseProfile::constant(0.0));
    let s = scan_1d(&setups::line_grid(5.0), &sys, &pulse).unwrap();
    let total = features(&s, |x| x.s_total);
    let s_i = features(&s, |x| x.s_i);
    let elapsed = t.elapsed();

    let targets = [2000.0, 4000.0, 6000.0, 11000.0, 13000.0, 18000.0, 20000.0, 22000.0];
    let missing: Vec<f64> = targets.iter().copied().filter(|&x| !near(&total, x, 100.0)).collect();
    let spurious: Vec<f64> = [18000.0, 22000.0].into_iter().filter(|&x| near(&s_i, x, 200.0)).collect();
    let fast = elapsed < Duration::from_secs(10);
    let pass = missing.is_empty() && spurious.is_empty() && fast;
    verdict(
        1,
        pass,
        &format!(
            "missing {missing:?}; S_I-only features near {spurious:?}; runtime {elapsed:.2?}; r/lambda_a = {}",
            setups::DEFAULT_R_OVER_LAMBDA
        ),
    );
    assert!(pass, "total features {total:?}");
}

#[derive(Debug)]
struct RidgeCheck {
    label: String,
    found: Vec<f64>,
    expected: Vec<f64>,
}

impl RidgeCheck {
    fn ok(&self) -> bool {
        self.found.len() == self.expected.len() && self.expected.iter().all(|&x| near(&self.found, x, 200.0))
    }
}

#[test]
fn criterion_2_residue_map_ridges() {
    let t = Instant::now();
    let n = 300;
    let opts = RidgeOptions::for_linewidth(2.0 * setups::GAMMA);
    let pulse = setups::chirped_pulse(setups::RESIDUE_C2);
    let mut checks = Vec::new();
    for species in Species::ALL {
        let sys = setups::pair(species, setups::DEFAULT_R_OVER_LAMBDA);
        let sum = scan_2d(&setups::residue_grid(RowAxis::Sum, n), &sys, &pulse).unwrap();
        let diff = scan_2d(&setups::residue_grid(RowAxis::Difference, n), &sys, &pulse).unwrap();
        let horizontal = ridge_detect_matrix(&sum, |s| s.s_total, &opts).unwrap().intercepts(RidgeKind::Horizontal);
        let raman = ridge_detect_matrix(&diff, |s| s.s_total, &opts).unwrap().intercepts(RidgeKind::Raman);
        let (tpa, rr) = match species {
            Species::AB => (vec![22000.0, 24000.0, 26000.0], vec![-2000.0, 0.0, 2000.0]),
            Species::AA => (vec![26000.0], vec![0.0]),
            Species::BB => (vec![22000.0], vec![0.0]),
        };
        checks.push(RidgeCheck { label: format!("{} two-photon", species.label()), found: horizontal, expected: tpa });
        checks.push(RidgeCheck { label: format!("{} Raman", species.label()), found: raman, expected: rr });
        if species == Species::AB {
            let s_i = ridge_detect_matrix(&sum, |s| s.s_i, &opts).unwrap().intercepts(RidgeKind::Horizontal);
            checks.push(RidgeCheck { label: "A/B S_I-only two-photon".into(), found: s_i, expected: vec![24000.0] });
        }
    }
    let elapsed = t.elapsed();
    let fast = elapsed < Duration::from_secs(300);
    let pass = checks.iter().all(RidgeCheck::ok) && fast;
    let detail: Vec<String> = checks
        .iter()
        .map(|c| {
            let f: Vec<String> = c.found.iter().map(|x| format!("{x:.0}")).collect();
            format!("{} [{}] {}", c.label, f.join(" "), if c.ok() { "ok" } else { "bad" })
        })
        .collect();
    verdict(2, pass, &format!("{}; runtime {elapsed:.2?}", detail.join("; ")));
    assert!(pass, "{checks:?}");
}

#[test]
fn criterion_3_oracle_equivalence() {
    let sys = setups::reference_pair();
    let spec = QuadratureSpec::default();
    let phases = [
        ("constant pi/2", PhaseProfile::constant(std::f64::consts::FRAC_PI_2)),
        ("delay 33 fs", PhaseProfile::delay_fs(33.0)),
        ("chirp 5e-9", PhaseProfile::chirp(5e-9, setups::CHIRP_REFERENCE)),
    ];
    let points = comparison_points::<f64>(&sys, 50, (1000.0, 27000.0), (2000.0, 16000.0), setups::GAMMA, 7).unwrap();
    let mut worst = Vec::new();
    for (name, phase) in phases {
        let model = SignalModel::new(sys.clone(), setups::pulse(phase)).unwrap();
        for (part, include) in [("S_I", Include::SI), ("S_II", Include::SII)] {
            let rows = compare_signal(&model, &spec, &points, include).unwrap();
            worst.push((format!("{name} {part}"), worst_relative(&rows)));
        }
    }
    let pass = worst.iter().all(|w| w.1 <= 1e-4);
    let detail: Vec<String> = worst.iter().map(|(n, w)| format!("{n} {w:.2e}")).collect();
    verdict(3, pass, &format!("worst relative difference: {}", detail.join(", ")));
    assert!(pass, "{worst:?}");
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

#[test]
fn criterion_4_structural_identities() {
    let tol = 1e-12;
    let sys = setups::reference_pair();
    let omegas: Vec<f64> = (0..40).map(|k| 1237.0 + 640.0 * k as f64).collect();
    let mut failures = Vec::new();

    let chirped = SignalModel::new(sys.clone(), setups::chirped_pulse(setups::RESIDUE_C2)).unwrap();
    for &w in &omegas {
        let r0 = chirped.residue_at(w, setups::OMEGA_P, 0.0).unwrap();
        let rp = chirped.residue_at(w, setups::OMEGA_P, 5e-9).unwrap();
        let rm = chirped.residue_at(w, setups::OMEGA_P, -5e-9).unwrap();
        if r0 != 0.0 {
            failures.push(format!("S_r(C2=0) = {r0:e} at {w}"));
        }
        if rel(rp, -rm) > tol {
            failures.push(format!("S_r not odd in C2 at {w}"));
        }
    }

    let plain = SignalModel::new(sys.clone(), setups::pulse(PhaseProfile::constant(0.3))).unwrap();
    let doubled = SignalModel::new(sys.clone().with_n_pairs(3.0), setups::pulse(PhaseProfile::constant(0.3))).unwrap();
    for &w in &omegas {
        let s = plain.sample(w).unwrap();
        if rel(s.s_total, s.s_i + s.s_ii) > tol {
            failures.push(format!("S_total != S_I + S_II at {w}"));
        }
        let d = doubled.sample(w).unwrap();
        if rel(d.s_total, 3.0 * s.s_total) > tol {
            failures.push(format!("not linear in n_pairs at {w}"));
        }
    }

    let props = Propagators::new(&sys);
    let cc = CouplingContext::new(&sys).unwrap();
    for &w in &omegas {
        let z = C64::new(w, 0.0);
        for s in Site::ALL {
            let (g, gd) = (props.g(s, z).unwrap(), props.gd(s, z).unwrap());
            if (gd - g.conj()).norm() > tol * g.norm() {
                failures.push(format!("G dagger != conj G at {w}"));
            }
            for t in Site::ALL {
                let l = cc.coupling_l(s, t, z).unwrap();
                let m = cc.coupling_m(s, t, z).unwrap();
                if rel(m.re, l.re / 2.0) > tol {
                    failures.push(format!("Re M != L/2 for {s:?}{t:?} at {w}"));
                }
            }
        }
        let la = cc.coupling_l(Site::A, Site::A, z).unwrap();
        for e in 1..=6 {
            let far = sys.clone().with_distance(sys.distance() * 10f64.powi(e));
            let lf = CouplingContext::new(&far).unwrap().coupling_l(Site::A, Site::A, z).unwrap();
            if (lf - la).norm() > tol * la.norm() {
                failures.push(format!("L_aa depends on r at {w}"));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(4, pass, &format!("{} violations at tolerance {tol:e}", failures.len()));
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_5_distance_monotonicity() {
    let pulse = setups::pulse(PhaseProfile::constant(0.0));
    let grid = setups::line_grid(5.0);
    let mut maxima = Vec::new();
    let mut last = Vec::new();
    for r in setups::DISTANCES {
        let s = scan_1d(&grid, &setups::pair(Species::AB, r), &pulse).unwrap();
        maxima.push((r, s.iter().map(|x| x.s_ii.abs()).fold(0.0, f64::max)));
        last = s;
    }
    let decreasing = maxima.windows(2).all(|p| p[1].1 < p[0].1);
    let s_ii = features(&last, |x| x.s_ii);
    let lingering: Vec<f64> = [18000.0, 22000.0].into_iter().filter(|&x| near(&s_ii, x, 200.0)).collect();
    let pass = decreasing && lingering.is_empty();
    let m: Vec<String> = maxima.iter().map(|(r, m)| format!("{r}: {m:.3e}")).collect();
    verdict(5, pass, &format!("max|S_II| {}; features at r/lambda_a = 0.1 near {lingering:?}", m.join(", ")));
    assert!(pass);
}

/// Least-squares slope of `log|y|` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[test]
fn criterion_6_amplitude_grading() {
    let sys = setups::reference_pair();
    let amps = [1.0, 2.0, 4.0];
    let groups = [
        (1.0, TermGroups { e2_cubed: true, e2_squared: false }),
        (2.0, TermGroups { e2_cubed: false, e2_squared: true }),
    ];
    let mut worst: f64 = 0.0;
    for (expected, g) in groups {
        for w in [2500.0, 9000.0, 17000.0, 20500.0] {
            let values: Vec<f64> = amps
                .iter()
                .map(|&e1| {
                    let pulse = setups::pulse(PhaseProfile::constant(0.7)).with_amplitudes(e1, 1.5);
                    let options = SignalOptions { groups: g, ..SignalOptions::default() };
                    SignalModel::with_options(sys.clone(), pulse, options).unwrap().sample(w).unwrap().s_total
                })
                .collect();
            worst = worst.max((loglog_slope(&amps, &values) - expected).abs());
        }
    }
    let pass = worst < 1e-6;
    verdict(6, pass, &format!("largest exponent error {worst:.2e}"));
    assert!(pass);
}
