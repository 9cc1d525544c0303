//! Acceptance suite. Each test covers one criterion, prints its individual checks and a
//! final `criterion N: PASS|FAIL` line, and fails when any check fails.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1` to see the
//! report for passing criteria too.

use censored_regret::bernstein::{psi_bsaa, PsiSpec};
use censored_regret::bsaa::worst_case_regret_bsaa;
use censored_regret::certificate::RegretCertificate;
use censored_regret::design::{grid_lp, solve_design, GridSpec};
use censored_regret::km::{psi_km, sample_complexity_km, worst_case_regret_km, LatticeSpec};
use censored_regret::model::{CensoringDesign, CostParameters, StepCdf};
use censored_regret::oracle::{action_cdf, exact_action_distribution, exact_expected_regret, integral_regret, mc_expected_regret};
use censored_regret::policies::Policy;

const BSAA_TOL: f64 = 1e-4;
const MC_TRIALS: u64 = 20_000;

struct Report {
    id: u8,
    checks: Vec<(String, bool)>,
}

impl Report {
    fn new(id: u8) -> Self {
        Self { id, checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.checks.push((detail, ok));
    }

    fn finish(self) {
        for (detail, ok) in &self.checks {
            println!("  [{}] {detail}", if *ok { "ok" } else { "FAIL" });
        }
        let pass = self.checks.iter().all(|c| c.1);
        println!("criterion {}: {}", self.id, if pass { "PASS" } else { "FAIL" });
        assert!(pass, "criterion {} failed", self.id);
    }
}

fn q_costs(q: f64) -> CostParameters {
    CostParameters::from_fractile(q).unwrap()
}

fn km_cert(x: f64, n: usize, m: usize, q: f64) -> RegretCertificate {
    let design = CensoringDesign::exploration(x, n, m).unwrap();
    worst_case_regret_km(&design, &q_costs(q), &LatticeSpec::default()).unwrap()
}

fn bsaa_cert(design: &CensoringDesign, q: f64) -> RegretCertificate {
    worst_case_regret_bsaa(design, &q_costs(q), BSAA_TOL).unwrap()
}

const SAMPLE_COMPLEXITY_CASES: [(f64, usize, usize); 3] = [(0.78, 159, 5), (0.80, 58, 3), (0.82, 29, 2)];

fn sample_complexity_target() -> f64 {
    0.25 * 0.9 * (1.0 - 0.9)
}

#[test]
fn criterion_1_sample_complexity() {
    let mut r = Report::new(1);
    let target = sample_complexity_target();
    for (x, expected, slack) in SAMPLE_COMPLEXITY_CASES {
        let n = sample_complexity_km(x, 0.9, target, 1000, &LatticeSpec::default()).unwrap();
        let ok = n.map_or(false, |n| n.abs_diff(expected) <= slack);
        r.check(ok, format!("x={x}: minimal n = {n:?}, expected {expected} +/- {slack}"));
    }
    r.finish();
}

#[test]
fn criterion_2_exploration_leverage() {
    let mut r = Report::new(2);
    let base = km_cert(0.7, 100, 0, 0.8).value;
    let one = km_cert(0.7, 100, 1, 0.8).value;
    let five = km_cert(0.7, 100, 5, 0.8).value;
    let r1 = one / base;
    let r5 = five / base;
    r.check((r1 - 0.80).abs() <= 0.05, format!("m=1 / m=0 = {r1:.4}, expected 0.80 +/- 0.05"));
    r.check(
        (r5 - 1.0 / 3.0).abs() <= 0.10 / 3.0,
        format!("m=5 / m=0 = {r5:.4}, expected 1/3 +/- 10% relative"),
    );
    r.finish();
}

#[test]
fn criterion_3_near_uncensored() {
    let mut r = Report::new(3);
    let saa = bsaa_cert(&CensoringDesign::single(1.0, 100).unwrap(), 0.8).value;
    for (x, rho) in [(0.7, 0.50), (0.8, 0.25), (0.9, 0.125)] {
        let km = km_cert(x, 100, 10, 0.8).value;
        let limit = 1.0 + rho + 0.05;
        r.check(km <= limit * saa, format!("x={x}: KM/SAA = {:.4} <= {limit}", km / saa));
    }
    r.finish();
}

#[test]
fn criterion_4_bsaa_degradation() {
    let mut r = Report::new(4);
    let mut prev: Option<(usize, RegretCertificate)> = None;
    for n in [20, 40, 60, 80, 100] {
        let cert = bsaa_cert(&CensoringDesign::exploration(0.7, n, 1).unwrap(), 0.8);
        if let Some((pn, p)) = &prev {
            r.check(
                cert.value >= p.value - p.grid_error_bound,
                format!("n={pn} -> {n}: {:.6} -> {:.6}", p.value, cert.value),
            );
        }
        prev = Some((n, cert));
    }
    let values: Vec<f64> = [0, 1, 2, 5, 10]
        .iter()
        .map(|&m| bsaa_cert(&CensoringDesign::exploration(0.7, 100, m).unwrap(), 0.8).value)
        .collect();
    for (m, v) in [0, 1, 2, 5, 10].iter().zip(&values) {
        r.check(
            (v - values[0]).abs() <= 0.10 * values[0],
            format!("n=100 m={m}: {v:.6} within 10% of m=0 value {:.6}", values[0]),
        );
    }
    r.finish();
}

#[test]
fn criterion_5_design_optimization() {
    let mut r = Report::new(5);
    for budget in 2..=5 {
        let res = solve_design(budget, 0.8, 0.02).unwrap();
        let delta = GridSpec::for_budget(0.02, res.n_max).unwrap().delta();
        let all_ones = res.levels.iter().all(|&x| (x - 1.0).abs() <= delta);
        r.check(
            res.n_star == budget && all_ones,
            format!(
                "B={budget}: N*={} levels={:?} value={:.6} U_bar={:.6}",
                res.n_star,
                res.levels.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
                res.value,
                res.u_bar
            ),
        );
    }
    r.finish();
}

/// Designs with `n <= 6`, at most two levels from `{0.3, 0.6, 1.0}`.
fn small_designs() -> Vec<CensoringDesign> {
    let levels = [0.3, 0.6, 1.0];
    let mut out = Vec::new();
    for &x in &levels {
        for n in 1..=6 {
            out.push(CensoringDesign::single(x, n).unwrap());
        }
    }
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            for a in 1..=5 {
                for b in 1..=6 - a {
                    out.push(CensoringDesign::new(vec![levels[i], levels[j]], vec![a, b]).unwrap());
                }
            }
        }
    }
    out
}

/// Three-point distributions on `{0, 0.3, 0.45, 0.6, 1}` with probabilities on a 0.1 grid.
fn three_point_distributions() -> Vec<StepCdf> {
    let points = [0.0, 0.3, 0.45, 0.6, 1.0];
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            for c in b + 1..points.len() {
                for i in 0..=10 {
                    for j in 0..=10 - i {
                        let k = 10 - i - j;
                        let atoms = [
                            (points[a], i as f64 / 10.0),
                            (points[b], j as f64 / 10.0),
                            (points[c], k as f64 / 10.0),
                        ];
                        out.push(StepCdf::from_masses(&atoms).unwrap());
                    }
                }
            }
        }
    }
    out
}

/// Regret from the per-piece formulas when `F` is constant on every piece.
fn piecewise_formula(policy: Policy, design: &CensoringDesign, dist: &StepCdf, cp: &CostParameters) -> f64 {
    let q = cp.fractile();
    let bp = design.breakpoints();
    let widths = design.widths();
    let n = design.total();
    let cum = design.cumulative();
    let mut total = 0.0;
    for k in 0..=design.num_levels() {
        if widths[k] == 0.0 {
            continue;
        }
        let v = dist.eval(bp[k]);
        let psi = match policy {
            Policy::Bsaa => psi_bsaa(&PsiSpec::new(n, cum[k], q).unwrap(), v),
            Policy::Km => {
                let prefix: Vec<f64> = bp[1..=k].iter().map(|&x| dist.eval(x)).collect();
                psi_km(design, q, k, &prefix, v).unwrap()
            }
        };
        total += widths[k] * psi;
    }
    total * cp.scale()
}

#[test]
fn criterion_6_correctness_triangle() {
    let mut r = Report::new(6);
    let designs = small_designs();
    let dists = three_point_distributions();
    let tol = 1e-10;
    for q in [0.5, 0.8] {
        let cp = q_costs(q);
        for policy in [Policy::Bsaa, Policy::Km] {
            let (mut cases, mut formula_cases) = (0usize, 0usize);
            let (mut worst_integral, mut worst_formula, mut worst_cdf) = (0.0f64, 0.0f64, 0.0f64);
            for design in &designs {
                let mut pieces_const = Vec::new();
                for dist in &dists {
                    let exact = exact_expected_regret(policy, design, dist, &cp).unwrap().mean;
                    let integral = integral_regret(policy, design, dist, &cp).unwrap();
                    worst_integral = worst_integral.max((exact - integral).abs());

                    // action CDF formula against the enumerated action distribution
                    let actions = exact_action_distribution(policy, design, dist, q).unwrap();
                    let mut probes: Vec<f64> = design.breakpoints();
                    probes.extend_from_slice(dist.support());
                    for &z in &probes {
                        let enumerated: f64 = actions.iter().filter(|a| a.0 <= z).map(|a| a.1).sum();
                        let formula = action_cdf(policy, design, q, dist, z).unwrap();
                        worst_cdf = worst_cdf.max((enumerated - formula).abs());
                    }

                    let constant = dist.support().iter().all(|s| *s == 0.0 || *s == 1.0 || design.levels().contains(s));
                    if constant {
                        pieces_const.push((exact, dist.clone()));
                    }
                    cases += 1;
                }
                for (exact, dist) in pieces_const {
                    let formula = piecewise_formula(policy, design, &dist, &cp);
                    worst_formula = worst_formula.max((exact - formula).abs());
                    formula_cases += 1;
                }
            }
            r.check(
                worst_integral <= tol,
                format!("{policy} q={q}: enumeration vs integral over {cases} cases, max gap {worst_integral:.2e}"),
            );
            r.check(
                worst_cdf <= tol,
                format!("{policy} q={q}: enumerated vs formula action CDF, max gap {worst_cdf:.2e}"),
            );
            r.check(
                worst_formula <= tol,
                format!("{policy} q={q}: enumeration vs piece formulas over {formula_cases} cases, max gap {worst_formula:.2e}"),
            );
        }
    }
    r.finish();
}

/// Certificates produced by criteria 1 to 4, with their designs.
fn produced_certificates() -> Vec<(String, CensoringDesign, f64, RegretCertificate)> {
    let mut out = Vec::new();
    let target = sample_complexity_target();
    for (x, _, _) in SAMPLE_COMPLEXITY_CASES {
        if let Some(n) = sample_complexity_km(x, 0.9, target, 1000, &LatticeSpec::default()).unwrap() {
            let d = CensoringDesign::single(x, n).unwrap();
            let c = worst_case_regret_km(&d, &q_costs(0.9), &LatticeSpec::default()).unwrap();
            out.push((format!("c1 km x={x} n={n}"), d, 0.9, c));
        }
    }
    for m in [0, 1, 5] {
        let d = CensoringDesign::exploration(0.7, 100, m).unwrap();
        out.push((format!("c2 km x=0.7 m={m}"), d.clone(), 0.8, km_cert(0.7, 100, m, 0.8)));
    }
    for x in [0.7, 0.8, 0.9] {
        let d = CensoringDesign::exploration(x, 100, 10).unwrap();
        out.push((format!("c3 km x={x} m=10"), d, 0.8, km_cert(x, 100, 10, 0.8)));
    }
    let saa = CensoringDesign::single(1.0, 100).unwrap();
    out.push(("c3 saa n=100".into(), saa.clone(), 0.8, bsaa_cert(&saa, 0.8)));
    for n in [20, 40, 60, 80] {
        let d = CensoringDesign::exploration(0.7, n, 1).unwrap();
        out.push((format!("c4 bsaa n={n} m=1"), d.clone(), 0.8, bsaa_cert(&d, 0.8)));
    }
    for m in [0, 1, 2, 5, 10] {
        let d = CensoringDesign::exploration(0.7, 100, m).unwrap();
        out.push((format!("c4 bsaa n=100 m={m}"), d.clone(), 0.8, bsaa_cert(&d, 0.8)));
    }
    out
}

#[test]
fn criterion_7_certificate_soundness() {
    let mut r = Report::new(7);
    let certs = produced_certificates();
    for (i, (label, design, q, cert)) in certs.iter().enumerate() {
        let cp = q_costs(*q);
        let policy = cert.policy;
        let band = cert.grid_error_bound;
        let integral = integral_regret(policy, design, &cert.witness, &cp).unwrap();
        r.check(
            (integral - cert.value).abs() <= band,
            format!("{label}: witness regret {integral:.6} vs certificate {:.6} +/- {band:.1e}", cert.value),
        );
        let mc = mc_expected_regret(policy, design, &cert.witness, &cp, MC_TRIALS, 1000 + i as u64).unwrap();
        r.check(
            (mc.mean - cert.value).abs() <= band + 4.0 * mc.std_error,
            format!("{label}: Monte-Carlo {:.6} (se {:.1e}) vs certificate {:.6}", mc.mean, mc.std_error, cert.value),
        );
    }

    // no three-point adversary on a 0.01 grid beats a BSAA certificate
    for (label, design, q, cert) in certs.iter().filter(|c| c.3.policy == Policy::Bsaa) {
        let cp = q_costs(*q);
        let mut best: f64 = 0.0;
        let mut middle = design.levels().to_vec();
        middle.insert(0, 0.0);
        for &x in &middle {
            for a in 0..=100 {
                for b in 0..=100 - a {
                    let masses = [a, b, 100 - a - b].map(|k| k as f64 / 100.0);
                    let f = StepCdf::from_masses(&[(0.0, masses[0]), (x, masses[1]), (1.0, masses[2])]).unwrap();
                    best = best.max(integral_regret(Policy::Bsaa, design, &f, &cp).unwrap());
                }
            }
        }
        r.check(
            best <= cert.value + BSAA_TOL,
            format!("{label}: best grid adversary {best:.6} <= certificate {:.6} + tol", cert.value),
        );
    }
    r.finish();
}

#[test]
fn criterion_8_discretization_sandwich() {
    let mut r = Report::new(8);
    let q = 0.8;
    let mesh = 1e-3;
    let grid = GridSpec::new(mesh, mesh, 0.02).unwrap();
    let cp = q_costs(q);
    for n in 1..=5 {
        for budget in [1usize, 2, 3] {
            let sol = grid_lp(n, budget, q, &grid).unwrap();
            let bound = 2.0 * (n as f64 + 2.0) * mesh;
            // exact value at the LP design bounds the unit-count optimum from above
            let design = CensoringDesign::new(sol.levels.clone(), vec![1; n]).unwrap();
            let exact = worst_case_regret_bsaa(&design, &cp, 1e-6).unwrap();
            let upper_gap = exact.value + exact.grid_error_bound - sol.value;
            // every feasible design is at least the grid value
            let mut lower_ok = exact.value + exact.grid_error_bound >= sol.value;
            for shift in [0.0, 0.1, 0.25, 0.5] {
                let levels: Vec<f64> = (0..n)
                    .map(|j| ((budget as f64 / n as f64).min(1.0) - shift * (n - 1 - j) as f64 / n as f64).clamp(0.0, 1.0))
                    .collect();
                let d = CensoringDesign::new(levels, vec![1; n]).unwrap();
                let v = worst_case_regret_bsaa(&d, &cp, 1e-6).unwrap();
                lower_ok &= v.value + v.grid_error_bound >= sol.value;
            }
            r.check(
                lower_ok && upper_gap <= bound,
                format!("N={n} B={budget}: grid {:.6}, exact at LP design {:.6}, gap {upper_gap:.2e} <= {bound:.1e}", sol.value, exact.value),
            );
        }
    }
    r.finish();
}
