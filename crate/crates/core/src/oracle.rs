//! Independent checks of the analytic engines.
//!
//! Three routes to the expected regret of a policy under a fixed demand distribution:
//! exhaustive enumeration of every demand tuple, the integral of the action CDF over
//! `[0, 1]`, and seeded Monte-Carlo replay of the sampling process.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bsaa::bsaa_action_cdf;
use crate::error::{Error, Result};
use crate::km::km_action_cdf;
use crate::model::{censor, expected_cost, optimal_decision, CensoringDesign, CostParameters, Observation, StepCdf};
use crate::policies::Policy;

/// Largest number of demand tuples exact enumeration will visit.
pub const EXACT_TUPLE_CAP: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Exact,
    MonteCarlo,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::Exact => "exact",
            OracleMode::MonteCarlo => "mc",
        })
    }
}

/// Expected regret estimate; `std_error` is zero in exact mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub mode: OracleMode,
    /// Demand tuples visited (exact) or replays simulated (Monte-Carlo).
    pub trials: u64,
}

/// Exact distribution of the policy's action: `(action, probability)` sorted by action.
pub fn exact_action_distribution(
    policy: Policy,
    design: &CensoringDesign,
    dist: &StepCdf,
    q: f64,
) -> Result<Vec<(f64, f64)>> {
    let atoms: Vec<(f64, f64)> = dist.atoms().collect();
    let s = atoms.len();
    let n = design.total();
    let tuples = (s as f64).powi(n as i32);
    if tuples > EXACT_TUPLE_CAP {
        return Err(Error::Capacity(format!(
            "exact enumeration needs {s}^{n} = {tuples:.3e} tuples; use Monte-Carlo mode"
        )));
    }
    let slots: Vec<f64> = design
        .levels()
        .iter()
        .zip(design.counts())
        .flat_map(|(&x, &c)| std::iter::repeat(x).take(c))
        .collect();
    let mut digits = vec![0usize; n];
    let mut buffer: Vec<Observation> = Vec::with_capacity(n);
    let mut actions: Vec<(f64, f64)> = Vec::new();
    loop {
        let mut weight = 1.0;
        buffer.clear();
        for (t, &d) in digits.iter().enumerate() {
            weight *= atoms[d].1;
            buffer.push(censor(atoms[d].0, slots[t]));
        }
        let action = policy.decide_in_place(&mut buffer, q);
        match actions.iter_mut().find(|(a, _)| *a == action) {
            Some(entry) => entry.1 += weight,
            None => actions.push((action, weight)),
        }
        // lexicographic increment, last slot fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                actions.sort_by(|a, b| a.0.total_cmp(&b.0));
                return Ok(actions);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < s {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Expected regret by enumerating all `s^n` demand tuples.
pub fn exact_expected_regret(
    policy: Policy,
    design: &CensoringDesign,
    dist: &StepCdf,
    cp: &CostParameters,
) -> Result<OracleEstimate> {
    let actions = exact_action_distribution(policy, design, dist, cp.fractile())?;
    let (_, opt) = optimal_decision(dist, cp);
    let mean = actions
        .iter()
        .map(|&(a, p)| p * (expected_cost(a, dist, cp) - opt).max(0.0))
        .sum();
    let tuples = (dist.support().len() as f64).powi(design.total() as i32) as u64;
    Ok(OracleEstimate { mean, std_error: 0.0, mode: OracleMode::Exact, trials: tuples })
}

/// `P(π <= z)` from the policy's piecewise action-CDF formula. Actions lie in `[0, 1]`, so
/// the value is 1 from `z = 1` on.
pub fn action_cdf(policy: Policy, design: &CensoringDesign, q: f64, dist: &StepCdf, z: f64) -> Result<f64> {
    if z >= 1.0 {
        return Ok(1.0);
    }
    let fz = dist.eval(z);
    match policy {
        Policy::Bsaa => bsaa_action_cdf(design, q, design.piece_of(z), fz),
        Policy::Km => {
            let merged = design.merged()?;
            let k = merged.piece_of(z);
            let prefix: Vec<f64> = merged.levels()[..k].iter().map(|&x| dist.eval(x)).collect();
            km_action_cdf(&merged, q, k, &prefix, fz)
        }
    }
}

/// Expected regret as `(c_u + c_o) ∫ [(1 - P(π <= z))(F(z) - q) + (q - F(z))^+] dz`,
/// a finite sum because every factor is constant between consecutive breakpoints.
pub fn integral_regret(
    policy: Policy,
    design: &CensoringDesign,
    dist: &StepCdf,
    cp: &CostParameters,
) -> Result<f64> {
    let q = cp.fractile();
    let mut points: Vec<f64> = vec![0.0, 1.0];
    points.extend_from_slice(dist.support());
    points.extend_from_slice(design.levels());
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let fz = dist.eval(a);
        let p = action_cdf(policy, design, q, dist, a)?;
        total += (b - a) * ((1.0 - p) * (fz - q) + (q - fz).max(0.0));
    }
    Ok(total * cp.scale())
}

/// Seeded Monte-Carlo estimate. Replay `r` draws from ChaCha8 seeded with `seed` on
/// stream `r`, so results do not depend on how replays are scheduled.
pub fn mc_expected_regret(
    policy: Policy,
    design: &CensoringDesign,
    dist: &StepCdf,
    cp: &CostParameters,
    trials: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let q = cp.fractile();
    let (_, opt) = optimal_decision(dist, cp);
    let support = dist.support();
    let cdf = dist.cdf_values();
    let slots: Vec<f64> = design
        .levels()
        .iter()
        .zip(design.counts())
        .flat_map(|(&x, &c)| std::iter::repeat(x).take(c))
        .collect();
    let mut buffer: Vec<Observation> = Vec::with_capacity(slots.len());
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for r in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        buffer.clear();
        for &x in &slots {
            let u: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c <= u).min(support.len() - 1);
            buffer.push(censor(support[idx], x));
        }
        let action = policy.decide_in_place(&mut buffer, q);
        let regret = (expected_cost(action, dist, cp) - opt).max(0.0);
        let delta = regret - mean;
        mean += delta / (r + 1) as f64;
        m2 += delta * (regret - mean);
    }
    let std_error = if trials > 1 { (m2 / (trials - 1) as f64 / trials as f64).sqrt() } else { 0.0 };
    Ok(OracleEstimate { mean, std_error, mode: OracleMode::MonteCarlo, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(u: f64, o: f64) -> CostParameters {
        CostParameters::new(u, o).unwrap()
    }

    #[test]
    fn documented_examples() {
        let one = StepCdf::point_mass(1.0).unwrap();
        let d = CensoringDesign::single(0.5, 1).unwrap();
        let est = exact_expected_regret(Policy::Bsaa, &d, &one, &cp(0.8, 0.2)).unwrap();
        assert!((est.mean - 0.4).abs() < 1e-15);
        assert_eq!(est.std_error, 0.0);

        for policy in [Policy::Bsaa, Policy::Km] {
            let at = StepCdf::point_mass(0.37).unwrap();
            let d = CensoringDesign::single(1.0, 3).unwrap();
            assert_eq!(exact_expected_regret(policy, &d, &at, &cp(0.8, 0.2)).unwrap().mean, 0.0);
        }

        // four equally likely outcomes; the median of two samples is their minimum
        let two: StepCdf = "0:0.5,1:0.5".parse().unwrap();
        let d = CensoringDesign::single(1.0, 2).unwrap();
        let est = exact_expected_regret(Policy::Bsaa, &d, &two, &cp(1.0, 1.0)).unwrap();
        // orders 1 only when both demands are 1 (prob 1/4); both actions cost 0.5 here
        let actions = exact_action_distribution(Policy::Bsaa, &d, &two, 0.5).unwrap();
        assert_eq!(actions, vec![(0.0, 0.75), (1.0, 0.25)]);
        assert!(est.mean.abs() < 1e-15);
        let est = exact_expected_regret(Policy::Bsaa, &d, &two, &cp(0.8, 0.2)).unwrap();
        // q=0.8: ⌈1.6⌉=2nd order statistic, orders 0 with prob 1/4 and pays 0.3 extra
        assert!((est.mean - 0.075).abs() < 1e-15);
    }

    #[test]
    fn capacity_error_points_to_monte_carlo() {
        let f: StepCdf = "0:0.3,0.5:0.3,1:0.4".parse().unwrap();
        let d = CensoringDesign::single(1.0, 20).unwrap();
        let err = exact_expected_regret(Policy::Bsaa, &d, &f, &cp(0.8, 0.2)).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let f: StepCdf = "0:0.3,0.5:0.3,1:0.4".parse().unwrap();
        let d = CensoringDesign::new(vec![0.5, 1.0], vec![3, 1]).unwrap();
        let c = cp(0.8, 0.2);
        let exact = exact_expected_regret(Policy::Km, &d, &f, &c).unwrap();
        let a = mc_expected_regret(Policy::Km, &d, &f, &c, 20_000, 7).unwrap();
        let b = mc_expected_regret(Policy::Km, &d, &f, &c, 20_000, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert!((a.mean - exact.mean).abs() <= 4.0 * a.std_error);
    }

    #[test]
    fn point_mass_has_no_spread() {
        let f = StepCdf::point_mass(0.6).unwrap();
        let d = CensoringDesign::new(vec![0.3, 1.0], vec![2, 2]).unwrap();
        let est = mc_expected_regret(Policy::Bsaa, &d, &f, &cp(0.8, 0.2), 500, 1).unwrap();
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn integral_matches_enumeration_on_a_small_case() {
        let f: StepCdf = "0:0.2,0.4:0.3,0.8:0.1,1:0.4".parse().unwrap();
        let d = CensoringDesign::new(vec![0.4, 0.9], vec![2, 2]).unwrap();
        for policy in [Policy::Bsaa, Policy::Km] {
            let c = cp(0.7, 0.3);
            let exact = exact_expected_regret(policy, &d, &f, &c).unwrap().mean;
            let integral = integral_regret(policy, &d, &f, &c).unwrap();
            assert!((exact - integral).abs() < 1e-12, "{policy}: {exact} vs {integral}");
        }
    }
}
