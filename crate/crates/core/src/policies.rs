//! Data-to-decision rules: Biased SAA and the Kaplan-Meier policy.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ceil_qn, CensoringDesign, Observation, SampleSet, StepCdf, CDF_TOL};

/// Which data-driven rule turns censored sales into an order quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Empirical quantile of raw sales, ignoring stockout flags.
    Bsaa,
    /// Quantile of the Kaplan-Meier product-limit estimate.
    Km,
}

impl Policy {
    pub fn decide(&self, samples: &SampleSet, q: f64) -> Result<f64> {
        match self {
            Policy::Bsaa => bsaa_decide(samples, q),
            Policy::Km => km_decide(samples, q),
        }
    }

    /// Decision on a scratch buffer of observations; the buffer is reordered.
    pub(crate) fn decide_in_place(&self, obs: &mut [Observation], q: f64) -> f64 {
        match self {
            Policy::Bsaa => bsaa_quantile(obs, q),
            Policy::Km => km_quantile(obs, q),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Bsaa => "bsaa",
            Policy::Km => "km",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bsaa" => Ok(Policy::Bsaa),
            "km" => Ok(Policy::Km),
            other => Err(Error::Parse(format!("unknown policy `{other}` (expected bsaa or km)"))),
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")))
    }
}

/// `⌈qn⌉`-th order statistic of the pooled sales.
pub fn bsaa_decide(samples: &SampleSet, q: f64) -> Result<f64> {
    check_q(q)?;
    if samples.is_empty() {
        return Err(Error::InvalidInput("BSAA needs at least one observation".into()));
    }
    let mut obs: Vec<Observation> = samples.observations().copied().collect();
    Ok(bsaa_quantile(&mut obs, q))
}

fn bsaa_quantile(obs: &mut [Observation], q: f64) -> f64 {
    let n = obs.len();
    let rank = ceil_qn(q, n).clamp(1, n as i64) as usize;
    let (_, nth, _) = obs.select_nth_unstable_by(rank - 1, |a, b| a.sale.total_cmp(&b.sale));
    nth.sale
}

/// Kaplan-Meier estimate together with the ordered observations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KmEstimate {
    pub cdf: StepCdf,
    pub ordered: Vec<Observation>,
}

/// Ascending sales, uncensored before censored on ties, otherwise stable.
fn km_order(a: &Observation, b: &Observation) -> Ordering {
    a.sale.total_cmp(&b.sale).then_with(|| b.uncensored.cmp(&a.uncensored))
}

/// Walks the product-limit estimator over sorted observations, calling `visit(i, sale, cdf)`
/// after every uncensored observation (1-based `i`). Stops early when `visit` returns true.
///
/// Consecutive uncensored factors telescope, so a run starting at index `s` leaves
/// survival `base * (n - i) / (n - s + 1)`. Before the first censored observation the
/// CDF is exactly `i / n`.
fn km_walk(sorted: &[Observation], mut visit: impl FnMut(usize, f64, f64) -> bool) {
    let n = sorted.len();
    let nf = n as f64;
    let mut base = 1.0;
    let mut run_start: Option<usize> = None;
    let mut seen_censored = false;
    let mut survival = 1.0;
    for (idx, obs) in sorted.iter().enumerate() {
        let i = idx + 1;
        if obs.uncensored {
            let start = *run_start.get_or_insert(i);
            let cdf = if seen_censored {
                survival = base * (n - i) as f64 / (n - start + 1) as f64;
                1.0 - survival
            } else {
                survival = (n - i) as f64 / nf;
                i as f64 / nf
            };
            if visit(i, obs.sale, cdf) {
                return;
            }
        } else {
            seen_censored = true;
            base = survival;
            run_start = None;
        }
    }
}

/// Product-limit estimate of the demand CDF; `CDF(1) = 1` by definition.
pub fn km_cdf(samples: &SampleSet) -> Result<KmEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("Kaplan-Meier needs at least one observation".into()));
    }
    let mut ordered: Vec<Observation> = samples.observations().copied().collect();
    ordered.sort_by(km_order);
    let mut support: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    km_walk(&ordered, |_, sale, cdf| {
        if sale < 1.0 {
            if support.last() == Some(&sale) {
                *values.last_mut().unwrap() = cdf;
            } else {
                support.push(sale);
                values.push(cdf);
            }
        }
        false
    });
    support.push(1.0);
    values.push(1.0);
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let cdf = StepCdf::new(support, values)?;
    Ok(KmEstimate { cdf, ordered })
}

/// Lower `q`-quantile of the Kaplan-Meier estimate.
pub fn km_decide(samples: &SampleSet, q: f64) -> Result<f64> {
    check_q(q)?;
    if samples.is_empty() {
        return Err(Error::InvalidInput("Kaplan-Meier needs at least one observation".into()));
    }
    let mut obs: Vec<Observation> = samples.observations().copied().collect();
    Ok(km_quantile(&mut obs, q))
}

fn km_quantile(obs: &mut [Observation], q: f64) -> f64 {
    obs.sort_by(km_order);
    let mut action = 1.0;
    km_walk(obs, |_, sale, cdf| {
        if cdf >= q - CDF_TOL {
            action = sale;
            true
        } else {
            false
        }
    });
    action
}

/// Parses the `level|s1,s2u,...;level|...` sample-set literal. A trailing `u` marks an
/// uncensored sale; unmarked sales are censored and must equal their level.
pub fn parse_sample_set(s: &str) -> Result<SampleSet> {
    let mut levels = Vec::new();
    let mut groups = Vec::new();
    for group in s.split(';').map(str::trim).filter(|g| !g.is_empty()) {
        let (level, sales) = group
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected level|sales, got `{group}`")))?;
        let level: f64 =
            level.trim().parse().map_err(|_| Error::Parse(format!("bad level `{level}`")))?;
        let mut obs = Vec::new();
        for item in sales.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (text, uncensored) = match item.strip_suffix('u') {
                Some(t) => (t, true),
                None => (item, false),
            };
            let sale: f64 =
                text.trim().parse().map_err(|_| Error::Parse(format!("bad sale `{item}`")))?;
            obs.push(Observation::new(sale, uncensored, level).map_err(|e| Error::Parse(e.to_string()))?);
        }
        levels.push(level);
        groups.push(obs);
    }
    let counts = groups.iter().map(Vec::len).collect();
    let design = CensoringDesign::new(levels, counts).map_err(|e| Error::Parse(e.to_string()))?;
    SampleSet::new(design, groups).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::censor;
    use proptest::prelude::*;

    fn set(s: &str) -> SampleSet {
        parse_sample_set(s).unwrap()
    }

    #[test]
    fn bsaa_examples() {
        assert_eq!(bsaa_decide(&set("1|0.2u,0.5u,0.9u"), 0.5).unwrap(), 0.5);
        assert_eq!(bsaa_decide(&set("0.7|0.7,0.7,0.7"), 0.8).unwrap(), 0.7);
        assert_eq!(bsaa_decide(&set("0.7|0.1u,0.7,0.7;1|1u"), 0.8).unwrap(), 1.0);
    }

    #[test]
    fn km_cdf_examples() {
        let est = km_cdf(&set("0.5|0.3u,0.5")).unwrap();
        assert_eq!(est.cdf.eval(0.3), 0.5);
        assert_eq!(est.cdf.eval(0.5), 0.5);
        assert_eq!(est.cdf.eval(1.0), 1.0);

        let est = km_cdf(&set("0.5|0.2u,0.5;1|0.7u")).unwrap();
        assert!((est.cdf.eval(0.2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((est.cdf.eval(0.5) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(est.cdf.eval(0.7), 1.0);
        assert_eq!(est.ordered.len(), 3);
    }

    #[test]
    fn km_decide_examples() {
        assert_eq!(km_decide(&set("0.5|0.3u,0.5"), 0.8).unwrap(), 1.0);
        assert_eq!(km_decide(&set("0.5|0.2u,0.5;1|0.7u"), 0.5).unwrap(), 0.7);
        let unc = set("1|0.2u,0.5u,0.9u,0.4u");
        for q in [0.1, 0.3, 0.5, 0.75, 0.9] {
            assert_eq!(km_decide(&unc, q).unwrap(), bsaa_decide(&unc, q).unwrap());
        }
    }

    #[test]
    fn ties_put_uncensored_first() {
        // the censored 0.5 must not shrink the risk set before the uncensored 0.5
        let est = km_cdf(&set("0.5|0.5,0.5u;1|0.9u")).unwrap();
        assert!((est.cdf.eval(0.5) - 1.0 / 3.0).abs() < 1e-15);
        assert!(est.ordered[0].uncensored);
        assert_eq!(est.cdf.eval(0.9), 1.0);
    }

    #[test]
    fn censored_at_one_adds_nothing() {
        let est = km_cdf(&set("1|0.4u,1")).unwrap();
        assert_eq!(est.cdf.eval(0.4), 0.5);
        assert_eq!(est.cdf.eval(1.0), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(parse_sample_set("0.5|0.7u").is_err());
        assert!(parse_sample_set("0.5|0.4").is_err());
        assert!(parse_sample_set("0.5 0.4").is_err());
        assert!("ols".parse::<Policy>().is_err());
        assert_eq!("KM".parse::<Policy>().unwrap(), Policy::Km);
        assert!(bsaa_decide(&set("1|0.5u"), 1.0).is_err());
    }

    fn sample_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, Vec<f64>)> {
        (1usize..4)
            .prop_flat_map(|k| {
                (
                    proptest::collection::vec(0.0f64..=1.0, k),
                    proptest::collection::vec(1usize..8, k),
                )
            })
            .prop_flat_map(|(mut levels, counts)| {
                levels.sort_by(f64::total_cmp);
                let n: usize = counts.iter().sum();
                (Just(levels), Just(counts), proptest::collection::vec(0.0f64..=1.0, n))
            })
    }

    fn ecdf_value(sales: &[f64], z: f64) -> f64 {
        sales.iter().filter(|&&s| s <= z).count() as f64 / sales.len() as f64
    }

    proptest! {
        #[test]
        fn uncensored_km_is_the_ecdf(demands in proptest::collection::vec(
            prop_oneof![Just(0.0), Just(0.25), Just(0.5), 0.0f64..1.0], 1..50)) {
            let design = CensoringDesign::single(1.0, demands.len()).unwrap();
            let samples = SampleSet::from_demands(&design, &demands).unwrap();
            let est = km_cdf(&samples).unwrap();
            for (&s, &c) in est.cdf.support().iter().zip(est.cdf.cdf_values()) {
                prop_assert_eq!(c.to_bits(), ecdf_value(&demands, s).to_bits());
            }
            for q in [0.1, 0.5, 0.8, 0.9] {
                prop_assert_eq!(km_decide(&samples, q).unwrap(), bsaa_decide(&samples, q).unwrap());
            }
        }

        #[test]
        fn km_output_is_a_valid_cdf((levels, counts, demands) in sample_strategy()) {
            let design = CensoringDesign::new(levels, counts).unwrap();
            let samples = SampleSet::from_demands(&design, &demands).unwrap();
            let est = km_cdf(&samples).unwrap();
            let rebuilt = StepCdf::new(est.cdf.support().to_vec(), est.cdf.cdf_values().to_vec());
            prop_assert!(rebuilt.is_ok());
            prop_assert_eq!(est.cdf.eval(1.0), 1.0);
            // the quantile agrees with the CDF it was read from
            for q in [0.2, 0.5, 0.9] {
                let a = km_decide(&samples, q).unwrap();
                prop_assert_eq!(a, est.cdf.lower_quantile(q));
            }
        }

        #[test]
        fn bsaa_monotone_in_q((levels, counts, demands) in sample_strategy(), q1 in 0.01f64..0.99, dq in 0.0f64..0.5) {
            let design = CensoringDesign::new(levels, counts).unwrap();
            let samples = SampleSet::from_demands(&design, &demands).unwrap();
            let q2 = (q1 + dq).min(0.99);
            prop_assert!(bsaa_decide(&samples, q1).unwrap() <= bsaa_decide(&samples, q2).unwrap());
        }
    }

    #[test]
    fn censor_roundtrip_through_sample_set() {
        let design = CensoringDesign::new(vec![0.4, 1.0], vec![2, 1]).unwrap();
        let samples = SampleSet::from_demands(&design, &[0.1, 0.9, 0.6]).unwrap();
        assert_eq!(samples.groups()[0], vec![censor(0.1, 0.4), censor(0.9, 0.4)]);
    }
}
