//! Domain types and exact newsvendor arithmetic on finite-support distributions.
//!
//! Demand lives on `[0, 1]`. A [`StepCdf`] is a right-continuous distribution
//! function with finitely many atoms; every cost and regret below is an exact
//! finite sum over those atoms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Absolute tolerance used wherever a CDF value is compared with the critical
/// fractile. CDF values built from sample counts can land exactly on `q`.
pub const CDF_TOL: f64 = 1e-12;

/// Tolerance on the total mass of a distribution literal.
pub const MASS_TOL: f64 = 1e-9;

/// `⌈q·n⌉`, robust to `q·n` landing a few ulps above an integer.
pub fn ceil_qn(q: f64, n: usize) -> i64 {
    (q * n as f64 - 1e-9).ceil() as i64
}

/// Underage and overage costs of the newsvendor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParameters {
    underage: f64,
    overage: f64,
}

impl CostParameters {
    pub fn new(underage: f64, overage: f64) -> Result<Self> {
        if !(underage > 0.0 && underage.is_finite()) || !(overage > 0.0 && overage.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "costs must be positive and finite, got c_u={underage}, c_o={overage}"
            )));
        }
        Ok(Self { underage, overage })
    }

    /// Unit-normalized costs `(q, 1 - q)`, so that `c_u + c_o = 1`.
    pub fn from_fractile(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "critical fractile must lie in (0,1), got {q}"
            )));
        }
        Self::new(q, 1.0 - q)
    }

    pub fn underage(&self) -> f64 {
        self.underage
    }

    pub fn overage(&self) -> f64 {
        self.overage
    }

    /// `c_u + c_o`, the factor converting normalized regret to cost units.
    pub fn scale(&self) -> f64 {
        self.underage + self.overage
    }

    pub fn fractile(&self) -> f64 {
        critical_fractile(self)
    }
}

/// The critical fractile `c_u / (c_u + c_o)`.
pub fn critical_fractile(cp: &CostParameters) -> f64 {
    cp.underage / (cp.underage + cp.overage)
}

/// Finite-support, right-continuous distribution function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    support: Vec<f64>,
    cdf: Vec<f64>,
}

impl StepCdf {
    /// Builds a CDF from its support points and the CDF values at those points.
    pub fn new(support: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != cdf.len() {
            return Err(Error::InvalidInput(
                "support and cdf values must be nonempty and of equal length".into(),
            ));
        }
        if support.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidInput("support points must lie in [0,1]".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("support must be strictly ascending".into()));
        }
        if cdf.iter().any(|c| !(0.0..=1.0).contains(c)) || cdf.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("cdf values must be nondecreasing in [0,1]".into()));
        }
        if cdf[cdf.len() - 1] != 1.0 {
            return Err(Error::InvalidInput("last cdf value must equal 1".into()));
        }
        Ok(Self { support, cdf })
    }

    /// Builds a CDF from `(point, mass)` atoms. Points may repeat and come in any
    /// order; zero-mass atoms are dropped. Masses must sum to one within
    /// [`MASS_TOL`].
    pub fn from_masses(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one atom".into()));
        }
        let mut atoms: Vec<(f64, f64)> = atoms.to_vec();
        for &(p, m) in &atoms {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("atom {p} outside [0,1]")));
            }
            if !(m >= 0.0) {
                return Err(Error::InvalidInput(format!("negative mass {m} at {p}")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("masses sum to {total}, expected 1")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            if m == 0.0 {
                continue;
            }
            if support.last() == Some(&p) {
                *masses.last_mut().unwrap() += m;
            } else {
                support.push(p);
                masses.push(m);
            }
        }
        let mut cdf = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            cdf.push(acc.min(1.0));
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self { support, cdf })
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        Self::from_masses(&[(at, 1.0)])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// `(point, mass)` atoms in ascending order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().zip(self.cdf.iter()).scan(0.0, |prev, (&s, &c)| {
            let m = c - *prev;
            *prev = c;
            Some((s, m))
        })
    }

    /// `F(z)`: the value at the largest support point `<= z`, or 0 below the support.
    pub fn eval(&self, z: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s <= z);
        if idx == 0 {
            0.0
        } else {
            self.cdf[idx - 1]
        }
    }

    /// `F(z-)`.
    pub fn left_limit(&self, z: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s < z);
        if idx == 0 {
            0.0
        } else {
            self.cdf[idx - 1]
        }
    }

    /// `inf { u : F(u) >= q }`, with the comparison relaxed by [`CDF_TOL`].
    pub fn lower_quantile(&self, q: f64) -> f64 {
        let idx = self.cdf.partition_point(|&c| c < q - CDF_TOL);
        self.support[idx.min(self.support.len() - 1)]
    }
}

impl fmt::Display for StepCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, m)) in self.atoms().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}:{m}")?;
        }
        Ok(())
    }
}

/// Parses the `point:prob[,point:prob...]` distribution literal.
impl FromStr for StepCdf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, m) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected point:prob, got `{item}`")))?;
            let p: f64 = p.trim().parse().map_err(|_| Error::Parse(format!("bad point `{p}`")))?;
            let m: f64 = m.trim().parse().map_err(|_| Error::Parse(format!("bad mass `{m}`")))?;
            atoms.push((p, m));
        }
        if atoms.is_empty() {
            return Err(Error::Parse("empty distribution literal".into()));
        }
        StepCdf::from_masses(&atoms).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Historical inventory levels with the number of sales observed at each.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoringDesign {
    levels: Vec<f64>,
    counts: Vec<usize>,
}

impl CensoringDesign {
    pub fn new(levels: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if levels.is_empty() || levels.len() != counts.len() {
            return Err(Error::InvalidInput(
                "design needs matching, nonempty levels and counts".into(),
            ));
        }
        if levels.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidInput("design levels must lie in [0,1]".into()));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("design levels must be ascending".into()));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidInput("design counts must be positive".into()));
        }
        Ok(Self { levels, counts })
    }

    /// `n` samples at a single level.
    pub fn single(level: f64, n: usize) -> Result<Self> {
        Self::new(vec![level], vec![n])
    }

    /// `n - m` samples censored at `x` and `m` uncensored samples at level 1.
    pub fn exploration(x: f64, n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidParameter(format!("m={m} exceeds n={n}")));
        }
        let mut levels = Vec::new();
        let mut counts = Vec::new();
        if n > m {
            levels.push(x);
            counts.push(n - m);
        }
        if m > 0 {
            levels.push(1.0);
            counts.push(m);
        }
        Self::new(levels, counts)?.merged()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of levels `K`.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Total sample size `n`.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Cumulative counts `σ_0 = 0, σ_1, ..., σ_K`.
    pub fn cumulative(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.counts.len() + 1);
        let mut acc = 0;
        out.push(0);
        for &c in &self.counts {
            acc += c;
            out.push(acc);
        }
        out
    }

    /// Breakpoints `x_0 = 0, x_1, ..., x_K, x_{K+1} = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.levels.len() + 2);
        out.push(0.0);
        out.extend_from_slice(&self.levels);
        out.push(1.0);
        out
    }

    /// Lengths `x_{k+1} - x_k` of the pieces `k = 0..=K`.
    pub fn widths(&self) -> Vec<f64> {
        self.breakpoints().windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index `k` of the piece `[x_k, x_{k+1})` containing `z` (`K` for `z >= x_K`).
    pub fn piece_of(&self, z: f64) -> usize {
        self.levels.partition_point(|&x| x <= z)
    }

    /// Groups repeated levels into one level with the summed count.
    pub fn merged(&self) -> Result<Self> {
        let mut levels: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (&x, &c) in self.levels.iter().zip(&self.counts) {
            if levels.last() == Some(&x) {
                *counts.last_mut().unwrap() += c;
            } else {
                levels.push(x);
                counts.push(c);
            }
        }
        Self::new(levels, counts)
    }

    /// One level per sample: each level repeated by its count.
    pub fn unit_expansion(&self) -> Self {
        let mut levels = Vec::with_capacity(self.total());
        for (&x, &c) in self.levels.iter().zip(&self.counts) {
            levels.extend(std::iter::repeat(x).take(c));
        }
        let counts = vec![1; levels.len()];
        Self { levels, counts }
    }

    /// `Σ n_k x_k`, the inventory spent collecting the data.
    pub fn inventory_spent(&self) -> f64 {
        self.levels.iter().zip(&self.counts).map(|(&x, &c)| x * c as f64).sum()
    }
}

impl fmt::Display for CensoringDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, c)) in self.levels.iter().zip(&self.counts).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}:{c}")?;
        }
        Ok(())
    }
}

/// Parses the `level:count[,level:count...]` design literal.
impl FromStr for CensoringDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut levels = Vec::new();
        let mut counts = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (x, c) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected level:count, got `{item}`")))?;
            let x: f64 = x.trim().parse().map_err(|_| Error::Parse(format!("bad level `{x}`")))?;
            let c: usize = c.trim().parse().map_err(|_| Error::Parse(format!("bad count `{c}`")))?;
            levels.push(x);
            counts.push(c);
        }
        CensoringDesign::new(levels, counts).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One historical sale together with its stockout flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub sale: f64,
    /// `true` when demand did not exceed the inventory level.
    pub uncensored: bool,
}

impl Observation {
    /// Checks the observation against the level that produced it.
    pub fn new(sale: f64, uncensored: bool, level: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sale) {
            return Err(Error::InvalidInput(format!("sale {sale} outside [0,1]")));
        }
        if sale > level {
            return Err(Error::InvalidInput(format!("sale {sale} exceeds its level {level}")));
        }
        if !uncensored && sale != level {
            return Err(Error::InvalidInput(format!(
                "censored sale {sale} must equal its level {level}"
            )));
        }
        Ok(Self { sale, uncensored })
    }
}

/// Sales observed when demand `demand` meets inventory `level`.
pub fn censor(demand: f64, level: f64) -> Observation {
    Observation { sale: demand.min(level), uncensored: demand <= level }
}

/// Observations grouped by design level.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    design: CensoringDesign,
    groups: Vec<Vec<Observation>>,
}

impl SampleSet {
    pub fn new(design: CensoringDesign, groups: Vec<Vec<Observation>>) -> Result<Self> {
        if groups.len() != design.num_levels() {
            return Err(Error::InvalidInput("one observation group per level required".into()));
        }
        for ((group, &count), &level) in groups.iter().zip(design.counts()).zip(design.levels()) {
            if group.len() != count {
                return Err(Error::InvalidInput(format!(
                    "level {level} expects {count} observations, got {}",
                    group.len()
                )));
            }
            for obs in group {
                Observation::new(obs.sale, obs.uncensored, level)?;
            }
        }
        Ok(Self { design, groups })
    }

    /// Censors one demand per design slot, in design order.
    pub fn from_demands(design: &CensoringDesign, demands: &[f64]) -> Result<Self> {
        if demands.len() != design.total() {
            return Err(Error::InvalidInput(format!(
                "expected {} demands, got {}",
                design.total(),
                demands.len()
            )));
        }
        let mut it = demands.iter();
        let groups = design
            .levels()
            .iter()
            .zip(design.counts())
            .map(|(&x, &c)| it.by_ref().take(c).map(|&d| censor(d, x)).collect())
            .collect();
        Ok(Self { design: design.clone(), groups })
    }

    pub fn design(&self) -> &CensoringDesign {
        &self.design
    }

    pub fn groups(&self) -> &[Vec<Observation>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn observations(&self) -> impl Iterator<Item = &Observation> {
        self.groups.iter().flatten()
    }
}

/// `E_{D~F}[c_o (a-D)^+ + c_u (D-a)^+]`.
pub fn expected_cost(action: f64, dist: &StepCdf, cp: &CostParameters) -> f64 {
    dist.atoms()
        .map(|(d, m)| m * (cp.overage * (action - d).max(0.0) + cp.underage * (d - action).max(0.0)))
        .sum()
}

/// Lower `q`-quantile of `dist` and its expected cost.
pub fn optimal_decision(dist: &StepCdf, cp: &CostParameters) -> (f64, f64) {
    let action = dist.lower_quantile(cp.fractile());
    (action, expected_cost(action, dist, cp))
}

/// Excess expected cost of `action` over the optimum; clamped at zero.
pub fn regret(action: f64, dist: &StepCdf, cp: &CostParameters) -> f64 {
    let (_, opt) = optimal_decision(dist, cp);
    (expected_cost(action, dist, cp) - opt).max(0.0)
}
