//! Exact worst-case regret of the Kaplan-Meier policy.
//!
//! On piece `k` the probability that KM orders at most `z` depends on the demand CDF
//! only through `F(x_1), ..., F(x_k)` and `F(z)`. It is computed by enumerating the
//! multinomial count vectors of every design level: levels left of the piece contribute
//! censored counts and uncensored counts per cell, the levels to its right contribute
//! uncensored counts only. Each joint profile fixes the product-limit survival `G_k`.
//!
//! The worst case is a maximization over a monotone lattice of CDF levels, solved by a
//! dynamic program over prefixes followed by local refinement around the incumbent.

use std::collections::BTreeMap;

use crate::bernstein::{binomial_pmf, tail};
use crate::certificate::RegretCertificate;
use crate::error::{Error, Result};
use crate::model::{ceil_qn, CensoringDesign, CostParameters, StepCdf, CDF_TOL};
use crate::policies::Policy;

/// Largest number of (left profile, right profile) pairs a single solve may visit.
pub const DEFAULT_WORK_CAP: f64 = 2e10;

/// Uncensored counts per cell and censored counts per level of one sample realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountProfile {
    /// `N_1, ..., N_{k+1}`.
    pub uncensored: Vec<u32>,
    /// `C_1, ..., C_k`.
    pub censored: Vec<u32>,
}

impl CountProfile {
    pub fn new(uncensored: Vec<u32>, censored: Vec<u32>, n: usize) -> Result<Self> {
        if uncensored.len() != censored.len() + 1 {
            return Err(Error::InvalidInput("need exactly one more N cell than C cells".into()));
        }
        let total: u64 = uncensored.iter().chain(&censored).map(|&c| c as u64).sum();
        if total > n as u64 {
            return Err(Error::InvalidInput(format!("profile counts {total} exceed n={n}")));
        }
        Ok(Self { uncensored, censored })
    }

    /// Product-limit survival `G_k(N, C) = 1 - F_KM(z)`.
    pub fn survival(&self, n: usize) -> f64 {
        survival(n, &self.uncensored, &self.censored)
    }
}

/// `Π_j (n - ΣN_{<=j} - ΣC_{<j}) / (n - ΣN_{<j} - ΣC_{<j})`, empty risk sets giving 1.
fn survival(n: usize, uncensored: &[u32], censored: &[u32]) -> f64 {
    let mut at_risk = n as i64;
    let mut g = 1.0;
    for (j, &nj) in uncensored.iter().enumerate() {
        if j > 0 {
            at_risk -= censored[j - 1] as i64;
        }
        if at_risk > 0 {
            g *= (at_risk - nj as i64) as f64 / at_risk as f64;
        }
        at_risk -= nj as i64;
    }
    g
}

/// A point of the monotone lattice `f_0^+ <= f_1 <= f_1^+ <= ... <= f_K <= f_K^+`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePoint {
    pub f_plus_0: f64,
    /// `(f_k, f_k^+)` for `k = 1..=K`.
    pub pairs: Vec<(f64, f64)>,
}

impl MonotonePoint {
    pub fn new(f_plus_0: f64, pairs: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev = f_plus_0;
        if !(0.0..=1.0).contains(&prev) {
            return Err(Error::InvalidParameter("lattice levels must lie in [0,1]".into()));
        }
        for &(f, fp) in &pairs {
            if !(prev <= f && f <= fp && fp <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "lattice chain violated near ({f}, {fp})"
                )));
            }
            prev = fp;
        }
        Ok(Self { f_plus_0, pairs })
    }

    /// `f_k^+` for `k = 0..=K`.
    pub fn plus_levels(&self) -> Vec<f64> {
        std::iter::once(self.f_plus_0).chain(self.pairs.iter().map(|p| p.1)).collect()
    }

    /// A distribution realizing the point: `F = f_0^+` on `[0, x_1)`, `F(x_k) = f_k`,
    /// `F = f_k^+` from `x_k + eps` to the next level, and `F(1) = 1`.
    pub fn witness(&self, design: &CensoringDesign, eps: f64) -> Result<StepCdf> {
        if self.pairs.len() != design.num_levels() {
            return Err(Error::InvalidInput("lattice point and design disagree on K".into()));
        }
        let bp = design.breakpoints();
        let mut atoms = vec![(0.0, self.f_plus_0)];
        let mut level = self.f_plus_0;
        for (k, &(f, fp)) in self.pairs.iter().enumerate() {
            let x = bp[k + 1];
            let next = bp[k + 2];
            atoms.push((x, (f - level).max(0.0)));
            let shifted = x + eps;
            let at = if shifted < next && shifted < 1.0 { shifted } else { next };
            atoms.push((at, (fp - f).max(0.0)));
            level = fp.max(f);
        }
        atoms.push((1.0, (1.0 - level).max(0.0)));
        StepCdf::from_masses(&atoms)
    }
}

/// Discretization of the monotone lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Coarse mesh `Δ` on every coordinate.
    pub mesh: f64,
    /// Number of local refinement passes; pass `r` uses mesh `Δ / 10^r` within one
    /// previous mesh of each incumbent coordinate.
    pub refine_rounds: usize,
    /// Cap on enumeration work, see [`DEFAULT_WORK_CAP`].
    pub work_cap: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self { mesh: 1.0 / 200.0, refine_rounds: 1, work_cap: DEFAULT_WORK_CAP }
    }
}

impl LatticeSpec {
    pub fn new(mesh: f64, refine_rounds: usize) -> Result<Self> {
        if !(mesh > 0.0 && mesh <= 1.0) {
            return Err(Error::InvalidParameter(format!("lattice mesh must lie in (0,1], got {mesh}")));
        }
        Ok(Self { mesh, refine_rounds, work_cap: DEFAULT_WORK_CAP })
    }
}

/// Visits every composition of `total` into `probs.len()` cells with its multinomial
/// probability, skipping zero-probability compositions. Cell `j` is drawn as a binomial
/// conditional on the earlier cells, which keeps each factor fully accurate.
fn for_each_composition(total: u32, probs: &[f64], visit: &mut dyn FnMut(&[u32], f64)) {
    let mut counts = vec![0u32; probs.len()];
    let rest: f64 = probs.iter().sum();
    compose(0, total, rest, 1.0, probs, &mut counts, visit);
}

fn compose(
    j: usize,
    remaining: u32,
    mass: f64,
    weight: f64,
    probs: &[f64],
    counts: &mut [u32],
    visit: &mut dyn FnMut(&[u32], f64),
) {
    if j + 1 == probs.len() {
        if remaining > 0 && probs[j] <= 0.0 {
            return;
        }
        counts[j] = remaining;
        visit(counts, weight);
        counts[j] = 0;
        return;
    }
    let p = probs[j];
    let ratio = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
    let rest = (mass - p).max(0.0);
    let (lo, hi) = if ratio == 0.0 {
        (0, 0)
    } else if ratio == 1.0 {
        (remaining, remaining)
    } else {
        (0, remaining)
    };
    for m in lo..=hi {
        let w = binomial_pmf(m as u64, remaining as u64, ratio);
        if w == 0.0 {
            continue;
        }
        counts[j] = m;
        compose(j + 1, remaining - m, rest, weight * w, probs, counts, visit);
    }
    counts[j] = 0;
}

/// Joint distribution of `(N^L_1..N^L_k, C_1..C_k)` contributed by the levels left of a piece.
#[derive(Debug, Clone)]
struct LeftProfiles {
    k: usize,
    /// Flattened keys, `2k` entries per profile.
    keys: Vec<u32>,
    probs: Vec<f64>,
}

/// Prepared data for evaluating `P_k` on one design.
#[derive(Debug, Clone)]
struct KmKernel {
    n: usize,
    q: f64,
    counts: Vec<u32>,
    rank: i64,
}

impl KmKernel {
    fn new(design: &CensoringDesign, q: f64) -> Self {
        Self {
            n: design.total(),
            q,
            counts: design.counts().iter().map(|&c| c as u32).collect(),
            rank: ceil_qn(q, design.total()),
        }
    }

    fn n_right(&self, k: usize) -> u32 {
        self.counts[k..].iter().sum()
    }

    fn left_profiles(&self, prefix: &[f64]) -> LeftProfiles {
        let k = prefix.len();
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        map.insert(vec![0; 2 * k], 1.0);
        let cells: Vec<f64> = (0..k)
            .map(|j| if j == 0 { prefix[0] } else { (prefix[j] - prefix[j - 1]).max(0.0) })
            .collect();
        for l in 0..k {
            let mut probs = Vec::with_capacity(l + 2);
            probs.push((1.0 - prefix[l]).max(0.0));
            probs.extend_from_slice(&cells[..=l]);
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for_each_composition(self.counts[l], &probs, &mut |m, w| {
                for (key, &p) in &map {
                    let mut key = key.clone();
                    key[k + l] = m[0];
                    for j in 0..=l {
                        key[j] += m[j + 1];
                    }
                    *next.entry(key).or_insert(0.0) += p * w;
                }
            });
            map = next;
        }
        let mut keys = Vec::with_capacity(map.len() * 2 * k);
        let mut probs = Vec::with_capacity(map.len());
        for (key, p) in map {
            keys.extend_from_slice(&key);
            probs.push(p);
        }
        LeftProfiles { k, keys, probs }
    }

    /// `P_0(v)`: the number of demands at most `z` is binomial.
    fn prob0(&self, v: f64) -> f64 {
        tail(self.rank, self.n as u64, v)
    }

    /// `P_k(prefix, v)` given the precomputed left profiles of `prefix`.
    fn prob(&self, prefix: &[f64], left: &LeftProfiles, v: f64) -> f64 {
        let k = prefix.len();
        if k == 0 {
            return self.prob0(v);
        }
        debug_assert_eq!(left.k, k);
        let threshold = 1.0 - self.q + CDF_TOL;
        let n_right = self.n_right(k);
        let mut probs = Vec::with_capacity(k + 2);
        probs.push((1.0 - v).max(0.0));
        probs.push(prefix[0]);
        for j in 1..k {
            probs.push((prefix[j] - prefix[j - 1]).max(0.0));
        }
        probs.push((v - prefix[k - 1]).max(0.0));
        let mut uncensored = vec![0u32; k + 1];
        let mut total = 0.0;
        for_each_composition(n_right, &probs, &mut |m, w| {
            let mut hit = 0.0;
            for (idx, &p) in left.probs.iter().enumerate() {
                let key = &left.keys[idx * 2 * k..(idx + 1) * 2 * k];
                for j in 0..k {
                    uncensored[j] = key[j] + m[j + 1];
                }
                uncensored[k] = m[k + 1];
                if survival(self.n, &uncensored, &key[k..]) <= threshold {
                    hit += p;
                }
            }
            total += w * hit;
        });
        total.min(1.0)
    }

    /// Rough count of (left, right) pairs one evaluation of `P_k` visits.
    fn work_estimate(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let mut left = 1.0;
        for l in 0..k {
            left *= compositions(self.counts[l] as f64, (l + 2) as f64);
        }
        left * compositions(self.n_right(k) as f64, (k + 2) as f64)
    }
}

/// Number of compositions of `n` into `c` cells, `C(n + c - 1, c - 1)`.
fn compositions(n: f64, c: f64) -> f64 {
    let mut out = 1.0;
    for i in 1..(c as usize) {
        out *= (n + i as f64) / i as f64;
    }
    out
}

fn check_prefix(design: &CensoringDesign, q: f64, k: usize, prefix: &[f64], v: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
    }
    if k > design.num_levels() {
        return Err(Error::InvalidParameter(format!("piece {k} out of range")));
    }
    if prefix.len() != k {
        return Err(Error::InvalidParameter(format!(
            "piece {k} needs {k} prefix values, got {}",
            prefix.len()
        )));
    }
    let mut prev = 0.0;
    for &f in prefix.iter().chain(std::iter::once(&v)) {
        if !(prev <= f && f <= 1.0) {
            return Err(Error::InvalidParameter(
                "prefix levels and v must be nondecreasing in [0,1]".into(),
            ));
        }
        prev = f;
    }
    Ok(())
}

/// `P(π_KM <= z)` for `z` in piece `k` when `F(x_j) = f_prefix[j-1]` and `F(z) = v`.
pub fn km_action_cdf(design: &CensoringDesign, q: f64, k: usize, f_prefix: &[f64], v: f64) -> Result<f64> {
    check_prefix(design, q, k, f_prefix, v)?;
    let kernel = KmKernel::new(design, q);
    if kernel.work_estimate(k) > DEFAULT_WORK_CAP {
        return Err(Error::Capacity(format!("KM enumeration for piece {k} is too large")));
    }
    let left = kernel.left_profiles(f_prefix);
    Ok(kernel.prob(f_prefix, &left, v))
}

/// Total multinomial mass of the enumeration behind [`km_action_cdf`]; equals one.
pub fn km_profile_mass(design: &CensoringDesign, k: usize, f_prefix: &[f64], v: f64) -> Result<f64> {
    check_prefix(design, 0.5, k, f_prefix, v)?;
    if k == 0 {
        return Ok(1.0);
    }
    let kernel = KmKernel::new(design, 0.5);
    let left = kernel.left_profiles(f_prefix);
    let left_mass: f64 = left.probs.iter().sum();
    let mut probs = vec![(1.0 - v).max(0.0), f_prefix[0]];
    for j in 1..k {
        probs.push((f_prefix[j] - f_prefix[j - 1]).max(0.0));
    }
    probs.push((v - f_prefix[k - 1]).max(0.0));
    let mut right_mass = 0.0;
    for_each_composition(kernel.n_right(k), &probs, &mut |_, w| right_mass += w);
    Ok(left_mass * right_mass)
}

/// `Ψ_k = (1 - P_k)(v - q) + (q - v)^+` for the KM policy.
pub fn psi_km(design: &CensoringDesign, q: f64, k: usize, f_prefix: &[f64], v: f64) -> Result<f64> {
    let p = km_action_cdf(design, q, k, f_prefix, v)?;
    Ok(psi(p, v, q))
}

fn psi(p: f64, v: f64, q: f64) -> f64 {
    (1.0 - p) * (v - q) + (q - v).max(0.0)
}

/// Theorem-level objective at a lattice point, in normalized units.
pub fn km_objective(design: &CensoringDesign, q: f64, point: &MonotonePoint) -> Result<f64> {
    let design = design.merged()?;
    if point.pairs.len() != design.num_levels() {
        return Err(Error::InvalidInput("lattice point and design disagree on K".into()));
    }
    let widths = design.widths();
    let plus = point.plus_levels();
    let f: Vec<f64> = point.pairs.iter().map(|p| p.0).collect();
    let mut total = 0.0;
    for k in 0..=design.num_levels() {
        if widths[k] > 0.0 {
            total += widths[k] * psi_km(&design, q, k, &f[..k], plus[k])?;
        }
    }
    Ok(total)
}

/// Prefix-DP solver over one sorted coordinate grid shared by every lattice coordinate.
struct LatticeSolver<'a> {
    kernel: &'a KmKernel,
    widths: &'a [f64],
    grid: Vec<f64>,
    q: f64,
    k_levels: usize,
    /// `live[k]` is false when pieces `k..=K` all have zero width.
    live: Vec<bool>,
}

/// Best objective from piece `k` on, with the maximizing coordinates `(f_k^+, f_{k+1}, f_{k+1}^+, ...)`.
type Branch = (f64, Vec<usize>);

impl<'a> LatticeSolver<'a> {
    fn new(kernel: &'a KmKernel, widths: &'a [f64], grid: Vec<f64>, q: f64) -> Self {
        let k_levels = widths.len() - 1;
        let mut live = vec![false; k_levels + 2];
        for k in (0..=k_levels).rev() {
            live[k] = live[k + 1] || widths[k] > 0.0;
        }
        Self { kernel, widths, grid, q, k_levels, live }
    }

    /// Maximizes over `f_k^+ >= f_k` and all later coordinates for a fixed prefix of indices.
    fn branch(&self, prefix: &[usize]) -> Branch {
        let k = prefix.len();
        let start = *prefix.last().unwrap();
        if !self.live[k] {
            return (0.0, vec![start; 2 * (self.k_levels - k) + 1]);
        }
        let g = self.grid.len();
        // suffix maxima over f_{k+1} of the deeper branches
        let mut deeper: Vec<Option<Branch>> = vec![None; g];
        if k < self.k_levels && self.live[k + 1] {
            let mut best: Option<(f64, usize, Vec<usize>)> = None;
            let mut next = prefix.to_vec();
            next.push(0);
            for j in (start..g).rev() {
                *next.last_mut().unwrap() = j;
                let (val, rest) = self.branch(&next);
                if best.as_ref().map_or(true, |b| val >= b.0) {
                    best = Some((val, j, rest));
                }
                let (bv, bj, brest) = best.as_ref().unwrap();
                let mut coords = vec![*bj];
                coords.extend_from_slice(brest);
                deeper[j] = Some((*bv, coords));
            }
        }
        let values: Vec<f64> = prefix.iter().map(|&i| self.grid[i]).collect();
        let weight = self.widths[k];
        let left = (weight > 0.0).then(|| self.kernel.left_profiles(&values));
        // with no samples right of the piece, P_k does not depend on v
        let constant_p = match &left {
            Some(l) if self.kernel.n_right(k) == 0 => Some(self.kernel.prob(&values, l, 0.0)),
            _ => None,
        };
        let mut best: Option<Branch> = None;
        for j in start..g {
            let v = self.grid[j];
            let local = match &left {
                Some(l) => {
                    let p = constant_p.unwrap_or_else(|| self.kernel.prob(&values, l, v));
                    weight * psi(p, v, self.q)
                }
                None => 0.0,
            };
            let (tail_val, tail_coords) = match &deeper[j] {
                Some((val, coords)) => (*val, coords.clone()),
                None => (0.0, vec![j; 2 * (self.k_levels - k)]),
            };
            let total = local + tail_val;
            if best.as_ref().map_or(true, |b| total > b.0) {
                let mut coords = vec![j];
                coords.extend(tail_coords);
                best = Some((total, coords));
            }
        }
        best.unwrap()
    }

    /// Returns the optimum and the full index vector `(f_0^+, f_1, f_1^+, ..., f_K, f_K^+)`.
    fn solve(&self) -> (f64, Vec<usize>) {
        let g = self.grid.len();
        let w0 = self.widths[0];
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut prefix_best: (f64, usize) = (f64::NEG_INFINITY, 0);
        for j in 0..g {
            let v = self.grid[j];
            let psi0 = if w0 > 0.0 { w0 * psi(self.kernel.prob0(v), v, self.q) } else { 0.0 };
            if psi0 > prefix_best.0 {
                prefix_best = (psi0, j);
            }
            let (val, rest) = self.branch(&[j]);
            let total = prefix_best.0 + val;
            if best.as_ref().map_or(true, |b| total > b.0) {
                let mut coords = vec![prefix_best.1, j];
                coords.extend(rest);
                best = Some((total, coords));
            }
        }
        best.unwrap()
    }

    fn point(&self, coords: &[usize]) -> Result<MonotonePoint> {
        let vals: Vec<f64> = coords.iter().map(|&i| self.grid[i]).collect();
        let pairs = (0..self.k_levels).map(|k| (vals[1 + 2 * k], vals[2 + 2 * k])).collect();
        MonotonePoint::new(vals[0], pairs)
    }

    /// Number of `P_k` evaluations the dynamic program performs on this grid.
    fn evaluations(&self) -> f64 {
        let g = self.grid.len() as f64;
        let mut total = g;
        for k in 1..=self.k_levels {
            if self.widths[k] > 0.0 {
                // prefixes of length k times choices of v
                let mut count = 1.0;
                for i in 0..=k {
                    count *= (g + i as f64) / (i + 1) as f64;
                }
                total += count * self.kernel.work_estimate(k);
            }
        }
        total
    }
}

fn sorted_unique(mut values: Vec<f64>) -> Vec<f64> {
    values.retain(|v| (0.0..=1.0).contains(v));
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// Worst-case expected regret of KM over all demand distributions on `[0, 1]`.
pub fn worst_case_regret_km(
    design: &CensoringDesign,
    cp: &CostParameters,
    lattice: &LatticeSpec,
) -> Result<RegretCertificate> {
    if !(lattice.mesh > 0.0) {
        return Err(Error::InvalidParameter(format!("lattice mesh must be positive, got {}", lattice.mesh)));
    }
    let design = design.merged()?;
    let q = cp.fractile();
    let kernel = KmKernel::new(&design, q);
    let widths = design.widths();

    let steps = (1.0 / lattice.mesh).ceil() as usize;
    let mut coarse: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    coarse.push(q);
    let solver = LatticeSolver::new(&kernel, &widths, sorted_unique(coarse), q);
    if solver.evaluations() > lattice.work_cap {
        return Err(Error::Capacity(format!(
            "KM lattice search needs about {:.1e} enumeration steps (cap {:.1e})",
            solver.evaluations(),
            lattice.work_cap
        )));
    }
    let (mut value, coords) = solver.solve();
    let mut point = solver.point(&coords)?;

    let mut spacing = 1.0 / steps as f64;
    for _ in 0..lattice.refine_rounds {
        let fine = spacing / 10.0;
        let mut grid = vec![0.0, q, 1.0];
        let mut centers = vec![point.f_plus_0];
        for &(f, fp) in &point.pairs {
            centers.push(f);
            centers.push(fp);
        }
        for c in centers {
            for j in -10i32..=10 {
                grid.push(c + j as f64 * fine);
            }
        }
        let solver = LatticeSolver::new(&kernel, &widths, sorted_unique(grid), q);
        let (val, coords) = solver.solve();
        if val > value {
            value = val;
            point = solver.point(&coords)?;
        }
        spacing = fine;
    }

    let plus = point.plus_levels();
    let piece_index = plus.iter().rposition(|&f| f <= q).unwrap_or(0);
    let scale = cp.scale();
    Ok(RegretCertificate {
        policy: Policy::Km,
        value: value.max(0.0) * scale,
        piece_index,
        v_star: point.f_plus_0,
        w_star: *plus.last().unwrap(),
        witness: point.witness(&design, 1e-9)?,
        grid_error_bound: lattice.mesh * scale,
        lattice_point: Some(point),
    })
}

/// Smallest `n <= n_cap` whose single-level KM design at `x` has worst-case regret at
/// most `target`; `None` when no such `n` exists.
pub fn sample_complexity_km(
    x: f64,
    q: f64,
    target: f64,
    n_cap: usize,
    lattice: &LatticeSpec,
) -> Result<Option<usize>> {
    if !(target > 0.0) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    if n_cap == 0 {
        return Err(Error::InvalidParameter("n_cap must be >= 1".into()));
    }
    let cp = CostParameters::from_fractile(q)?;
    for n in 1..=n_cap {
        let design = CensoringDesign::single(x, n)?;
        if worst_case_regret_km(&design, &cp, lattice)?.value <= target {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
