//! Budgeted exploration design for BSAA.
//!
//! A design with total inventory at most `B` is searched in unit-count form: `N` single
//! samples at levels `x_1 <= ... <= x_N`. For fixed `N` the worst-case regret restricted
//! to grids `V ⊂ [0, q]`, `W ⊂ [q, 1]` is the value of an epigraph LP, solved here by
//! constraint generation. Candidate sizes are enumerated up to an explicit bound `N_max`.

use crate::bernstein::{psi_bsaa, PsiSpec};
use crate::bsaa::{uniform_grid, worst_case_regret_bsaa};
use crate::error::{Error, Result};
use crate::lp::CuttingPlaneLp;
use crate::model::{ceil_qn, CensoringDesign, CostParameters};

/// Default ceiling on `N_max` before `solve_design` gives up.
pub const DEFAULT_N_MAX_CAP: usize = 10_000;

const BENCHMARK_TOL: f64 = 1e-6;
const CUT_TOL: f64 = 1e-10;
const MAX_CUT_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub mesh_v: f64,
    pub mesh_w: f64,
    pub eps: f64,
}

impl GridSpec {
    pub fn new(mesh_v: f64, mesh_w: f64, eps: f64) -> Result<Self> {
        for (name, val) in [("mesh_v", mesh_v), ("mesh_w", mesh_w), ("eps", eps)] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {val}")));
            }
        }
        Ok(Self { mesh_v, mesh_w, eps })
    }

    /// Both meshes equal to `δ = eps / (2 (N_max + 2))`.
    pub fn for_budget(eps: f64, n_max: usize) -> Result<Self> {
        let delta = eps / (2.0 * (n_max as f64 + 2.0));
        Self::new(delta, delta, eps)
    }

    pub fn delta(&self) -> f64 {
        self.mesh_v.max(self.mesh_w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptResult {
    pub budget: usize,
    pub n_star: usize,
    pub levels: Vec<f64>,
    pub value: f64,
    pub u_bar: f64,
    pub n_max: usize,
}

impl DesignOptResult {
    /// The optimal levels as a grouped design.
    pub fn design(&self) -> Result<CensoringDesign> {
        let mut levels: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &x in &self.levels {
            match levels.last() {
                Some(&l) if l == x => *counts.last_mut().unwrap() += 1,
                _ => {
                    levels.push(x);
                    counts.push(1);
                }
            }
        }
        CensoringDesign::new(levels, counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLpSolution {
    /// Grid objective at `levels`, in normalized units.
    pub value: f64,
    pub levels: Vec<f64>,
    /// Rows in the final cutting-plane LP.
    pub rows: usize,
}

fn check_regime(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
    }
    if q < 0.5 {
        return Err(Error::UnsupportedRegime(format!(
            "design optimization requires q >= 0.5, got {q}"
        )));
    }
    Ok(())
}

/// Worst-case regret of BSAA with `B` samples all taken at level 1.
pub fn uncensored_benchmark(budget: usize, q: f64) -> Result<f64> {
    check_regime(q)?;
    if budget == 0 {
        return Err(Error::InvalidParameter("budget must be >= 1".into()));
    }
    let design = CensoringDesign::single(1.0, budget)?;
    let cert = worst_case_regret_bsaa(&design, &CostParameters::from_fractile(q)?, BENCHMARK_TOL)?;
    Ok(cert.value)
}

fn n_max_from(budget: usize, q: f64, u_bar: f64) -> Result<usize> {
    let denom = (1.0 - q) * (1.0 - u_bar / q);
    if !(denom > 0.0) {
        return Err(Error::Capacity(format!("benchmark {u_bar} is not below q = {q}")));
    }
    let n = (budget as f64 / denom).ceil();
    if !n.is_finite() || n > usize::MAX as f64 / 2.0 {
        return Err(Error::Capacity(format!("enumeration bound {n} is not representable")));
    }
    Ok(n as usize)
}

/// Upper bound on the sample sizes worth enumerating.
pub fn n_max(budget: usize, q: f64) -> Result<usize> {
    n_max_from(budget, q, uncensored_benchmark(budget, q)?)
}

/// `q (1 - min(1, B / (N - ⌈qN⌉ + 1)))`, a lower bound on the regret of any design with
/// `N` samples and budget `B`.
pub fn delta1_lower_bound(n: usize, budget: usize, q: f64) -> f64 {
    let free = (n as i64 - ceil_qn(q, n) + 1) as f64;
    let ratio = if free <= 0.0 { 1.0 } else { (budget as f64 / free).min(1.0) };
    q * (1.0 - ratio)
}

/// Variable layout of the epigraph LP over `N` unit samples:
/// `x_1..x_N`, then `t`, then `α_c` and `β_c` for split points `c = 0..=N+1`.
struct Layout {
    n: usize,
}

impl Layout {
    fn t(&self) -> usize {
        self.n
    }
    fn alpha(&self, c: usize) -> usize {
        self.n + 1 + c
    }
    fn beta(&self, c: usize) -> usize {
        self.n + 1 + (self.n + 2) + c
    }
    fn width(&self) -> usize {
        self.n + 1 + 2 * (self.n + 2)
    }
}

/// `ψ_k(u)` for `k = 0..=N` at every grid point.
fn psi_table(n: usize, q: f64, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    (0..=n)
        .map(|k| {
            let spec = PsiSpec::new(n, k, q)?;
            Ok(grid.iter().map(|&u| psi_bsaa(&spec, u)).collect())
        })
        .collect()
}

/// Piece widths `x_{k+1} - x_k` for `k = 0..=N` with `x_0 = 0`, `x_{N+1} = 1`.
fn widths(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    let mut prev = 0.0;
    for &v in x.iter().chain(std::iter::once(&1.0)) {
        out.push(v - prev);
        prev = v;
    }
    out
}

/// Affine cut `Σ_{k in pieces} (x_{k+1} - x_k) ψ_k(u) - slack <= 0` written as
/// `row·vars <= rhs`.
fn cut_row(layout: &Layout, pieces: std::ops::Range<usize>, psi: impl Fn(usize) -> f64, slack: usize) -> (Vec<f64>, f64) {
    let n = layout.n;
    let mut row = vec![0.0; layout.width()];
    let mut constant = 0.0;
    for k in pieces {
        let p = psi(k);
        // + x_{k+1} ψ_k, - x_k ψ_k
        if k + 1 <= n {
            row[k] += p;
        } else {
            constant += p;
        }
        if k >= 1 {
            row[k - 1] -= p;
        }
    }
    row[slack] = -1.0;
    (row, -constant)
}

/// For every split point `c`, the grid maximum (and its index) of `Σ_{k<c} w_k ψ_k`
/// when `from_left`, else of `Σ_{k>=c} w_k ψ_k`.
fn split_maxima(w: &[f64], table: &[Vec<f64>], from_left: bool) -> Vec<(f64, usize)> {
    let pieces = w.len();
    let len = table[0].len();
    let mut acc = vec![0.0; len];
    let mut out = vec![(0.0, 0usize); pieces + 1];
    let order: Vec<usize> = if from_left { (0..pieces).collect() } else { (0..pieces).rev().collect() };
    for k in order {
        if w[k] != 0.0 {
            for (a, &p) in acc.iter_mut().zip(&table[k]) {
                *a += w[k] * p;
            }
        }
        let (mut best, mut arg) = (acc[0], 0usize);
        for (j, &a) in acc.iter().enumerate() {
            if a > best {
                (best, arg) = (a, j);
            }
        }
        if from_left {
            out[k + 1] = (best, arg);
        } else {
            out[k] = (best, arg);
        }
    }
    out
}

fn grid_lp_inner(n: usize, budget: usize, q: f64, grid: &GridSpec, cutoff: Option<f64>) -> Result<Option<GridLpSolution>> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    check_regime(q)?;
    let v_grid = uniform_grid(0.0, q, grid.mesh_v)?;
    let w_grid = uniform_grid(q, 1.0, grid.mesh_w)?;
    let psi_v = psi_table(n, q, &v_grid)?;
    let psi_w = psi_table(n, q, &w_grid)?;
    let layout = Layout { n };

    let mut objective = vec![0.0; layout.width()];
    objective[layout.t()] = 1.0;
    let mut lp = CuttingPlaneLp::new(objective)?;
    let unit = |j: usize| {
        let mut r = vec![0.0; layout.width()];
        r[j] = 1.0;
        r
    };
    for j in 0..n - 1 {
        let mut r = unit(j);
        r[j + 1] = -1.0;
        lp.add_row(&r, 0.0);
    }
    lp.add_row(&unit(n - 1), 1.0);
    let mut r = vec![0.0; layout.width()];
    r[..n].iter_mut().for_each(|a| *a = 1.0);
    lp.add_row(&r, budget as f64);
    for c in 0..=n + 1 {
        let mut r = vec![0.0; layout.width()];
        r[layout.alpha(c)] = 1.0;
        r[layout.beta(c)] = 1.0;
        r[layout.t()] = -1.0;
        lp.add_row(&r, 0.0);
    }

    for _ in 0..MAX_CUT_ROUNDS {
        let sol = lp.solve()?;
        if let Some(limit) = cutoff {
            if sol.objective > limit + 1e-12 {
                return Ok(None);
            }
        }
        let x = &sol.x[..n];
        let w = widths(x);
        let left = split_maxima(&w, &psi_v, true);
        let right = split_maxima(&w, &psi_w, false);
        let mut added = 0;
        for c in 0..=n + 1 {
            let (lv, j) = left[c];
            if c > 0 && lv > sol.x[layout.alpha(c)] + CUT_TOL {
                let (row, rhs) = cut_row(&layout, 0..c, |k| psi_v[k][j], layout.alpha(c));
                lp.add_row(&row, rhs);
                added += 1;
            }
            if c <= n {
                let (rw, j) = right[c];
                if rw > sol.x[layout.beta(c)] + CUT_TOL {
                    let (row, rhs) = cut_row(&layout, c..n + 1, |k| psi_w[k][j], layout.beta(c));
                    lp.add_row(&row, rhs);
                    added += 1;
                }
            }
        }
        if added == 0 {
            let mut levels: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            for j in 1..n {
                levels[j] = levels[j].max(levels[j - 1]);
            }
            let w = widths(&levels);
            let left = split_maxima(&w, &psi_v, true);
            let right = split_maxima(&w, &psi_w, false);
            let mut value: f64 = 0.0;
            for c in 0..=n + 1 {
                let r = if c <= n { right[c].0 } else { 0.0 };
                value = value.max(left[c].0 + r);
            }
            return Ok(Some(GridLpSolution { value, levels, rows: lp.num_rows() }));
        }
    }
    Err(Error::Capacity("cutting-plane loop did not converge".into()))
}

/// Grid-restricted minimax LP for `N` unit samples with total inventory at most `B`.
pub fn grid_lp(n: usize, budget: usize, q: f64, grid: &GridSpec) -> Result<GridLpSolution> {
    grid_lp_inner(n, budget, q, grid, None).map(|s| s.expect("no cutoff"))
}

/// ε-optimal BSAA design under budget `B`, with the default `N_max` ceiling.
pub fn solve_design(budget: usize, q: f64, eps: f64) -> Result<DesignOptResult> {
    solve_design_capped(budget, q, eps, DEFAULT_N_MAX_CAP)
}

pub fn solve_design_capped(budget: usize, q: f64, eps: f64, cap: usize) -> Result<DesignOptResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let u_bar = uncensored_benchmark(budget, q)?;
    // the benchmark is computed to BENCHMARK_TOL; bound it from above for a safe N_max
    let n_max = n_max_from(budget, q, u_bar + BENCHMARK_TOL)?;
    if n_max > cap {
        return Err(Error::Capacity(format!("N_max = {n_max} exceeds the cap {cap}")));
    }
    let grid = GridSpec::for_budget(eps, n_max)?;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for n in 1..=n_max {
        let incumbent = best.as_ref().map(|b| b.0);
        if let Some(b) = incumbent {
            // any grid value at this N is at least δ₁ - eps
            if delta1_lower_bound(n, budget, q) - eps > b {
                continue;
            }
        }
        if let Some(sol) = grid_lp_inner(n, budget, q, &grid, incumbent)? {
            if incumbent.map_or(true, |b| sol.value < b - 1e-12) {
                best = Some((sol.value, n, sol.levels));
            }
        }
    }
    let (value, n_star, levels) = best.ok_or_else(|| Error::Infeasible)?;
    Ok(DesignOptResult { budget, n_star, levels, value, u_bar, n_max })
}
