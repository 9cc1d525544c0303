//! Exact worst-case regret of Biased SAA.
//!
//! Worst-case CDFs are constant at a level `v ∈ [0, q]` on the pieces left of a split
//! point `c` and at a level `w ∈ [q, 1]` from `x_c` on, so for each `c` the objective
//! separates into two one-dimensional searches. The split `c = 0` (every piece above
//! `q`) is included alongside the crossing pieces. Both searches run on a uniform grid
//! whose mesh follows from the `(n + 2)`-Lipschitz bound, then a golden-section pass
//! polishes each incumbent.

use crate::bernstein::{psi_bsaa, psi_lipschitz_bound, PsiSpec};
use crate::certificate::RegretCertificate;
use crate::error::{Error, Result};
use crate::model::{CensoringDesign, CostParameters, StepCdf};
use crate::policies::Policy;
use crate::search::golden_max;

/// Largest grid the engine will allocate per side.
pub const MAX_GRID_POINTS: usize = 50_000_000;

const GOLDEN_ITERATIONS: usize = 60;

/// `P(π_BSAA <= z)` for `z` in piece `k`, given `F(z) = fz`.
pub fn bsaa_action_cdf(design: &CensoringDesign, q: f64, k: usize, fz: f64) -> Result<f64> {
    if k > design.num_levels() {
        return Err(Error::InvalidParameter(format!(
            "piece {k} out of range 0..={}",
            design.num_levels()
        )));
    }
    if !(0.0..=1.0).contains(&fz) {
        return Err(Error::InvalidParameter(format!("F(z) must lie in [0,1], got {fz}")));
    }
    let spec = PsiSpec::new(design.total(), design.cumulative()[k], q)?;
    Ok(spec.action_cdf(fz))
}

/// Uniform grid on `[lo, hi]` with spacing at most `mesh`, both endpoints included.
pub(crate) fn uniform_grid(lo: f64, hi: f64, mesh: f64) -> Result<Vec<f64>> {
    let steps = ((hi - lo) / mesh).ceil().max(1.0);
    if steps >= MAX_GRID_POINTS as f64 {
        return Err(Error::Capacity(format!(
            "grid on [{lo},{hi}] with mesh {mesh:e} needs {steps} points"
        )));
    }
    let steps = steps as usize;
    let mut grid: Vec<f64> = (0..steps).map(|j| lo + (hi - lo) * j as f64 / steps as f64).collect();
    grid.push(hi);
    Ok(grid)
}

struct Pieces {
    specs: Vec<PsiSpec>,
    widths: Vec<f64>,
}

impl Pieces {
    fn new(design: &CensoringDesign, q: f64) -> Result<Self> {
        let n = design.total();
        let specs = design
            .cumulative()
            .into_iter()
            .map(|s| PsiSpec::new(n, s, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { specs, widths: design.widths() })
    }

    fn range_sum(&self, lo: usize, hi: usize, v: f64) -> f64 {
        (lo..hi)
            .filter(|&k| self.widths[k] > 0.0)
            .map(|k| self.widths[k] * psi_bsaa(&self.specs[k], v))
            .sum()
    }
}

/// Running argmax over a grid; the first (smallest) maximizer wins ties.
fn grid_argmax(values: &[f64], grid: &[f64]) -> (f64, f64) {
    let mut best = (grid[0], values[0]);
    for (&x, &val) in grid.iter().zip(values) {
        if val > best.1 {
            best = (x, val);
        }
    }
    best
}

/// Worst-case expected regret of BSAA over all demand distributions on `[0, 1]`.
pub fn worst_case_regret_bsaa(
    design: &CensoringDesign,
    cp: &CostParameters,
    tol: f64,
) -> Result<RegretCertificate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let q = cp.fractile();
    let n = design.total();
    let k_levels = design.num_levels();
    let pieces = Pieces::new(design, q)?;
    let mesh = tol / psi_lipschitz_bound(n);
    let v_grid = uniform_grid(0.0, q, mesh)?;
    let w_grid = uniform_grid(q, 1.0, mesh)?;

    // Split point c: pieces k < c sit at level v <= q, pieces k >= c at level w >= q.
    // best (value, point) of the left sum over pieces 0..c, for every c in 0..=K+1
    let mut left = Vec::with_capacity(k_levels + 2);
    left.push((0.0, 0.0));
    let mut acc = vec![0.0; v_grid.len()];
    for k in 0..=k_levels {
        if pieces.widths[k] > 0.0 {
            for (a, &v) in acc.iter_mut().zip(&v_grid) {
                *a += pieces.widths[k] * psi_bsaa(&pieces.specs[k], v);
            }
        }
        left.push(grid_argmax(&acc, &v_grid));
    }
    // best (value, point) of the right sum over pieces c..=K
    let mut right = vec![(q, 0.0); k_levels + 2];
    let mut acc = vec![0.0; w_grid.len()];
    for c in (0..=k_levels).rev() {
        if pieces.widths[c] > 0.0 {
            for (a, &w) in acc.iter_mut().zip(&w_grid) {
                *a += pieces.widths[c] * psi_bsaa(&pieces.specs[c], w);
            }
        }
        right[c] = grid_argmax(&acc, &w_grid);
    }

    let mut best: Option<(f64, usize, f64, f64)> = None;
    for c in 0..=k_levels + 1 {
        let (mut v, mut lv) = left[c];
        if c > 0 {
            let (lo, hi) = ((v - mesh).max(0.0), (v + mesh).min(q));
            let (rx, rval) = golden_max(|x| pieces.range_sum(0, c, x), lo, hi, GOLDEN_ITERATIONS);
            if rval > lv {
                (v, lv) = (rx, rval);
            }
        }
        let (mut w, mut rw) = right[c];
        if c <= k_levels {
            let (lo, hi) = ((w - mesh).max(q), (w + mesh).min(1.0));
            let (rx, rval) =
                golden_max(|x| pieces.range_sum(c, k_levels + 1, x), lo, hi, GOLDEN_ITERATIONS);
            if rval > rw {
                (w, rw) = (rx, rval);
            }
        }
        let total = lv + rw;
        if best.map_or(true, |b| total > b.0) {
            best = Some((total, c, v, w));
        }
    }
    let (value, c, v, w) = best.expect("at least one split");
    let jump = design.breakpoints()[c];
    let witness = StepCdf::from_masses(&[(0.0, v), (jump, w - v), (1.0, 1.0 - w)])?;
    let scale = cp.scale();
    Ok(RegretCertificate {
        policy: Policy::Bsaa,
        value: value.max(0.0) * scale,
        piece_index: c,
        v_star: v,
        w_star: w,
        witness,
        grid_error_bound: psi_lipschitz_bound(n) * mesh * scale,
        lattice_point: None,
    })
}

/// Objective of the reduction for split point `c` (pieces `k < c` at level `v`, the rest
/// at level `w`), in normalized units.
pub fn bsaa_objective(design: &CensoringDesign, q: f64, c: usize, v: f64, w: f64) -> Result<f64> {
    let pieces = Pieces::new(design, q)?;
    let k_levels = design.num_levels();
    if c > k_levels + 1 {
        return Err(Error::InvalidParameter(format!("split point {c} out of range")));
    }
    Ok(pieces.range_sum(0, c, v) + pieces.range_sum(c, k_levels + 1, w))
}
