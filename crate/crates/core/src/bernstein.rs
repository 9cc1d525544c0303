//! Binomial tail polynomials and the BSAA regret kernel.

use crate::error::{Error, Result};
use crate::model::ceil_qn;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Error of Stirling's approximation, `ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        // n! is exact in f64 for these arguments
        let mut fact = 1.0_f64;
        let mut i = 2.0;
        while i <= n {
            fact *= i;
            i += 1.0;
        }
        return fact.ln() - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `P(Binomial(n, p) = x)` with full relative accuracy (Loader's saddle-point form).
pub fn binomial_pmf(x: u64, n: u64, p: f64) -> f64 {
    if x > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let (xf, nf) = (x as f64, n as f64);
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(nf - xf) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Sums `pmf(j)` for `j` from `start` moving in direction `step` until the terms vanish.
fn sum_from(start: u64, n: u64, p: f64, upward: bool) -> f64 {
    let mut term = binomial_pmf(start, n, p);
    let mut sum = term;
    let odds = p / (1.0 - p);
    let mut j = start;
    loop {
        if upward {
            if j >= n {
                break;
            }
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            j += 1;
        } else {
            if j == 0 {
                break;
            }
            term *= j as f64 / (n - j + 1) as f64 / odds;
            j -= 1;
        }
        sum += term;
        if term <= sum * 1e-18 || term == 0.0 {
            break;
        }
    }
    sum
}

/// `B_{r,n}(p) = P(Binomial(n, p) >= r)`, with `B = 1` for `r <= 0` and `B = 0` for `r > n`.
pub fn bernstein_tail(r: i64, n: i64, p: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!("binomial size must be >= 0, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability must lie in [0,1], got {p}")));
    }
    Ok(tail(r, n as u64, p))
}

/// Infallible core of [`bernstein_tail`] for validated arguments.
pub(crate) fn tail(r: i64, n: u64, p: f64) -> f64 {
    if r <= 0 {
        return 1.0;
    }
    let r = r as u64;
    if r > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if r as f64 >= n as f64 * p {
        // terms decrease from r upward
        sum_from(r, n, p, true).min(1.0)
    } else {
        // r - 1 lies below the mean; terms decrease from r - 1 downward
        (1.0 - sum_from(r - 1, n, p, false)).clamp(0.0, 1.0)
    }
}

/// Parameters of one BSAA kernel `Ψ_k`: total sample size, cumulative count and fractile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSpec {
    pub n_total: usize,
    pub sigma: usize,
    pub q: f64,
}

impl PsiSpec {
    pub fn new(n_total: usize, sigma: usize, q: f64) -> Result<Self> {
        if n_total == 0 {
            return Err(Error::InvalidParameter("n_total must be >= 1".into()));
        }
        if sigma > n_total {
            return Err(Error::InvalidParameter(format!("sigma={sigma} exceeds n={n_total}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0,1), got {q}")));
        }
        Ok(Self { n_total, sigma, q })
    }

    /// Threshold `r = ⌈qn⌉ - σ`.
    pub fn r(&self) -> i64 {
        ceil_qn(self.q, self.n_total) - self.sigma as i64
    }

    /// Number of samples still uncensored at this piece, `m = n - σ`.
    pub fn m(&self) -> u64 {
        (self.n_total - self.sigma) as u64
    }

    /// Probability that BSAA orders at most `z` when `F(z) = v`.
    pub fn action_cdf(&self, v: f64) -> f64 {
        tail(self.r(), self.m(), v)
    }
}

/// `Ψ(v) = (1 - B_{r,m}(v))(v - q) + (q - v)^+`.
pub fn psi_bsaa(spec: &PsiSpec, v: f64) -> f64 {
    let b = spec.action_cdf(v);
    (1.0 - b) * (v - spec.q) + (spec.q - v).max(0.0)
}

/// Lipschitz constant `n + 2` shared by every `Ψ` kernel of an `n`-sample design.
pub fn psi_lipschitz_bound(n_total: usize) -> f64 {
    n_total as f64 + 2.0
}
