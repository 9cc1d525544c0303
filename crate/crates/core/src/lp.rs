//! Small dense linear programming: a two-phase primal simplex for general problems and
//! an incremental dual simplex for cutting-plane loops.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

/// `minimize c·x` subject to `rows[i]·x (<=|>=|=) rhs[i]` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub kinds: Vec<RowKind>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LpProblem {
    /// A problem over `n` variables with bounds `0 <= x` and no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            rows: Vec::new(),
            kinds: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, kind: RowKind, rhs: f64) -> &mut Self {
        self.rows.push(row);
        self.kinds.push(kind);
        self.rhs.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let consistent = self.rows.iter().all(|r| r.len() == n)
            && self.kinds.len() == self.rows.len()
            && self.rhs.len() == self.rows.len()
            && self.lower.len() == n
            && self.upper.len() == n;
        if !consistent {
            return Err(Error::InvalidInput("LP dimensions are inconsistent".into()));
        }
        let finite = self.objective.iter().chain(self.rhs.iter()).chain(self.lower.iter()).all(|v| v.is_finite())
            && self.rows.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("LP data must be finite".into()));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if let Some(u) = u {
                if u < l {
                    return Err(Error::Infeasible);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Dense simplex tableau. Row `i` holds constraint coefficients and the right-hand side in
/// the last column; `cost` holds reduced costs with the negated objective value last.
#[derive(Debug, Clone)]
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may never enter the basis.
    barred: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cost.len();
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..w {
                self.cost[j] -= f * pivot_row[j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Primal simplex on the current cost row. Returns false when unbounded.
    fn primal(&mut self) -> Result<bool> {
        let rhs = self.width();
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut enter: Option<usize> = None;
            for j in 0..rhs {
                if self.barred[j] || self.cost[j] >= -EPS {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && self.cost[j] < self.cost[e] => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = enter else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_EPS {
                    let ratio = row[rhs] / row[c];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else { return Ok(false) };
            degenerate = if ratio.abs() <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, c);
        }
        Err(Error::Capacity("simplex pivot limit reached".into()))
    }

    /// Dual simplex from a dual-feasible basis. Returns false when the primal is infeasible.
    fn dual(&mut self) -> Result<bool> {
        let rhs = self.width();
        for _ in 0..MAX_PIVOTS {
            let mut leave: Option<usize> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[rhs] < -EPS && leave.map_or(true, |l| row[rhs] < self.rows[l][rhs]) {
                    leave = Some(i);
                }
            }
            let Some(r) = leave else { return Ok(true) };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..rhs {
                let a = self.rows[r][j];
                if self.barred[j] || a >= -PIVOT_EPS {
                    continue;
                }
                let ratio = self.cost[j].max(0.0) / -a;
                if enter.map_or(true, |(_, best)| ratio < best - 1e-15) {
                    enter = Some((j, ratio));
                }
            }
            let Some((c, _)) = enter else { return Ok(false) };
            self.pivot(r, c);
        }
        Err(Error::Capacity("dual simplex pivot limit reached".into()))
    }

    fn value_of(&self, col: usize) -> f64 {
        let rhs = self.width();
        self.basis
            .iter()
            .position(|&b| b == col)
            .map_or(0.0, |r| self.rows[r][rhs])
    }
}

/// Solves a dense LP with a two-phase primal simplex. Pivoting uses Dantzig's rule and
/// falls back to Bland's rule after a run of degenerate pivots, so results are
/// deterministic for a given input.
pub fn lp_solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.num_vars();

    // shift x = lower + y, y >= 0; finite upper bounds become rows
    let mut rows: Vec<(Vec<f64>, RowKind, f64)> = Vec::new();
    for ((row, &kind), &b) in problem.rows.iter().zip(&problem.kinds).zip(&problem.rhs) {
        let shift: f64 = row.iter().zip(&problem.lower).map(|(a, l)| a * l).sum();
        rows.push((row.clone(), kind, b - shift));
    }
    for (j, u) in problem.upper.iter().enumerate() {
        if let Some(u) = u {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, RowKind::Le, u - problem.lower[j]));
        }
    }
    for (row, kind, b) in rows.iter_mut() {
        if *b < 0.0 {
            row.iter_mut().for_each(|a| *a = -*a);
            *b = -*b;
            *kind = match *kind {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != RowKind::Le).count();
    let width = n + n_slack + n_art;
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        cost: vec![0.0; width + 1],
        basis: vec![0; m],
        barred: vec![false; width],
    };
    let (mut s, mut a) = (n, n + n_slack);
    for (i, (row, kind, b)) in rows.iter().enumerate() {
        let mut full = vec![0.0; width + 1];
        full[..n].copy_from_slice(row);
        full[width] = *b;
        match kind {
            RowKind::Le => {
                full[s] = 1.0;
                t.basis[i] = s;
                s += 1;
            }
            RowKind::Ge => {
                full[s] = -1.0;
                s += 1;
                full[a] = 1.0;
                t.basis[i] = a;
                a += 1;
            }
            RowKind::Eq => {
                full[a] = 1.0;
                t.basis[i] = a;
                a += 1;
            }
        }
        t.rows.push(full);
    }

    if n_art > 0 {
        // phase one: minimize the sum of artificials
        for (i, row) in t.rows.iter().enumerate() {
            if t.basis[i] >= n + n_slack {
                for j in 0..=width {
                    if j < n + n_slack || j == width {
                        t.cost[j] -= row[j];
                    }
                }
            }
        }
        t.primal()?;
        if -t.cost[width] > 1e-8 {
            return Err(Error::Infeasible);
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= n + n_slack {
                if let Some(c) = (0..n + n_slack).find(|&j| t.rows[i][j].abs() > 1e-9) {
                    t.pivot(i, c);
                }
            }
        }
        for j in n + n_slack..width {
            t.barred[j] = true;
        }
    }

    // phase two
    t.cost = vec![0.0; width + 1];
    t.cost[..n].copy_from_slice(&problem.objective);
    for i in 0..m {
        let b = t.basis[i];
        let f = t.cost[b];
        if f != 0.0 {
            for j in 0..=width {
                t.cost[j] -= f * t.rows[i][j];
            }
        }
    }
    if !t.primal()? {
        return Err(Error::Unbounded);
    }
    let x: Vec<f64> = (0..n).map(|j| problem.lower[j] + t.value_of(j)).collect();
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { objective, x })
}

/// `minimize c·x` over `x >= 0` subject to rows `a·x <= b`, with `c >= 0` so the slack
/// basis is dual feasible. Rows can be appended between solves; each solve resumes the
/// dual simplex from the previous basis.
#[derive(Debug, Clone)]
pub struct CuttingPlaneLp {
    n: usize,
    objective: Vec<f64>,
    t: Tableau,
}

impl CuttingPlaneLp {
    pub fn new(objective: Vec<f64>) -> Result<Self> {
        if objective.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::InvalidInput("cutting-plane LP needs a nonnegative objective".into()));
        }
        let n = objective.len();
        let mut cost = objective.clone();
        cost.push(0.0);
        Ok(Self { n, objective, t: Tableau { rows: Vec::new(), cost, basis: Vec::new(), barred: vec![false; n] } })
    }

    pub fn num_rows(&self) -> usize {
        self.t.rows.len()
    }

    /// Appends `a·x <= b` with its own slack column.
    pub fn add_row(&mut self, a: &[f64], b: f64) {
        let old_width = self.t.width();
        for row in self.t.rows.iter_mut() {
            let rhs = row.pop().unwrap();
            row.push(0.0);
            row.push(rhs);
        }
        let rhs = self.t.cost.pop().unwrap();
        self.t.cost.push(0.0);
        self.t.cost.push(rhs);
        self.t.barred.push(false);

        let width = old_width + 1;
        let mut row = vec![0.0; width + 1];
        row[..self.n].copy_from_slice(a);
        row[old_width] = 1.0;
        row[width] = b;
        // express in the current basis
        for (i, basic) in self.t.basis.iter().enumerate() {
            let f = row[*basic];
            if f != 0.0 {
                let src = &self.t.rows[i];
                for j in 0..=width {
                    row[j] -= f * src[j];
                }
                row[*basic] = 0.0;
            }
        }
        self.t.rows.push(row);
        self.t.basis.push(old_width);
    }

    pub fn solve(&mut self) -> Result<LpSolution> {
        if !self.t.dual()? {
            return Err(Error::Infeasible);
        }
        let x: Vec<f64> = (0..self.n).map(|j| self.t.value_of(j).max(0.0)).collect();
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { objective, x })
    }
}
