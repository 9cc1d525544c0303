//! Worst-case regret certificates shared by the BSAA and KM engines.

use std::fmt;

use crate::km::MonotonePoint;
use crate::model::StepCdf;
use crate::policies::Policy;

/// A worst-case regret value with the adversarial distribution that attains it.
///
/// `value` and `grid_error_bound` are in cost units (already multiplied by `c_u + c_o`).
/// For BSAA, `piece_index` is the split point `c`: the witness CDF equals `v_star` on
/// pieces `0..c` and jumps to `w_star` at `x_c` (with `x_0 = 0`, `x_{K+1} = 1`). For KM
/// they summarize the maximizing lattice point: `v_star = f_0^+`, `w_star = f_K^+`, and `piece_index` is the last piece
/// whose level stays at or below `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCertificate {
    pub policy: Policy,
    pub value: f64,
    pub piece_index: usize,
    pub v_star: f64,
    pub w_star: f64,
    pub witness: StepCdf,
    pub grid_error_bound: f64,
    /// Full maximizing point of the monotone lattice (KM only).
    pub lattice_point: Option<MonotonePoint>,
}

impl fmt::Display for RegretCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "policy: {}", self.policy)?;
        writeln!(f, "value: {}", self.value)?;
        writeln!(f, "grid_error_bound: {}", self.grid_error_bound)?;
        writeln!(f, "piece_index: {}", self.piece_index)?;
        writeln!(f, "v_star: {}", self.v_star)?;
        writeln!(f, "w_star: {}", self.w_star)?;
        if let Some(point) = &self.lattice_point {
            let plus: Vec<String> = point.plus_levels().iter().map(|v| v.to_string()).collect();
            writeln!(f, "lattice_plus_levels: {}", plus.join(","))?;
        }
        write!(f, "witness: {}", self.witness)
    }
}
