//! Budgeted exploration design for BSAA: for each inventory budget B, the design that
//! minimizes worst-case regret among all designs whose levels sum to at most B.

use censored_regret::design::{delta1_lower_bound, solve_design};

fn main() -> censored_regret::Result<()> {
    let q = 0.8;
    let eps = 0.02;
    for budget in 1..=5 {
        let res = solve_design(budget, q, eps)?;
        let levels: Vec<String> = res.levels.iter().map(|x| format!("{x:.4}")).collect();
        println!(
            "B={budget}: N*={} levels=[{}] value={:.6} U_bar={:.6} N_max={} lower bound={:.6}",
            res.n_star,
            levels.join(", "),
            res.value,
            res.u_bar,
            res.n_max,
            delta1_lower_bound(res.n_star, budget, q),
        );
    }
    Ok(())
}
