//! Regret-vs-n sweep written as CSV, in the column layout `n,wc_regret_{m}_{x},...`.

use censored_regret::experiments::{run_sweep, SweepConfig};
use censored_regret::km::LatticeSpec;
use censored_regret::policies::Policy;

fn main() -> censored_regret::Result<()> {
    let config = SweepConfig {
        policy: Policy::Km,
        x: 0.8,
        q: 0.8,
        m_values: vec![0, 1, 5],
        n_range: 1..=20,
        tol: 1e-4,
        lattice: LatticeSpec::default(),
    };
    let table = run_sweep(&config)?;
    print!("{}", table.to_csv_string()?);
    Ok(())
}
