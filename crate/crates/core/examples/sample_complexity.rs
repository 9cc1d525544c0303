//! Smallest number of samples at a single level for which the Kaplan-Meier policy reaches
//! a quarter of the no-information regret q(1-q).

use censored_regret::experiments::{run_sample_complexity, Cell};
use censored_regret::km::LatticeSpec;

fn main() -> censored_regret::Result<()> {
    let q = 0.9;
    let xs = [0.78, 0.80, 0.82, 0.85, 0.90];
    let table = run_sample_complexity(q, 0.25, &xs, 1000, &LatticeSpec::default())?;
    println!("target column: {}", table.header[1]);
    for row in &table.rows {
        match row[1] {
            Cell::Int(n) => println!("x={:.2}: n = {n}", row[0].as_f64().unwrap()),
            _ => println!("x={:.2}: unattainable below the cap", row[0].as_f64().unwrap()),
        }
    }
    Ok(())
}
