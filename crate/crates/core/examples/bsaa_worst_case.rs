//! Worst-case regret of BSAA for a censored design, with the three-point adversary that
//! attains it, checked against exact enumeration.

use censored_regret::bsaa::worst_case_regret_bsaa;
use censored_regret::model::{CensoringDesign, CostParameters};
use censored_regret::oracle::exact_expected_regret;
use censored_regret::policies::Policy;

fn main() -> censored_regret::Result<()> {
    let cp = CostParameters::new(0.8, 0.2)?;
    let design: CensoringDesign = "0.5:3,1.0:2".parse()?;
    let cert = worst_case_regret_bsaa(&design, &cp, 1e-5)?;
    println!("design {design}\n{cert}");

    let exact = exact_expected_regret(Policy::Bsaa, &design, &cert.witness, &cp)?;
    println!("exact regret at the witness: {} ({} demand tuples)", exact.mean, exact.trials);

    for m in [0, 1, 5, 10] {
        let d = CensoringDesign::exploration(0.7, 100, m)?;
        let c = worst_case_regret_bsaa(&d, &cp, 1e-4)?;
        println!("x=0.7 n=100 m={m:>2}: {:.6}", c.value);
    }
    Ok(())
}
