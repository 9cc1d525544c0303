//! Value of a few uncensored samples for the Kaplan-Meier policy: n = 100 periods, of
//! which m are stocked at level 1 and the rest at x.

use censored_regret::bsaa::worst_case_regret_bsaa;
use censored_regret::km::{worst_case_regret_km, LatticeSpec};
use censored_regret::model::{CensoringDesign, CostParameters};

fn main() -> censored_regret::Result<()> {
    let cp = CostParameters::from_fractile(0.8)?;
    let lattice = LatticeSpec::default();
    let full = worst_case_regret_bsaa(&CensoringDesign::single(1.0, 100)?, &cp, 1e-5)?.value;
    println!("full information (100 uncensored samples): {full:.6}");
    for x in [0.7, 0.8, 0.9] {
        let base = worst_case_regret_km(&CensoringDesign::exploration(x, 100, 0)?, &cp, &lattice)?.value;
        print!("x={x}: m=0 {base:.6}");
        for m in [1, 2, 5, 10] {
            let cert = worst_case_regret_km(&CensoringDesign::exploration(x, 100, m)?, &cp, &lattice)?;
            print!(" | m={m} {:.6} ({:.2}x)", cert.value, cert.value / base);
        }
        println!();
    }
    Ok(())
}
