//! Three independent evaluations of a policy's expected regret at one distribution:
//! exhaustive enumeration, the integral of the action CDF, and seeded Monte-Carlo.

use censored_regret::model::{CensoringDesign, CostParameters, StepCdf};
use censored_regret::oracle::{exact_expected_regret, integral_regret, mc_expected_regret};
use censored_regret::policies::Policy;

fn main() -> censored_regret::Result<()> {
    let cp = CostParameters::new(0.7, 0.3)?;
    let design: CensoringDesign = "0.4:3,0.9:2".parse()?;
    let dist: StepCdf = "0:0.2,0.4:0.3,0.8:0.1,1:0.4".parse()?;
    for policy in [Policy::Bsaa, Policy::Km] {
        let exact = exact_expected_regret(policy, &design, &dist, &cp)?;
        let integral = integral_regret(policy, &design, &dist, &cp)?;
        let mc = mc_expected_regret(policy, &design, &dist, &cp, 100_000, 42)?;
        println!(
            "{policy}: exact {:.12} | integral {:.12} | monte-carlo {:.6} +/- {:.6}",
            exact.mean, integral, mc.mean, mc.std_error
        );
    }
    Ok(())
}
