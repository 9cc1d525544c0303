//! BSAA and Kaplan-Meier decisions on a small censored data set.

use censored_regret::policies::{bsaa_decide, km_cdf, km_decide, parse_sample_set};

fn main() -> censored_regret::Result<()> {
    // two groups: three periods stocked at 0.6, two at 1.0; a trailing `u` marks a sale
    // below the stock level, i.e. an uncensored demand
    let samples = parse_sample_set("0.6|0.2u,0.6,0.6;1.0|0.45u,0.9u")?;
    let q = 0.8;
    let estimate = km_cdf(&samples)?;
    println!("Kaplan-Meier CDF: {}", estimate.cdf);
    println!("BSAA orders {}", bsaa_decide(&samples, q)?);
    println!("KM orders   {}", km_decide(&samples, q)?);
    Ok(())
}
