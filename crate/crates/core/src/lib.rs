//! Worst-case regret of data-driven newsvendor policies trained on censored sales.
//!
//! Historical periods were stocked at known levels, so each observation is a sale
//! `min(D, x)` together with a flag telling whether demand was seen in full. Two policies
//! act on such data: Biased SAA (the `q`-quantile of the raw sales) and Kaplan-Meier (the
//! `q`-quantile of the product-limit estimate). The crate computes their exact worst-case
//! expected regret over all demand distributions on `[0, 1]`, together with an adversarial
//! distribution attaining it, and optimizes BSAA exploration designs under an inventory
//! budget.
//!
//! Runnable examples, one per capability (`cargo run --release --example <name>`):
//!
//! - `policies_demo`: BSAA and Kaplan-Meier decisions on a literal data set.
//! - `bsaa_worst_case`: BSAA certificate and its three-point witness.
//! - `km_exploration`: Kaplan-Meier regret as uncensored samples are added.
//! - `sample_complexity`: minimal sample size to reach a regret target.
//! - `design_optimizer`: ε-optimal budgeted BSAA designs.
//! - `oracle_check`: enumeration, integral and Monte-Carlo evaluations side by side.
//! - `sweep_csv`: regret-vs-n sweep in CSV form.
//!
//! ```
//! use censored_regret::bsaa::worst_case_regret_bsaa;
//! use censored_regret::model::{CensoringDesign, CostParameters};
//!
//! let cp = CostParameters::new(0.8, 0.2).unwrap();
//! let design: CensoringDesign = "0.5:1".parse().unwrap();
//! let cert = worst_case_regret_bsaa(&design, &cp, 1e-4).unwrap();
//! assert!(cert.value > 0.0);
//! ```

pub mod bernstein;
pub mod bsaa;
pub mod certificate;
pub mod cli;
pub mod design;
pub mod error;
pub mod experiments;
pub mod km;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod policies;
pub mod search;

pub use error::{Error, Result};
