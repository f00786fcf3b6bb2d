//! Maturity-randomized pricing of down-and-out step calls.

mod american;
mod european;
mod oide;

pub use american::{eval_eep_split_mr, solve_american_from, solve_american_mr, MrAmericanSolution};
pub use european::{eval_european_mr, solve_european_mr, MrEuropeanSolution, MIN_BARRIER_GAP};
pub use oide::{oide_residual, oide_residual_with, OideTarget};

use crate::model::DownOutStepSpec;

/// Applies the discount for occupation time accumulated before valuation.
pub fn seasoned_price(raw_price: f64, spec: &DownOutStepSpec) -> f64 {
    spec.seasoning_factor() * raw_price
}
