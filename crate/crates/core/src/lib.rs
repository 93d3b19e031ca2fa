//! Multi-option ski rental: offline optimum, online strategies with and
//! without predictions, exact and sampled evaluation, the button-problem
//! reduction, lower-bound certificates and the synthetic experiment grid.

pub mod rental;
pub mod strategies;
pub mod harness;
pub mod button;
pub mod lowerbound;
pub mod experiments;
pub mod cli;
