//! Comparison solvers sharing the model and decomposition infrastructure.

pub mod msd;
pub mod subgradient;

pub use msd::MsdSolver;
pub use subgradient::{select_lambda, SubgradientSolver, LAMBDA_GRID};
