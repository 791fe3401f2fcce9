//! Higher-order MAP-MRF inference by sequential tree-reweighted message
//! passing over monotonic junction chains.

pub mod baselines;
pub mod cli;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod jstructure;
pub mod model;
pub mod problem;
pub mod trws;

pub use error::{Error, Result};
pub use model::{energy, Labeling, Model};
pub use problem::{Effort, Problem};
