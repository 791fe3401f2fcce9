//! File format, generators and trace output.

pub mod format;
pub mod generators;
pub mod trace;

pub use format::{parse_model, write_model, ParsedModel};
pub use trace::{read_trace, write_trace};
