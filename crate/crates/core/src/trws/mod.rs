//! Sequential tree-reweighted message passing over monotonic chains.
//!
//! Three interchangeable formulations are provided: [`general`] runs
//! min-marginal averaging with a full junction-tree pass per tree,
//! [`monotonic`] keeps explicit per-tree parameters and sends one message per
//! tree per separator, and [`chain`] stores only messages and cached
//! separator tables. All three produce the same bound trace.

pub mod chain;
pub mod general;
pub mod monotonic;
pub mod tree;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::Result;
use crate::problem::Effort;

pub use chain::ChainSolver;
pub use general::GeneralSolver;
pub use monotonic::MonotonicSolver;
pub use tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which nested-factor shortcuts the message solver may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReuseMode {
    #[default]
    None,
    /// Reuse a valid message into the preceding nested separator.
    After,
    /// `After`, plus preemptive computation for the following separator.
    BeforeAfter,
}

impl ReuseMode {
    pub fn after(self) -> bool {
        self != ReuseMode::None
    }

    pub fn before(self) -> bool {
        self == ReuseMode::BeforeAfter
    }
}

impl FromStr for ReuseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ReuseMode::None),
            "after" => Ok(ReuseMode::After),
            "before-after" => Ok(ReuseMode::BeforeAfter),
            other => Err(format!("unknown reuse mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_passes: usize,
    /// Stop once |Φ_k − Φ_{k−1}| ≤ eps · max(1, |Φ_k|).
    pub eps: f64,
    pub normalize: bool,
    pub reuse: ReuseMode,
    /// Verify message validity before every reuse step (costly).
    pub check_validity: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_passes: 500, eps: 1e-7, normalize: true, reuse: ReuseMode::None, check_validity: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub pass: usize,
    pub direction: Direction,
    pub method: String,
    pub bound: f64,
    /// Cumulative message effort.
    pub meff: u64,
    /// Cumulative wall time in milliseconds.
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundTrace {
    pub rows: Vec<TraceRow>,
}

impl BoundTrace {
    pub fn bounds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.bound).collect()
    }

    pub fn last_bound(&self) -> Option<f64> {
        self.rows.last().map(|r| r.bound)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A solver that advances by whole passes and reports its bound.
pub trait PassSolver {
    fn method(&self) -> &'static str;
    fn pass(&mut self, direction: Direction) -> Result<f64>;
    fn effort(&self) -> Effort;
}

/// `true` when the bound moved by at most `eps` relative to its magnitude.
pub fn converged(prev: f64, cur: f64, eps: f64) -> bool {
    (cur - prev).abs() <= eps * cur.abs().max(1.0)
}

/// Alternates forward and backward passes, starting forward, until the
/// stopping rule fires.
pub fn drive<S: PassSolver + ?Sized>(solver: &mut S, max_passes: usize, eps: f64) -> Result<BoundTrace> {
    let start = Instant::now();
    let mut trace = BoundTrace::default();
    let mut direction = Direction::Forward;
    for pass in 1..=max_passes {
        let bound = solver.pass(direction)?;
        trace.rows.push(TraceRow {
            pass,
            direction,
            method: solver.method().to_string(),
            bound,
            meff: solver.effort().meff,
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        let n = trace.rows.len();
        if n >= 2 && converged(trace.rows[n - 2].bound, bound, eps) {
            break;
        }
        direction = direction.reverse();
    }
    Ok(trace)
}
