use thiserror::Error;

use crate::model::{FactorId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model has no nodes")]
    NoNodes,
    #[error("node {node} has zero labels")]
    EmptyLabelSet { node: NodeId },
    #[error("factor {factor} has an empty scope")]
    EmptyScope { factor: usize },
    #[error("factor {factor} references node {node}, but the model has {node_count} nodes")]
    InvalidNode { factor: usize, node: NodeId, node_count: usize },
    #[error("factor {factor} lists node {node} more than once")]
    DuplicateNodeInScope { factor: usize, node: NodeId },
    #[error("factors {first} and {second} share the scope {scope:?}")]
    DuplicateFactor { first: usize, second: usize, scope: Vec<NodeId> },
    #[error("factor {factor} has a non-finite cost at entry {entry}")]
    NonFiniteCost { factor: usize, entry: usize },
    #[error("factor {factor} table has {found} entries, expected {expected}")]
    TableShapeMismatch { factor: usize, expected: usize, found: usize },
    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),
    #[error("factor id {0} out of range")]
    InvalidFactor(FactorId),
    #[error("edge ({from}, {to}): target scope is not a strict subset of the source scope")]
    NotNested { from: FactorId, to: FactorId },
    #[error("invalid node order: {0}")]
    InvalidOrder(String),
    #[error("message on edge ({from}, {to}) is not a valid outer-to-separator edge")]
    InvalidMessageEdge { from: FactorId, to: FactorId },
    #[error("no factor with scope {scope:?} exists")]
    MissingSeparatorFactor { scope: Vec<NodeId> },
    #[error("factor {factor} is not in tree {tree}")]
    FactorNotInTree { tree: usize, factor: FactorId },
    #[error("edge ({from}, {to}) is not in the closed edge set")]
    InvalidEdge { from: FactorId, to: FactorId },
    #[error("factor {0} is not a separator")]
    NotASeparator(FactorId),
    #[error("solver state is not initialized")]
    StateNotInitialized,
    #[error("message on edge ({from}, {to}) is stale: source edge ({from}, {via}) is not valid")]
    StaleMessage { from: FactorId, via: FactorId, to: FactorId },
    #[error("reuse ordering violated for edge ({from}, {to})")]
    ReuseOrderViolation { from: FactorId, to: FactorId },
    #[error("step size must be positive, got {0}")]
    InvalidStepSize(f64),
    #[error("state space of {states} labelings exceeds the limit of {limit}")]
    TooLarge { states: f64, limit: f64 },
    #[error("input is not at a fixpoint: {0}")]
    NotAtFixpoint(String),
    #[error("effort bound violated: {ops} message operations in one pass, limit {limit}")]
    EffortBound { ops: u64, limit: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
