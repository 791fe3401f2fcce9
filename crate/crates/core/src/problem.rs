//! A model bundled with its closed edge set, chain decomposition and
//! precomputed index maps.

use std::collections::HashMap;

use crate::decomposition::{build_monotonic_chains, Built, Decomposition, NodeOrder};
use crate::error::Result;
use crate::jstructure::JStructure;
use crate::model::{FactorId, Model};

/// Work counters. `meff` counts joint states enumerated by message
/// minimizations; `ops` counts message updates; `diagnostic` counts states
/// enumerated while evaluating bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Effort {
    pub meff: u64,
    pub ops: u64,
    pub diagnostic: u64,
}

/// Minimizes `table` (over a factor A) onto the states of a sub-factor B.
pub fn min_marginalize(table: &[f64], map: &[usize], out_len: usize) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; out_len];
    for (v, &i) in table.iter().zip(map) {
        if *v < out[i] {
            out[i] = *v;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub model: Model,
    pub j: JStructure,
    pub decomposition: Decomposition,
    pub added_factors: Vec<FactorId>,
    proj: HashMap<(FactorId, FactorId), Vec<usize>>,
}

impl Problem {
    /// Builds monotonic chains (augmenting the model where needed) and
    /// caches projections for every closed edge.
    pub fn new(model: &Model, j: &JStructure, order: &NodeOrder) -> Result<Self> {
        let Built { model, j, decomposition, added_factors, .. } = build_monotonic_chains(model, j, order)?;
        Ok(Self::from_parts(model, j, decomposition, added_factors))
    }

    pub fn with_identity_order(model: &Model, j: &JStructure) -> Result<Self> {
        Self::new(model, j, &NodeOrder::identity(model.node_count()))
    }

    /// Wraps an explicitly constructed decomposition.
    pub fn from_parts(model: Model, j: JStructure, decomposition: Decomposition, added_factors: Vec<FactorId>) -> Self {
        let proj =
            j.closed_edges().iter().map(|&(a, b)| ((a, b), model.projection(model.scope(a), model.scope(b)))).collect();
        Problem { model, j, decomposition, added_factors, proj }
    }

    /// Index map from states of A to states of B for a closed edge (A,B).
    pub fn proj(&self, a: FactorId, b: FactorId) -> &[usize] {
        self.proj.get(&(a, b)).unwrap_or_else(|| panic!("no closed edge ({a}, {b})"))
    }

    pub fn len(&self, f: FactorId) -> usize {
        self.model.table_len(f)
    }

    pub fn rho(&self, t: usize) -> f64 {
        self.decomposition.rho(t)
    }

    pub fn rho_factor(&self, f: FactorId) -> f64 {
        self.decomposition.rho_factor(f)
    }

    /// Σ_{(A,B)∈J'} |X_A|: the work of one full message per edge.
    pub fn message_effort_bound(&self) -> u64 {
        self.decomposition.message_edges().iter().map(|&(a, _)| self.len(a) as u64).sum()
    }

    /// |J'|.
    pub fn message_edge_count(&self) -> usize {
        self.decomposition.message_edges().len()
    }
}
