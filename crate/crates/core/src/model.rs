//! Discrete graphical model with dense cost tables.
//!
//! Factors are identified by their scope. Every scope is stored sorted by node
//! id and its table is row-major over that sorted scope, so the last node of
//! the scope varies fastest.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::jstructure::JStructure;

pub type NodeId = usize;
pub type FactorId = usize;

/// A full assignment of labels, one per node.
pub type Labeling = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<NodeId>,
    table: Vec<f64>,
    strides: Vec<usize>,
}

impl Factor {
    pub fn scope(&self) -> &[NodeId] {
        &self.scope
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Row-major strides over the sorted scope.
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    label_counts: Vec<usize>,
    factors: Vec<Factor>,
    by_scope: HashMap<Vec<NodeId>, FactorId>,
}

fn strides_for(scope: &[NodeId], label_counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; scope.len()];
    for i in (0..scope.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * label_counts[scope[i + 1]];
    }
    strides
}

impl Model {
    /// Validates and builds a model. Each factor is given as `(scope, table)`
    /// with the table row-major over the scope *in the order given*; scopes
    /// are sorted and tables re-indexed accordingly.
    pub fn new(label_counts: Vec<usize>, factors: Vec<(Vec<NodeId>, Vec<f64>)>) -> Result<Self> {
        if label_counts.is_empty() {
            return Err(Error::NoNodes);
        }
        if let Some(node) = label_counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyLabelSet { node });
        }
        let mut model = Model { label_counts, factors: Vec::with_capacity(factors.len()), by_scope: HashMap::new() };
        for (index, (scope, table)) in factors.into_iter().enumerate() {
            model.push_factor_checked(index, scope, table)?;
        }
        Ok(model)
    }

    fn push_factor_checked(&mut self, index: usize, scope: Vec<NodeId>, table: Vec<f64>) -> Result<FactorId> {
        let node_count = self.node_count();
        if scope.is_empty() {
            return Err(Error::EmptyScope { factor: index });
        }
        if let Some(&node) = scope.iter().find(|&&v| v >= node_count) {
            return Err(Error::InvalidNode { factor: index, node, node_count });
        }
        let mut sorted = scope.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateNodeInScope { factor: index, node: w[0] });
        }
        let expected: usize = scope.iter().map(|&v| self.label_counts[v]).product();
        if table.len() != expected {
            return Err(Error::TableShapeMismatch { factor: index, expected, found: table.len() });
        }
        if let Some(entry) = table.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCost { factor: index, entry });
        }
        if let Some(&first) = self.by_scope.get(&sorted) {
            return Err(Error::DuplicateFactor { first, second: index, scope: sorted });
        }

        let strides = strides_for(&sorted, &self.label_counts);
        let table = if sorted == scope {
            table
        } else {
            // Re-index from the caller's scope order to the sorted one.
            let given = strides_for(&scope, &self.label_counts);
            let position: Vec<usize> = sorted.iter().map(|v| scope.iter().position(|w| w == v).unwrap()).collect();
            let mut out = vec![0.0; table.len()];
            let mut labels = vec![0usize; sorted.len()];
            for slot in out.iter_mut() {
                let src: usize = labels.iter().zip(&position).map(|(&l, &p)| l * given[p]).sum();
                *slot = table[src];
                self.advance(&sorted, &mut labels);
            }
            out
        };

        let id = self.factors.len();
        self.by_scope.insert(sorted.clone(), id);
        self.factors.push(Factor { scope: sorted, table, strides });
        Ok(id)
    }

    /// Appends a factor after construction (used for structural augmentation).
    pub(crate) fn push_factor(&mut self, scope: Vec<NodeId>, table: Vec<f64>) -> Result<FactorId> {
        let index = self.factors.len();
        self.push_factor_checked(index, scope, table)
    }

    pub fn node_count(&self) -> usize {
        self.label_counts.len()
    }

    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    pub fn labels(&self, node: NodeId) -> usize {
        self.label_counts[node]
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, id: FactorId) -> &Factor {
        &self.factors[id]
    }

    pub fn scope(&self, id: FactorId) -> &[NodeId] {
        &self.factors[id].scope
    }

    pub fn table(&self, id: FactorId) -> &[f64] {
        &self.factors[id].table
    }

    pub fn table_len(&self, id: FactorId) -> usize {
        self.factors[id].table.len()
    }

    /// Looks up a factor by its (sorted) scope.
    pub fn factor_by_scope(&self, scope: &[NodeId]) -> Option<FactorId> {
        self.by_scope.get(scope).copied()
    }

    /// Number of joint states of an arbitrary node set.
    pub fn state_count(&self, nodes: &[NodeId]) -> usize {
        nodes.iter().map(|&v| self.label_counts[v]).product()
    }

    /// Odometer step over `labels` for the given node set, last node fastest.
    pub fn advance(&self, nodes: &[NodeId], labels: &mut [usize]) {
        for i in (0..nodes.len()).rev() {
            labels[i] += 1;
            if labels[i] < self.label_counts[nodes[i]] {
                return;
            }
            labels[i] = 0;
        }
    }

    /// Table index of `factor` under a full labeling.
    pub fn index_of(&self, factor: FactorId, labeling: &[usize]) -> usize {
        let f = &self.factors[factor];
        f.scope.iter().zip(&f.strides).map(|(&v, &s)| labeling[v] * s).sum()
    }

    /// Decodes a row-major index over a sorted node set into per-node labels.
    pub fn decode(&self, nodes: &[NodeId], mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; nodes.len()];
        for i in (0..nodes.len()).rev() {
            let k = self.label_counts[nodes[i]];
            labels[i] = index % k;
            index /= k;
        }
        labels
    }

    /// For every joint state of `outer` (sorted), the index of its restriction
    /// to `inner` (sorted, `inner ⊆ outer`).
    pub fn projection(&self, outer: &[NodeId], inner: &[NodeId]) -> Vec<usize> {
        let inner_strides = strides_for(inner, &self.label_counts);
        let weights: Vec<usize> = outer
            .iter()
            .map(|v| match inner.iter().position(|w| w == v) {
                Some(p) => inner_strides[p],
                None => 0,
            })
            .collect();
        let n = self.state_count(outer);
        let mut out = Vec::with_capacity(n);
        let mut labels = vec![0usize; outer.len()];
        for _ in 0..n {
            out.push(labels.iter().zip(&weights).map(|(l, w)| l * w).sum());
            self.advance(outer, &mut labels);
        }
        out
    }

    pub fn check_labeling(&self, labeling: &[usize]) -> Result<()> {
        if labeling.len() != self.node_count() {
            return Err(Error::InvalidLabeling(format!(
                "expected {} labels, got {}",
                self.node_count(),
                labeling.len()
            )));
        }
        for (v, &l) in labeling.iter().enumerate() {
            if l >= self.label_counts[v] {
                return Err(Error::InvalidLabeling(format!(
                    "node {v} has label {l}, but only {} labels exist",
                    self.label_counts[v]
                )));
            }
        }
        Ok(())
    }

    /// Objective value Σ_A θ̄_A(x_A).
    pub fn energy(&self, labeling: &[usize]) -> Result<f64> {
        self.check_labeling(labeling)?;
        Ok(self.energy_with(labeling, |f| self.table(f)))
    }

    /// Objective value of the given labeling under arbitrary per-factor tables.
    pub fn energy_with<'a>(&self, labeling: &[usize], tables: impl Fn(FactorId) -> &'a [f64]) -> f64 {
        (0..self.factor_count()).map(|f| tables(f)[self.index_of(f, labeling)]).sum()
    }

    /// Every factor's original cost table, cloned.
    pub fn tables(&self) -> Vec<Vec<f64>> {
        self.factors.iter().map(|f| f.table.clone()).collect()
    }
}

/// Free-function form of [`Model::energy`].
pub fn energy(model: &Model, labeling: &[usize]) -> Result<f64> {
    model.energy(labeling)
}

/// `true` when sorted scope `inner` is a subset of sorted scope `outer`.
pub fn is_subset(inner: &[NodeId], outer: &[NodeId]) -> bool {
    let mut it = outer.iter();
    inner.iter().all(|v| it.any(|w| w == v))
}

/// Sorted intersection of two sorted scopes.
pub fn intersection(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    a.iter().filter(|v| b.binary_search(v).is_ok()).copied().collect()
}

/// A message m_AB(x_B) on an outer-to-separator edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageVector {
    pub from: FactorId,
    pub to: FactorId,
    pub values: Vec<f64>,
}

/// Applies messages to the original costs: outer factors lose the messages
/// they send, separators gain the messages they receive.
pub fn reparameterized_costs(model: &Model, j: &JStructure, messages: &[MessageVector]) -> Result<Vec<Vec<f64>>> {
    let mut theta = model.tables();
    for m in messages {
        let (a, b) = (m.from, m.to);
        if a >= model.factor_count() || b >= model.factor_count() {
            return Err(Error::InvalidMessageEdge { from: a, to: b });
        }
        if !j.is_outer(a) || !j.has_closed_edge(a, b) {
            return Err(Error::InvalidMessageEdge { from: a, to: b });
        }
        if m.values.len() != model.table_len(b) || m.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMessageEdge { from: a, to: b });
        }
        let proj = model.projection(model.scope(a), model.scope(b));
        for (x, &xb) in proj.iter().enumerate() {
            theta[a][x] -= m.values[xb];
        }
        for (t, v) in theta[b].iter_mut().zip(&m.values) {
            *t += v;
        }
    }
    Ok(theta)
}
