//! Argmin relations, their projections, and the agreement conditions built
//! on them.

use std::collections::BTreeSet;

use crate::diagnostics::oracle::{enumerate, horner, table_energy};
use crate::error::Result;
use crate::jstructure::JStructure;
use crate::model::{FactorId, Model, NodeId};
use crate::problem::Problem;
use crate::trws::TreeParams;

/// Relative tolerance for argmin membership.
pub const ARGMIN_TOL: f64 = 1e-9;

fn within(v: f64, min: f64, tol: f64) -> bool {
    v - min <= tol * min.abs().max(1.0)
}

/// An explicit set of joint states over a sorted node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub scope: Vec<NodeId>,
    pub states: BTreeSet<Vec<usize>>,
}

impl Relation {
    /// ⟨φ⟩ for a table over `scope` in row-major order.
    pub fn argmin(model: &Model, scope: &[NodeId], table: &[f64], tol: f64) -> Self {
        let min = table.iter().copied().fold(f64::INFINITY, f64::min);
        let states = table
            .iter()
            .enumerate()
            .filter(|&(_, &v)| within(v, min, tol))
            .map(|(i, _)| model.decode(scope, i))
            .collect();
        Relation { scope: scope.to_vec(), states }
    }

    /// π_B of this relation; `sub` must be a subset of the scope.
    pub fn project(&self, sub: &[NodeId]) -> Self {
        let pos: Vec<usize> =
            sub.iter().map(|v| self.scope.iter().position(|u| u == v).expect("projection onto a non-subset")).collect();
        let states = self.states.iter().map(|s| pos.iter().map(|&i| s[i]).collect()).collect();
        Relation { scope: sub.to_vec(), states }
    }

    pub fn is_subset_of(&self, other: &Relation) -> bool {
        self.scope == other.scope && self.states.is_subset(&other.states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// ⟨ν^T⟩ over the nodes of tree `t`, by enumeration.
pub fn tree_argmin_relation(p: &Problem, params: &TreeParams, t: usize, tol: f64) -> Result<Relation> {
    let model = &p.model;
    let nodes = p.decomposition.tree_nodes(model, t);
    let factors = p.decomposition.tree_factors(t);
    let mut values = Vec::new();
    enumerate(model, &nodes, |x| {
        values.push((nodes.iter().map(|&v| x[v]).collect::<Vec<_>>(), table_energy(model, params.tree(t), factors, x)))
    })?;
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let states = values.into_iter().filter(|v| within(v.1, min, tol)).map(|v| v.0).collect();
    Ok(Relation { scope: nodes, states })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EwtaReport {
    /// Factors whose projected argmin sets differ between trees.
    pub violations: Vec<FactorId>,
    /// π_B⟨ν^T⟩ for each factor, taken from its first tree.
    pub projections: Vec<Relation>,
}

impl EwtaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks π_B⟨ν^T⟩ = π_B⟨ν^{T'}⟩ for every B and T, T' ∈ T_B.
pub fn check_ewta(p: &Problem, params: &TreeParams) -> Result<EwtaReport> {
    let d = &p.decomposition;
    let relations =
        (0..d.tree_count()).map(|t| tree_argmin_relation(p, params, t, ARGMIN_TOL)).collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    let mut projections = Vec::new();
    for b in 0..p.model.factor_count() {
        let scope = p.model.scope(b);
        let trees = d.trees_of(b);
        let first = relations[trees[0]].project(scope);
        if trees[1..].iter().any(|&t| relations[t].project(scope) != first) {
            violations.push(b);
        }
        projections.push(first);
    }
    Ok(EwtaReport { violations, projections })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JConsistencyReport {
    pub violations: Vec<(FactorId, FactorId)>,
}

impl JConsistencyReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks π_B⟨θ_A⟩ = ⟨θ_B⟩ on every edge of J.
pub fn check_j_consistency_enhanced(model: &Model, j: &JStructure, theta: &[Vec<f64>]) -> JConsistencyReport {
    let argmins: Vec<Relation> =
        (0..model.factor_count()).map(|f| Relation::argmin(model, model.scope(f), &theta[f], ARGMIN_TOL)).collect();
    let violations =
        j.edges().iter().copied().filter(|&(a, b)| argmins[a].project(model.scope(b)) != argmins[b]).collect();
    JConsistencyReport { violations }
}

/// Checks given relations R: non-empty, R_B ⊆ ⟨θ_B⟩, and π_B(R_A) = R_B on J.
pub fn check_j_consistency_relaxed(
    model: &Model,
    j: &JStructure,
    theta: &[Vec<f64>],
    relations: &[Relation],
) -> JConsistencyReport {
    let mut violations = Vec::new();
    let inside: Vec<bool> = (0..model.factor_count())
        .map(|f| {
            let r = &relations[f];
            !r.is_empty() && r.is_subset_of(&Relation::argmin(model, model.scope(f), &theta[f], ARGMIN_TOL))
        })
        .collect();
    for &(a, b) in j.edges() {
        if !inside[a] || !inside[b] || relations[a].project(model.scope(b)) != relations[b] {
            violations.push((a, b));
        }
    }
    JConsistencyReport { violations }
}

/// Σ_A min θ_A.
pub fn psi(theta: &[Vec<f64>]) -> f64 {
    theta.iter().map(|t| t.iter().copied().fold(f64::INFINITY, f64::min)).sum()
}

/// Position of a labeling of `scope` (helper for callers building relations).
pub fn state_index(model: &Model, scope: &[NodeId], labeling: &[usize]) -> usize {
    horner(model, scope, labeling)
}
