//! Exhaustive-search oracles. Indexing here is recomputed from scratch
//! (Horner over the sorted scope) so the oracles share no arithmetic with
//! the solvers they check.

use crate::error::{Error, Result};
use crate::model::{FactorId, Labeling, Model, NodeId};
use crate::problem::Problem;
use crate::trws::TreeParams;

/// Largest joint state space the oracles will enumerate.
pub const STATE_LIMIT: f64 = 1e7;

fn guard(model: &Model, nodes: &[NodeId]) -> Result<()> {
    let states: f64 = nodes.iter().map(|&v| model.labels(v) as f64).product();
    if states > STATE_LIMIT {
        return Err(Error::TooLarge { states, limit: STATE_LIMIT });
    }
    Ok(())
}

/// Row-major position of `labeling` restricted to `scope`.
pub fn horner(model: &Model, scope: &[NodeId], labeling: &[usize]) -> usize {
    scope.iter().fold(0, |acc, &v| acc * model.labels(v) + labeling[v])
}

/// Calls `visit` on every labeling of `nodes` (other entries stay 0), in
/// increasing joint-state index order.
pub fn enumerate(model: &Model, nodes: &[NodeId], mut visit: impl FnMut(&[usize])) -> Result<()> {
    guard(model, nodes)?;
    let mut x = vec![0usize; model.node_count()];
    loop {
        visit(&x);
        let mut k = nodes.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            let v = nodes[k];
            x[v] += 1;
            if x[v] < model.labels(v) {
                break;
            }
            x[v] = 0;
        }
    }
}

/// Σ over `factors` of `tables[f]` at `labeling`.
pub fn table_energy(model: &Model, tables: &[Vec<f64>], factors: &[FactorId], labeling: &[usize]) -> f64 {
    factors
        .iter()
        .filter(|&&f| !tables[f].is_empty())
        .map(|&f| tables[f][horner(model, model.scope(f), labeling)])
        .sum()
}

/// Exact minimizer of Σ_A tables[A] over all labelings; lowest index wins ties.
pub fn brute_force_map_with(model: &Model, tables: &[Vec<f64>]) -> Result<(Labeling, f64)> {
    let nodes: Vec<NodeId> = (0..model.node_count()).collect();
    let factors: Vec<FactorId> = (0..model.factor_count()).collect();
    let mut best = (vec![0; model.node_count()], f64::INFINITY);
    enumerate(model, &nodes, |x| {
        let e = table_energy(model, tables, &factors, x);
        if e < best.1 {
            best = (x.to_vec(), e);
        }
    })?;
    Ok(best)
}

/// Global minimizer of the model energy; lowest index wins ties.
pub fn brute_force_map(model: &Model) -> Result<(Labeling, f64)> {
    brute_force_map_with(model, &model.tables())
}

/// min over the tree's labelings of f(x | θ^T).
pub fn brute_force_tree_minimum(p: &Problem, params: &TreeParams, t: usize) -> Result<f64> {
    let nodes = p.decomposition.tree_nodes(&p.model, t);
    let factors = p.decomposition.tree_factors(t);
    let mut best = f64::INFINITY;
    enumerate(&p.model, &nodes, |x| best = best.min(table_energy(&p.model, params.tree(t), factors, x)))?;
    Ok(best)
}

/// Σ_T ρ^T min_x f(x | θ^T) by enumeration.
pub fn brute_force_bound(p: &Problem, params: &TreeParams) -> Result<f64> {
    let mut sum = 0.0;
    for t in 0..params.tree_count() {
        sum += p.rho(t) * brute_force_tree_minimum(p, params, t)?;
    }
    Ok(sum)
}

/// Exact min-marginals of f(· | θ^T) onto factor B.
pub fn brute_force_min_marginals(p: &Problem, params: &TreeParams, t: usize, b: FactorId) -> Result<Vec<f64>> {
    if !p.decomposition.contains(t, b) {
        return Err(Error::FactorNotInTree { tree: t, factor: b });
    }
    let model = &p.model;
    let nodes = p.decomposition.tree_nodes(model, t);
    let factors = p.decomposition.tree_factors(t);
    let scope = model.scope(b);
    let mut out = vec![f64::INFINITY; model.state_count(scope)];
    enumerate(model, &nodes, |x| {
        let e = table_energy(model, params.tree(t), factors, x);
        let i = horner(model, scope, x);
        if e < out[i] {
            out[i] = e;
        }
    })?;
    Ok(out)
}
