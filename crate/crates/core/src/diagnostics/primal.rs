//! Greedy rounding of a reparameterized vector to a labeling.

use crate::model::Labeling;
use crate::problem::Problem;

/// Labels nodes in increasing order. Node v takes the label minimizing the
/// sum of θ_A over factors whose last node is v, given the labels already
/// fixed; ties go to the lowest label.
pub fn extract_primal(p: &Problem, theta: &[Vec<f64>]) -> Labeling {
    let model = &p.model;
    let order = p.decomposition.node_order();
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); model.node_count()];
    for f in 0..model.factor_count() {
        closing[order.max(model.scope(f))].push(f);
    }
    let mut x = vec![0usize; model.node_count()];
    for &v in order.nodes() {
        let mut best = (0, f64::INFINITY);
        for l in 0..model.labels(v) {
            x[v] = l;
            let cost: f64 = closing[v].iter().map(|&f| theta[f][model.index_of(f, &x)]).sum();
            if cost < best.1 {
                best = (l, cost);
            }
        }
        x[v] = best.0;
    }
    x
}
