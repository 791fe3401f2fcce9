//! Per-tree parameter vectors and the junction-tree primitives on them.

use crate::error::{Error, Result};
use crate::model::{FactorId, Labeling};
use crate::problem::{min_marginalize, Effort, Problem};

/// θ^T for every tree. Tables of factors outside F_T are empty and read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    tables: Vec<Vec<Vec<f64>>>,
}

impl TreeParams {
    /// θ^T_C = θ̄_C / ρ_C for every C ∈ F_T.
    pub fn uniform_split(p: &Problem) -> Self {
        let theta = p.model.tables();
        Self::from_cumulative(p, &theta)
    }

    /// Splits a cumulative vector θ into per-tree copies θ_C / ρ_C.
    pub fn from_cumulative(p: &Problem, theta: &[Vec<f64>]) -> Self {
        let d = &p.decomposition;
        let tables = (0..d.tree_count())
            .map(|t| {
                let mut tree = vec![Vec::new(); p.model.factor_count()];
                for &c in d.tree_factors(t) {
                    let w = p.rho_factor(c);
                    tree[c] = theta[c].iter().map(|v| v / w).collect();
                }
                tree
            })
            .collect();
        TreeParams { tables }
    }

    /// Explicit construction; `tables[t][c]` must be empty iff C ∉ F_T.
    pub fn from_tables(tables: Vec<Vec<Vec<f64>>>) -> Self {
        TreeParams { tables }
    }

    /// Σ_T ρ^T θ^T.
    pub fn cumulative(&self, p: &Problem) -> Vec<Vec<f64>> {
        let mut theta: Vec<Vec<f64>> = (0..p.model.factor_count()).map(|c| vec![0.0; p.len(c)]).collect();
        for (t, tree) in self.tables.iter().enumerate() {
            let w = p.rho(t);
            for (c, table) in tree.iter().enumerate() {
                for (acc, v) in theta[c].iter_mut().zip(table) {
                    *acc += w * v;
                }
            }
        }
        theta
    }

    pub fn tree_count(&self) -> usize {
        self.tables.len()
    }

    pub fn tree(&self, t: usize) -> &[Vec<f64>] {
        &self.tables[t]
    }

    pub fn tree_mut(&mut self, t: usize) -> &mut [Vec<f64>] {
        &mut self.tables[t]
    }

    pub fn table(&self, t: usize, c: FactorId) -> &[f64] {
        &self.tables[t][c]
    }

    /// f(x | θ^T) for a full labeling.
    pub fn tree_energy(&self, p: &Problem, t: usize, labeling: &[usize]) -> f64 {
        p.decomposition.tree_factors(t).iter().map(|&c| self.tables[t][c][p.model.index_of(c, labeling)]).sum()
    }
}

/// ν_A = Σ_{B ∈ F_A} θ_B over the states of A.
pub fn nu(p: &Problem, tree: &[Vec<f64>], a: FactorId) -> Vec<f64> {
    let mut out = tree[a].clone();
    for &c in p.j.locals(a) {
        if c == a {
            continue;
        }
        let map = p.proj(a, c);
        let tc = &tree[c];
        for (v, &i) in out.iter_mut().zip(map) {
            *v += tc[i];
        }
    }
    out
}

/// Sends A → B inside one tree's tables, returning δ.
pub(crate) fn send_in(p: &Problem, tree: &mut [Vec<f64>], a: FactorId, b: FactorId, effort: &mut Effort) -> Vec<f64> {
    let nu_a = nu(p, tree, a);
    let nu_b = nu(p, tree, b);
    let map = p.proj(a, b);
    let mut delta = min_marginalize(&nu_a, map, nu_b.len());
    effort.meff += nu_a.len() as u64;
    effort.ops += 1;
    for (d, v) in delta.iter_mut().zip(&nu_b) {
        *d -= v;
    }
    for (t, &i) in tree[a].iter_mut().zip(map) {
        *t -= delta[i];
    }
    for (t, d) in tree[b].iter_mut().zip(&delta) {
        *t += d;
    }
    delta
}

/// Send message A → B in tree T; afterwards the edge is valid.
pub fn send_message(
    p: &Problem,
    params: &mut TreeParams,
    t: usize,
    a: FactorId,
    b: FactorId,
    effort: &mut Effort,
) -> Result<Vec<f64>> {
    if !p.j.has_closed_edge(a, b) {
        return Err(Error::InvalidEdge { from: a, to: b });
    }
    for f in [a, b] {
        if !p.decomposition.contains(t, f) {
            return Err(Error::FactorNotInTree { tree: t, factor: f });
        }
    }
    Ok(send_in(p, params.tree_mut(t), a, b, effort))
}

/// `true` when min_{x_{A−B}} ν_A = ν_B within `tol`.
pub fn is_valid_edge(p: &Problem, tree: &[Vec<f64>], a: FactorId, b: FactorId, tol: f64) -> bool {
    let nu_a = nu(p, tree, a);
    let nu_b = nu(p, tree, b);
    let mm = min_marginalize(&nu_a, p.proj(a, b), nu_b.len());
    mm.iter().zip(&nu_b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

/// Inward pass toward `root`: every chain factor sends to the separator it
/// shares with its neighbour on the root side, leaves first.
pub(crate) fn inward(p: &Problem, tree: &mut [Vec<f64>], t: usize, root: FactorId, effort: &mut Effort) {
    for (from, sep) in inward_schedule(p, t, root) {
        send_in(p, tree, from, sep, effort);
    }
}

/// Orients the junction tree of `t` toward `root` and lists (child, separator)
/// sends in leaves-first order.
pub(crate) fn inward_schedule(p: &Problem, t: usize, root: FactorId) -> Vec<(FactorId, FactorId)> {
    let edges = p.decomposition.tree_edges(t);
    let mut order = vec![root];
    let mut parent_sep = vec![(root, root)];
    let mut seen = vec![root];
    let mut i = 0;
    while i < order.len() {
        let cur = order[i];
        for &(l, r, s) in &edges {
            let next = if l == cur {
                r
            } else if r == cur {
                l
            } else {
                continue;
            };
            if !seen.contains(&next) {
                seen.push(next);
                order.push(next);
                parent_sep.push((next, s));
            }
        }
        i += 1;
    }
    parent_sep.into_iter().skip(1).rev().collect()
}

/// Min-marginals ν^T_B, computed by an inward pass to an outer factor
/// containing B followed by one send into B. The tree is reparameterized in
/// place.
pub fn tree_min_marginal(
    p: &Problem,
    params: &mut TreeParams,
    t: usize,
    b: FactorId,
    effort: &mut Effort,
) -> Result<Vec<f64>> {
    let d = &p.decomposition;
    if !d.contains(t, b) {
        return Err(Error::FactorNotInTree { tree: t, factor: b });
    }
    let root = *d
        .chain(t)
        .iter()
        .find(|&&a| a == b || p.j.has_closed_edge(a, b))
        .ok_or(Error::FactorNotInTree { tree: t, factor: b })?;
    let tree = params.tree_mut(t);
    inward(p, tree, t, root, effort);
    if root != b {
        send_in(p, tree, root, b, effort);
    }
    Ok(nu(p, tree, b))
}

/// min_x f(x | θ^T) by dynamic programming along the chain, on a copy.
pub fn tree_minimum(p: &Problem, tree: &[Vec<f64>], t: usize, effort: &mut Effort) -> f64 {
    let mut work = tree.to_vec();
    let mut local = Effort::default();
    let root = *p.decomposition.chain(t).last().expect("empty chain");
    inward(p, &mut work, t, root, &mut local);
    let nu_root = nu(p, &work, root);
    local.meff += nu_root.len() as u64;
    effort.diagnostic += local.meff;
    nu_root.into_iter().fold(f64::INFINITY, f64::min)
}

/// Φ(θ) = Σ_T ρ^T min_x f(x | θ^T).
pub fn lower_bound(p: &Problem, params: &TreeParams, effort: &mut Effort) -> f64 {
    (0..params.tree_count()).map(|t| p.rho(t) * tree_minimum(p, params.tree(t), t, effort)).sum()
}

/// A minimizing labeling of tree `t` (nodes outside the tree stay `None`)
/// and the minimum value. Ties go to the lowest joint-state index.
pub fn tree_argmin(p: &Problem, tree: &[Vec<f64>], t: usize, effort: &mut Effort) -> (f64, Vec<Option<usize>>) {
    let mut work = tree.to_vec();
    let chain = p.decomposition.chain(t);
    let root = *chain.last().expect("empty chain");
    let schedule = inward_schedule(p, t, root);
    for &(from, sep) in &schedule {
        send_in(p, &mut work, from, sep, effort);
    }
    let mut labels: Vec<Option<usize>> = vec![None; p.model.node_count()];
    let mut value = f64::INFINITY;
    // Root first, then outward in reverse schedule order.
    let outward = std::iter::once(root).chain(schedule.iter().rev().map(|&(from, _)| from));
    for a in outward {
        let nu_a = nu(p, &work, a);
        effort.meff += nu_a.len() as u64;
        let scope = p.model.scope(a);
        let mut best: Option<(usize, f64)> = None;
        for (x, &v) in nu_a.iter().enumerate() {
            let state = p.model.decode(scope, x);
            let consistent = scope.iter().zip(&state).all(|(&n, &l)| labels[n].is_none_or(|f| f == l));
            if consistent && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((x, v));
            }
        }
        let (x, v) = best.expect("no consistent state");
        if a == root {
            value = v;
        }
        for (&n, l) in scope.iter().zip(p.model.decode(scope, x)) {
            labels[n] = Some(l);
        }
    }
    (value, labels)
}

/// Completes a partial labeling with zeros.
pub fn fill_labeling(partial: &[Option<usize>]) -> Labeling {
    partial.iter().map(|l| l.unwrap_or(0)).collect()
}

/// Averages separator B across the trees containing it. Returns ν_B.
pub fn average_factor(p: &Problem, params: &mut TreeParams, b: FactorId) -> Result<Vec<f64>> {
    if p.j.is_outer(b) {
        return Err(Error::NotASeparator(b));
    }
    let d = &p.decomposition;
    let trees = d.trees_of(b);
    let nus: Vec<Vec<f64>> = trees.iter().map(|&t| nu(p, params.tree(t), b)).collect();
    Ok(average_with(p, params, b, &nus))
}

pub(crate) fn average_with(p: &Problem, params: &mut TreeParams, b: FactorId, nus: &[Vec<f64>]) -> Vec<f64> {
    let d = &p.decomposition;
    let trees = d.trees_of(b);
    let rho_b = p.rho_factor(b);
    let mut mean = vec![0.0; p.len(b)];
    for (&t, nu_t) in trees.iter().zip(nus) {
        let w = p.rho(t) / rho_b;
        for (m, v) in mean.iter_mut().zip(nu_t) {
            *m += w * v;
        }
    }
    for (&t, nu_t) in trees.iter().zip(nus) {
        let table = &mut params.tree_mut(t)[b];
        for ((x, m), v) in table.iter_mut().zip(&mean).zip(nu_t) {
            *x += m - v;
        }
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::oracle::brute_force_tree_minimum;
    use crate::jstructure::close_j;
    use crate::model::Model;
    use crate::trws::chain::tests::chain_fixture;

    /// Factor ab = [[0,5],[2,1]] with zero singletons.
    fn pair_problem() -> Problem {
        let m = Model::new(
            vec![2, 2],
            vec![(vec![0, 1], vec![0.0, 5.0, 2.0, 1.0]), (vec![0], vec![0.0; 2]), (vec![1], vec![0.0; 2])],
        )
        .unwrap();
        let j = close_j(&m, &[(0, 1), (0, 2)]).unwrap();
        Problem::with_identity_order(&m, &j).unwrap()
    }

    #[test]
    fn send_takes_column_minima() {
        let p = pair_problem();
        let mut params = TreeParams::uniform_split(&p);
        let delta = send_message(&p, &mut params, 0, 0, 2, &mut Effort::default()).unwrap();
        assert_eq!(delta, vec![0.0, 1.0]);
        assert_eq!(params.table(0, 2), &[0.0, 1.0]);
        assert_eq!(params.table(0, 0), &[0.0, 4.0, 2.0, 0.0]);
        assert!(is_valid_edge(&p, params.tree(0), 0, 2, 1e-12));
    }

    #[test]
    fn valid_edge_send_is_a_no_op() {
        let p = pair_problem();
        let mut params = TreeParams::uniform_split(&p);
        send_message(&p, &mut params, 0, 0, 2, &mut Effort::default()).unwrap();
        let before = params.clone();
        let delta = send_message(&p, &mut params, 0, 0, 2, &mut Effort::default()).unwrap();
        assert!(delta.iter().all(|&d| d == 0.0));
        assert_eq!(params, before);
    }

    #[test]
    fn send_rejects_bad_edges() {
        let p = pair_problem();
        let mut params = TreeParams::uniform_split(&p);
        let err = send_message(&p, &mut params, 0, 1, 2, &mut Effort::default()).unwrap_err();
        assert_eq!(err, Error::InvalidEdge { from: 1, to: 2 });
    }

    #[test]
    fn sends_keep_tree_minimum() {
        let p = chain_fixture();
        let mut params = TreeParams::uniform_split(&p);
        let mut effort = Effort::default();
        for t in 0..p.decomposition.tree_count() {
            let before = brute_force_tree_minimum(&p, &params, t).unwrap();
            for (left, right, sep) in p.decomposition.tree_edges(t) {
                for a in [left, right] {
                    send_message(&p, &mut params, t, a, sep, &mut effort).unwrap();
                    let after = brute_force_tree_minimum(&p, &params, t).unwrap();
                    assert!((after - before).abs() < 1e-9);
                }
            }
            let dp = tree_minimum(&p, params.tree(t), t, &mut effort);
            assert!((dp - before).abs() < 1e-9);
        }
    }

    #[test]
    fn averaging_needs_a_separator() {
        let p = pair_problem();
        let mut params = TreeParams::uniform_split(&p);
        assert_eq!(average_factor(&p, &mut params, 0).unwrap_err(), Error::NotASeparator(0));
    }

    #[test]
    fn argmin_matches_minimum() {
        let p = chain_fixture();
        let params = TreeParams::uniform_split(&p);
        for t in 0..p.decomposition.tree_count() {
            let (value, x) = tree_argmin(&p, params.tree(t), t, &mut Effort::default());
            let full = fill_labeling(&x);
            assert!((params.tree_energy(&p, t, &full) - value).abs() < 1e-9);
            assert!((brute_force_tree_minimum(&p, &params, t).unwrap() - value).abs() < 1e-9);
        }
    }
}
