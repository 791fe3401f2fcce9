//! Monotonic junction-chain decompositions.
//!
//! Outer factors are partitioned into chains that are monotonic with respect
//! to a total node order. Separators are ordered by the lexicographic key
//! `(min A, max A, remaining nodes ascending)` taken under that node order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::jstructure::JStructure;
use crate::model::{intersection, is_subset, FactorId, Model, NodeId};

/// A total order on nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrder {
    order: Vec<NodeId>,
    rank: Vec<usize>,
}

impl NodeOrder {
    pub fn identity(n: usize) -> Self {
        NodeOrder { order: (0..n).collect(), rank: (0..n).collect() }
    }

    pub fn new(order: Vec<NodeId>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidOrder(format!("node {v} out of range")));
            }
            if rank[v] != usize::MAX {
                return Err(Error::InvalidOrder(format!("node {v} listed twice")));
            }
            rank[v] = i;
        }
        Ok(NodeOrder { order, rank })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.order
    }

    pub fn rank(&self, v: NodeId) -> usize {
        self.rank[v]
    }

    pub fn min(&self, scope: &[NodeId]) -> NodeId {
        *scope.iter().min_by_key(|&&v| self.rank[v]).expect("empty scope")
    }

    pub fn max(&self, scope: &[NodeId]) -> NodeId {
        *scope.iter().max_by_key(|&&v| self.rank[v]).expect("empty scope")
    }

    /// The ordering key σ_A as node ranks.
    pub fn sigma(&self, scope: &[NodeId]) -> Vec<usize> {
        let mut ranks: Vec<usize> = scope.iter().map(|&v| self.rank[v]).collect();
        ranks.sort_unstable();
        let (lo, hi) = (ranks[0], ranks[ranks.len() - 1]);
        let mut key = Vec::with_capacity(ranks.len().max(2));
        key.push(lo);
        key.push(hi);
        if ranks.len() > 2 {
            key.extend_from_slice(&ranks[1..ranks.len() - 1]);
        }
        key
    }

    pub fn compare(&self, a: &[NodeId], b: &[NodeId]) -> Ordering {
        self.sigma(a).cmp(&self.sigma(b))
    }
}

/// Separators sorted by ≼.
pub fn extend_order_to_separators(model: &Model, j: &JStructure, order: &NodeOrder) -> Vec<FactorId> {
    let mut seps = j.separators();
    seps.sort_by_cached_key(|&f| order.sigma(model.scope(f)));
    seps
}

/// Left and right separators of `outer` within `chain`.
pub fn sep_bounds(
    model: &Model,
    order: &NodeOrder,
    chain: &[FactorId],
    outer: FactorId,
) -> Result<(FactorId, FactorId)> {
    let pos =
        chain.iter().position(|&a| a == outer).ok_or(Error::FactorNotInTree { tree: usize::MAX, factor: outer })?;
    let scope = model.scope(outer);
    let lookup = |s: Vec<NodeId>| model.factor_by_scope(&s).ok_or(Error::MissingSeparatorFactor { scope: s });
    let minus = if pos == 0 {
        lookup(vec![order.min(scope)])?
    } else {
        lookup(intersection(model.scope(chain[pos - 1]), scope))?
    };
    let plus = if pos + 1 == chain.len() {
        lookup(vec![order.max(scope)])?
    } else {
        lookup(intersection(scope, model.scope(chain[pos + 1])))?
    };
    Ok((minus, plus))
}

/// S_A: the members of F_A ∩ S lying between `sep_minus` and `sep_plus` under ≼.
pub fn local_separator_window(
    j: &JStructure,
    sigma_rank: &[usize],
    outer: FactorId,
    sep_minus: FactorId,
    sep_plus: FactorId,
) -> Vec<FactorId> {
    let (lo, hi) = (sigma_rank[sep_minus], sigma_rank[sep_plus]);
    let mut window: Vec<FactorId> = j
        .locals(outer)
        .iter()
        .copied()
        .filter(|&b| !j.is_outer(b) && sigma_rank[b] >= lo && sigma_rank[b] <= hi)
        .collect();
    window.sort_by_key(|&b| sigma_rank[b]);
    window
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    node_order: NodeOrder,
    chains: Vec<Vec<FactorId>>,
    rho: Vec<f64>,
    rho_factor: Vec<f64>,
    /// Chain index of every outer factor.
    chain_of: Vec<Option<usize>>,
    sep_minus: Vec<Option<FactorId>>,
    sep_plus: Vec<Option<FactorId>>,
    local_separators: Vec<Vec<FactorId>>,
    separator_order: Vec<FactorId>,
    /// Position of every factor in the global σ order.
    sigma_rank: Vec<usize>,
    tree_factors: Vec<Vec<FactorId>>,
    trees_of: Vec<Vec<usize>>,
    /// J' = {(A,B) : A outer, B ∈ S_A}.
    message_edges: Vec<(FactorId, FactorId)>,
}

impl Decomposition {
    /// Derives all chain bookkeeping for the given chains with uniform ρ.
    pub fn from_chains(
        model: &Model,
        j: &JStructure,
        node_order: NodeOrder,
        chains: Vec<Vec<FactorId>>,
    ) -> Result<Self> {
        let n = model.factor_count();
        if node_order.len() != model.node_count() {
            return Err(Error::InvalidOrder(format!(
                "order has {} nodes, model has {}",
                node_order.len(),
                model.node_count()
            )));
        }
        let mut by_sigma: Vec<FactorId> = (0..n).collect();
        by_sigma.sort_by_cached_key(|&f| node_order.sigma(model.scope(f)));
        let mut sigma_rank = vec![0; n];
        for (i, &f) in by_sigma.iter().enumerate() {
            sigma_rank[f] = i;
        }
        let separator_order: Vec<FactorId> = by_sigma.iter().copied().filter(|&f| !j.is_outer(f)).collect();

        let mut chain_of = vec![None; n];
        let mut sep_minus = vec![None; n];
        let mut sep_plus = vec![None; n];
        let mut local_separators = vec![Vec::new(); n];
        let mut tree_factors = Vec::with_capacity(chains.len());
        let mut trees_of = vec![Vec::new(); n];
        for (t, chain) in chains.iter().enumerate() {
            let mut members = BTreeSet::new();
            for &a in chain {
                if a >= n {
                    return Err(Error::InvalidFactor(a));
                }
                chain_of[a].get_or_insert(t);
                let (minus, plus) = sep_bounds(model, &node_order, chain, a).map_err(|e| match e {
                    Error::FactorNotInTree { factor, .. } => Error::FactorNotInTree { tree: t, factor },
                    other => other,
                })?;
                sep_minus[a] = Some(minus);
                sep_plus[a] = Some(plus);
                local_separators[a] = local_separator_window(j, &sigma_rank, a, minus, plus);
                members.extend(j.locals(a).iter().copied());
            }
            for &c in &members {
                trees_of[c].push(t);
            }
            tree_factors.push(members.into_iter().collect::<Vec<_>>());
        }

        let rho = vec![1.0 / chains.len().max(1) as f64; chains.len()];
        let rho_factor = (0..n).map(|c| trees_of[c].iter().map(|&t| rho[t]).sum()).collect();
        let mut message_edges = Vec::new();
        for (a, window) in local_separators.iter().enumerate() {
            for &b in window {
                message_edges.push((a, b));
            }
        }
        Ok(Decomposition {
            node_order,
            chains,
            rho,
            rho_factor,
            chain_of,
            sep_minus,
            sep_plus,
            local_separators,
            separator_order,
            sigma_rank,
            tree_factors,
            trees_of,
            message_edges,
        })
    }

    pub fn node_order(&self) -> &NodeOrder {
        &self.node_order
    }

    pub fn chains(&self) -> &[Vec<FactorId>] {
        &self.chains
    }

    pub fn tree_count(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, t: usize) -> &[FactorId] {
        &self.chains[t]
    }

    pub fn rho(&self, t: usize) -> f64 {
        self.rho[t]
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rho
    }

    /// ρ_C: total weight of the trees containing C.
    pub fn rho_factor(&self, c: FactorId) -> f64 {
        self.rho_factor[c]
    }

    pub fn chain_of(&self, a: FactorId) -> Option<usize> {
        self.chain_of[a]
    }

    pub fn sep_minus(&self, a: FactorId) -> Option<FactorId> {
        self.sep_minus[a]
    }

    pub fn sep_plus(&self, a: FactorId) -> Option<FactorId> {
        self.sep_plus[a]
    }

    pub fn local_separators(&self, a: FactorId) -> &[FactorId] {
        &self.local_separators[a]
    }

    pub fn separator_order(&self) -> &[FactorId] {
        &self.separator_order
    }

    pub fn sigma_rank(&self, f: FactorId) -> usize {
        self.sigma_rank[f]
    }

    pub fn sigma_ranks(&self) -> &[usize] {
        &self.sigma_rank
    }

    /// F_T, sorted by factor id.
    pub fn tree_factors(&self, t: usize) -> &[FactorId] {
        &self.tree_factors[t]
    }

    pub fn contains(&self, t: usize, f: FactorId) -> bool {
        self.tree_factors[t].binary_search(&f).is_ok()
    }

    /// T_C: trees containing C, ascending.
    pub fn trees_of(&self, c: FactorId) -> &[usize] {
        &self.trees_of[c]
    }

    /// Junction-tree edges of tree `t` as (left, right, separator).
    pub fn tree_edges(&self, t: usize) -> Vec<(FactorId, FactorId, FactorId)> {
        self.chains[t]
            .windows(2)
            .map(|w| (w[0], w[1], self.sep_plus[w[0]].expect("chain member without separators")))
            .collect()
    }

    pub fn message_edges(&self) -> &[(FactorId, FactorId)] {
        &self.message_edges
    }

    /// Nodes covered by tree `t`, ascending.
    pub fn tree_nodes(&self, model: &Model, t: usize) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self.chains[t].iter().flat_map(|&a| model.scope(a).iter().copied()).collect();
        set.into_iter().collect()
    }
}

/// Result of chain construction: the (possibly augmented) model and edge set
/// together with the decomposition over them.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: Model,
    pub j: JStructure,
    pub decomposition: Decomposition,
    /// Zero-cost factors introduced to supply missing singleton or
    /// intersection separators.
    pub added_factors: Vec<FactorId>,
    /// J edges introduced alongside them.
    pub added_edges: Vec<(FactorId, FactorId)>,
}

fn monotone_join(order: &NodeOrder, left: &[NodeId], right: &[NodeId], shared: &[NodeId]) -> bool {
    let r = |v: &NodeId| order.rank(*v);
    let left_only = left.iter().filter(|v| shared.binary_search(v).is_err()).map(r).max();
    let right_only = right.iter().filter(|v| shared.binary_search(v).is_err()).map(r).min();
    let (Some(s_lo), Some(s_hi)) = (shared.iter().map(r).min(), shared.iter().map(r).max()) else {
        return false;
    };
    left_only.is_none_or(|l| l < s_lo) && right_only.is_none_or(|w| s_hi < w)
}

/// Greedy monotonic chain cover of the outer factors.
///
/// Outer factors are visited in σ order; each is appended to the first chain
/// whose last factor it can follow (nonempty proper intersection that is not
/// itself an outer factor, monotone join, running intersection preserved),
/// otherwise it opens a new chain. Missing singleton and intersection
/// factors are added with zero costs.
pub fn build_monotonic_chains(model: &Model, j: &JStructure, order: &NodeOrder) -> Result<Built> {
    let mut model = model.clone();
    let mut edges: Vec<(FactorId, FactorId)> = j.edges().iter().copied().collect();
    let mut added_factors = Vec::new();
    let mut added_edges = Vec::new();

    // Singleton separators for every node of every multi-node factor.
    for a in 0..model.factor_count() {
        let scope = model.scope(a).to_vec();
        if scope.len() < 2 {
            continue;
        }
        for v in scope {
            let s = match model.factor_by_scope(&[v]) {
                Some(s) => s,
                None => {
                    let s = model.push_factor(vec![v], vec![0.0; model.labels(v)])?;
                    added_factors.push(s);
                    s
                }
            };
            if !j.has_closed_edge(a, s) {
                edges.push((a, s));
                added_edges.push((a, s));
            }
        }
    }
    let j = JStructure::new(&model, edges.iter().copied())?;
    let mut outer: Vec<FactorId> = j.outer();
    outer.sort_by_cached_key(|&f| order.sigma(model.scope(f)));
    let mut is_outer: Vec<bool> = (0..model.factor_count()).map(|f| j.is_outer(f)).collect();

    let mut chains: Vec<Vec<FactorId>> = Vec::new();
    for &a in &outer {
        let scope_a = model.scope(a).to_vec();
        let mut target = None;
        for (t, chain) in chains.iter().enumerate() {
            let last = *chain.last().unwrap();
            let scope_l = model.scope(last);
            let shared = intersection(scope_l, &scope_a);
            if shared.is_empty() || shared.len() == scope_a.len() || shared.len() == scope_l.len() {
                continue;
            }
            if model.factor_by_scope(&shared).is_some_and(|s| is_outer[s]) {
                continue;
            }
            if !monotone_join(order, scope_l, &scope_a, &shared) {
                continue;
            }
            let running = (0..chain.len()).all(|i| {
                let common = intersection(model.scope(chain[i]), &scope_a);
                chain[i + 1..].iter().all(|&c| is_subset(&common, model.scope(c)))
            });
            if running {
                target = Some((t, shared));
                break;
            }
        }
        match target {
            Some((t, shared)) => {
                let last = *chains[t].last().unwrap();
                let s = match model.factor_by_scope(&shared) {
                    Some(s) => s,
                    None => {
                        let len = model.state_count(&shared);
                        let s = model.push_factor(shared, vec![0.0; len])?;
                        added_factors.push(s);
                        is_outer.push(false);
                        s
                    }
                };
                for from in [last, a] {
                    if !j.has_closed_edge(from, s) {
                        edges.push((from, s));
                        added_edges.push((from, s));
                    }
                }
                chains[t].push(a);
            }
            None => chains.push(vec![a]),
        }
    }

    let j = JStructure::new(&model, edges)?;
    let decomposition = Decomposition::from_chains(&model, &j, order.clone(), chains)?;
    Ok(Built { model, j, decomposition, added_factors, added_edges })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// F_T differs from the union of its outer factors' locals.
    TreeFactors { tree: usize },
    /// A ∩ C is not contained in the intermediate factor B.
    RunningIntersection { tree: usize, first: FactorId, middle: FactorId, last: FactorId },
    /// The intersection of consecutive factors is missing from F_A or F_A'.
    IntersectionNotLocal { tree: usize, left: FactorId, right: FactorId },
    /// {v} ∉ F_A for some v ∈ A.
    MissingSingleton { factor: FactorId, node: NodeId },
    /// An outer factor is covered by a number of chains other than one.
    OuterCoverage { factor: FactorId, chains: usize },
    /// A chain member is not an outer factor.
    NotOuter { tree: usize, factor: FactorId },
    /// Consecutive factors violate u < v < w.
    NotMonotone { tree: usize, left: FactorId, right: FactorId },
    /// The separator order does not extend the node order on this pair.
    OrderExtension { first: FactorId, second: FactorId },
    /// B ⊂ A both in F_T but (A,B) is not a closed edge.
    NestedNotLocal { tree: usize, outer: FactorId, inner: FactorId },
    /// F_T ∩ S differs from the union of the windows S_A.
    WindowCover { tree: usize },
    /// The chain of separators sep⁻A₁ ≺ sep⁺A₁ = sep⁻A₂ ≺ … is broken.
    SeparatorChain { tree: usize, at: FactorId },
    /// A separator belongs to no tree.
    UncoveredSeparator { factor: FactorId },
    /// ρ does not sum to one or ρ_C disagrees with the per-tree weights.
    Weights,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TreeFactors { tree } => write!(f, "tree {tree} factor set mismatch"),
            Violation::RunningIntersection { tree, first, middle, last } => {
                write!(f, "tree {tree}: {first} ∩ {last} not contained in {middle}")
            }
            Violation::IntersectionNotLocal { tree, left, right } => {
                write!(f, "tree {tree}: intersection of {left} and {right} not local to both")
            }
            Violation::MissingSingleton { factor, node } => {
                write!(f, "singleton {{{node}}} not local to factor {factor}")
            }
            Violation::OuterCoverage { factor, chains } => {
                write!(f, "outer factor {factor} covered by {chains} chains")
            }
            Violation::NotOuter { tree, factor } => write!(f, "tree {tree}: factor {factor} is not outer"),
            Violation::NotMonotone { tree, left, right } => {
                write!(f, "tree {tree}: join {left} -> {right} is not monotone")
            }
            Violation::OrderExtension { first, second } => {
                write!(f, "separator order does not extend node order on ({first}, {second})")
            }
            Violation::NestedNotLocal { tree, outer, inner } => {
                write!(f, "tree {tree}: {inner} ⊂ {outer} but not local to it")
            }
            Violation::WindowCover { tree } => write!(f, "tree {tree}: windows do not cover its separators"),
            Violation::SeparatorChain { tree, at } => {
                write!(f, "tree {tree}: separator chain broken at factor {at}")
            }
            Violation::UncoveredSeparator { factor } => write!(f, "separator {factor} belongs to no tree"),
            Violation::Weights => write!(f, "tree weights inconsistent"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every structural assumption the chain solvers rely on, plus the
/// derived consistency properties.
pub fn validate_decomposition(model: &Model, j: &JStructure, d: &Decomposition) -> ValidationReport {
    let mut v = Vec::new();
    let order = d.node_order();
    let n = model.factor_count();
    let seps = j.separators();

    let mut coverage = vec![0usize; n];
    for (t, chain) in d.chains().iter().enumerate() {
        for &a in chain {
            coverage[a] += 1;
            if !j.is_outer(a) {
                v.push(Violation::NotOuter { tree: t, factor: a });
            }
        }
        let union: BTreeSet<FactorId> = chain.iter().flat_map(|&a| j.locals(a).iter().copied()).collect();
        if union.iter().copied().collect::<Vec<_>>() != d.tree_factors(t) {
            v.push(Violation::TreeFactors { tree: t });
        }
        for i in 0..chain.len() {
            for k in i + 2..chain.len() {
                let common = intersection(model.scope(chain[i]), model.scope(chain[k]));
                for &mid in &chain[i + 1..k] {
                    if !is_subset(&common, model.scope(mid)) {
                        v.push(Violation::RunningIntersection {
                            tree: t,
                            first: chain[i],
                            middle: mid,
                            last: chain[k],
                        });
                    }
                }
            }
        }
        for w in chain.windows(2) {
            let shared = intersection(model.scope(w[0]), model.scope(w[1]));
            let local = model.factor_by_scope(&shared).is_some_and(|s| j.in_locals(w[0], s) && j.in_locals(w[1], s));
            if !local {
                v.push(Violation::IntersectionNotLocal { tree: t, left: w[0], right: w[1] });
            }
            if shared.is_empty() || !monotone_join(order, model.scope(w[0]), model.scope(w[1]), &shared) {
                v.push(Violation::NotMonotone { tree: t, left: w[0], right: w[1] });
            }
        }

        let members = d.tree_factors(t);
        for &a in members {
            for &b in members {
                let (sa, sb) = (model.scope(a), model.scope(b));
                if a != b && sb.len() < sa.len() && is_subset(sb, sa) && !j.has_closed_edge(a, b) {
                    v.push(Violation::NestedNotLocal { tree: t, outer: a, inner: b });
                }
            }
        }
        let tree_seps: BTreeSet<FactorId> = members.iter().copied().filter(|&f| !j.is_outer(f)).collect();
        let windows: BTreeSet<FactorId> = chain.iter().flat_map(|&a| d.local_separators(a).iter().copied()).collect();
        if tree_seps != windows {
            v.push(Violation::WindowCover { tree: t });
        }
        if chain.iter().all(|&a| model.scope(a).len() >= 2) {
            let rank = d.sigma_ranks();
            for (i, &a) in chain.iter().enumerate() {
                let (Some(lo), Some(hi)) = (d.sep_minus(a), d.sep_plus(a)) else {
                    v.push(Violation::SeparatorChain { tree: t, at: a });
                    continue;
                };
                if rank[lo] >= rank[hi] {
                    v.push(Violation::SeparatorChain { tree: t, at: a });
                }
                if i + 1 < chain.len() && d.sep_minus(chain[i + 1]) != Some(hi) {
                    v.push(Violation::SeparatorChain { tree: t, at: a });
                }
            }
        }
    }
    for a in j.outer() {
        if coverage[a] != 1 {
            v.push(Violation::OuterCoverage { factor: a, chains: coverage[a] });
        }
    }
    for a in 0..n {
        for &node in model.scope(a) {
            let ok = model.factor_by_scope(&[node]).is_some_and(|s| s == a || j.has_closed_edge(a, s));
            if !ok {
                v.push(Violation::MissingSingleton { factor: a, node });
            }
        }
    }
    for &b in &seps {
        if d.trees_of(b).is_empty() {
            v.push(Violation::UncoveredSeparator { factor: b });
        }
    }

    let rank = d.sigma_ranks();
    for (i, &a) in seps.iter().enumerate() {
        for &b in &seps[i + 1..] {
            for (x, y) in [(a, b), (b, a)] {
                let (sx, sy) = (model.scope(x), model.scope(y));
                let (minx, maxx) = (order.rank(order.min(sx)), order.rank(order.max(sx)));
                let (miny, maxy) = (order.rank(order.min(sy)), order.rank(order.max(sy)));
                if minx < miny && maxx < maxy && rank[x] >= rank[y] {
                    v.push(Violation::OrderExtension { first: x, second: y });
                }
                if maxx > maxy && minx >= miny && rank[x] <= rank[y] {
                    v.push(Violation::OrderExtension { first: x, second: y });
                }
            }
        }
    }

    let total: f64 = d.rhos().iter().sum();
    let weights_ok = (d.tree_count() == 0 || (total - 1.0).abs() <= 1e-12)
        && (0..n).all(|c| {
            let s: f64 = d.trees_of(c).iter().map(|&t| d.rho(t)).sum();
            (s - d.rho_factor(c)).abs() <= 1e-12
        });
    if !weights_ok {
        v.push(Violation::Weights);
    }
    ValidationReport { violations: v }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Overlapping chain over nodes a..e: X=abc, Y=bcd, Z=de, separator bc, singletons.
    pub(crate) fn three_factor_chain() -> (Model, JStructure) {
        let zero = |k: usize| vec![0.0; 1 << k];
        let model = Model::new(
            vec![2; 5],
            vec![
                (vec![0, 1, 2], zero(3)),
                (vec![1, 2, 3], zero(3)),
                (vec![3, 4], zero(2)),
                (vec![1, 2], zero(2)),
                (vec![0], zero(1)),
                (vec![1], zero(1)),
                (vec![2], zero(1)),
                (vec![3], zero(1)),
                (vec![4], zero(1)),
            ],
        )
        .unwrap();
        let mut edges = vec![(0, 3), (1, 3)];
        for (f, nodes) in [(0, vec![0, 1, 2]), (1, vec![1, 2, 3]), (2, vec![3, 4])] {
            for v in nodes {
                edges.push((f, 4 + v));
            }
        }
        let j = JStructure::new(&model, edges).unwrap();
        (model, j)
    }

    #[test]
    fn separator_order_follows_sigma() {
        let (model, j) = three_factor_chain();
        let order = NodeOrder::identity(5);
        let seps = extend_order_to_separators(&model, &j, &order);
        // a ≺ b ≺ bc ≺ c ≺ d ≺ e
        assert_eq!(seps, vec![4, 5, 3, 6, 7, 8]);
    }

    #[test]
    fn sigma_pairs() {
        let order = NodeOrder::identity(3);
        assert_eq!(order.compare(&[0, 1], &[0, 2]), Ordering::Less);
        assert_eq!(order.sigma(&[2]), vec![2, 2]);
        assert_eq!(order.compare(&[1], &[2]), Ordering::Less);
    }

    #[test]
    fn three_factor_bounds_and_windows() {
        let (model, j) = three_factor_chain();
        let order = NodeOrder::identity(5);
        let chain = vec![0, 1, 2];
        assert_eq!(sep_bounds(&model, &order, &chain, 0).unwrap(), (4, 3));
        assert_eq!(sep_bounds(&model, &order, &chain, 1).unwrap(), (3, 7));
        assert_eq!(sep_bounds(&model, &order, &chain, 2).unwrap(), (7, 8));
        let d = Decomposition::from_chains(&model, &j, order, vec![chain]).unwrap();
        assert_eq!(d.local_separators(0), &[4, 5, 3]);
        assert_eq!(d.local_separators(1), &[3, 6, 7]);
        assert_eq!(d.local_separators(2), &[7, 8]);
        assert!(!d.local_separators(0).contains(&6));
        assert!(validate_decomposition(&model, &j, &d).is_valid());
    }

    #[test]
    fn single_factor_chain_bounds() {
        let model =
            Model::new(vec![2; 3], vec![(vec![0, 2], vec![0.0; 4]), (vec![0], vec![0.0; 2]), (vec![2], vec![0.0; 2])])
                .unwrap();
        let order = NodeOrder::identity(3);
        assert_eq!(sep_bounds(&model, &order, &[0], 0).unwrap(), (1, 2));
        let missing = Model::new(vec![2; 2], vec![(vec![0, 1], vec![0.0; 4])]).unwrap();
        assert_eq!(
            sep_bounds(&missing, &NodeOrder::identity(2), &[0], 0).unwrap_err(),
            Error::MissingSeparatorFactor { scope: vec![0] }
        );
    }

    #[test]
    fn window_of_pairwise_factor_is_its_endpoints() {
        let model =
            Model::new(vec![2; 2], vec![(vec![0, 1], vec![0.0; 4]), (vec![0], vec![0.0; 2]), (vec![1], vec![0.0; 2])])
                .unwrap();
        let j = JStructure::new(&model, [(0, 1), (0, 2)]).unwrap();
        let d = Decomposition::from_chains(&model, &j, NodeOrder::identity(2), vec![vec![0]]).unwrap();
        assert_eq!(d.local_separators(0), &[1, 2]);
    }

    fn path(n: usize) -> (Model, JStructure) {
        let factors = (0..n - 1).map(|i| (vec![i, i + 1], vec![0.0; 4])).collect();
        let model = Model::new(vec![2; n], factors).unwrap();
        let j = JStructure::new(&model, []).unwrap();
        (model, j)
    }

    #[test]
    fn path_becomes_one_chain() {
        let (model, j) = path(4);
        let built = build_monotonic_chains(&model, &j, &NodeOrder::identity(4)).unwrap();
        assert_eq!(built.decomposition.chains(), &[vec![0, 1, 2]]);
        assert_eq!(built.added_factors.len(), 4);
        assert!(validate_decomposition(&built.model, &built.j, &built.decomposition).is_valid());
    }

    #[test]
    fn two_factor_chain_shares_singleton() {
        let (model, j) = path(3);
        let built = build_monotonic_chains(&model, &j, &NodeOrder::identity(3)).unwrap();
        let d = &built.decomposition;
        let b = built.model.factor_by_scope(&[1]).unwrap();
        assert_eq!(d.sep_plus(0), Some(b));
        assert_eq!(d.sep_minus(1), Some(b));
    }

    #[test]
    fn disjoint_factors_make_two_chains() {
        let model = Model::new(vec![2; 4], vec![(vec![0, 1], vec![0.0; 4]), (vec![2, 3], vec![0.0; 4])]).unwrap();
        let j = JStructure::new(&model, []).unwrap();
        let built = build_monotonic_chains(&model, &j, &NodeOrder::identity(4)).unwrap();
        assert_eq!(built.decomposition.tree_count(), 2);
    }

    #[test]
    fn two_by_two_grid_chains() {
        // a b / c d with row-major ids 0 1 / 2 3; factors ab, cd, ac, bd.
        let model = Model::new(
            vec![2; 4],
            vec![
                (vec![0, 1], vec![0.0; 4]),
                (vec![2, 3], vec![0.0; 4]),
                (vec![0, 2], vec![0.0; 4]),
                (vec![1, 3], vec![0.0; 4]),
            ],
        )
        .unwrap();
        let j = JStructure::new(&model, []).unwrap();
        let built = build_monotonic_chains(&model, &j, &NodeOrder::identity(4)).unwrap();
        // ab -> bd joins at b; ac -> cd joins at c; ab and ac cannot join at a.
        assert_eq!(built.decomposition.chains(), &[vec![0, 3], vec![2, 1]]);
        assert!(validate_decomposition(&built.model, &built.j, &built.decomposition).is_valid());
    }

    #[test]
    fn reversed_chain_is_not_monotone() {
        let model = Model::new(
            vec![2; 3],
            vec![
                (vec![1, 2], vec![0.0; 4]),
                (vec![0, 1], vec![0.0; 4]),
                (vec![0], vec![0.0; 2]),
                (vec![1], vec![0.0; 2]),
                (vec![2], vec![0.0; 2]),
            ],
        )
        .unwrap();
        let j = JStructure::new(&model, [(0, 3), (0, 4), (1, 2), (1, 3)]).unwrap();
        let d = Decomposition::from_chains(&model, &j, NodeOrder::identity(3), vec![vec![0, 1]]).unwrap();
        let report = validate_decomposition(&model, &j, &d);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NotMonotone { .. })));
    }

    #[test]
    fn missing_singleton_edge_is_reported() {
        let model =
            Model::new(vec![2; 2], vec![(vec![0, 1], vec![0.0; 4]), (vec![0], vec![0.0; 2]), (vec![1], vec![0.0; 2])])
                .unwrap();
        let j = JStructure::new(&model, [(0, 1)]).unwrap();
        let d = Decomposition::from_chains(&model, &j, NodeOrder::identity(2), vec![vec![0], vec![2]]);
        // {1} is outer here, so sep⁺ of the pair resolves to an outer factor.
        let d = d.unwrap();
        let report = validate_decomposition(&model, &j, &d);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::MissingSingleton { factor: 0, node: 1 })));
    }

    #[test]
    fn node_order_validation() {
        assert!(NodeOrder::new(vec![1, 0, 2]).is_ok());
        assert!(NodeOrder::new(vec![1, 1]).is_err());
        assert!(NodeOrder::new(vec![0, 5]).is_err());
    }
}
