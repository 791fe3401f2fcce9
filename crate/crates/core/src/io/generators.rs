//! Seeded problem generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::jstructure::JStructure;
use crate::model::{FactorId, Model, NodeId};
use crate::problem::Problem;

/// Which separators the generated J exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparatorMode {
    #[default]
    Singleton,
    /// Adds zero-cost pair factors between neighbouring nodes of each clique.
    Pair,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub model: Model,
    pub j: JStructure,
}

impl Instance {
    fn build(
        labels: Vec<usize>,
        factors: Vec<(Vec<NodeId>, Vec<f64>)>,
        edges: Vec<(FactorId, FactorId)>,
    ) -> Result<Self> {
        let model = Model::new(labels, factors)?;
        let j = JStructure::new(&model, edges)?;
        Ok(Instance { model, j })
    }

    /// Decomposition under the identity node order.
    pub fn problem(&self) -> Result<Problem> {
        Problem::with_identity_order(&self.model, &self.j)
    }
}

/// Collects factors with unique scopes and J edges between them.
#[derive(Default)]
struct Builder {
    factors: Vec<(Vec<NodeId>, Vec<f64>)>,
    edges: BTreeSet<(FactorId, FactorId)>,
}

impl Builder {
    fn find(&self, scope: &[NodeId]) -> Option<FactorId> {
        self.factors.iter().position(|f| f.0 == scope)
    }

    fn add(&mut self, scope: Vec<NodeId>, table: Vec<f64>) -> FactorId {
        match self.find(&scope) {
            Some(f) => {
                for (x, v) in self.factors[f].1.iter_mut().zip(table) {
                    *x += v;
                }
                f
            }
            None => {
                self.factors.push((scope, table));
                self.factors.len() - 1
            }
        }
    }

    fn edge(&mut self, a: FactorId, b: FactorId) {
        self.edges.insert((a, b));
    }

    fn finish(self, labels: Vec<usize>) -> Result<Instance> {
        Instance::build(labels, self.factors, self.edges.into_iter().collect())
    }
}

fn states(labels: &[usize], scope: &[NodeId]) -> usize {
    scope.iter().map(|&v| labels[v]).product()
}

/// Fills a table over `scope` (row-major, last node fastest) from `cost`.
fn tabulate(labels: &[usize], scope: &[NodeId], mut cost: impl FnMut(&[usize]) -> f64) -> Vec<f64> {
    let n = states(labels, scope);
    let mut x = vec![0usize; scope.len()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(cost(&x));
        for k in (0..scope.len()).rev() {
            x[k] += 1;
            if x[k] < labels[scope[k]] {
                break;
            }
            x[k] = 0;
        }
    }
    out
}

/// Second-order smoothness cost of a label triple.
pub fn stereo_cost(l1: usize, l2: usize, l3: usize, lambda: f64) -> f64 {
    let (a, b, c) = (l1 as i64, l2 as i64, l3 as i64);
    if (a - b).abs() <= 1 && (b - c).abs() <= 1 {
        match ((a - b) - (b - c)).abs() {
            0 => 0.0,
            1 => lambda,
            _ => 3.0 * lambda,
        }
    } else {
        3.0 * lambda
    }
}

#[derive(Debug, Clone)]
pub struct StereoConfig {
    pub width: usize,
    pub height: usize,
    pub labels: usize,
    pub lambda: f64,
    /// Per-pixel unary tables (row-major pixels); seeded noise in [0, 3λ] if absent.
    pub unaries: Option<Vec<Vec<f64>>>,
    pub separators: SeparatorMode,
    pub seed: u64,
}

/// Horizontal and vertical pixel triplets with second-order costs.
pub fn gen_stereo(cfg: &StereoConfig) -> Result<Instance> {
    let (w, h, k) = (cfg.width, cfg.height, cfg.labels);
    let labels = vec![k; w * h];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Builder::default();
    for v in 0..w * h {
        let table = match &cfg.unaries {
            Some(u) => u[v].clone(),
            None => (0..k).map(|_| rng.gen_range(0.0..=3.0 * cfg.lambda)).collect(),
        };
        b.add(vec![v], table);
    }
    let mut triplets = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 2 < w {
                triplets.push([v, v + 1, v + 2]);
            }
            if y + 2 < h {
                triplets.push([v, v + w, v + 2 * w]);
            }
        }
    }
    for tri in triplets {
        let table = tabulate(&labels, &tri, |l| stereo_cost(l[0], l[1], l[2], cfg.lambda));
        let f = b.add(tri.to_vec(), table);
        for &v in &tri {
            b.edge(f, v);
        }
        if cfg.separators == SeparatorMode::Pair {
            for pair in [[tri[0], tri[1]], [tri[1], tri[2]]] {
                let g = b.add(pair.to_vec(), vec![0.0; k * k]);
                b.edge(f, g);
            }
        }
    }
    b.finish(labels)
}

/// Block cost of the generalized Potts model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PottsVariant {
    /// 0 if all four labels agree, the block weight otherwise.
    #[default]
    AllEqual,
    /// Block weight times the number of disagreeing label pairs in the block.
    Pairwise,
}

#[derive(Debug, Clone)]
pub struct PottsConfig {
    pub width: usize,
    pub height: usize,
    pub labels: usize,
    pub weight: f64,
    pub variant: PottsVariant,
    /// Unaries are seeded noise in [0, unary_scale]; zero gives zero unaries.
    pub unary_scale: f64,
    pub separators: SeparatorMode,
    pub seed: u64,
}

pub fn potts_cost(l: &[usize], weight: f64, variant: PottsVariant) -> f64 {
    match variant {
        PottsVariant::AllEqual => {
            if l.iter().all(|&x| x == l[0]) {
                0.0
            } else {
                weight
            }
        }
        PottsVariant::Pairwise => {
            let mut n = 0;
            for i in 0..l.len() {
                for j in i + 1..l.len() {
                    n += usize::from(l[i] != l[j]);
                }
            }
            weight * n as f64
        }
    }
}

/// Overlapping 2×2 pixel blocks as 4-ary factors.
pub fn gen_potts_2x2(cfg: &PottsConfig) -> Result<Instance> {
    let (w, h, k) = (cfg.width, cfg.height, cfg.labels);
    let labels = vec![k; w * h];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Builder::default();
    for v in 0..w * h {
        let table =
            (0..k).map(|_| if cfg.unary_scale > 0.0 { rng.gen_range(0.0..=cfg.unary_scale) } else { 0.0 }).collect();
        b.add(vec![v], table);
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            let v = y * w + x;
            let block = [v, v + 1, v + w, v + w + 1];
            let table = tabulate(&labels, &block, |l| potts_cost(l, cfg.weight, cfg.variant));
            let f = b.add(block.to_vec(), table);
            for &u in &block {
                b.edge(f, u);
            }
            if cfg.separators == SeparatorMode::Pair {
                for pair in [[v, v + 1], [v + w, v + w + 1], [v, v + w], [v + 1, v + w + 1]] {
                    let g = b.add(pair.to_vec(), vec![0.0; k * k]);
                    b.edge(f, g);
                }
            }
        }
    }
    b.finish(labels)
}

#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub max_nodes: usize,
    pub max_labels: usize,
    pub max_arity: usize,
    pub max_factors: usize,
    /// Probability of adding a pair sub-factor (and J edge) under a factor of arity ≥ 3.
    pub nested_prob: f64,
    /// Cap on the joint state count; label counts shrink until it holds.
    pub max_states: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { max_nodes: 8, max_labels: 3, max_arity: 4, max_factors: 8, nested_prob: 0.5, max_states: 10_000 }
    }
}

/// Mixed-arity model with random scopes, costs in [−1, 1], and J edges from
/// every factor to randomly chosen existing sub-factors.
pub fn gen_random(cfg: &RandomConfig, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=cfg.max_nodes.max(2));
    let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=cfg.max_labels.max(2))).collect();
    while labels.iter().product::<usize>() > cfg.max_states {
        let Some(v) = (0..n).filter(|&v| labels[v] > 2).max_by_key(|&v| (labels[v], v)) else { break };
        labels[v] -= 1;
    }
    let mut b = Builder::default();
    let count = rng.gen_range(1..=cfg.max_factors.max(1));
    let nodes: Vec<NodeId> = (0..n).collect();
    for _ in 0..count {
        let arity = rng.gen_range(1..=cfg.max_arity.min(n));
        let mut scope: Vec<NodeId> = nodes.choose_multiple(&mut rng, arity).copied().collect();
        scope.sort_unstable();
        let table = (0..states(&labels, &scope)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let f = b.add(scope.clone(), table);
        if scope.len() >= 3 && rng.gen_bool(cfg.nested_prob) {
            let mut pair: Vec<NodeId> = scope.choose_multiple(&mut rng, 2).copied().collect();
            pair.sort_unstable();
            let table = (0..states(&labels, &pair)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let g = b.add(pair, table);
            b.edge(f, g);
        }
    }
    add_sub_edges(&mut b, &mut rng);
    b.finish(labels)
}

/// Adds an edge A → B for every strictly nested pair with probability ½,
/// and always toward singleton factors.
fn add_sub_edges(b: &mut Builder, rng: &mut ChaCha8Rng) {
    let scopes: Vec<Vec<NodeId>> = b.factors.iter().map(|f| f.0.clone()).collect();
    for (a, sa) in scopes.iter().enumerate() {
        for (c, sc) in scopes.iter().enumerate() {
            if sc.len() < sa.len() && sc.iter().all(|v| sa.contains(v)) && (sc.len() == 1 || rng.gen_bool(0.5)) {
                b.edge(a, c);
            }
        }
    }
}

/// A single interval chain over nodes 0..n: consecutive factors overlap in
/// a non-empty proper interval, so one monotonic chain covers the model.
pub fn gen_tree(seed: u64, max_nodes: usize, max_labels: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=max_nodes.max(3));
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_labels.max(2))).collect();
    let mut b = Builder::default();
    let (mut start, mut end) = (0usize, rng.gen_range(1..=2.min(n - 1)));
    loop {
        let scope: Vec<NodeId> = (start..=end).collect();
        let table = (0..states(&labels, &scope)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        b.add(scope, table);
        if end + 1 >= n {
            break;
        }
        // Next interval starts inside the current one and ends past it.
        let next_start = rng.gen_range(start + 1..=end);
        let next_end = (end + rng.gen_range(1..=2)).min(n - 1);
        if next_end - next_start + 1 > 4 {
            start = next_end - 3;
        } else {
            start = next_start;
        }
        end = next_end;
    }
    for (v, &k) in labels.iter().enumerate() {
        if rng.gen_bool(0.5) {
            b.add(vec![v], (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect());
        }
    }
    add_sub_edges(&mut b, &mut rng);
    b.finish(labels)
}

/// Binary pairwise grid with submodular edges and singleton separators.
pub fn gen_submodular_grid(seed: u64, width: usize, height: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = vec![2; width * height];
    let mut b = Builder::default();
    for v in 0..width * height {
        b.add(vec![v], vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)]);
    }
    for y in 0..height {
        for x in 0..width {
            let v = y * width + x;
            let mut nbrs = Vec::new();
            if x + 1 < width {
                nbrs.push(v + 1);
            }
            if y + 1 < height {
                nbrs.push(v + width);
            }
            for u in nbrs {
                // θ(0,1) + θ(1,0) ≥ θ(0,0) + θ(1,1).
                let (a, d) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                let bc: f64 = a + d + rng.gen_range(0.0..=2.0);
                let split = rng.gen_range(0.0..=1.0);
                let f = b.add(vec![v, u], vec![a, split * bc, (1.0 - split) * bc, d]);
                b.edge(f, v);
                b.edge(f, u);
            }
        }
    }
    b.finish(labels)
}

/// Three overlapping outer factors abc, bcd, de with the nested separator bc
/// over binary-to-ternary nodes, random costs.
pub fn gen_three_factor_chain(seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(2..=3)).collect();
    let mut b = Builder::default();
    let mut random = |b: &mut Builder, scope: Vec<NodeId>| {
        let table = (0..states(&labels, &scope)).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        b.add(scope, table)
    };
    let x = random(&mut b, vec![0, 1, 2]);
    let y = random(&mut b, vec![1, 2, 3]);
    let z = random(&mut b, vec![3, 4]);
    let bc = random(&mut b, vec![1, 2]);
    let singles: Vec<FactorId> = (0..5).map(|v| random(&mut b, vec![v])).collect();
    b.edge(x, bc);
    b.edge(y, bc);
    for (f, nodes) in [(x, vec![0, 1, 2]), (y, vec![1, 2, 3]), (z, vec![3, 4])] {
        for v in nodes {
            b.edge(f, singles[v]);
        }
    }
    b.finish(labels)
}
