//! Projected subgradient ascent on the tree decomposition bound with the
//! diminishing step λ/(K+1), K counting passes that failed to improve.

use crate::error::{Error, Result};
use crate::model::Labeling;
use crate::problem::{Effort, Problem};
use crate::trws::tree::{fill_labeling, tree_argmin, TreeParams};
use crate::trws::{drive, BoundTrace, Direction, PassSolver};

#[derive(Debug, Clone)]
pub struct SubgradientSolver<'p> {
    p: &'p Problem,
    params: TreeParams,
    lambda: f64,
    inferior: usize,
    best: f64,
    effort: Effort,
}

impl<'p> SubgradientSolver<'p> {
    pub fn new(p: &'p Problem, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidStepSize(lambda));
        }
        let params = TreeParams::uniform_split(p);
        Ok(SubgradientSolver { p, params, lambda, inferior: 0, best: f64::NEG_INFINITY, effort: Effort::default() })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn inferior_count(&self) -> usize {
        self.inferior
    }

    pub fn step_size(&self) -> f64 {
        self.lambda / (self.inferior + 1) as f64
    }

    /// One step: per-tree minimizers, bound at the current point, then the
    /// ρ-balanced update of shared factors. Returns the current bound.
    pub fn step(&mut self) -> f64 {
        let p = self.p;
        let d = &p.decomposition;
        let mut bound = 0.0;
        let mut argmins: Vec<Labeling> = Vec::with_capacity(d.tree_count());
        for t in 0..d.tree_count() {
            let (value, x) = tree_argmin(p, self.params.tree(t), t, &mut self.effort);
            bound += p.rho(t) * value;
            argmins.push(fill_labeling(&x));
        }
        if bound < self.best {
            self.inferior += 1;
        } else {
            self.best = bound;
        }
        let alpha = self.step_size();
        for c in 0..p.model.factor_count() {
            let trees = d.trees_of(c);
            if trees.len() < 2 {
                continue;
            }
            let mut mean = vec![0.0; p.len(c)];
            for &t in trees {
                mean[p.model.index_of(c, &argmins[t])] += p.rho(t) / p.rho_factor(c);
            }
            for &t in trees {
                let hit = p.model.index_of(c, &argmins[t]);
                for (i, (v, m)) in self.params.tree_mut(t)[c].iter_mut().zip(&mean).enumerate() {
                    let g = if i == hit { 1.0 } else { 0.0 } - m;
                    *v += alpha * g;
                }
            }
            self.effort.ops += trees.len() as u64;
        }
        bound
    }
}

impl PassSolver for SubgradientSolver<'_> {
    fn method(&self) -> &'static str {
        "subgrad"
    }

    /// Reports the best bound seen so far.
    fn pass(&mut self, _direction: Direction) -> Result<f64> {
        self.step();
        Ok(self.best)
    }

    fn effort(&self) -> Effort {
        self.effort
    }
}

/// λ grid tried by [`select_lambda`].
pub const LAMBDA_GRID: [f64; 3] = [0.1, 1.0, 10.0];

/// Runs `passes` steps for every λ in `grid` and keeps the best final bound.
pub fn select_lambda<'p>(
    p: &'p Problem,
    grid: &[f64],
    passes: usize,
) -> Result<(f64, SubgradientSolver<'p>, BoundTrace)> {
    let mut best: Option<(f64, SubgradientSolver<'p>, BoundTrace)> = None;
    for &lambda in grid {
        let mut s = SubgradientSolver::new(p, lambda)?;
        let trace = drive(&mut s, passes, -1.0)?;
        if best.as_ref().is_none_or(|b| s.best() > b.1.best()) {
            best = Some((lambda, s, trace));
        }
    }
    best.ok_or(Error::InvalidStepSize(f64::NAN))
}
