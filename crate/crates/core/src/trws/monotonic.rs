//! TRW-S over monotonic chains with explicit per-tree parameters and the
//! CUR_T / CHILD_A bookkeeping.

use crate::error::{Error, Result};
use crate::model::FactorId;
use crate::problem::{Effort, Problem};
use crate::trws::tree::{average_factor, lower_bound, send_in, TreeParams};
use crate::trws::{Direction, PassSolver};

#[derive(Debug, Clone)]
pub struct MonotonicSolver<'p> {
    p: &'p Problem,
    params: TreeParams,
    /// Index of CUR_T inside chain T.
    cur: Vec<usize>,
    /// CHILD_A for outer factors.
    child: Vec<Option<FactorId>>,
    effort: Effort,
    check: bool,
}

impl<'p> MonotonicSolver<'p> {
    /// Uniform split θ^T_C = θ̄_C/ρ_C, positioned for a backward pass
    /// (CUR_T last, CHILD_A = sep⁺A).
    pub fn new(p: &'p Problem) -> Self {
        let d = &p.decomposition;
        let cur = (0..d.tree_count()).map(|t| d.chain(t).len() - 1).collect();
        let child = (0..p.model.factor_count()).map(|a| d.sep_plus(a)).collect();
        MonotonicSolver { p, params: TreeParams::uniform_split(p), cur, child, effort: Effort::default(), check: true }
    }

    /// [`Self::new`] followed by one unrecorded backward pass.
    pub fn start(p: &'p Problem) -> Result<Self> {
        let mut s = Self::new(p);
        s.run(Direction::Backward, &mut |_, _| {})?;
        Ok(s)
    }

    /// Toggles the per-step bookkeeping checks.
    pub fn set_checks(&mut self, on: bool) {
        self.check = on;
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn current(&self, t: usize) -> FactorId {
        self.p.decomposition.chain(t)[self.cur[t]]
    }

    pub fn child(&self, a: FactorId) -> Option<FactorId> {
        self.child[a]
    }

    /// One pass; `before_average` sees the parameters right before each
    /// separator is averaged.
    pub fn pass_with(
        &mut self,
        direction: Direction,
        before_average: &mut dyn FnMut(&TreeParams, FactorId),
    ) -> Result<f64> {
        self.run(direction, before_average)?;
        Ok(lower_bound(self.p, &self.params, &mut self.effort))
    }

    fn run(&mut self, direction: Direction, hook: &mut dyn FnMut(&TreeParams, FactorId)) -> Result<()> {
        let p = self.p;
        let d = &p.decomposition;
        let mut order = d.separator_order().to_vec();
        if direction == Direction::Backward {
            order.reverse();
        }
        for &b in &order {
            for &t in d.trees_of(b) {
                let a = self.current(t);
                if self.check && !d.local_separators(a).contains(&b) {
                    return Err(Error::InvalidOrder(format!("separator {b} outside S_{a} at step for tree {t}")));
                }
                if self.child[a] != Some(b) {
                    send_in(p, self.params.tree_mut(t), a, b, &mut self.effort);
                    self.child[a] = Some(b);
                }
                let (exit, step) = match direction {
                    Direction::Forward => (d.sep_plus(a), self.cur[t] + 1 < d.chain(t).len()),
                    Direction::Backward => (d.sep_minus(a), self.cur[t] > 0),
                };
                if exit == Some(b) && step {
                    match direction {
                        Direction::Forward => self.cur[t] += 1,
                        Direction::Backward => self.cur[t] -= 1,
                    }
                }
            }
            hook(&self.params, b);
            average_factor(p, &mut self.params, b)?;
            if self.check {
                self.check_children()?;
            }
        }
        Ok(())
    }

    /// Outer factors left of CUR_T point at sep⁺, those right of it at sep⁻.
    pub fn check_children(&self) -> Result<()> {
        let d = &self.p.decomposition;
        for t in 0..d.tree_count() {
            for (i, &a) in d.chain(t).iter().enumerate() {
                let expect = if i < self.cur[t] {
                    d.sep_plus(a)
                } else if i > self.cur[t] {
                    d.sep_minus(a)
                } else {
                    continue;
                };
                if self.child[a] != expect {
                    return Err(Error::InvalidOrder(format!(
                        "CHILD of factor {a} is {:?}, expected {expect:?}",
                        self.child[a]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bound(&mut self) -> f64 {
        lower_bound(self.p, &self.params, &mut self.effort)
    }
}

impl PassSolver for MonotonicSolver<'_> {
    fn method(&self) -> &'static str {
        "trws-monotonic"
    }

    fn pass(&mut self, direction: Direction) -> Result<f64> {
        self.pass_with(direction, &mut |_, _| {})
    }

    fn effort(&self) -> Effort {
        self.effort
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trws::chain::tests::chain_fixture;
    use crate::trws::chain::ChainSolver;
    use crate::trws::SolverOptions;

    #[test]
    fn matches_message_solver() {
        let p = chain_fixture();
        let mut alg2 = MonotonicSolver::start(&p).unwrap();
        let mut alg3 = ChainSolver::start(&p, SolverOptions::default()).unwrap();
        for dir in [Direction::Forward, Direction::Backward, Direction::Forward] {
            let b2 = PassSolver::pass(&mut alg2, dir).unwrap();
            let b3 = alg3.pass(dir).unwrap();
            assert!((b2 - b3).abs() < 1e-9, "{b2} vs {b3}");
        }
    }

    #[test]
    fn cross_tree_copies_stay_equal() {
        let p = chain_fixture();
        let mut s = MonotonicSolver::start(&p).unwrap();
        let d = &p.decomposition;
        let mut hook = |params: &TreeParams, _b: FactorId| {
            for c in 0..p.model.factor_count() {
                let trees = d.trees_of(c);
                for w in trees.windows(2) {
                    for (x, y) in params.table(w[0], c).iter().zip(params.table(w[1], c)) {
                        assert!((x - y).abs() < 1e-12);
                    }
                }
            }
        };
        s.pass_with(Direction::Forward, &mut hook).unwrap();
    }

    #[test]
    fn cursor_ends_at_chain_end() {
        let p = chain_fixture();
        let mut s = MonotonicSolver::start(&p).unwrap();
        PassSolver::pass(&mut s, Direction::Forward).unwrap();
        for t in 0..p.decomposition.tree_count() {
            assert_eq!(s.current(t), *p.decomposition.chain(t).last().unwrap());
        }
    }
}
