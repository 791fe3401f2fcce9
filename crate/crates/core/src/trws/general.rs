//! TRW-S with an arbitrary separator order: every tree containing B is
//! reparameterized to give exact min-marginals for B before averaging.

use crate::error::Result;
use crate::model::FactorId;
use crate::problem::{Effort, Problem};
use crate::trws::chain::ChainSolver;
use crate::trws::tree::{average_with, lower_bound, tree_min_marginal, TreeParams};
use crate::trws::{Direction, PassSolver, SolverOptions};

/// One sweep over `order`; returns Φ afterwards.
pub fn general_pass(p: &Problem, params: &mut TreeParams, order: &[FactorId], effort: &mut Effort) -> Result<f64> {
    for &b in order {
        let mut nus = Vec::new();
        for &t in p.decomposition.trees_of(b) {
            nus.push(tree_min_marginal(p, params, t, b, effort)?);
        }
        average_with(p, params, b, &nus);
    }
    Ok(lower_bound(p, params, effort))
}

#[derive(Debug, Clone)]
pub struct GeneralSolver<'p> {
    p: &'p Problem,
    params: TreeParams,
    effort: Effort,
}

impl<'p> GeneralSolver<'p> {
    /// Starts from the uniform split θ^T_C = θ̄_C/ρ_C.
    pub fn new(p: &'p Problem) -> Self {
        Self::from_params(p, TreeParams::uniform_split(p))
    }

    pub fn from_params(p: &'p Problem, params: TreeParams) -> Self {
        GeneralSolver { p, params, effort: Effort::default() }
    }

    /// Starts from the state the message solver reaches after its priming
    /// pass, so traces of all formulations coincide.
    pub fn primed(p: &'p Problem) -> Result<Self> {
        let chain = ChainSolver::start(p, SolverOptions::default())?;
        Ok(Self::from_params(p, chain.tree_params()))
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn pass_order(&mut self, order: &[FactorId]) -> Result<f64> {
        general_pass(self.p, &mut self.params, order, &mut self.effort)
    }
}

impl PassSolver for GeneralSolver<'_> {
    fn method(&self) -> &'static str {
        "trws-general"
    }

    fn pass(&mut self, direction: Direction) -> Result<f64> {
        let mut order = self.p.decomposition.separator_order().to_vec();
        if direction == Direction::Backward {
            order.reverse();
        }
        self.pass_order(&order)
    }

    fn effort(&self) -> Effort {
        self.effort
    }
}
