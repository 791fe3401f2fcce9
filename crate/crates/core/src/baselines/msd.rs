//! Min-sum diffusion over the closed edge set.

use crate::diagnostics::agreement::psi;
use crate::error::Result;
use crate::model::FactorId;
use crate::problem::{min_marginalize, Effort, Problem};
use crate::trws::{Direction, PassSolver};

#[derive(Debug, Clone)]
pub struct MsdSolver<'p> {
    p: &'p Problem,
    theta: Vec<Vec<f64>>,
    sweep: Vec<(FactorId, FactorId)>,
    passes: usize,
    effort: Effort,
}

impl<'p> MsdSolver<'p> {
    /// θ := θ̄; edges of J̄ sorted by the target's position in ≼, then source.
    pub fn new(p: &'p Problem) -> Self {
        let d = &p.decomposition;
        let mut sweep: Vec<(FactorId, FactorId)> = p.j.closed_edges().iter().copied().collect();
        sweep.sort_by_key(|&(a, b)| (d.sigma_rank(b), a));
        MsdSolver { p, theta: p.model.tables(), sweep, passes: 0, effort: Effort::default() }
    }

    pub fn theta(&self) -> &[Vec<f64>] {
        &self.theta
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Half-way equalization of θ_B with the min-marginal of θ_A.
    pub fn diffuse(&mut self, a: FactorId, b: FactorId) {
        let map = self.p.proj(a, b);
        let mm = min_marginalize(&self.theta[a], map, self.p.len(b));
        let delta: Vec<f64> = mm.iter().zip(&self.theta[b]).map(|(m, t)| 0.5 * (m - t)).collect();
        for (t, d) in self.theta[b].iter_mut().zip(&delta) {
            *t += d;
        }
        for (t, &i) in self.theta[a].iter_mut().zip(map) {
            *t -= delta[i];
        }
        self.effort.meff += self.theta[a].len() as u64;
        self.effort.ops += 1;
    }

    /// One sweep; returns Ψ(θ).
    pub fn sweep(&mut self, direction: Direction) -> f64 {
        let n = self.sweep.len();
        for k in 0..n {
            let i = if direction == Direction::Forward { k } else { n - 1 - k };
            let (a, b) = self.sweep[i];
            self.diffuse(a, b);
        }
        self.passes += 1;
        psi(&self.theta)
    }
}

impl PassSolver for MsdSolver<'_> {
    fn method(&self) -> &'static str {
        "msd"
    }

    fn pass(&mut self, direction: Direction) -> Result<f64> {
        Ok(self.sweep(direction))
    }

    fn effort(&self) -> Effort {
        self.effort
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::oracle::brute_force_map;
    use crate::jstructure::close_j;
    use crate::model::Model;

    #[test]
    fn zero_model_is_fixed() {
        let m = Model::new(vec![2, 2], vec![(vec![0, 1], vec![0.0; 4])]).unwrap();
        let j = close_j(&m, &[]).unwrap();
        let p = Problem::with_identity_order(&m, &j).unwrap();
        let mut s = MsdSolver::new(&p);
        assert_eq!(s.sweep(Direction::Forward), 0.0);
        assert!(s.theta().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn psi_rises_and_stays_below_map() {
        let m = Model::new(
            vec![2, 3, 2],
            vec![
                (vec![0, 1], vec![0.3, 2.0, 1.0, 3.0, 0.5, 0.0]),
                (vec![1, 2], vec![1.0, 0.2, 2.0, 0.0, 0.7, 4.0]),
                (vec![0, 2], vec![0.0, 1.5, 1.5, 0.0]),
            ],
        )
        .unwrap();
        let j = close_j(&m, &[]).unwrap();
        let p = Problem::with_identity_order(&m, &j).unwrap();
        let (_, map) = brute_force_map(&p.model).unwrap();
        let mut s = MsdSolver::new(&p);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..200 {
            let v = s.sweep(Direction::Forward);
            assert!(v >= prev - 1e-9 && v <= map + 1e-9);
            prev = v;
        }
        let x = vec![1, 0, 1];
        let e: f64 = (0..p.model.factor_count()).map(|f| s.theta()[f][p.model.index_of(f, &x)]).sum();
        assert!((e - p.model.energy(&x).unwrap()).abs() < 1e-9);
    }
}
