//! Message-passing TRW-S over monotonic chains: messages m_AB on
//! J' = {(A,B) : A outer, B ∈ S_A} plus a cache of separator tables θ_B.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{is_subset, FactorId, MessageVector};
use crate::problem::{min_marginalize, Effort, Problem};
use crate::trws::tree::{lower_bound, TreeParams};
use crate::trws::{Direction, PassSolver, SolverOptions};

/// How an individual message was refreshed during a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Direct,
    ReuseAfter,
    ReuseBefore,
    Preempted,
}

#[derive(Debug, Clone)]
pub struct ChainSolver<'p> {
    p: &'p Problem,
    opts: SolverOptions,
    edges: Vec<(FactorId, FactorId)>,
    edge_index: HashMap<(FactorId, FactorId), usize>,
    /// Edges into each separator.
    incoming: Vec<Vec<usize>>,
    /// Position of each edge's target inside S_A.
    slot: Vec<usize>,
    messages: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    preempted: Vec<bool>,
    initialized: bool,
    primed: bool,
    effort: Effort,
    last_pass_ops: u64,
    log: Option<Vec<(FactorId, FactorId, UpdateKind)>>,
}

impl<'p> ChainSolver<'p> {
    /// Allocates the solver without initializing it; call [`Self::initialize`].
    pub fn new(p: &'p Problem, opts: SolverOptions) -> Self {
        let d = &p.decomposition;
        let edges = d.message_edges().to_vec();
        let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut incoming = vec![Vec::new(); p.model.factor_count()];
        let mut slot = Vec::with_capacity(edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            incoming[b].push(i);
            slot.push(d.local_separators(a).iter().position(|&c| c == b).expect("edge outside S_A"));
        }
        ChainSolver {
            p,
            opts,
            messages: edges.iter().map(|&(_, b)| vec![0.0; p.len(b)]).collect(),
            preempted: vec![false; edges.len()],
            edges,
            edge_index,
            incoming,
            slot,
            theta: vec![Vec::new(); p.model.factor_count()],
            initialized: false,
            primed: false,
            effort: Effort::default(),
            last_pass_ops: 0,
            log: None,
        }
    }

    /// m ≡ 0 and θ_B = θ̄_B.
    pub fn initialize(&mut self) {
        for m in &mut self.messages {
            m.iter_mut().for_each(|v| *v = 0.0);
        }
        for b in self.p.j.separators() {
            self.theta[b] = self.p.model.table(b).to_vec();
        }
        self.preempted.iter_mut().for_each(|f| *f = false);
        self.initialized = true;
        self.primed = false;
    }

    /// Initialized and primed by one unrecorded backward pass, after which
    /// every edge (A, sep⁻A) holds a valid message.
    pub fn start(p: &'p Problem, opts: SolverOptions) -> Result<Self> {
        let mut s = Self::new(p, opts);
        s.initialize();
        s.prime()?;
        Ok(s)
    }

    pub fn prime(&mut self) -> Result<()> {
        self.run_pass(Direction::Backward, false)?;
        self.primed = true;
        Ok(())
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    pub fn problem(&self) -> &'p Problem {
        self.p
    }

    /// One pass over the separators; returns Φ afterwards.
    pub fn pass(&mut self, direction: Direction) -> Result<f64> {
        let reuse = self.primed;
        self.run_pass(direction, reuse)?;
        self.primed = true;
        Ok(self.bound())
    }

    /// Records every message update of subsequent passes.
    pub fn record_updates(&mut self, on: bool) {
        self.log = on.then(Vec::new);
    }

    pub fn take_log(&mut self) -> Vec<(FactorId, FactorId, UpdateKind)> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn run_pass(&mut self, direction: Direction, reuse: bool) -> Result<()> {
        if !self.initialized {
            return Err(Error::StateNotInitialized);
        }
        let p = self.p;
        let d = &p.decomposition;
        let mut order = d.separator_order().to_vec();
        if direction == Direction::Backward {
            order.reverse();
        }
        let ops_before = self.effort.ops;
        for &b in &order {
            let mut theta_b = p.model.table(b).to_vec();
            for k in 0..self.incoming[b].len() {
                let e = self.incoming[b][k];
                let a = self.edges[e].0;
                let entry = match direction {
                    Direction::Forward => d.sep_minus(a),
                    Direction::Backward => d.sep_plus(a),
                };
                if entry != Some(b) {
                    let kind = if self.preempted[e] {
                        self.preempted[e] = false;
                        UpdateKind::Preempted
                    } else {
                        self.update(e, direction, reuse)?
                    };
                    if let Some(log) = &mut self.log {
                        log.push((a, b, kind));
                    }
                    if self.opts.normalize {
                        let gamma = self.messages[e].iter().copied().fold(f64::INFINITY, f64::min);
                        self.messages[e].iter_mut().for_each(|v| *v -= gamma);
                    }
                }
                for (t, m) in theta_b.iter_mut().zip(&self.messages[e]) {
                    *t += m;
                }
            }
            self.theta[b] = theta_b;
        }
        self.last_pass_ops = self.effort.ops - ops_before;
        Ok(())
    }

    fn neighbour(&self, e: usize, direction: Direction, ahead: bool) -> Option<FactorId> {
        let (a, _) = self.edges[e];
        let window = self.p.decomposition.local_separators(a);
        let i = self.slot[e];
        let forward = (direction == Direction::Forward) == ahead;
        if forward {
            window.get(i + 1).copied()
        } else {
            i.checked_sub(1).map(|j| window[j])
        }
    }

    fn strictly_inside(&self, b: FactorId, outer: FactorId) -> bool {
        let (sb, so) = (self.p.model.scope(b), self.p.model.scope(outer));
        sb.len() < so.len() && is_subset(sb, so)
    }

    fn update(&mut self, e: usize, direction: Direction, reuse: bool) -> Result<UpdateKind> {
        let (a, b) = self.edges[e];
        if reuse && self.opts.reuse.after() {
            if let Some(prev) = self.neighbour(e, direction, false).filter(|&q| self.strictly_inside(b, q)) {
                let inc = self.reuse_after(a, prev, b)?;
                for (m, v) in self.messages[e].iter_mut().zip(inc) {
                    *m += v;
                }
                return Ok(UpdateKind::ReuseAfter);
            }
        }
        if reuse && self.opts.reuse.before() {
            if let Some(next) = self.neighbour(e, direction, true).filter(|&q| self.strictly_inside(b, q)) {
                self.reuse_before(a, next, b, direction)?;
                return Ok(UpdateKind::ReuseBefore);
            }
        }
        self.messages[e] = self.message_update(a, b);
        self.effort.meff += self.p.len(a) as u64;
        self.effort.ops += 1;
        Ok(UpdateKind::Direct)
    }

    /// The full update of m_AB from the current state (not counted as effort).
    pub fn message_update(&self, a: FactorId, b: FactorId) -> Vec<f64> {
        let p = self.p;
        let rho_a = p.rho_factor(a);
        let mut row = p.model.table(a).to_vec();
        for &c in p.decomposition.local_separators(a) {
            if c == b {
                continue;
            }
            let m = &self.messages[self.edge_index[&(a, c)]];
            for (r, &i) in row.iter_mut().zip(p.proj(a, c)) {
                *r -= m[i];
            }
        }
        for &c in p.j.locals(a) {
            if c == a || p.j.in_locals(b, c) {
                continue;
            }
            let w = rho_a / p.rho_factor(c);
            let th = &self.theta[c];
            for (r, &i) in row.iter_mut().zip(p.proj(a, c)) {
                *r += w * th[i];
            }
        }
        min_marginalize(&row, p.proj(a, b), p.len(b))
    }

    /// Σ_{C ∈ F_P − F_B} (ρ_A/ρ_C) θ_C over the states of P.
    fn nested_sum(&self, a: FactorId, pf: FactorId, b: FactorId) -> Vec<f64> {
        let p = self.p;
        let rho_a = p.rho_factor(a);
        let w = rho_a / p.rho_factor(pf);
        let mut row: Vec<f64> = self.theta[pf].iter().map(|v| w * v).collect();
        for &c in p.j.locals(pf) {
            if c == pf || p.j.in_locals(b, c) {
                continue;
            }
            let w = rho_a / p.rho_factor(c);
            let th = &self.theta[c];
            for (r, &i) in row.iter_mut().zip(p.proj(pf, c)) {
                *r += w * th[i];
            }
        }
        row
    }

    /// Increment for m_AB through a valid message A → P with B ⊂ P.
    pub fn reuse_after(&mut self, a: FactorId, pf: FactorId, b: FactorId) -> Result<Vec<f64>> {
        if self.opts.check_validity && !self.is_valid(a, pf, 1e-9) {
            return Err(Error::StaleMessage { from: a, via: pf, to: b });
        }
        let row = self.nested_sum(a, pf, b);
        self.effort.meff += row.len() as u64;
        self.effort.ops += 1;
        Ok(min_marginalize(&row, self.p.proj(pf, b), self.p.len(b)))
    }

    /// Updates m_AB by preemptively computing m_AP, where P immediately
    /// follows B in S_A along `direction`. The later update of m_AP is
    /// skipped.
    pub fn reuse_before(&mut self, a: FactorId, pf: FactorId, b: FactorId, direction: Direction) -> Result<()> {
        let p = self.p;
        let (Some(&e), Some(&ep)) = (self.edge_index.get(&(a, b)), self.edge_index.get(&(a, pf))) else {
            return Err(Error::InvalidMessageEdge { from: a, to: b });
        };
        if self.neighbour(e, direction, true) != Some(pf) || !self.strictly_inside(b, pf) {
            return Err(Error::ReuseOrderViolation { from: a, to: pf });
        }
        let fresh = self.message_update(a, pf);
        let mut row = self.nested_sum(a, pf, b);
        for ((r, f), o) in row.iter_mut().zip(&fresh).zip(&self.messages[ep]) {
            *r += f - o;
        }
        let map = p.proj(pf, b);
        let delta = min_marginalize(&row, map, p.len(b));
        for (m, d) in self.messages[e].iter_mut().zip(&delta) {
            *m += d;
        }
        self.messages[ep] = fresh.iter().zip(map).map(|(f, &i)| f - delta[i]).collect();
        self.preempted[ep] = true;
        self.effort.meff += (p.len(a) + p.len(pf)) as u64;
        self.effort.ops += 2;
        Ok(())
    }

    /// ρ_A ν_A over the states of an outer factor A.
    fn scaled_nu(&self, a: FactorId) -> Vec<f64> {
        let p = self.p;
        let rho_a = p.rho_factor(a);
        let mut row = self.outer_table(a);
        for &c in p.j.locals(a) {
            if c == a {
                continue;
            }
            let w = rho_a / p.rho_factor(c);
            let th = &self.theta[c];
            for (r, &i) in row.iter_mut().zip(p.proj(a, c)) {
                *r += w * th[i];
            }
        }
        row
    }

    /// Whether A → C is valid in A's chain, up to an additive constant.
    pub fn is_valid(&self, a: FactorId, c: FactorId, tol: f64) -> bool {
        let p = self.p;
        let mm = min_marginalize(&self.scaled_nu(a), p.proj(a, c), p.len(c));
        let rho_a = p.rho_factor(a);
        let mut nu_c: Vec<f64> = self.theta[c].iter().map(|v| rho_a / p.rho_factor(c) * v).collect();
        for &d in p.j.locals(c) {
            if d == c {
                continue;
            }
            let w = rho_a / p.rho_factor(d);
            for (r, &i) in nu_c.iter_mut().zip(p.proj(c, d)) {
                *r += w * self.theta[d][i];
            }
        }
        // Normalization shifts messages by constants, so compare up to one.
        let scale = mm.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let (lo, hi) = mm
            .iter()
            .zip(&nu_c)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, y)| (lo.min(x - y), hi.max(x - y)));
        hi - lo <= tol * scale
    }

    /// θ_A = θ̄_A − Σ_{(A,C)∈J'} m_AC for an outer factor A.
    fn outer_table(&self, a: FactorId) -> Vec<f64> {
        let p = self.p;
        let mut row = p.model.table(a).to_vec();
        for &c in p.decomposition.local_separators(a) {
            let m = &self.messages[self.edge_index[&(a, c)]];
            for (r, &i) in row.iter_mut().zip(p.proj(a, c)) {
                *r -= m[i];
            }
        }
        row
    }

    /// The cumulative reparameterized vector θ.
    pub fn cumulative(&self) -> Vec<Vec<f64>> {
        (0..self.p.model.factor_count())
            .map(|f| if self.p.j.is_outer(f) { self.outer_table(f) } else { self.theta[f].clone() })
            .collect()
    }

    /// Per-tree parameters θ^T_C = θ_C/ρ_C.
    pub fn tree_params(&self) -> TreeParams {
        TreeParams::from_cumulative(self.p, &self.cumulative())
    }

    /// Φ of the current state; work goes to the diagnostic counter.
    pub fn bound(&mut self) -> f64 {
        let params = self.tree_params();
        lower_bound(self.p, &params, &mut self.effort)
    }

    pub fn messages(&self) -> Vec<MessageVector> {
        self.edges
            .iter()
            .zip(&self.messages)
            .map(|(&(from, to), v)| MessageVector { from, to, values: v.clone() })
            .collect()
    }

    pub fn message(&self, a: FactorId, b: FactorId) -> Option<&[f64]> {
        self.edge_index.get(&(a, b)).map(|&e| self.messages[e].as_slice())
    }

    pub fn separator_table(&self, b: FactorId) -> &[f64] {
        &self.theta[b]
    }

    pub fn last_pass_ops(&self) -> u64 {
        self.last_pass_ops
    }

    pub fn effort(&self) -> Effort {
        self.effort
    }
}

impl PassSolver for ChainSolver<'_> {
    fn method(&self) -> &'static str {
        "trws"
    }

    fn pass(&mut self, direction: Direction) -> Result<f64> {
        ChainSolver::pass(self, direction)
    }

    fn effort(&self) -> Effort {
        self.effort
    }
}
