//! Marginalization edge sets and their closure.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{is_subset, FactorId, Model};

/// The edge set J over nested factor pairs, its closure, and the derived
/// outer/separator partition.
#[derive(Debug, Clone, PartialEq)]
pub struct JStructure {
    edges: BTreeSet<(FactorId, FactorId)>,
    closed: BTreeSet<(FactorId, FactorId)>,
    outer: Vec<bool>,
    /// F_A for every factor: closed-edge targets of A plus A itself, sorted.
    locals: Vec<Vec<FactorId>>,
}

/// Closes `edges` under transitivity and nested-target completion.
pub fn close_j(model: &Model, edges: &[(FactorId, FactorId)]) -> Result<JStructure> {
    JStructure::new(model, edges.iter().copied())
}

impl JStructure {
    pub fn new(model: &Model, edges: impl IntoIterator<Item = (FactorId, FactorId)>) -> Result<Self> {
        let n = model.factor_count();
        let mut base = BTreeSet::new();
        for (a, b) in edges {
            if a >= n {
                return Err(Error::InvalidFactor(a));
            }
            if b >= n {
                return Err(Error::InvalidFactor(b));
            }
            let (sa, sb) = (model.scope(a), model.scope(b));
            if sa.len() <= sb.len() || !is_subset(sb, sa) {
                return Err(Error::NotNested { from: a, to: b });
            }
            base.insert((a, b));
        }

        let mut out: Vec<BTreeSet<FactorId>> = vec![BTreeSet::new(); n];
        for &(a, b) in &base {
            out[a].insert(b);
        }
        let mut worklist: Vec<(FactorId, FactorId)> = base.iter().copied().collect();
        let mut closed = base.clone();
        let mut add = |a: FactorId, c: FactorId, out: &mut Vec<BTreeSet<FactorId>>, wl: &mut Vec<_>| {
            if closed.insert((a, c)) {
                out[a].insert(c);
                wl.push((a, c));
            }
        };
        while let Some((a, b)) = worklist.pop() {
            // (A,B),(B,C) -> (A,C)
            let from_b: Vec<FactorId> = out[b].iter().copied().collect();
            for c in from_b {
                add(a, c, &mut out, &mut worklist);
            }
            // (X,A),(A,B) -> (X,B)
            let into_a: Vec<FactorId> = (0..n).filter(|&x| out[x].contains(&a)).collect();
            for x in into_a {
                add(x, b, &mut out, &mut worklist);
            }
            // (A,B),(A,C) with C ⊂ B -> (B,C); and symmetric with B ⊂ C -> (C,B)
            let siblings: Vec<FactorId> = out[a].iter().copied().filter(|&c| c != b).collect();
            for c in siblings {
                let (sb, sc) = (model.scope(b), model.scope(c));
                if sc.len() < sb.len() && is_subset(sc, sb) {
                    add(b, c, &mut out, &mut worklist);
                } else if sb.len() < sc.len() && is_subset(sb, sc) {
                    add(c, b, &mut out, &mut worklist);
                }
            }
        }

        let mut outer = vec![true; n];
        for &(_, b) in &closed {
            outer[b] = false;
        }
        let locals = (0..n)
            .map(|a| {
                let mut l: Vec<FactorId> = out[a].iter().copied().collect();
                l.push(a);
                l.sort_unstable();
                l
            })
            .collect();
        Ok(JStructure { edges: base, closed, outer, locals })
    }

    pub fn factor_count(&self) -> usize {
        self.outer.len()
    }

    /// The edges as given (J).
    pub fn edges(&self) -> &BTreeSet<(FactorId, FactorId)> {
        &self.edges
    }

    /// The closure J̄.
    pub fn closed_edges(&self) -> &BTreeSet<(FactorId, FactorId)> {
        &self.closed
    }

    pub fn has_closed_edge(&self, a: FactorId, b: FactorId) -> bool {
        self.closed.contains(&(a, b))
    }

    pub fn is_outer(&self, f: FactorId) -> bool {
        self.outer[f]
    }

    pub fn outer(&self) -> Vec<FactorId> {
        (0..self.outer.len()).filter(|&f| self.outer[f]).collect()
    }

    pub fn separators(&self) -> Vec<FactorId> {
        (0..self.outer.len()).filter(|&f| !self.outer[f]).collect()
    }

    /// F_A (includes A).
    pub fn locals(&self, a: FactorId) -> &[FactorId] {
        &self.locals[a]
    }

    pub fn in_locals(&self, a: FactorId, b: FactorId) -> bool {
        self.locals[a].binary_search(&b).is_ok()
    }

    /// Outer set computed from the unclosed edges only.
    pub fn outer_from_base(&self) -> Vec<FactorId> {
        let mut outer = vec![true; self.outer.len()];
        for &(_, b) in &self.edges {
            outer[b] = false;
        }
        (0..outer.len()).filter(|&f| outer[f]).collect()
    }
}
