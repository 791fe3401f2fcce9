//! Bound-preserving maps between tree-agreement fixpoints of TRW-S and
//! J-consistent points of min-sum diffusion.

use crate::diagnostics::agreement::{check_ewta, check_j_consistency_enhanced, Relation};
use crate::error::{Error, Result};
use crate::problem::{Effort, Problem};
use crate::trws::tree::send_in;
use crate::trws::TreeParams;

/// Reparameterizes every tree by leaf elimination so that separators carry
/// zero and each outer factor carries exact min-marginals of what remains,
/// then returns θ_A = Σ_T ρ^T θ^T_A. Requires tree agreement.
pub fn map_wta_to_jconsistent(p: &Problem, params: &TreeParams) -> Result<(Vec<Vec<f64>>, Vec<Relation>)> {
    let report = check_ewta(p, params)?;
    if !report.holds() {
        return Err(Error::NotAtFixpoint(format!("tree agreement fails on factors {:?}", report.violations)));
    }
    Ok((eliminate_leaves(p, params), report.projections))
}

/// The leaf-elimination reparameterization without the agreement check.
pub fn eliminate_leaves(p: &Problem, params: &TreeParams) -> Vec<Vec<f64>> {
    let d = &p.decomposition;
    let mut theta: Vec<Vec<f64>> = (0..p.model.factor_count()).map(|f| vec![0.0; p.len(f)]).collect();
    let mut scratch = Effort::default();
    for t in 0..d.tree_count() {
        let mut tree = params.tree(t).to_vec();
        let chain = d.chain(t);
        for (i, &leaf) in chain.iter().enumerate() {
            // Inward pass over the remaining chain, toward the leaf.
            for k in (i + 1..chain.len()).rev() {
                let sep = d.sep_plus(chain[k - 1]).expect("chain member without separators");
                send_in(p, &mut tree, chain[k], sep, &mut scratch);
            }
            for &c in p.j.locals(leaf) {
                if c == leaf {
                    continue;
                }
                let map = p.proj(leaf, c);
                let moved = std::mem::replace(&mut tree[c], vec![0.0; p.len(c)]);
                for (x, &j) in tree[leaf].iter_mut().zip(map) {
                    *x += moved[j];
                }
            }
            let w = p.rho(t);
            for (o, v) in theta[leaf].iter_mut().zip(&tree[leaf]) {
                *o += w * v;
            }
        }
    }
    theta
}

/// Moves each separator into its ≼-smallest covering outer factor and splits
/// outer factors as θ^T_A = θ_A/ρ^T. Requires enhanced J-consistency.
pub fn map_jconsistent_to_wta(p: &Problem, theta: &[Vec<f64>]) -> Result<TreeParams> {
    let report = check_j_consistency_enhanced(&p.model, &p.j, theta);
    if !report.holds() {
        return Err(Error::NotAtFixpoint(format!("J-consistency fails on edges {:?}", report.violations)));
    }
    Ok(split_outer(p, theta))
}

/// The separator-moving split without the consistency check.
pub fn split_outer(p: &Problem, theta: &[Vec<f64>]) -> TreeParams {
    let d = &p.decomposition;
    let mut moved = theta.to_vec();
    for b in p.j.separators() {
        let owner =
            p.j.outer()
                .into_iter()
                .filter(|&a| p.j.has_closed_edge(a, b))
                .min_by_key(|&a| d.sigma_rank(a))
                .expect("separator without an outer factor");
        let table = std::mem::replace(&mut moved[b], vec![0.0; p.len(b)]);
        for (x, &j) in moved[owner].iter_mut().zip(p.proj(owner, b)) {
            *x += table[j];
        }
    }
    let tables = (0..d.tree_count())
        .map(|t| {
            let mut tree = vec![Vec::new(); p.model.factor_count()];
            for &c in d.tree_factors(t) {
                tree[c] =
                    if p.j.is_outer(c) { moved[c].iter().map(|v| v / p.rho(t)).collect() } else { vec![0.0; p.len(c)] };
            }
            tree
        })
        .collect();
    TreeParams::from_tables(tables)
}
