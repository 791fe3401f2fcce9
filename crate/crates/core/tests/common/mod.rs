#![allow(dead_code)]

use trws_core::io::generators::{
    gen_random, gen_submodular_grid, gen_three_factor_chain, gen_tree, Instance, RandomConfig,
};
use trws_core::Problem;

/// Mixed-arity models up to 12 nodes and 4 labels.
pub fn wide_random(seed: u64) -> Instance {
    let cfg = RandomConfig {
        max_nodes: 12,
        max_labels: 4,
        max_arity: 4,
        max_factors: 12,
        nested_prob: 0.5,
        max_states: 200_000,
    };
    gen_random(&cfg, seed).unwrap()
}

/// Small enough for exhaustive enumeration of every tree.
pub fn desk(seed: u64) -> Instance {
    gen_random(&RandomConfig::default(), seed).unwrap()
}

/// Models in which some outer factor has a pair separator above singletons.
pub fn nested(seed: u64) -> Instance {
    if seed.is_multiple_of(5) {
        return gen_three_factor_chain(seed).unwrap();
    }
    let cfg =
        RandomConfig { max_nodes: 7, max_labels: 3, max_arity: 4, max_factors: 7, nested_prob: 1.0, max_states: 5_000 };
    let mut s = seed;
    loop {
        let inst = gen_random(&cfg, s).unwrap();
        let p = inst.problem().unwrap();
        if has_nested_window(&p) {
            return inst;
        }
        s += 1_000_003;
    }
}

pub fn has_nested_window(p: &Problem) -> bool {
    p.decomposition.message_edges().iter().any(|&(a, b)| {
        p.decomposition.local_separators(a).iter().any(|&c| {
            let (sb, sc) = (p.model.scope(b), p.model.scope(c));
            sb.len() < sc.len() && sb.iter().all(|v| sc.contains(v))
        })
    })
}

pub fn tree(seed: u64) -> Instance {
    gen_tree(seed, 8, 3).unwrap()
}

pub fn grid(seed: u64) -> Instance {
    let w = 2 + (seed % 3) as usize;
    let h = 2 + ((seed / 3) % 3) as usize;
    gen_submodular_grid(seed, w, h).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
