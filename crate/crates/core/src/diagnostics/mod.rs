//! Exact oracles, agreement checks, fixpoint mappings and primal rounding.

pub mod agreement;
pub mod mapping;
pub mod oracle;
pub mod primal;

pub use agreement::{check_ewta, check_j_consistency_enhanced, check_j_consistency_relaxed, psi, Relation};
pub use mapping::{map_jconsistent_to_wta, map_wta_to_jconsistent};
pub use oracle::{brute_force_map, brute_force_min_marginals};
pub use primal::extract_primal;
