//! Query planning: hypergraphs, join trees and the partial-SUM dichotomy.

mod adjacency;
mod classify;
mod hypergraph;
mod tree;

pub use adjacency::{adjacent_uw_tree, AdjacentTree};
pub use classify::{
    classify_sum_tractability, independent_triple, long_chordless_path, TractabilityVerdict,
    Verdict,
};
pub use hypergraph::{build_hypergraph, Hypergraph};
pub use tree::{add_artificial_root, binarize, is_acyclic, join_tree, join_tree_rooted, JoinTree, TreeNode};

use crate::data::JoinQuery;
use crate::error::{Error, Result};
use crate::instance::VarId;

/// Resolves weighted variable names against a hypergraph's vertices.
pub fn vertex_ids(h: &Hypergraph, names: &[String]) -> Result<Vec<VarId>> {
    names
        .iter()
        .map(|n| h.vertex(n).ok_or_else(|| Error::WeightedVarNotInQuery(n.clone())))
        .collect()
}

/// [`classify_sum_tractability`] on a query and weighted variable names.
pub fn classify_query(q: &JoinQuery, uw: &[String]) -> Result<TractabilityVerdict> {
    let h = build_hypergraph(q);
    Ok(classify_sum_tractability(&h, &vertex_ids(&h, uw)?))
}
