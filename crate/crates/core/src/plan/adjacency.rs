//! Join trees that place the weighted variables on one node or on two
//! adjacent nodes.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::VarId;
use crate::plan::hypergraph::Hypergraph;
use crate::plan::tree::{gyo, JoinTree};

#[derive(Clone, Debug)]
pub struct AdjacentTree {
    /// Rooted at `first`; `second`, when present, is a child of the root.
    pub tree: JoinTree,
    pub first: usize,
    pub second: Option<usize>,
}

fn covers(h: &Hypergraph, atoms: &[usize], uw: &[VarId]) -> bool {
    uw.iter().all(|&v| atoms.iter().any(|&a| h.contains(a, v)))
}

fn tree_path(n: usize, edges: &[(usize, usize)], from: usize, to: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut prev = vec![usize::MAX; n];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![to];
    let mut u = to;
    while u != from {
        u = prev[u];
        path.push(u);
    }
    path.reverse();
    path
}

fn replace_edge(edges: &mut Vec<(usize, usize)>, a: usize, b: usize, new: (usize, usize)) {
    let i = edges
        .iter()
        .position(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        .expect("edge on the tree path");
    edges[i] = new;
}

/// The edge surgery for one covering pair. Returns the rewired tree edges and
/// the two nodes that end up adjacent.
fn rewire(
    h: &Hypergraph,
    base: &[(usize, usize)],
    r0: usize,
    s0: usize,
    uw: &[VarId],
) -> Option<(Vec<(usize, usize)>, usize, usize)> {
    let n = h.edges.len();
    let path = tree_path(n, base, r0, s0);
    let in_r0: Vec<VarId> = uw.iter().copied().filter(|&v| h.contains(r0, v)).collect();
    let in_s0: Vec<VarId> = uw.iter().copied().filter(|&v| h.contains(s0, v)).collect();
    let ri = path
        .iter()
        .rposition(|&a| in_r0.iter().all(|&v| h.contains(a, v)))?;
    let si = path
        .iter()
        .position(|&a| in_s0.iter().all(|&v| h.contains(a, v)))?;
    if si <= ri {
        return None;
    }
    let p = &path[ri..=si];
    let (r, s) = (p[0], p[p.len() - 1]);
    let mut edges = base.to_vec();
    if p.len() == 2 {
        return Some((edges, r, s));
    }
    let interior = &p[1..p.len() - 1];
    let touched: Vec<VarId> = interior
        .iter()
        .flat_map(|&a| h.edges[a].iter().copied())
        .filter(|&v| h.contains(r, v) || h.contains(s, v))
        .collect();
    if touched.iter().all(|&v| h.contains(r, v)) {
        replace_edge(&mut edges, s, p[p.len() - 2], (r, s));
    } else if touched.iter().all(|&v| h.contains(s, v)) {
        replace_edge(&mut edges, r, p[1], (r, s));
    } else {
        let gap = p
            .windows(2)
            .find(|w| !h.edges[w[0]].iter().any(|&v| h.contains(w[1], v)))?;
        replace_edge(&mut edges, gap[0], gap[1], (r, s));
    }
    Some((edges, r, s))
}

pub fn adjacent_uw_tree(h: &Hypergraph, uw: &[VarId]) -> Result<AdjacentTree> {
    let base = gyo(h).map_err(|res| {
        Error::Cyclic(format!("GYO reduction stops at {} edges", res.len()))
    })?;
    let m = h.edges.len();
    // most weighted variables first, so one-node covers win
    let single = (0..m).find(|&a| covers(h, &[a], uw));
    if let Some(a) = single {
        let tree = JoinTree::from_edges(h, &base, a);
        return Ok(AdjacentTree {
            tree,
            first: a,
            second: None,
        });
    }
    for a in 0..m {
        for b in 0..m {
            if a == b || !covers(h, &[a, b], uw) {
                continue;
            }
            let Some((edges, r, s)) = rewire(h, &base, a, b, uw) else {
                continue;
            };
            let tree = JoinTree::from_edges(h, &edges, r);
            if tree.satisfies_running_intersection() && tree.nodes[s].parent == Some(r) {
                return Ok(AdjacentTree {
                    tree,
                    first: r,
                    second: Some(s),
                });
            }
        }
    }
    Err(Error::NotAdjacent(format!(
        "no join tree keeps {{{}}} on two adjacent nodes",
        h.names(uw)
    )))
}
