use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::VarId;
use crate::plan::hypergraph::Hypergraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Atom whose relation this node holds; `None` for the artificial root.
    pub atom: Option<usize>,
    /// Sorted variable set.
    pub vars: Vec<VarId>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A rooted join tree. Binarization may give several nodes the same atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl JoinTree {
    /// Roots an undirected tree over the atoms of `h`.
    pub fn from_edges(h: &Hypergraph, edges: &[(usize, usize)], root: usize) -> JoinTree {
        let n = h.edges.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        let mut nodes: Vec<TreeNode> = (0..n)
            .map(|i| TreeNode {
                atom: Some(i),
                vars: h.edges[i].clone(),
                parent: None,
                children: Vec::new(),
            })
            .collect();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    nodes[v].parent = Some(u);
                    nodes[u].children.push(v);
                    queue.push_back(v);
                }
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "edge list is not a spanning tree");
        JoinTree { nodes, root }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Undirected edges (child, parent).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (i, p)))
            .collect()
    }

    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            queue.extend(self.nodes[u].children.iter().copied());
        }
        order
    }

    /// Children before parents.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = self.bfs_order();
        order.reverse();
        order
    }

    /// Variables shared with the parent (empty at the root).
    pub fn shared_with_parent(&self, node: usize) -> Vec<VarId> {
        match self.nodes[node].parent {
            None => Vec::new(),
            Some(p) => {
                let pv = &self.nodes[p].vars;
                self.nodes[node]
                    .vars
                    .iter()
                    .copied()
                    .filter(|v| pv.binary_search(v).is_ok())
                    .collect()
            }
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        fn go(t: &JoinTree, u: usize) -> usize {
            1 + t.nodes[u].children.iter().map(|&c| go(t, c)).max().unwrap_or(0)
        }
        go(self, self.root)
    }

    /// For every variable, the nodes containing it form a connected subtree.
    pub fn satisfies_running_intersection(&self) -> bool {
        let all: std::collections::BTreeSet<VarId> =
            self.nodes.iter().flat_map(|n| n.vars.iter().copied()).collect();
        all.into_iter().all(|v| {
            // connected iff exactly one containing node has a parent without v
            let tops = self
                .nodes
                .iter()
                .filter(|n| n.vars.binary_search(&v).is_ok())
                .filter(|n| match n.parent {
                    None => true,
                    Some(p) => self.nodes[p].vars.binary_search(&v).is_err(),
                })
                .count();
            tops == 1
        })
    }

    /// The same undirected tree rooted at `root`.
    pub fn rerooted(&self, root: usize) -> JoinTree {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (c, p) in self.edges() {
            adj[c].push(p);
            adj[p].push(c);
        }
        let mut nodes: Vec<TreeNode> = self
            .nodes
            .iter()
            .map(|n| TreeNode {
                atom: n.atom,
                vars: n.vars.clone(),
                parent: None,
                children: Vec::new(),
            })
            .collect();
        let mut seen = vec![false; nodes.len()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            // keep the previous child order where possible
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !seen[v]).collect();
            next.sort_unstable();
            for v in next {
                seen[v] = true;
                nodes[v].parent = Some(u);
                nodes[u].children.push(v);
                queue.push_back(v);
            }
        }
        JoinTree { nodes, root }
    }

    /// Index of the node holding `atom` (the first one, for binarized trees).
    pub fn node_of_atom(&self, atom: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.atom == Some(atom))
    }
}

/// GYO ear removal. Returns tree edges, or the edges left over when stuck.
pub(crate) fn gyo(h: &Hypergraph) -> std::result::Result<Vec<(usize, usize)>, Vec<usize>> {
    let m = h.edges.len();
    let mut alive = vec![true; m];
    let mut remaining = m;
    let mut tree = Vec::with_capacity(m.saturating_sub(1));
    while remaining > 1 {
        let mut removed = false;
        'ears: for e in 0..m {
            if !alive[e] {
                continue;
            }
            // vertices of e that occur in another live edge
            let shared: Vec<VarId> = h.edges[e]
                .iter()
                .copied()
                .filter(|&v| (0..m).any(|g| g != e && alive[g] && h.contains(g, v)))
                .collect();
            let mut best: Option<(usize, usize)> = None;
            for f in 0..m {
                if f == e || !alive[f] {
                    continue;
                }
                if shared.iter().all(|&v| h.contains(f, v)) {
                    let overlap = h.edges[e].iter().filter(|&&v| h.contains(f, v)).count();
                    if best.is_none_or(|(_, o)| overlap > o) {
                        best = Some((f, overlap));
                    }
                }
            }
            if let Some((f, _)) = best {
                alive[e] = false;
                remaining -= 1;
                tree.push((e, f));
                removed = true;
                break 'ears;
            }
        }
        if !removed {
            return Err((0..m).filter(|&e| alive[e]).collect());
        }
    }
    Ok(tree)
}

pub fn is_acyclic(h: &Hypergraph) -> bool {
    gyo(h).is_ok()
}

/// A join tree rooted at the first atom.
pub fn join_tree(h: &Hypergraph) -> Result<JoinTree> {
    join_tree_rooted(h, &[])
}

/// A join tree rooted at the atom with the most variables of `uw`
/// (first atom on ties).
pub fn join_tree_rooted(h: &Hypergraph, uw: &[VarId]) -> Result<JoinTree> {
    if h.edges.is_empty() {
        return Err(Error::QuerySpec("a query needs at least one atom".into()));
    }
    let edges = gyo(h).map_err(|residue| {
        let parts: Vec<String> = residue
            .iter()
            .map(|&e| format!("{{{}}}", h.names(&h.edges[e])))
            .collect();
        Error::Cyclic(format!("GYO reduction stops at {}", parts.join(" ")))
    })?;
    let mut root = 0;
    let mut best = 0;
    for (i, e) in h.edges.iter().enumerate() {
        let k = uw.iter().filter(|v| e.binary_search(v).is_ok()).count();
        if k > best {
            best = k;
            root = i;
        }
    }
    Ok(JoinTree::from_edges(h, &edges, root))
}

/// New root with no variables above the old root.
pub fn add_artificial_root(t: &JoinTree) -> JoinTree {
    let mut nodes = t.nodes.clone();
    let new_root = nodes.len();
    nodes[t.root].parent = Some(new_root);
    nodes.push(TreeNode {
        atom: None,
        vars: Vec::new(),
        parent: None,
        children: vec![t.root],
    });
    JoinTree {
        nodes,
        root: new_root,
    }
}

/// Every node gets at most two children by chaining copies of nodes with
/// more: `N(c1, N1)`, `N1(c2, N2)`, ..., `Nk(c_{k+1}, c_{k+2})`.
pub fn binarize(t: &JoinTree) -> JoinTree {
    let mut nodes = t.nodes.clone();
    for u in 0..t.nodes.len() {
        let children = t.nodes[u].children.clone();
        if children.len() <= 2 {
            continue;
        }
        let mut holder = u;
        let mut rest = &children[..];
        nodes[u].children.clear();
        while rest.len() > 2 {
            let copy = nodes.len();
            nodes.push(TreeNode {
                atom: nodes[u].atom,
                vars: nodes[u].vars.clone(),
                parent: Some(holder),
                children: Vec::new(),
            });
            nodes[holder].children = vec![rest[0], copy];
            nodes[rest[0]].parent = Some(holder);
            holder = copy;
            rest = &rest[1..];
        }
        nodes[holder].children = rest.to_vec();
        for &c in rest {
            nodes[c].parent = Some(holder);
        }
    }
    JoinTree {
        nodes,
        root: t.root,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::JoinQuery;
    use proptest::prelude::*;

    fn hg(q: &str) -> Hypergraph {
        Hypergraph::of_query(&JoinQuery::parse(q).unwrap())
    }

    #[test]
    fn triangle_is_cyclic() {
        let err = join_tree(&hg("R(x,y), S(y,z), T(z,x)")).unwrap_err();
        assert!(matches!(err, Error::Cyclic(_)));
    }

    #[test]
    fn path_gives_chain() {
        let t = join_tree(&hg("R(x1,x2), S(x2,x3), T(x3,x4)")).unwrap();
        assert!(t.satisfies_running_intersection());
        assert_eq!(t.height(), 3);
    }

    #[test]
    fn figure_one_tree() {
        let h = hg("R(x1,x2), S(x1,x3), T(x2,x4), U(x4,x5)");
        let t = join_tree_rooted(&h, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(t.root, 0);
        assert_eq!(t.nodes[0].children, vec![1, 2]);
        assert_eq!(t.nodes[2].children, vec![3]);
    }

    #[test]
    fn artificial_root_wraps() {
        let t = join_tree(&hg("R(x,y)")).unwrap();
        let t1 = add_artificial_root(&t);
        assert_eq!(t1.len(), 2);
        assert!(t1.nodes[t1.root].vars.is_empty());
        let t2 = add_artificial_root(&t1);
        assert_eq!(t2.len(), 3);
    }

    #[test]
    fn binarize_four_children() {
        let h = hg("R(x,a,b,c,d), A(a), B(b), C(c), D(d)");
        let t = join_tree(&h).unwrap();
        assert_eq!(t.nodes[t.root].children.len(), 4);
        let b = binarize(&t);
        assert_eq!(b.len(), 7);
        assert!(b.nodes.iter().all(|n| n.children.len() <= 2));
        assert_eq!(b.nodes.iter().filter(|n| n.atom == Some(0)).count(), 3);
        assert!(b.satisfies_running_intersection());
    }

    #[test]
    fn binarize_keeps_two_children() {
        let t = join_tree(&hg("R(x,y), S(x), T(y)")).unwrap();
        assert_eq!(binarize(&t), t);
    }

    /// Random trees over up to 8 atoms: atom i > 0 shares one variable with a
    /// random earlier atom.
    fn random_tree_query(parents: &[usize]) -> Hypergraph {
        let mut atoms = vec!["A0(v0)".to_string()];
        for (i, &p) in parents.iter().enumerate() {
            let i = i + 1;
            atoms.push(format!("A{i}(v{},v{i})", p % i));
        }
        hg(&atoms.join(","))
    }

    proptest! {
        #[test]
        fn binarized_height_at_most_atom_count(parents in prop::collection::vec(0usize..8, 0..7)) {
            let h = random_tree_query(&parents);
            let t = join_tree(&h).unwrap();
            prop_assert!(t.satisfies_running_intersection());
            for root in 0..t.len() {
                let b = binarize(&t.rerooted(root));
                prop_assert!(b.height() <= h.edges.len());
                prop_assert!(b.len() <= 2 * t.len());
                prop_assert!(b.satisfies_running_intersection());
                prop_assert!(b.nodes.iter().all(|n| n.children.len() <= 2));
            }
        }
    }
}
