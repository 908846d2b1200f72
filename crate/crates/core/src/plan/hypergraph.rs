use std::collections::BTreeSet;

use crate::data::JoinQuery;
use crate::instance::{Instance, VarId};

/// One hyperedge per atom over dense vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub vertices: Vec<String>,
    /// Sorted, duplicate-free vertex lists; `edges[i]` belongs to atom `i`.
    pub edges: Vec<Vec<VarId>>,
}

impl Hypergraph {
    pub fn of_query(q: &JoinQuery) -> Self {
        let vertices = q.vars();
        let edges = q
            .atoms
            .iter()
            .map(|a| {
                let set: BTreeSet<VarId> = a
                    .vars
                    .iter()
                    .map(|v| vertices.iter().position(|x| x == v).unwrap())
                    .collect();
                set.into_iter().collect()
            })
            .collect();
        Hypergraph { vertices, edges }
    }

    pub fn of_instance(inst: &Instance) -> Self {
        let edges = inst
            .atoms()
            .iter()
            .map(|a| {
                let mut e = a.vars.clone();
                e.sort_unstable();
                e
            })
            .collect();
        Hypergraph {
            vertices: inst.vars().to_vec(),
            edges,
        }
    }

    pub fn vertex(&self, name: &str) -> Option<VarId> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn contains(&self, edge: usize, v: VarId) -> bool {
        self.edges[edge].binary_search(&v).is_ok()
    }

    /// Whether some edge contains both `a` and `b`.
    pub fn adjacent(&self, a: VarId, b: VarId) -> bool {
        self.edges
            .iter()
            .any(|e| e.binary_search(&a).is_ok() && e.binary_search(&b).is_ok())
    }

    /// Number of edges not strictly contained in another edge (equal edges
    /// count once).
    pub fn maximal_edge_count(&self) -> usize {
        let sets: Vec<BTreeSet<VarId>> = self
            .edges
            .iter()
            .map(|e| e.iter().copied().collect())
            .collect();
        let mut distinct: Vec<&BTreeSet<VarId>> = Vec::new();
        for s in &sets {
            if !distinct.contains(&s) {
                distinct.push(s);
            }
        }
        distinct
            .iter()
            .filter(|s| !distinct.iter().any(|t| t != *s && s.is_subset(t)))
            .count()
    }

    pub fn names(&self, vs: &[VarId]) -> String {
        vs.iter()
            .map(|&v| self.vertices[v].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn build_hypergraph(q: &JoinQuery) -> Hypergraph {
    Hypergraph::of_query(q)
}
