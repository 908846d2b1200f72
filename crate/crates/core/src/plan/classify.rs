use std::fmt;

use crate::instance::VarId;
use crate::plan::hypergraph::Hypergraph;
use crate::plan::tree::gyo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Verdict {
    TractableOneNode,
    TractableTwoAdjacent,
    IntractableCyclic,
    IntractableIndepSet3,
    IntractableLongChordlessPath,
}

impl Verdict {
    pub fn is_tractable(self) -> bool {
        matches!(self, Verdict::TractableOneNode | Verdict::TractableTwoAdjacent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::TractableOneNode => "tractable-one-node",
            Verdict::TractableTwoAdjacent => "tractable-two-adjacent",
            Verdict::IntractableCyclic => "intractable-cyclic",
            Verdict::IntractableIndepSet3 => "intractable-independent-set-3",
            Verdict::IntractableLongChordlessPath => "intractable-long-chordless-path",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TractabilityVerdict {
    pub verdict: Verdict,
    /// Present exactly for the intractable verdicts.
    pub witness: Option<String>,
}

impl fmt::Display for TractabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verdict)?;
        if let Some(w) = &self.witness {
            write!(f, ": {w}")?;
        }
        Ok(())
    }
}

/// Three weighted variables, no two of which share an atom.
pub fn independent_triple(h: &Hypergraph, uw: &[VarId]) -> Option<[VarId; 3]> {
    let k = uw.len();
    for i in 0..k {
        for j in i + 1..k {
            if h.adjacent(uw[i], uw[j]) {
                continue;
            }
            for l in j + 1..k {
                if !h.adjacent(uw[i], uw[l]) && !h.adjacent(uw[j], uw[l]) {
                    return Some([uw[i], uw[j], uw[l]]);
                }
            }
        }
    }
    None
}

/// A chordless path with at least four vertices joining two weighted
/// variables.
pub fn long_chordless_path(h: &Hypergraph, uw: &[VarId]) -> Option<Vec<VarId>> {
    fn extend(h: &Hypergraph, uw: &[VarId], path: &mut Vec<VarId>) -> bool {
        let last = *path.last().unwrap();
        if path.len() >= 4 && uw.contains(&last) {
            return true;
        }
        for w in 0..h.vertices.len() {
            if path.contains(&w) || !h.adjacent(last, w) {
                continue;
            }
            // w may only touch the last vertex of the path
            if path[..path.len() - 1].iter().any(|&p| h.adjacent(p, w)) {
                continue;
            }
            path.push(w);
            if extend(h, uw, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    for &u in uw {
        let mut path = vec![u];
        if extend(h, uw, &mut path) {
            return Some(path);
        }
    }
    None
}

pub fn classify_sum_tractability(h: &Hypergraph, uw: &[VarId]) -> TractabilityVerdict {
    if let Err(residue) = gyo(h) {
        let parts: Vec<String> = residue
            .iter()
            .map(|&e| format!("{{{}}}", h.names(&h.edges[e])))
            .collect();
        return TractabilityVerdict {
            verdict: Verdict::IntractableCyclic,
            witness: Some(format!("GYO residue {}", parts.join(" "))),
        };
    }
    if let Some(t) = independent_triple(h, uw) {
        return TractabilityVerdict {
            verdict: Verdict::IntractableIndepSet3,
            witness: Some(format!("independent {{{}}}", h.names(&t))),
        };
    }
    if let Some(p) = long_chordless_path(h, uw) {
        let names: Vec<&str> = p.iter().map(|&v| h.vertices[v].as_str()).collect();
        return TractabilityVerdict {
            verdict: Verdict::IntractableLongChordlessPath,
            witness: Some(format!("chordless path {}", names.join("-"))),
        };
    }
    let one = h
        .edges
        .iter()
        .any(|e| uw.iter().all(|v| e.binary_search(v).is_ok()));
    TractabilityVerdict {
        verdict: if one {
            Verdict::TractableOneNode
        } else {
            Verdict::TractableTwoAdjacent
        },
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::JoinQuery;

    fn classify(q: &str, uw: &[&str]) -> TractabilityVerdict {
        let h = Hypergraph::of_query(&JoinQuery::parse(q).unwrap());
        let ids: Vec<VarId> = uw.iter().map(|v| h.vertex(v).unwrap()).collect();
        classify_sum_tractability(&h, &ids)
    }

    #[test]
    fn triangle() {
        let v = classify("R(x,y), S(y,z), T(z,x)", &["x"]);
        assert_eq!(v.verdict, Verdict::IntractableCyclic);
        assert!(v.witness.is_some());
    }

    #[test]
    fn three_path_prefix_is_tractable() {
        let v = classify("R1(x1,x2), R2(x2,x3), R3(x3,x4)", &["x1", "x2", "x3"]);
        assert_eq!(v.verdict, Verdict::TractableTwoAdjacent);
        assert_eq!(v.witness, None);
    }

    #[test]
    fn three_path_endpoints() {
        let v = classify("R1(x1,x2), R2(x2,x3), R3(x3,x4)", &["x1", "x4"]);
        assert_eq!(v.verdict, Verdict::IntractableLongChordlessPath);
        assert_eq!(v.witness.as_deref(), Some("chordless path x1-x2-x3-x4"));
    }

    #[test]
    fn product_of_three() {
        let v = classify("R1(x1), R2(x2), R3(x3)", &["x1", "x2", "x3"]);
        assert_eq!(v.verdict, Verdict::IntractableIndepSet3);
    }

    #[test]
    fn one_node() {
        let v = classify("R(x,y), S(y,z)", &["x", "y"]);
        assert_eq!(v.verdict, Verdict::TractableOneNode);
        let v = classify("R(x,y), S(y,z)", &[]);
        assert_eq!(v.verdict, Verdict::TractableOneNode);
    }
}
