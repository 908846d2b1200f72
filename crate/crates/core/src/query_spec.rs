//! Query spec documents: TOML, or JSON when the text starts with `{`.
//!
//! ```toml
//! atoms = ["R1(x1,x2)", "R2(x2,x3)"]
//! agg = "sum"
//! weighted_vars = ["x1", "x2", "x3"]
//!
//! [weights.x1]
//! "1" = 10
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::data::{Atom, JoinQuery};
use crate::error::{Error, Result};
use crate::rank::{Aggregate, RankingSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    atoms: Vec<String>,
    agg: String,
    #[serde(default)]
    weighted_vars: Vec<String>,
    #[serde(default)]
    weights: BTreeMap<String, BTreeMap<String, i64>>,
    #[serde(default)]
    lex_order: Option<Vec<String>>,
}

pub fn parse_query(spec_text: &str) -> Result<(JoinQuery, RankingSpec)> {
    let doc: SpecDoc = if spec_text.trim_start().starts_with('{') {
        serde_json::from_str(spec_text).map_err(|e| Error::QuerySpec(e.to_string()))?
    } else {
        toml::from_str(spec_text).map_err(|e| Error::QuerySpec(e.to_string()))?
    };
    if doc.atoms.is_empty() {
        return Err(Error::QuerySpec("a query needs at least one atom".into()));
    }
    let atoms = doc
        .atoms
        .iter()
        .map(|a| Atom::parse(a))
        .collect::<Result<Vec<_>>>()?;
    let q = JoinQuery::new(atoms);
    let agg: Aggregate = doc.agg.parse()?;
    if doc.lex_order.is_some() && agg != Aggregate::Lex {
        return Err(Error::LexOrder("lex_order given for a non-lex aggregate".into()));
    }
    let lex_order = match (agg, doc.lex_order) {
        (Aggregate::Lex, Some(order)) => order,
        (Aggregate::Lex, None) => doc.weighted_vars.clone(),
        _ => Vec::new(),
    };
    let spec = RankingSpec {
        agg,
        weighted_vars: doc.weighted_vars,
        weights: doc.weights,
        lex_order,
    };
    spec.validate(&q)?;
    Ok((q, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_path_sum() {
        let (q, r) = parse_query(
            r#"
            atoms = ["R1(x1,x2)", "R2(x2,x3)"]
            agg = "sum"
            weighted_vars = ["x1", "x2", "x3"]
            "#,
        )
        .unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(r.agg, Aggregate::Sum);
        assert_eq!(r.weighted_vars.len(), 3);
    }

    #[test]
    fn likes_query() {
        let (q, r) = parse_query(
            r#"{"atoms": ["Admin(u1,e)", "Share(u2,e,l2)", "Attend(u3,e,l3)"],
                "agg": "sum", "weighted_vars": ["l2", "l3"]}"#,
        )
        .unwrap();
        assert_eq!(q.vars().len(), 6);
        assert_eq!(r.weighted_vars, vec!["l2", "l3"]);
    }

    #[test]
    fn weighted_var_outside_query() {
        let err = parse_query(
            r#"
            atoms = ["R1(x1,x2)", "R2(x2,x3)"]
            agg = "sum"
            weighted_vars = ["x9"]
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::WeightedVarNotInQuery(v) if v == "x9"));
    }

    #[test]
    fn duplicate_lex_priority() {
        let err = parse_query(
            r#"
            atoms = ["R(x,y)"]
            agg = "lex"
            weighted_vars = ["x", "y"]
            lex_order = ["x", "x"]
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::LexOrder(_)));
    }

    #[test]
    fn explicit_weights() {
        let (_, r) = parse_query(
            r#"
            atoms = ["R(x)"]
            agg = "max"
            weighted_vars = ["x"]
            [weights.x]
            low = 1
            high = 9
            "#,
        )
        .unwrap();
        assert_eq!(r.weights["x"]["high"], 9);
    }
}
