//! c-pivots by message passing: every join group forwards the weighted
//! median of its tuples' partial pivots, weighted by their subtree counts.

use num_traits::Zero;

use crate::data::ValueId;
use crate::error::{Error, Result};
use crate::exec::{reduced_relations, TreeRelations, NO_GROUP};
use crate::instance::Instance;
use crate::plan::JoinTree;
use crate::rank::{compare, Ranking, WeightValue};
use crate::ratio::Fraction;
use crate::select::weighted_median;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotResult {
    /// Assignment over the instance's variables.
    pub answer: Vec<ValueId>,
    pub weight: WeightValue,
    /// `c = 2^-c_exponent`.
    pub c_exponent: u32,
}

impl PivotResult {
    pub fn c(&self) -> Fraction {
        pow2_inverse(self.c_exponent)
    }
}

pub(crate) fn pow2_inverse(e: u32) -> Fraction {
    assert!(e < 128, "c underflows the fraction type");
    Fraction::new(1, 1u128 << e)
}

/// Exponent of `c` from `c(leaf) = 1`, `c(R) = Π c(S_i)/2`.
pub fn structural_c_exponent(t: &JoinTree) -> u32 {
    fn go(t: &JoinTree, u: usize) -> u32 {
        t.nodes[u].children.iter().map(|&c| go(t, c) + 1).sum()
    }
    go(t, t.root)
}

pub fn structural_c(t: &JoinTree) -> Fraction {
    pow2_inverse(structural_c_exponent(t))
}

/// Per node and tuple: aggregate of the weights charged to that tuple.
pub(crate) fn tuple_weights(rels: &TreeRelations, ranking: &Ranking, inst: &Instance) -> Result<Vec<Vec<WeightValue>>> {
    let owned = rels.charge(&ranking.var_ids(inst));
    rels.nodes
        .iter()
        .zip(&owned)
        .map(|(rel, own)| {
            (0..rel.len())
                .map(|t| {
                    let row = rel.tuple(t);
                    let mut acc = ranking.identity();
                    for &(widx, col) in own {
                        ranking.add_var(&mut acc, widx, ranking.weight(widx, row[col])?)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

pub fn select_pivot(inst: &Instance, ranking: &Ranking) -> Result<PivotResult> {
    let rels = reduced_relations(inst)?;
    select_pivot_on(&rels, inst, ranking)
}

/// Pivot over fully reduced relations whose tree has an artificial root.
pub fn select_pivot_on(rels: &TreeRelations, inst: &Instance, ranking: &Ranking) -> Result<PivotResult> {
    let tree = &rels.tree;
    if rels.root().is_empty() {
        return Err(Error::EmptyResult);
    }
    let cnt = rels.tuple_counts();
    if cnt[tree.root].iter().all(|c| c.is_zero()) {
        return Err(Error::EmptyResult);
    }
    let mut pw = tuple_weights(rels, ranking, inst)?;
    let mut chosen: Vec<Vec<u32>> = vec![Vec::new(); rels.nodes.len()];
    for u in tree.bottom_up() {
        let rel = &rels.nodes[u];
        for (k, &c) in tree.nodes[u].children.iter().enumerate() {
            for t in 0..rel.len() {
                let g = rel.child_groups[k][t];
                debug_assert_ne!(g, NO_GROUP, "relations must be fully reduced");
                let add = pw[c][chosen[c][g as usize] as usize].clone();
                ranking.combine(&mut pw[u][t], &add)?;
            }
        }
        if u == tree.root {
            continue;
        }
        // one weighted median per join group, computed once
        let w = &pw[u];
        let mut med = Vec::with_capacity(rel.group_count());
        for g in 0..rel.group_count() as u32 {
            let members = rel.group(g);
            let beta: Vec<_> = members.iter().map(|&t| cnt[u][t as usize].clone()).collect();
            let i = weighted_median(&beta, |a, b| {
                compare(&w[members[a] as usize], &w[members[b] as usize])
                    .expect("weights of one ranking")
            })?;
            med.push(members[i]);
        }
        chosen[u] = med;
    }
    // unfold pivot(t_0)
    let mut assign: Vec<Option<ValueId>> = vec![None; inst.vars().len()];
    let mut stack = vec![(tree.root, 0usize)];
    while let Some((u, t)) = stack.pop() {
        let rel = &rels.nodes[u];
        for (col, &v) in rel.vars.iter().enumerate() {
            let val = rel.tuple(t)[col];
            match assign[v] {
                None => assign[v] = Some(val),
                Some(old) => assert_eq!(old, val, "partial pivots disagree on a shared variable"),
            }
        }
        for (k, &c) in tree.nodes[u].children.iter().enumerate() {
            let g = rel.child_groups[k][t];
            stack.push((c, chosen[c][g as usize] as usize));
        }
    }
    let answer: Vec<ValueId> = assign
        .into_iter()
        .map(|a| a.expect("every variable occurs in some node"))
        .collect();
    let weight = pw[tree.root][0].clone();
    debug_assert_eq!(
        ranking.weight_of_answer(&ranking.var_ids(inst), &answer).ok(),
        Some(weight.clone())
    );
    Ok(PivotResult {
        answer,
        weight,
        c_exponent: structural_c_exponent(tree),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatabaseBuilder, JoinQuery};
    use crate::gen::fig1;
    use crate::plan::{add_artificial_root, join_tree, Hypergraph};
    use crate::rank::{Aggregate, RankingSpec};

    #[test]
    fn structural_constants() {
        let h = Hypergraph::of_query(&JoinQuery::parse("R(x)").unwrap());
        assert_eq!(structural_c(&add_artificial_root(&join_tree(&h).unwrap())), Fraction::new(1, 2));
        let h = Hypergraph::of_query(&JoinQuery::parse("R(x,y), S(y,z), T(z,w)").unwrap());
        assert_eq!(structural_c(&add_artificial_root(&join_tree(&h).unwrap())), Fraction::new(1, 8));
    }

    #[test]
    fn single_relation_median() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a"], [[5i64], [1], [9], [3], [7]]);
        let d = b.build();
        let q = JoinQuery::parse("R(x)").unwrap();
        let inst = Instance::bind(&q, &d).unwrap();
        let r = Ranking::bind(&RankingSpec::new(Aggregate::Sum, &["x"]), &q, &d).unwrap();
        let p = select_pivot(&inst, &r).unwrap();
        assert_eq!(p.weight, WeightValue::Scalar(5));
        assert_eq!(p.c(), Fraction::new(1, 2));
    }

    #[test]
    fn figure_three_pivot() {
        let (q, d, spec) = fig1();
        let inst = Instance::bind(&q, &d).unwrap();
        let r = Ranking::bind(&spec, &q, &d).unwrap();
        let p = select_pivot(&inst, &r).unwrap();
        let all = crate::oracle::oracle_answers(&q, &d, None).unwrap();
        assert_eq!(all.len(), 13);
        assert!(all.contains(&p.answer));
        assert_eq!(p.c_exponent, 4);
    }

    #[test]
    fn empty_query_has_no_pivot() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a"], Vec::<[i64; 1]>::new());
        let d = b.build();
        let q = JoinQuery::parse("R(x)").unwrap();
        let inst = Instance::bind(&q, &d).unwrap();
        let r = Ranking::bind(&RankingSpec::new(Aggregate::Sum, &["x"]), &q, &d).unwrap();
        assert!(matches!(select_pivot(&inst, &r), Err(Error::EmptyResult)));
    }
}
