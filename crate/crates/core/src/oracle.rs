//! Brute-force ground truth: a backtracking nested-loop join straight over
//! the query and database, then sort and index. Shares nothing with the
//! join-tree machinery beyond the data types.

use std::cmp::Ordering;

use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;

use crate::data::{Database, JoinQuery, ValueId};
use crate::error::{Error, Result};
use crate::predicate::Predicate;
use crate::rank::{compare, Ranking, WeightValue};
use crate::ratio::{target_index, Fraction};

pub const DEFAULT_BUDGET: usize = 1_000_000;

struct Step<'a> {
    /// (position in tuple, variable) for variables bound earlier.
    bound: Vec<(usize, usize)>,
    /// (position, variable) for variables first bound here; a repeat inside
    /// the atom appears as a bound check against its first position.
    fresh: Vec<(usize, usize)>,
    repeats: Vec<(usize, usize)>,
    index: FxHashMap<Vec<ValueId>, Vec<&'a [ValueId]>>,
}

/// All answers, each aligned with `q.vars()`.
pub fn oracle_answers(q: &JoinQuery, d: &Database, budget: Option<usize>) -> Result<Vec<Vec<ValueId>>> {
    q.validate(d)?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let vars = q.vars();
    let var_of = |name: &String| vars.iter().position(|v| v == name).unwrap();

    // atoms sharing the most already-bound variables go first
    let mut order: Vec<usize> = Vec::new();
    let mut bound = vec![false; vars.len()];
    while order.len() < q.atoms.len() {
        let next = (0..q.atoms.len())
            .filter(|i| !order.contains(i))
            .max_by_key(|&i| {
                let shared = q.atoms[i].vars.iter().filter(|v| bound[var_of(v)]).count();
                (shared, std::cmp::Reverse(i))
            })
            .unwrap();
        for v in &q.atoms[next].vars {
            bound[var_of(v)] = true;
        }
        order.push(next);
    }

    let mut is_bound = vec![false; vars.len()];
    let mut steps = Vec::new();
    for &i in &order {
        let atom = &q.atoms[i];
        let rel = d.relation(&atom.relation).expect("validated");
        let mut step = Step {
            bound: Vec::new(),
            fresh: Vec::new(),
            repeats: Vec::new(),
            index: FxHashMap::default(),
        };
        for (pos, name) in atom.vars.iter().enumerate() {
            let v = var_of(name);
            if is_bound[v] {
                step.bound.push((pos, v));
            } else if let Some(&(first, _)) = step.fresh.iter().find(|&&(_, w)| w == v) {
                step.repeats.push((pos, first));
            } else {
                step.fresh.push((pos, v));
            }
        }
        for &(_, v) in &step.fresh {
            is_bound[v] = true;
        }
        for t in rel.tuples() {
            if step.repeats.iter().all(|&(p, f)| t[p] == t[f]) {
                let key = step.bound.iter().map(|&(p, _)| t[p]).collect();
                step.index.entry(key).or_default().push(t);
            }
        }
        steps.push(step);
    }

    let mut out = Vec::new();
    let mut assignment = vec![0 as ValueId; vars.len()];
    extend(&steps, 0, &mut assignment, &mut out, budget)?;
    Ok(out)
}

fn extend(
    steps: &[Step<'_>],
    depth: usize,
    assignment: &mut Vec<ValueId>,
    out: &mut Vec<Vec<ValueId>>,
    budget: usize,
) -> Result<()> {
    let Some(step) = steps.get(depth) else {
        if out.len() == budget {
            return Err(Error::OracleBudget(budget));
        }
        out.push(assignment.clone());
        return Ok(());
    };
    let key: Vec<ValueId> = step.bound.iter().map(|&(_, v)| assignment[v]).collect();
    if let Some(tuples) = step.index.get(&key) {
        for t in tuples {
            for &(p, v) in &step.fresh {
                assignment[v] = t[p];
            }
            extend(steps, depth + 1, assignment, out, budget)?;
        }
    }
    Ok(())
}

/// Answers sorted by weight; ties keep enumeration order.
#[derive(Clone, Debug)]
pub struct RankedAnswerList {
    pub answers: Vec<(Vec<ValueId>, WeightValue)>,
}

impl RankedAnswerList {
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    /// `(#{w(a) ≺ w}, #{w(a) = w})`.
    pub fn rank_of(&self, w: &WeightValue) -> Result<(usize, usize)> {
        let mut less = 0;
        let mut equal = 0;
        for (_, aw) in &self.answers {
            match compare(aw, w)? {
                Ordering::Less => less += 1,
                Ordering::Equal => equal += 1,
                Ordering::Greater => {}
            }
        }
        Ok((less, equal))
    }
}

fn weights_of(q: &JoinQuery, r: &Ranking, answers: &[Vec<ValueId>]) -> Result<Vec<WeightValue>> {
    let vars = q.vars();
    let ids: Vec<usize> = r
        .vars()
        .iter()
        .map(|x| vars.iter().position(|v| v == x).ok_or_else(|| Error::WeightedVarNotInQuery(x.clone())))
        .collect::<Result<_>>()?;
    answers.iter().map(|a| r.weight_of_answer(&ids, a)).collect()
}

pub fn oracle_ranked(q: &JoinQuery, d: &Database, r: &Ranking, budget: Option<usize>) -> Result<RankedAnswerList> {
    let answers = oracle_answers(q, d, budget)?;
    let weights = weights_of(q, r, &answers)?;
    let mut answers: Vec<_> = answers.into_iter().zip(weights).collect();
    answers.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(RankedAnswerList { answers })
}

/// Answer, weight and zero-based index of the φ-quantile.
pub fn oracle_quantile(
    q: &JoinQuery,
    d: &Database,
    r: &Ranking,
    phi: &Fraction,
) -> Result<(Vec<ValueId>, WeightValue, usize)> {
    let ranked = oracle_ranked(q, d, r, None)?;
    if ranked.is_empty() {
        return Err(Error::EmptyResult);
    }
    let k = target_index(phi, &(ranked.len() as u64).into())
        .to_usize()
        .expect("below the answer count");
    let (a, w) = ranked.answers[k].clone();
    Ok((a, w, k))
}

pub fn oracle_rank(q: &JoinQuery, d: &Database, r: &Ranking, w: &WeightValue) -> Result<(usize, usize)> {
    oracle_ranked(q, d, r, None)?.rank_of(w)
}

pub fn oracle_count_pred(q: &JoinQuery, d: &Database, r: &Ranking, p: &Predicate) -> Result<usize> {
    let answers = oracle_answers(q, d, None)?;
    let weights = weights_of(q, r, &answers)?;
    Ok(weights.iter().filter(|w| p.holds(w)).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatabaseBuilder;
    use crate::rank::{Aggregate, Bound, RankingSpec};

    fn product3x3() -> (JoinQuery, Database, Ranking) {
        let mut b = DatabaseBuilder::new();
        b.relation("A", &["a"], [[1i64], [2], [3]]);
        b.relation("B", &["b"], [[10i64], [20], [30]]);
        let d = b.build();
        let q = JoinQuery::parse("A(x), B(y)").unwrap();
        let r = Ranking::bind(&RankingSpec::new(Aggregate::Sum, &["x", "y"]), &q, &d).unwrap();
        (q, d, r)
    }

    #[test]
    fn product_median_and_extremes() {
        let (q, d, r) = product3x3();
        let (_, w, k) = oracle_quantile(&q, &d, &r, &Fraction::new(1, 2)).unwrap();
        assert_eq!((w, k), (WeightValue::Scalar(22), 4));
        let (_, w, _) = oracle_quantile(&q, &d, &r, &Fraction::new(1, 1)).unwrap();
        assert_eq!(w, WeightValue::Scalar(33));
        let (_, w, _) = oracle_quantile(&q, &d, &r, &Fraction::new(0, 1)).unwrap();
        assert_eq!(w, WeightValue::Scalar(11));
    }

    #[test]
    fn rank_counts() {
        let (q, d, r) = product3x3();
        assert_eq!(oracle_rank(&q, &d, &r, &WeightValue::Scalar(0)).unwrap(), (0, 0));
        assert_eq!(oracle_rank(&q, &d, &r, &WeightValue::Scalar(11)).unwrap(), (0, 1));
        let (l, e) = oracle_rank(&q, &d, &r, &WeightValue::Scalar(22)).unwrap();
        assert_eq!((l, e), (4, 1));
    }

    #[test]
    fn predicate_counts_partition_the_answers() {
        let (q, d, r) = product3x3();
        let all = Predicate::lt(Aggregate::Sum, Bound::PosInf);
        assert_eq!(oracle_count_pred(&q, &d, &r, &all).unwrap(), 9);
        let none = Predicate::gt(Aggregate::Sum, Bound::PosInf);
        assert_eq!(oracle_count_pred(&q, &d, &r, &none).unwrap(), 0);
        for lambda in [0, 12, 22, 31, 40] {
            let b = Bound::Finite(WeightValue::Scalar(lambda));
            let lt = oracle_count_pred(&q, &d, &r, &Predicate::lt(Aggregate::Sum, b.clone())).unwrap();
            let gt = oracle_count_pred(&q, &d, &r, &Predicate::gt(Aggregate::Sum, b)).unwrap();
            let (_, eq) = oracle_rank(&q, &d, &r, &WeightValue::Scalar(lambda)).unwrap();
            assert_eq!(lt + eq + gt, 9);
        }
    }

    #[test]
    fn repeated_variables_and_budget() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a", "b"], [[1i64, 1], [1, 2], [2, 2]]);
        b.relation("S", &["a"], [[1i64], [2]]);
        let d = b.build();
        let q = JoinQuery::parse("R(x,x), S(x)").unwrap();
        assert_eq!(oracle_answers(&q, &d, None).unwrap().len(), 2);
        let q = JoinQuery::parse("R(x,y), S(z)").unwrap();
        assert!(matches!(oracle_answers(&q, &d, Some(5)), Err(Error::OracleBudget(5))));
    }
}
