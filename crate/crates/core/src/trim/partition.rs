//! MIN, MAX and LEX trims as unions of unary-filtered database copies.
//!
//! A predicate becomes a list of disjoint partitions, each a conjunction of
//! per-variable conditions. A single partition is a plain filter; several
//! are unioned with a partition variable `x_p` added to every atom.

use std::sync::Arc;

use crate::data::{Relation, ValueId};
use crate::error::Result;
use crate::instance::{BoundAtom, Instance};
use crate::predicate::{Direction, Predicate};
use crate::rank::{Aggregate, Ranking};
use crate::trim::{constant_output, fresh_names, occurrences, TrimOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cond {
    Lt(i64),
    Le(i64),
    Eq(i64),
    Ge(i64),
    Gt(i64),
}

impl Cond {
    pub fn holds(self, w: i64) -> bool {
        match self {
            Cond::Lt(l) => w < l,
            Cond::Le(l) => w <= l,
            Cond::Eq(l) => w == l,
            Cond::Ge(l) => w >= l,
            Cond::Gt(l) => w > l,
        }
    }
}

/// Disjoint partitions whose union is the predicate, over `r` weighted
/// variables in weight-vector order. `None` for a constant predicate.
pub fn partitions(pred: &Predicate, r: usize) -> Result<Option<Vec<Vec<(usize, Cond)>>>> {
    if pred.constant().is_some() || r == 0 {
        return Ok(None);
    }
    let agg = pred.kind.agg();
    let dir = pred.direction();
    let parts = match (agg, dir) {
        (Aggregate::Max, Direction::Lt) => {
            let l = pred.scalar_bound()?;
            vec![(0..r).map(|i| (i, Cond::Lt(l))).collect()]
        }
        (Aggregate::Min, Direction::Gt) => {
            let l = pred.scalar_bound()?;
            vec![(0..r).map(|i| (i, Cond::Gt(l))).collect()]
        }
        (Aggregate::Max, Direction::Gt) => {
            let l = pred.scalar_bound()?;
            (0..r)
                .map(|i| {
                    let mut p: Vec<(usize, Cond)> = (0..i).map(|j| (j, Cond::Le(l))).collect();
                    p.push((i, Cond::Gt(l)));
                    p
                })
                .collect()
        }
        (Aggregate::Min, Direction::Lt) => {
            let l = pred.scalar_bound()?;
            (0..r)
                .map(|i| {
                    let mut p: Vec<(usize, Cond)> = (0..i).map(|j| (j, Cond::Ge(l))).collect();
                    p.push((i, Cond::Lt(l)));
                    p
                })
                .collect()
        }
        (Aggregate::Lex, _) => {
            let l = pred.lex_bound()?.to_vec();
            (0..r)
                .map(|i| {
                    let mut p: Vec<(usize, Cond)> = (0..i).map(|j| (j, Cond::Eq(l[j]))).collect();
                    p.push((
                        i,
                        match dir {
                            Direction::Lt => Cond::Lt(l[i]),
                            Direction::Gt => Cond::Gt(l[i]),
                        },
                    ));
                    p
                })
                .collect()
        }
        (Aggregate::Sum, _) => unreachable!("SUM predicates have their own trims"),
    };
    Ok(Some(parts))
}

fn filter_union(inst: &Instance, ranking: &Ranking, parts: &[Vec<(usize, Cond)>]) -> Result<TrimOutput> {
    let occ = occurrences(inst, ranking);
    let tagged = parts.len() > 1;
    let mut vars = inst.vars().to_vec();
    let xp = if tagged {
        let name = fresh_names(inst, "p", 1).pop().unwrap();
        vars.push(name);
        Some(vars.len() - 1)
    } else {
        None
    };
    let mut atoms = Vec::with_capacity(inst.atoms().len());
    for (a, atom) in inst.atoms().iter().enumerate() {
        // conditions of each partition that this atom can check
        let local: Vec<Vec<(usize, usize, Cond)>> = parts
            .iter()
            .map(|p| {
                p.iter()
                    .filter_map(|&(widx, cond)| {
                        occ[a]
                            .iter()
                            .filter(|&&(w, _)| w == widx)
                            .map(|&(_, col)| (widx, col, cond))
                            .next()
                    })
                    .collect()
            })
            .collect();
        if !tagged && local[0].is_empty() {
            atoms.push(atom.clone());
            continue;
        }
        let mut columns = atom.rel.columns().to_vec();
        let mut avars = atom.vars.clone();
        if let Some(x) = xp {
            columns.push(vars[x].clone());
            avars.push(x);
        }
        let mut flat: Vec<ValueId> = Vec::new();
        let mut len = 0;
        for (pi, conds) in local.iter().enumerate() {
            for t in atom.rel.tuples() {
                let mut ok = true;
                for &(widx, col, cond) in conds {
                    if !cond.holds(ranking.weight(widx, t[col])?) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    flat.extend_from_slice(t);
                    if xp.is_some() {
                        flat.push(pi as ValueId);
                    }
                    len += 1;
                }
            }
        }
        atoms.push(BoundAtom {
            name: atom.name.clone(),
            vars: avars,
            rel: Arc::new(Relation::from_flat(columns, len, flat)),
        });
    }
    Ok(TrimOutput::exact(
        Instance::from_parts(vars, atoms, inst.dictionary().clone()),
        inst.vars().len(),
    ))
}

fn trim_by_partitions(inst: &Instance, ranking: &Ranking, pred: &Predicate) -> Result<TrimOutput> {
    pred.expect_agg(ranking.agg())?;
    match partitions(pred, ranking.vars().len())? {
        None => {
            let keep = pred
                .constant()
                .unwrap_or_else(|| pred.holds(&ranking.identity()));
            Ok(constant_output(inst, keep))
        }
        Some(parts) => filter_union(inst, ranking, &parts),
    }
}

/// MIN/MAX threshold trims.
pub fn trim_minmax(inst: &Instance, ranking: &Ranking, pred: &Predicate) -> Result<TrimOutput> {
    trim_by_partitions(inst, ranking, pred)
}

/// LEX prefix trims.
pub fn trim_lex(inst: &Instance, ranking: &Ranking, pred: &Predicate) -> Result<TrimOutput> {
    trim_by_partitions(inst, ranking, pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{Bound, WeightValue};

    #[test]
    fn max_above_ten_has_three_partitions() {
        let p = Predicate::gt(Aggregate::Max, Bound::Finite(WeightValue::Scalar(10)));
        let parts = partitions(&p, 3).unwrap().unwrap();
        assert_eq!(
            parts,
            vec![
                vec![(0, Cond::Gt(10))],
                vec![(0, Cond::Le(10)), (1, Cond::Gt(10))],
                vec![(0, Cond::Le(10)), (1, Cond::Le(10)), (2, Cond::Gt(10))],
            ]
        );
    }

    #[test]
    fn lex_below_splits_on_prefix() {
        let p = Predicate::lt(Aggregate::Lex, Bound::Finite(WeightValue::Lex(vec![3, 5].into())));
        let parts = partitions(&p, 2).unwrap().unwrap();
        assert_eq!(
            parts,
            vec![vec![(0, Cond::Lt(3))], vec![(0, Cond::Eq(3)), (1, Cond::Lt(5))]]
        );
    }

    #[test]
    fn sentinels_are_constant() {
        let p = Predicate::lt(Aggregate::Min, Bound::PosInf);
        assert!(partitions(&p, 2).unwrap().is_none());
    }
}
