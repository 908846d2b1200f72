//! ε-lossy SUM trims for any acyclic query.
//!
//! Messages `(σ_s, σ_m)` flow bottom-up over a binary join tree. Each child
//! join group is sketched; the bucket id becomes a fresh column on both ends
//! of the edge, and every parent tuple is copied once per bucket of the group
//! it joins. Root copies whose rounded sum fails the predicate are dropped.
//! Rounding is towards the bound, so no answer violating it survives.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::data::{Relation, ValueId};
use crate::error::{Error, Result};
use crate::exec::{Count, NodeRows, TreeRelations};
use crate::instance::{BoundAtom, Instance, VarId};
use crate::par::{self, ExecMode};
use crate::plan::{binarize, join_tree_rooted, Hypergraph, JoinTree};
use crate::predicate::{Direction, Predicate};
use crate::rank::{Aggregate, Ranking};
use crate::ratio::Fraction;
use crate::sketch::{epsilon_sketch, Rounding, SketchItem, SumSketch};
use crate::trim::{constant_output, fresh_names, TrimOutput};

#[derive(Clone, Debug, Default)]
pub struct LossyReport {
    /// Per-sketch error `ε/4^ℓ`.
    pub node_epsilon: Option<Fraction>,
    pub max_buckets: usize,
    pub output_size: usize,
}

/// Tuples of a processed node: original columns, then one bucket column per
/// child.
struct Stage {
    arity: usize,
    rows: Vec<ValueId>,
    orig: Vec<u32>,
    sigma_s: Vec<i128>,
    sigma_m: Vec<Count>,
}

impl Stage {
    fn len(&self) -> usize {
        self.orig.len()
    }

    fn row(&self, i: usize) -> &[ValueId] {
        &self.rows[i * self.arity..(i + 1) * self.arity]
    }
}

pub fn lossy_trim_sum(
    inst: &Instance,
    ranking: &Ranking,
    pred: &Predicate,
    eps: &Fraction,
    exec: ExecMode,
) -> Result<(TrimOutput, LossyReport)> {
    pred.expect_agg(Aggregate::Sum)?;
    if eps.numer() == &0 || eps.numer() >= eps.denom() {
        return Err(Error::EpsilonOutOfRange(eps.to_string()));
    }
    if let Some(keep) = pred.constant() {
        return Ok((constant_output(inst, keep), LossyReport::default()));
    }
    if ranking.vars().is_empty() {
        let keep = pred.holds(&ranking.identity());
        return Ok((constant_output(inst, keep), LossyReport::default()));
    }
    let lambda = pred.scalar_bound()? as i128;
    let dir = pred.direction();
    let rounding = match dir {
        Direction::Lt => Rounding::Up,
        Direction::Gt => Rounding::Down,
    };
    let ell = inst.atoms().len() as u32;
    let scale = 4u128
        .checked_pow(ell)
        .and_then(|s| s.checked_mul(*eps.denom()))
        .ok_or_else(|| Error::EpsilonOutOfRange(format!("{eps} over {ell} atoms")))?;
    let node_eps = Fraction::new(*eps.numer(), scale);

    let uw = ranking.var_ids(inst);
    let h = Hypergraph::of_instance(inst);
    let tree = binarize(&join_tree_rooted(&h, &uw)?);
    let rels = TreeRelations::materialize(inst, &tree).full_reduce();
    let owned = rels.charge(&uw);

    let n = tree.nodes.len();
    let mut stages: Vec<Option<Stage>> = (0..n).map(|_| None).collect();
    // bucket column of each non-root node, aligned with its stage rows
    let mut up_col: Vec<Vec<ValueId>> = vec![Vec::new(); n];
    let mut max_buckets = 0;

    for u in tree.bottom_up() {
        let rel = &rels.nodes[u];
        let mut cur = Stage {
            arity: rel.arity(),
            rows: (0..rel.len()).flat_map(|t| rel.tuple(t).to_vec()).collect(),
            orig: (0..rel.len() as u32).collect(),
            sigma_s: (0..rel.len())
                .map(|t| {
                    let row = rel.tuple(t);
                    owned[u].iter().try_fold(0i128, |acc, &(widx, col)| {
                        Ok::<_, Error>(acc + ranking.weight(widx, row[col])? as i128)
                    })
                })
                .collect::<Result<_>>()?,
            sigma_m: vec![Count::one(); rel.len()],
        };
        for (k, &c) in tree.nodes[u].children.iter().enumerate() {
            let child = stages[c].as_ref().expect("children first");
            let crel = &rels.nodes[c];
            let mut members: Vec<Vec<u32>> = vec![Vec::new(); crel.group_count()];
            for i in 0..child.len() {
                members[crel.group_of(child.orig[i] as usize) as usize].push(i as u32);
            }
            let sketches: Vec<Result<SumSketch>> = par::map(exec, &members, |m| {
                let items = m
                    .iter()
                    .map(|&i| SketchItem {
                        value: child.sigma_s[i as usize],
                        mult: child.sigma_m[i as usize].clone(),
                        source: i,
                    })
                    .collect();
                epsilon_sketch(items, &node_eps, rounding)
            });
            let sketches = sketches.into_iter().collect::<Result<Vec<_>>>()?;
            let mut col = vec![0 as ValueId; child.len()];
            let mut first_id: Vec<u64> = Vec::with_capacity(sketches.len());
            let mut next: u64 = 0;
            for s in &sketches {
                first_id.push(next);
                for (bi, b) in s.buckets.iter().enumerate() {
                    for &src in &b.sources {
                        col[src as usize] = (next + bi as u64) as ValueId;
                    }
                }
                next += s.buckets.len() as u64;
                max_buckets = max_buckets.max(s.buckets.len());
            }
            if next > ValueId::MAX as u64 {
                return Err(Error::QuerySpec("trim output exceeds the value id space".into()));
            }
            up_col[c] = col;

            let mut out = Stage {
                arity: cur.arity + 1,
                rows: Vec::new(),
                orig: Vec::new(),
                sigma_s: Vec::new(),
                sigma_m: Vec::new(),
            };
            for j in 0..cur.len() {
                let g = rel.child_groups[k][cur.orig[j] as usize] as usize;
                for (bi, b) in sketches[g].buckets.iter().enumerate() {
                    out.rows.extend_from_slice(cur.row(j));
                    out.rows.push((first_id[g] + bi as u64) as ValueId);
                    out.orig.push(cur.orig[j]);
                    out.sigma_s.push(cur.sigma_s[j] + b.rep);
                    out.sigma_m.push(&cur.sigma_m[j] * &b.mult);
                }
            }
            cur = out;
        }
        stages[u] = Some(cur);
    }

    // root filter
    let root = tree.root;
    let rs = stages[root].take().unwrap();
    let mut kept = Stage {
        arity: rs.arity,
        rows: Vec::new(),
        orig: Vec::new(),
        sigma_s: Vec::new(),
        sigma_m: Vec::new(),
    };
    let mut sigma_count = Count::zero();
    for j in 0..rs.len() {
        let ok = match dir {
            Direction::Lt => rs.sigma_s[j] < lambda,
            Direction::Gt => rs.sigma_s[j] > lambda,
        };
        if ok {
            kept.rows.extend_from_slice(rs.row(j));
            kept.orig.push(rs.orig[j]);
            sigma_count += &rs.sigma_m[j];
        }
    }
    stages[root] = Some(kept);

    // output variables: one per tree edge
    let edge_nodes: Vec<usize> = (0..n).filter(|&u| u != root).collect();
    let names = fresh_names(inst, "s", edge_nodes.len());
    let mut vars = inst.vars().to_vec();
    let mut edge_var = vec![usize::MAX; n];
    for (&c, name) in edge_nodes.iter().zip(names) {
        vars.push(name);
        edge_var[c] = vars.len() - 1;
    }
    let mut out_tree = tree.clone();
    let mut rows = Vec::with_capacity(n);
    for u in 0..n {
        let st = stages[u].take().unwrap();
        let mut nvars: Vec<VarId> = rels.nodes[u].vars.clone();
        nvars.extend(tree.nodes[u].children.iter().map(|&c| edge_var[c]));
        let up = u != root;
        if up {
            nvars.push(edge_var[u]);
        }
        let mut flat = Vec::with_capacity(st.len() * nvars.len());
        for i in 0..st.len() {
            flat.extend_from_slice(st.row(i));
            if up {
                flat.push(up_col[u][i]);
            }
        }
        let mut sorted = nvars.clone();
        sorted.sort_unstable();
        out_tree.nodes[u].vars = sorted;
        rows.push(NodeRows {
            vars: nvars,
            len: st.len(),
            rows: flat,
            src: st.orig,
        });
    }
    let reduced = TreeRelations::from_rows(out_tree, rows, vars.len()).full_reduce();
    let instance = tree_to_instance(inst, &tree, &reduced, &vars);
    let output_size = instance.size();
    Ok((
        TrimOutput {
            instance,
            base_vars: inst.vars().len(),
            lossy: true,
            sigma_count: Some(sigma_count),
        },
        LossyReport {
            node_epsilon: Some(node_eps),
            max_buckets,
            output_size,
        },
    ))
}

/// One atom per tree node; binarization copies get distinct names.
fn tree_to_instance(inst: &Instance, tree: &JoinTree, rels: &TreeRelations, vars: &[String]) -> Instance {
    let mut copies = vec![0usize; inst.atoms().len()];
    let atoms = (0..tree.nodes.len())
        .map(|u| {
            let a = tree.nodes[u].atom.expect("no artificial root here");
            let base = &inst.atoms()[a];
            let name = if copies[a] == 0 {
                base.name.clone()
            } else {
                format!("{}~{}", base.name, copies[a])
            };
            copies[a] += 1;
            let rel = &rels.nodes[u];
            let mut columns = base.rel.columns().to_vec();
            columns.extend(rel.vars[base.vars.len()..].iter().map(|&v| vars[v].clone()));
            let flat: Vec<ValueId> = (0..rel.len()).flat_map(|t| rel.tuple(t).to_vec()).collect();
            BoundAtom {
                name,
                vars: rel.vars.clone(),
                rel: Arc::new(Relation::from_flat(columns, rel.len(), flat)),
            }
        })
        .collect();
    Instance::from_parts(vars.to_vec(), atoms, inst.dictionary().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatabaseBuilder, JoinQuery};
    use crate::exec::count_answers;
    use crate::rank::{Bound, RankingSpec, WeightValue};

    fn fig5() -> (Instance, Ranking) {
        let mut b = DatabaseBuilder::new();
        b.relation("S", &["x", "y"], [[1i64, 3], [2, 2], [1, 4], [3, 4]]);
        b.relation("R", &["y", "z"], [[3i64, 1], [2, 5], [4, 2]]);
        let d = b.build();
        let q = JoinQuery::parse("S(x,y), R(y,z)").unwrap();
        let r = Ranking::bind(&RankingSpec::new(Aggregate::Sum, &["x", "y", "z"]), &q, &d).unwrap();
        (Instance::bind(&q, &d).unwrap(), r)
    }

    #[test]
    fn vacuous_bound_is_lossless() {
        let (inst, r) = fig5();
        let p = Predicate::lt(Aggregate::Sum, Bound::PosInf);
        let (out, _) = lossy_trim_sum(&inst, &r, &p, &Fraction::new(1, 10), ExecMode::Sequential).unwrap();
        assert_eq!(count_answers(&out.instance).unwrap(), count_answers(&inst).unwrap());
    }

    #[test]
    fn copies_join_only_their_bucket_sources() {
        let (inst, r) = fig5();
        // answers: (1,3,1)=5, (2,2,5)=9, (1,4,2)=7, (3,4,2)=9
        let p = Predicate::lt(Aggregate::Sum, Bound::Finite(WeightValue::Scalar(9)));
        let (out, rep) = lossy_trim_sum(&inst, &r, &p, &Fraction::new(1, 10), ExecMode::Sequential).unwrap();
        let cnt = count_answers(&out.instance).unwrap();
        assert_eq!(cnt, Count::from(2u32));
        assert_eq!(out.sigma_count, Some(cnt));
        assert!(rep.max_buckets >= 1);
        assert!(out.instance.atoms().iter().all(|a| a.vars.len() == 3));
    }

    #[test]
    fn coarse_sketches_lose_answers_within_the_bound() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["y", "w"], [[0i64, 0]]);
        b.relation("S", &["x", "y"], (0..200i64).map(|i| [i, 0]));
        let d = b.build();
        // R is the root, so every S sum passes through one sketch
        let q = JoinQuery::parse("R(y,w), S(x,y)").unwrap();
        let r = Ranking::bind(&RankingSpec::new(Aggregate::Sum, &["w", "x"]), &q, &d).unwrap();
        let inst = Instance::bind(&q, &d).unwrap();
        let eps = Fraction::new(99, 100);
        for (p, truth) in [
            (Predicate::lt(Aggregate::Sum, Bound::Finite(WeightValue::Scalar(150))), 150u32),
            (Predicate::gt(Aggregate::Sum, Bound::Finite(WeightValue::Scalar(49))), 150),
        ] {
            let (out, rep) = lossy_trim_sum(&inst, &r, &p, &eps, ExecMode::Sequential).unwrap();
            let cnt = count_answers(&out.instance).unwrap();
            assert!(cnt < Count::from(truth), "{p}: nothing was lost ({cnt})");
            assert!(cnt * 100u32 >= Count::from(truth));
            assert!(rep.max_buckets < 200);
        }
    }
}
