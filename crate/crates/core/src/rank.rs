//! Ranking functions over query answers: per-variable weights aggregated by
//! SUM, MIN, MAX or LEX, and the total order on the resulting weights.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::data::{Database, JoinQuery, Value, ValueId};
use crate::error::{Error, Result};
use crate::instance::{Instance, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Sum,
    Min,
    Max,
    Lex,
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Aggregate::Sum),
            "min" => Ok(Aggregate::Min),
            "max" => Ok(Aggregate::Max),
            "lex" => Ok(Aggregate::Lex),
            other => Err(Error::QuerySpec(format!("unknown aggregate `{other}`"))),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Sum => "sum",
            Aggregate::Min => "min",
            Aggregate::Max => "max",
            Aggregate::Lex => "lex",
        })
    }
}

/// Weight of an answer (or of a partial answer). LEX vectors are indexed by
/// lex priority.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightValue {
    Scalar(i64),
    Lex(Box<[i64]>),
}

impl fmt::Display for WeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightValue::Scalar(v) => write!(f, "{v}"),
            WeightValue::Lex(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Total order on weights of one ranking function.
pub fn compare(a: &WeightValue, b: &WeightValue) -> Result<Ordering> {
    match (a, b) {
        (WeightValue::Scalar(x), WeightValue::Scalar(y)) => Ok(x.cmp(y)),
        (WeightValue::Lex(x), WeightValue::Lex(y)) if x.len() == y.len() => Ok(x.cmp(y)),
        _ => Err(Error::MixedWeights),
    }
}

/// A weight or one of the two sentinels bracketing every weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    Finite(WeightValue),
    PosInf,
}

impl Bound {
    /// Orders this bound against a weight of the same kind.
    pub fn cmp_weight(&self, w: &WeightValue) -> Ordering {
        match self {
            Bound::NegInf => Ordering::Less,
            Bound::PosInf => Ordering::Greater,
            Bound::Finite(b) => b.cmp(w),
        }
    }

    pub fn finite(&self) -> Option<&WeightValue> {
        match self {
            Bound::Finite(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("+inf"),
            Bound::Finite(w) => write!(f, "{w}"),
        }
    }
}

/// Unbound description of a ranking function, as written in a query spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankingSpec {
    pub agg: Aggregate,
    pub weighted_vars: Vec<String>,
    /// variable -> original value text -> weight. Absent means identity on
    /// numeric values.
    pub weights: BTreeMap<String, BTreeMap<String, i64>>,
    /// Priority order for LEX; empty otherwise.
    pub lex_order: Vec<String>,
}

impl RankingSpec {
    pub fn new(agg: Aggregate, weighted_vars: &[&str]) -> Self {
        let vars: Vec<String> = weighted_vars.iter().map(|v| v.to_string()).collect();
        RankingSpec {
            agg,
            lex_order: if agg == Aggregate::Lex {
                vars.clone()
            } else {
                Vec::new()
            },
            weighted_vars: vars,
            weights: BTreeMap::new(),
        }
    }

    /// Weighted variables in the order used for weight vectors.
    pub fn ordered_vars(&self) -> &[String] {
        if self.agg == Aggregate::Lex {
            &self.lex_order
        } else {
            &self.weighted_vars
        }
    }

    pub fn validate(&self, q: &JoinQuery) -> Result<()> {
        let qvars = q.vars();
        for x in &self.weighted_vars {
            if !qvars.contains(x) {
                return Err(Error::WeightedVarNotInQuery(x.clone()));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for x in &self.weighted_vars {
            if !seen.insert(x) {
                return Err(Error::QuerySpec(format!("weighted variable `{x}` listed twice")));
            }
        }
        if self.agg == Aggregate::Lex {
            let mut seen = std::collections::BTreeSet::new();
            for x in &self.lex_order {
                if !seen.insert(x) {
                    return Err(Error::LexOrder(format!("duplicate priority for `{x}`")));
                }
            }
            let a: std::collections::BTreeSet<_> = self.lex_order.iter().collect();
            let b: std::collections::BTreeSet<_> = self.weighted_vars.iter().collect();
            if a != b {
                return Err(Error::LexOrder(
                    "lex_order must be a permutation of weighted_vars".into(),
                ));
            }
        }
        for x in self.weights.keys() {
            if !self.weighted_vars.contains(x) {
                return Err(Error::QuerySpec(format!(
                    "weights given for unweighted variable `{x}`"
                )));
            }
        }
        Ok(())
    }
}

/// A ranking function bound to a database dictionary: per weighted variable,
/// a dense table from value id to weight.
#[derive(Clone, Debug)]
pub struct Ranking {
    agg: Aggregate,
    vars: Vec<String>,
    tables: Vec<Vec<Option<i64>>>,
    labels: Vec<String>,
}

impl Ranking {
    pub fn bind(spec: &RankingSpec, q: &JoinQuery, d: &Database) -> Result<Ranking> {
        spec.validate(q)?;
        q.validate(d)?;
        let dict = d.dictionary();
        let vars = spec.ordered_vars().to_vec();
        let mut tables = Vec::with_capacity(vars.len());
        for x in &vars {
            let table: Vec<Option<i64>> = if let Some(map) = spec.weights.get(x) {
                (0..dict.len() as ValueId)
                    .map(|id| map.get(&dict.render(id)).copied())
                    .collect()
            } else if spec.agg == Aggregate::Lex {
                lex_default_table(x, q, d)
            } else {
                (0..dict.len() as ValueId)
                    .map(|id| dict.decode(id).and_then(Value::as_int))
                    .collect()
            };
            tables.push(table);
        }
        let labels = (0..dict.len() as ValueId).map(|id| dict.render(id)).collect();
        Ok(Ranking {
            agg: spec.agg,
            vars,
            tables,
            labels,
        })
    }

    pub fn agg(&self) -> Aggregate {
        self.agg
    }

    /// Weighted variables, in weight-vector order.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn weight(&self, widx: usize, id: ValueId) -> Result<i64> {
        self.tables[widx]
            .get(id as usize)
            .copied()
            .flatten()
            .ok_or_else(|| Error::UnweightedValue {
                var: self.vars[widx].clone(),
                value: self
                    .labels
                    .get(id as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("#{id}")),
            })
    }

    /// Aggregate of the empty multiset.
    pub fn identity(&self) -> WeightValue {
        match self.agg {
            Aggregate::Sum => WeightValue::Scalar(0),
            Aggregate::Min => WeightValue::Scalar(i64::MAX),
            Aggregate::Max => WeightValue::Scalar(i64::MIN),
            Aggregate::Lex => WeightValue::Lex(vec![0; self.vars.len()].into_boxed_slice()),
        }
    }

    /// Folds the weight of weighted variable `widx` into `acc`.
    pub fn add_var(&self, acc: &mut WeightValue, widx: usize, w: i64) -> Result<()> {
        match (self.agg, acc) {
            (Aggregate::Sum, WeightValue::Scalar(a)) => {
                *a = a.checked_add(w).ok_or(Error::WeightOverflow)?
            }
            (Aggregate::Min, WeightValue::Scalar(a)) => *a = (*a).min(w),
            (Aggregate::Max, WeightValue::Scalar(a)) => *a = (*a).max(w),
            (Aggregate::Lex, WeightValue::Lex(v)) => {
                v[widx] = v[widx].checked_add(w).ok_or(Error::WeightOverflow)?
            }
            _ => return Err(Error::MixedWeights),
        }
        Ok(())
    }

    /// `acc <- agg(acc ⊎ other)`.
    pub fn combine(&self, acc: &mut WeightValue, other: &WeightValue) -> Result<()> {
        match (self.agg, acc, other) {
            (Aggregate::Sum, WeightValue::Scalar(a), WeightValue::Scalar(b)) => {
                *a = a.checked_add(*b).ok_or(Error::WeightOverflow)?
            }
            (Aggregate::Min, WeightValue::Scalar(a), WeightValue::Scalar(b)) => *a = (*a).min(*b),
            (Aggregate::Max, WeightValue::Scalar(a), WeightValue::Scalar(b)) => *a = (*a).max(*b),
            (Aggregate::Lex, WeightValue::Lex(a), WeightValue::Lex(b)) if a.len() == b.len() => {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x = x.checked_add(*y).ok_or(Error::WeightOverflow)?;
                }
            }
            _ => return Err(Error::MixedWeights),
        }
        Ok(())
    }

    /// Aggregate over a multiset of `(weighted var index, weight)` pairs.
    pub fn aggregate<I: IntoIterator<Item = (usize, i64)>>(&self, items: I) -> Result<WeightValue> {
        let mut acc = self.identity();
        for (widx, w) in items {
            self.add_var(&mut acc, widx, w)?;
        }
        Ok(acc)
    }

    /// Weight of a (possibly partial) answer given by a lookup from variable
    /// name to value id. Every weighted variable must be assigned.
    pub fn answer_weight<F>(&self, lookup: F) -> Result<WeightValue>
    where
        F: Fn(&str) -> Option<ValueId>,
    {
        let mut acc = self.identity();
        for (widx, x) in self.vars.iter().enumerate() {
            let id = lookup(x).ok_or_else(|| Error::WeightedVarNotInQuery(x.clone()))?;
            self.add_var(&mut acc, widx, self.weight(widx, id)?)?;
        }
        Ok(acc)
    }

    /// Weighted-variable positions inside an instance's variable list.
    pub fn var_ids(&self, inst: &Instance) -> Vec<VarId> {
        self.vars
            .iter()
            .map(|x| inst.var_id(x).expect("weighted variable missing from instance"))
            .collect()
    }

    /// Weight of a full answer of `inst` (values aligned with `inst.vars()`).
    pub fn weight_of_answer(&self, ids: &[VarId], answer: &[ValueId]) -> Result<WeightValue> {
        let mut acc = self.identity();
        for (widx, &v) in ids.iter().enumerate() {
            self.add_var(&mut acc, widx, self.weight(widx, answer[v])?)?;
        }
        Ok(acc)
    }
}

/// LEX default: natural integer order when every value of the variable's
/// columns is numeric, otherwise rank in the text order of original values.
fn lex_default_table(x: &str, q: &JoinQuery, d: &Database) -> Vec<Option<i64>> {
    let dict = d.dictionary();
    let mut ids: Vec<ValueId> = Vec::new();
    for atom in &q.atoms {
        let rel = d.relation(&atom.relation).expect("validated");
        for (pos, v) in atom.vars.iter().enumerate() {
            if v == x {
                ids.extend(rel.tuples().map(|t| t[pos]));
            }
        }
    }
    ids.sort_unstable();
    ids.dedup();
    let mut table = vec![None; dict.len()];
    let all_int = ids
        .iter()
        .all(|&id| matches!(dict.decode(id), Some(Value::Int(_))));
    if all_int {
        for &id in &ids {
            table[id as usize] = dict.decode(id).and_then(Value::as_int);
        }
    } else {
        let mut by_text: Vec<(String, ValueId)> = ids.iter().map(|&id| (dict.render(id), id)).collect();
        by_text.sort();
        for (rank, (_, id)) in by_text.into_iter().enumerate() {
            table[id as usize] = Some(rank as i64);
        }
    }
    table
}

/// Charging of each weighted variable to exactly one atom, and the resulting
/// per-tuple weights.
#[derive(Clone, Debug)]
pub struct TupleWeightAssignment {
    /// weighted var -> index of the owning atom
    pub owner: BTreeMap<String, usize>,
    /// per atom: the `(weighted var index, column)` pairs it owns
    pub owned: Vec<Vec<(usize, usize)>>,
    /// per atom, per tuple: aggregate of the owned variables' weights
    pub weights: Vec<Vec<WeightValue>>,
}

impl TupleWeightAssignment {
    /// The multiset of per-variable weights carried by a tuple, before
    /// aggregation.
    pub fn contributions(&self, inst: &Instance, ranking: &Ranking, atom: usize, tuple: usize) -> Vec<i64> {
        let t = inst.atoms()[atom].rel.tuple(tuple);
        self.owned[atom]
            .iter()
            .map(|&(widx, col)| ranking.weight(widx, t[col]).expect("checked on construction"))
            .collect()
    }
}

/// Owner atom for every weighted variable: the first atom containing it.
pub(crate) fn owner_atoms(ranking: &Ranking, inst: &Instance) -> Vec<Vec<(usize, usize)>> {
    let ids = ranking.var_ids(inst);
    let mut owned = vec![Vec::new(); inst.atoms().len()];
    for (widx, &v) in ids.iter().enumerate() {
        let (a, col) = inst
            .atoms()
            .iter()
            .enumerate()
            .find_map(|(a, atom)| atom.vars.iter().position(|&x| x == v).map(|c| (a, c)))
            .expect("every variable occurs in some atom");
        owned[a].push((widx, col));
    }
    owned
}

pub fn convert_to_tuple_weights(
    inst: &Instance,
    ranking: &Ranking,
) -> Result<TupleWeightAssignment> {
    let owned = owner_atoms(ranking, inst);
    let mut owner = BTreeMap::new();
    for (a, list) in owned.iter().enumerate() {
        for &(widx, _) in list {
            owner.insert(ranking.vars()[widx].clone(), a);
        }
    }
    let weights = inst
        .atoms()
        .iter()
        .zip(&owned)
        .map(|(atom, list)| {
            atom.rel
                .tuples()
                .map(|t| {
                    ranking.aggregate(
                        list.iter()
                            .map(|&(widx, col)| ranking.weight(widx, t[col]).map(|w| (widx, w)))
                            .collect::<Result<Vec<_>>>()?,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TupleWeightAssignment {
        owner,
        owned,
        weights,
    })
}
