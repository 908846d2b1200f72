//! Trimmings: rewrite an instance so that its answers correspond to the
//! answers satisfying an inequality on the ranking weight.

mod lossy;
mod partition;
mod sum;

use std::sync::Arc;

pub use lossy::{lossy_trim_sum, LossyReport};
pub use partition::{partitions, trim_lex, trim_minmax, Cond};
pub use sum::trim_sum_exact;

use crate::data::{Database, JoinQuery, Relation, ValueId};
use crate::error::Result;
use crate::exec::Count;
use crate::instance::{BoundAtom, Instance};
use crate::par::ExecMode;
use crate::predicate::Predicate;
use crate::rank::{Aggregate, Ranking};
use crate::ratio::Fraction;

#[derive(Clone, Debug)]
pub struct TrimOutput {
    pub instance: Instance,
    /// Number of leading variables shared with the trimmed input.
    pub base_vars: usize,
    /// Whether answers may have been dropped (ε-lossy trims).
    pub lossy: bool,
    /// Σ σ_m over surviving root tuples, for lossy trims.
    pub sigma_count: Option<Count>,
}

impl TrimOutput {
    pub(crate) fn exact(instance: Instance, base_vars: usize) -> Self {
        TrimOutput {
            instance,
            base_vars,
            lossy: false,
            sigma_count: None,
        }
    }

    /// Drops the variables added by the trim.
    pub fn project<'a>(&self, answer: &'a [ValueId]) -> &'a [ValueId] {
        &answer[..self.base_vars]
    }

    pub fn to_parts(&self) -> (JoinQuery, Database) {
        self.instance.to_parts()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrimMode {
    Exact,
    /// ε-lossy SUM trims; other aggregates stay exact.
    Lossy(Fraction),
}

pub fn trim(inst: &Instance, ranking: &Ranking, pred: &Predicate, mode: TrimMode, exec: ExecMode) -> Result<TrimOutput> {
    pred.expect_agg(ranking.agg())?;
    match (ranking.agg(), mode) {
        (Aggregate::Sum, TrimMode::Lossy(eps)) => Ok(lossy_trim_sum(inst, ranking, pred, &eps, exec)?.0),
        (Aggregate::Sum, TrimMode::Exact) => trim_sum_exact(inst, ranking, pred),
        (Aggregate::Lex, _) => trim_lex(inst, ranking, pred),
        _ => trim_minmax(inst, ranking, pred),
    }
}

/// Identity (`true`) or empty (`false`) result of a constant predicate.
pub(crate) fn constant_output(inst: &Instance, keep: bool) -> TrimOutput {
    let instance = if keep {
        inst.clone()
    } else {
        let atoms = inst
            .atoms()
            .iter()
            .map(|a| BoundAtom {
                name: a.name.clone(),
                vars: a.vars.clone(),
                rel: Arc::new(Relation::from_flat(a.rel.columns().to_vec(), 0, Vec::new())),
            })
            .collect();
        Instance::from_parts(inst.vars().to_vec(), atoms, inst.dictionary().clone())
    };
    TrimOutput::exact(instance, inst.vars().len())
}

/// `count` fresh variable names of the form `#<prefix><k>`.
pub(crate) fn fresh_names(inst: &Instance, prefix: &str, count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let name = format!("#{prefix}{k}");
        if inst.var_id(&name).is_none() {
            out.push(name);
        }
        k += 1;
    }
    out
}

/// Weight of weighted variable `widx` at the columns where it occurs.
pub(crate) fn occurrences(inst: &Instance, ranking: &Ranking) -> Vec<Vec<(usize, usize)>> {
    let ids = ranking.var_ids(inst);
    inst.atoms()
        .iter()
        .map(|a| {
            ids.iter()
                .enumerate()
                .filter_map(|(widx, v)| a.vars.iter().position(|x| x == v).map(|c| (widx, c)))
                .collect()
        })
        .collect()
}
