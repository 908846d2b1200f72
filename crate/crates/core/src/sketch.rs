//! ε-sketches of multisets of partial sums.
//!
//! Buckets are runs of equal values grouped greedily in sort order. A bucket
//! whose preceding mass is `s` may absorb another run only while its current
//! mass `B` satisfies `B·(1−ε) ≤ ε·s`, so a threshold falling inside the
//! bucket loses at most an ε fraction of the items below it. Equal values
//! never straddle two buckets.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exec::Count;
use crate::ratio::Fraction;

/// `Up` rounds every value to its bucket maximum (for `<` predicates),
/// `Down` to its bucket minimum (for `>`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchItem {
    pub value: i128,
    pub mult: Count,
    pub source: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bucket {
    pub rep: i128,
    pub mult: Count,
    pub sources: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumSketch {
    pub rounding: Rounding,
    pub buckets: Vec<Bucket>,
}

struct Run {
    value: i128,
    mass: Count,
    sources: Vec<u32>,
}

fn runs(mut items: Vec<SketchItem>, rounding: Rounding) -> Vec<Run> {
    match rounding {
        Rounding::Up => items.sort_by(|a, b| a.value.cmp(&b.value)),
        Rounding::Down => items.sort_by(|a, b| b.value.cmp(&a.value)),
    }
    let mut out: Vec<Run> = Vec::new();
    for it in items {
        match out.last_mut() {
            Some(r) if r.value == it.value => {
                r.mass += it.mult;
                r.sources.push(it.source);
            }
            _ => out.push(Run {
                value: it.value,
                mass: it.mult,
                sources: vec![it.source],
            }),
        }
    }
    out
}

/// Merges runs into buckets given the indices of runs that open a bucket.
fn assemble(runs: Vec<Run>, opens: &[usize], rounding: Rounding) -> SumSketch {
    let mut buckets: Vec<Bucket> = Vec::with_capacity(opens.len());
    for (i, r) in runs.into_iter().enumerate() {
        if opens.binary_search(&i).is_ok() || buckets.is_empty() {
            buckets.push(Bucket {
                rep: r.value,
                mult: r.mass,
                sources: r.sources,
            });
        } else {
            let b = buckets.last_mut().unwrap();
            // runs arrive in rounding order, so the latest is the extreme
            b.rep = r.value;
            b.mult += r.mass;
            b.sources.extend(r.sources);
        }
    }
    SumSketch { rounding, buckets }
}

pub fn epsilon_sketch(items: Vec<SketchItem>, eps: &Fraction, rounding: Rounding) -> Result<SumSketch> {
    if eps.numer() == &0 || eps.numer() >= eps.denom() {
        return Err(Error::EpsilonOutOfRange(eps.to_string()));
    }
    let runs = runs(items, rounding);
    let num = BigUint::from(*eps.numer());
    let rest = BigUint::from(eps.denom() - eps.numer());
    let mut opens = Vec::new();
    let mut before = Count::zero();
    let mut current = Count::zero();
    for (i, r) in runs.iter().enumerate() {
        let absorb = i > 0 && &current * &rest <= &num * &before;
        if !absorb {
            before += &current;
            current.set_zero();
            opens.push(i);
        }
        current += &r.mass;
    }
    Ok(assemble(runs, &opens, rounding))
}

impl SumSketch {
    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn total(&self) -> Count {
        self.buckets.iter().map(|b| &b.mult).sum()
    }

    /// Mass of buckets whose representative lies strictly beyond `lambda`
    /// on the predicate side: `< λ` for `Up`, `> λ` for `Down`.
    pub fn count_beyond(&self, lambda: i128) -> Count {
        self.buckets
            .iter()
            .filter(|b| passes(self.rounding, b.rep, lambda))
            .map(|b| &b.mult)
            .sum()
    }
}

pub(crate) fn passes(rounding: Rounding, value: i128, lambda: i128) -> bool {
    match rounding {
        Rounding::Up => value.cmp(&lambda) == Ordering::Less,
        Rounding::Down => value.cmp(&lambda) == Ordering::Greater,
    }
}

/// Exact `cnt_<` (for `Up`) or `cnt_>` (for `Down`) of a multiset.
pub fn count_items_beyond(items: &[SketchItem], rounding: Rounding, lambda: i128) -> Count {
    items
        .iter()
        .filter(|i| passes(rounding, i.value, lambda))
        .map(|i| &i.mult)
        .sum()
}

/// `⌈log_{1+ε} m⌉` for `m ≥ 1`.
pub fn log_bound(m: &Count, eps: &Fraction) -> u64 {
    let m = m.to_string().parse::<f64>().unwrap_or(f64::MAX);
    let e = crate::ratio::to_f64(eps);
    (m.ln() / e.ln_1p()).ceil().max(0.0) as u64
}
