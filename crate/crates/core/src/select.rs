//! Deterministic selection: median of medians, and the weighted median built
//! on top of it.

use std::cmp::Ordering;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exec::Count;

const SMALL: usize = 10;

fn partition3<F>(idx: &[usize], pivot: usize, cmp: &F) -> (Vec<usize>, Vec<usize>, Vec<usize>)
where
    F: Fn(usize, usize) -> Ordering,
{
    let (mut lo, mut eq, mut hi) = (Vec::new(), Vec::new(), Vec::new());
    for &i in idx {
        match cmp(i, pivot) {
            Ordering::Less => lo.push(i),
            Ordering::Equal => eq.push(i),
            Ordering::Greater => hi.push(i),
        }
    }
    (lo, eq, hi)
}

/// Median of medians of groups of five.
fn median_of_medians<F>(idx: &[usize], cmp: &F) -> usize
where
    F: Fn(usize, usize) -> Ordering,
{
    let medians: Vec<usize> = idx
        .chunks(5)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_by(|&a, &b| cmp(a, b));
            c[c.len() / 2]
        })
        .collect();
    let k = medians.len() / 2;
    select_rank(&medians, k, cmp)
}

/// Element of rank `k` (0-based) among `idx` under `cmp`, in linear time.
pub fn select_rank<F>(idx: &[usize], k: usize, cmp: &F) -> usize
where
    F: Fn(usize, usize) -> Ordering,
{
    assert!(k < idx.len());
    let mut cur = idx.to_vec();
    let mut k = k;
    loop {
        if cur.len() <= SMALL {
            cur.sort_by(|&a, &b| cmp(a, b));
            return cur[k];
        }
        let p = median_of_medians(&cur, cmp);
        let (lo, eq, hi) = partition3(&cur, p, cmp);
        if k < lo.len() {
            cur = lo;
        } else if k < lo.len() + eq.len() {
            return p;
        } else {
            k -= lo.len() + eq.len();
            cur = hi;
        }
    }
}

/// Index of the element at position `⌊Σβ/2⌋` of the multiset where element
/// `i` occurs `beta[i]` times, ordered by `cmp`.
pub fn weighted_median<F>(beta: &[Count], cmp: F) -> Result<usize>
where
    F: Fn(usize, usize) -> Ordering,
{
    if beta.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: Count = beta.iter().sum();
    let pos = total >> 1u32;
    Ok(weighted_select(beta, &pos, &cmp))
}

/// Index of the element at weighted position `pos`.
pub fn weighted_select<F>(beta: &[Count], pos: &Count, cmp: &F) -> usize
where
    F: Fn(usize, usize) -> Ordering,
{
    let mut cur: Vec<usize> = (0..beta.len()).collect();
    let mut pos = pos.clone();
    loop {
        if cur.len() <= SMALL {
            cur.sort_by(|&a, &b| cmp(a, b));
            let mut acc = Count::zero();
            for &i in &cur {
                acc += &beta[i];
                if pos < acc {
                    return i;
                }
            }
            return *cur.last().expect("non-empty");
        }
        let p = median_of_medians(&cur, cmp);
        let (lo, eq, hi) = partition3(&cur, p, cmp);
        let wl: Count = lo.iter().map(|&i| &beta[i]).sum();
        if pos < wl {
            cur = lo;
            continue;
        }
        let we: Count = eq.iter().map(|&i| &beta[i]).sum();
        let upto = &wl + &we;
        if pos < upto || hi.is_empty() {
            return eq[0];
        }
        pos -= upto;
        cur = hi;
    }
}
