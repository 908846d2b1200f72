//! Exact SUM trims when the weighted variables sit on one join-tree node or
//! on two adjacent ones.
//!
//! Two-node case, parent `R` and child `S`: within each join group of `S`
//! the tuples are sorted by their partial sum. A parent tuple qualifies with
//! a prefix of that order; the prefix is split into aligned dyadic blocks
//! and the parent is copied once per block. Every child tuple is copied once
//! per level, carrying the id of its block. A fresh variable `v` on both
//! nodes joins parent copies to exactly the children of their block.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::data::{Relation, ValueId};
use crate::error::{Error, Result};
use crate::instance::{BoundAtom, Instance, VarId};
use crate::plan::{adjacent_uw_tree, classify_sum_tractability, Hypergraph};
use crate::predicate::{Direction, Predicate};
use crate::rank::{Aggregate, Ranking};
use crate::trim::{constant_output, fresh_names, TrimOutput};

fn partial_sum(ranking: &Ranking, cols: &[(usize, usize)], row: &[ValueId]) -> Result<i128> {
    let mut s = 0i128;
    for &(widx, col) in cols {
        s += ranking.weight(widx, row[col])? as i128;
    }
    Ok(s)
}

fn satisfies(dir: Direction, sum: i128, lambda: i128) -> bool {
    match dir {
        Direction::Lt => sum < lambda,
        Direction::Gt => sum > lambda,
    }
}

pub fn trim_sum_exact(inst: &Instance, ranking: &Ranking, pred: &Predicate) -> Result<TrimOutput> {
    pred.expect_agg(Aggregate::Sum)?;
    if let Some(keep) = pred.constant() {
        return Ok(constant_output(inst, keep));
    }
    if ranking.vars().is_empty() {
        return Ok(constant_output(inst, pred.holds(&ranking.identity())));
    }
    let lambda = pred.scalar_bound()? as i128;
    let dir = pred.direction();
    let uw: Vec<VarId> = ranking.var_ids(inst);
    let h = Hypergraph::of_instance(inst);
    let verdict = classify_sum_tractability(&h, &uw);
    if !verdict.verdict.is_tractable() {
        return Err(Error::NotTractable(verdict.to_string()));
    }
    let adj = adjacent_uw_tree(&h, &uw)?;
    let cols_in = |atom: usize, skip: &[VarId]| -> Vec<(usize, usize)> {
        uw.iter()
            .enumerate()
            .filter(|(_, v)| !skip.contains(v))
            .filter_map(|(widx, v)| inst.atoms()[atom].vars.iter().position(|x| x == v).map(|c| (widx, c)))
            .collect()
    };
    let r = adj.first;
    let Some(s) = adj.second else {
        // one node: filter it
        let cols = cols_in(r, &[]);
        let atom = &inst.atoms()[r];
        let mut flat = Vec::new();
        let mut len = 0;
        for t in atom.rel.tuples() {
            if satisfies(dir, partial_sum(ranking, &cols, t)?, lambda) {
                flat.extend_from_slice(t);
                len += 1;
            }
        }
        let mut atoms = inst.atoms().to_vec();
        atoms[r].rel = Arc::new(Relation::from_flat(atom.rel.columns().to_vec(), len, flat));
        return Ok(TrimOutput::exact(
            Instance::from_parts(inst.vars().to_vec(), atoms, inst.dictionary().clone()),
            inst.vars().len(),
        ));
    };
    let (ra, sa) = (&inst.atoms()[r], &inst.atoms()[s]);
    let r_cols = cols_in(r, &[]);
    let r_vars: Vec<VarId> = ra.vars.clone();
    let s_cols = cols_in(s, &r_vars);
    let shared: Vec<VarId> = sa.vars.iter().copied().filter(|v| r_vars.contains(v)).collect();
    let s_key: Vec<usize> = shared.iter().map(|v| sa.vars.iter().position(|x| x == v).unwrap()).collect();
    let r_key: Vec<usize> = shared.iter().map(|v| ra.vars.iter().position(|x| x == v).unwrap()).collect();

    // child groups, sorted by partial sum in predicate order
    let mut index: FxHashMap<Vec<ValueId>, usize> = FxHashMap::default();
    let mut groups: Vec<Vec<(i128, usize)>> = Vec::new();
    for (t, row) in sa.rel.tuples().enumerate() {
        let key: Vec<ValueId> = s_key.iter().map(|&c| row[c]).collect();
        let next = groups.len();
        let g = *index.entry(key).or_insert(next);
        if g == next {
            groups.push(Vec::new());
        }
        groups[g].push((partial_sum(ranking, &s_cols, row)?, t));
    }
    for g in &mut groups {
        match dir {
            Direction::Lt => g.sort_unstable(),
            Direction::Gt => g.sort_unstable_by(|a, b| b.cmp(a)),
        }
    }
    // block ids: base[g][level] + block number
    let mut base: Vec<Vec<u64>> = Vec::with_capacity(groups.len());
    let mut next_id: u64 = 0;
    for g in &groups {
        let m = g.len() as u64;
        let levels = 64 - m.leading_zeros();
        let mut b = Vec::with_capacity(levels as usize);
        for l in 0..levels {
            b.push(next_id);
            next_id += m.div_ceil(1 << l);
        }
        base.push(b);
    }
    if next_id > ValueId::MAX as u64 {
        return Err(Error::QuerySpec("trim output exceeds the value id space".into()));
    }

    let vname = fresh_names(inst, "v", 1).pop().unwrap();
    let mut vars = inst.vars().to_vec();
    vars.push(vname.clone());
    let v = vars.len() - 1;

    let mut s_flat = Vec::new();
    let mut s_len = 0;
    for (g, members) in groups.iter().enumerate() {
        for (i, &(_, t)) in members.iter().enumerate() {
            let row = sa.rel.tuple(t);
            for (l, &b) in base[g].iter().enumerate() {
                s_flat.extend_from_slice(row);
                s_flat.push((b + (i as u64 >> l)) as ValueId);
                s_len += 1;
            }
        }
    }

    let mut r_flat = Vec::new();
    let mut r_len = 0;
    let mut key = Vec::with_capacity(r_key.len());
    for row in ra.rel.tuples() {
        key.clear();
        key.extend(r_key.iter().map(|&c| row[c]));
        let Some(&g) = index.get(&key) else { continue };
        let members = &groups[g];
        let rest = lambda - partial_sum(ranking, &r_cols, row)?;
        let p = members.partition_point(|&(w, _)| satisfies(dir, w, rest));
        let mut pos = 0usize;
        for l in (0..base[g].len()).rev() {
            if p & (1 << l) != 0 {
                r_flat.extend_from_slice(row);
                r_flat.push((base[g][l] + (pos >> l) as u64) as ValueId);
                r_len += 1;
                pos += 1 << l;
            }
        }
    }

    let mut atoms = inst.atoms().to_vec();
    let extend = |atom: &BoundAtom, len: usize, flat: Vec<ValueId>| {
        let mut columns = atom.rel.columns().to_vec();
        columns.push(vname.clone());
        let mut avars = atom.vars.clone();
        avars.push(v);
        BoundAtom {
            name: atom.name.clone(),
            vars: avars,
            rel: Arc::new(Relation::from_flat(columns, len, flat)),
        }
    };
    atoms[r] = extend(ra, r_len, r_flat);
    atoms[s] = extend(sa, s_len, s_flat);
    Ok(TrimOutput::exact(
        Instance::from_parts(vars, atoms, inst.dictionary().clone()),
        inst.vars().len(),
    ))
}
