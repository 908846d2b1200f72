//! Node relations over a join tree: join groups, semijoin reduction,
//! counting by message passing, and answer materialization.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use crate::data::ValueId;
use crate::error::{Error, Result};
use crate::instance::{Instance, VarId};
use crate::plan::JoinTree;

/// Exact answer counts.
pub type Count = BigUint;

/// Child link of a tuple whose child join group does not exist.
pub const NO_GROUP: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct NodeRelation {
    pub node: usize,
    /// Column variables.
    pub vars: Vec<VarId>,
    len: usize,
    rows: Vec<ValueId>,
    /// Index of each tuple in the atom relation it came from.
    pub src: Vec<u32>,
    /// Columns holding the variables shared with the parent.
    pub key_cols: Vec<usize>,
    group_of: Vec<u32>,
    group_start: Vec<u32>,
    group_items: Vec<u32>,
    group_index: FxHashMap<Box<[ValueId]>, u32>,
    /// `child_groups[k][t]`: group of the k-th child joining tuple `t`.
    pub child_groups: Vec<Vec<u32>>,
}

impl NodeRelation {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn tuple(&self, t: usize) -> &[ValueId] {
        let a = self.arity();
        &self.rows[t * a..(t + 1) * a]
    }

    pub fn group_count(&self) -> usize {
        self.group_start.len() - 1
    }

    pub fn group_of(&self, t: usize) -> u32 {
        self.group_of[t]
    }

    pub fn group(&self, g: u32) -> &[u32] {
        let g = g as usize;
        &self.group_items[self.group_start[g] as usize..self.group_start[g + 1] as usize]
    }

    /// Group whose key equals `key`, if any.
    pub fn lookup(&self, key: &[ValueId]) -> Option<u32> {
        self.group_index.get(key).copied()
    }

    pub fn key(&self, t: usize) -> Vec<ValueId> {
        let row = self.tuple(t);
        self.key_cols.iter().map(|&c| row[c]).collect()
    }
}

/// Rows of one tree node before grouping.
#[derive(Clone, Debug, Default)]
pub struct NodeRows {
    pub vars: Vec<VarId>,
    pub len: usize,
    pub rows: Vec<ValueId>,
    pub src: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct TreeRelations {
    pub tree: JoinTree,
    pub nodes: Vec<NodeRelation>,
    nvars: usize,
}

impl TreeRelations {
    /// One relation per tree node; the artificial root holds the empty tuple.
    pub fn materialize(inst: &Instance, tree: &JoinTree) -> TreeRelations {
        let rows = tree
            .nodes
            .iter()
            .map(|n| match n.atom {
                None => NodeRows {
                    vars: Vec::new(),
                    len: 1,
                    rows: Vec::new(),
                    src: vec![0],
                },
                Some(a) => {
                    let atom = &inst.atoms()[a];
                    NodeRows {
                        vars: atom.vars.clone(),
                        len: atom.rel.len(),
                        rows: atom.rel.flat().to_vec(),
                        src: (0..atom.rel.len() as u32).collect(),
                    }
                }
            })
            .collect();
        TreeRelations::from_rows(tree.clone(), rows, inst.vars().len())
    }

    pub fn from_rows(tree: JoinTree, rows: Vec<NodeRows>, nvars: usize) -> TreeRelations {
        let mut nodes: Vec<NodeRelation> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| group_rows(i, &tree, r))
            .collect();
        for p in 0..nodes.len() {
            let mut links = Vec::with_capacity(tree.nodes[p].children.len());
            for &c in &tree.nodes[p].children {
                let child = &nodes[c];
                let cols: Vec<usize> = child
                    .key_cols
                    .iter()
                    .map(|&k| {
                        let v = child.vars[k];
                        nodes[p].vars.iter().position(|&x| x == v).unwrap()
                    })
                    .collect();
                let parent = &nodes[p];
                let mut key = Vec::with_capacity(cols.len());
                let link: Vec<u32> = (0..parent.len)
                    .map(|t| {
                        let row = parent.tuple(t);
                        key.clear();
                        key.extend(cols.iter().map(|&c| row[c]));
                        child.lookup(&key).unwrap_or(NO_GROUP)
                    })
                    .collect();
                links.push(link);
            }
            nodes[p].child_groups = links;
        }
        TreeRelations { tree, nodes, nvars }
    }

    /// Charges each variable of `var_ids` to the first node in BFS order
    /// containing it. Per node: `(index into var_ids, column)`.
    pub fn charge(&self, var_ids: &[VarId]) -> Vec<Vec<(usize, usize)>> {
        let mut owned = vec![Vec::new(); self.nodes.len()];
        let order = self.tree.bfs_order();
        for (i, v) in var_ids.iter().enumerate() {
            for &u in &order {
                if let Some(col) = self.nodes[u].vars.iter().position(|x| x == v) {
                    owned[u].push((i, col));
                    break;
                }
            }
        }
        owned
    }

    pub fn root(&self) -> &NodeRelation {
        &self.nodes[self.tree.root]
    }

    pub fn total_size(&self) -> usize {
        self.nodes.iter().map(|n| n.len).sum()
    }

    /// Keeps exactly the tuples that extend to a full answer.
    pub fn full_reduce(&self) -> TreeRelations {
        let n = self.nodes.len();
        let mut alive: Vec<Vec<bool>> = self.nodes.iter().map(|r| vec![true; r.len]).collect();
        let mut group_alive: Vec<Vec<bool>> = vec![Vec::new(); n];
        for u in self.tree.bottom_up() {
            let rel = &self.nodes[u];
            for (k, &c) in self.tree.nodes[u].children.iter().enumerate() {
                for t in 0..rel.len {
                    let g = rel.child_groups[k][t];
                    if g == NO_GROUP || !group_alive[c][g as usize] {
                        alive[u][t] = false;
                    }
                }
            }
            let mut ga = vec![false; rel.group_count()];
            for t in 0..rel.len {
                if alive[u][t] {
                    ga[rel.group_of[t] as usize] = true;
                }
            }
            group_alive[u] = ga;
        }
        for u in self.tree.bfs_order() {
            let rel = &self.nodes[u];
            for (k, &c) in self.tree.nodes[u].children.iter().enumerate() {
                let mut used = vec![false; self.nodes[c].group_count()];
                for t in 0..rel.len {
                    if alive[u][t] {
                        used[rel.child_groups[k][t] as usize] = true;
                    }
                }
                let child = &self.nodes[c];
                for t in 0..child.len {
                    if !used[child.group_of[t] as usize] {
                        alive[c][t] = false;
                    }
                }
            }
        }
        if alive.iter().all(|a| a.iter().all(|&x| x)) {
            return self.clone();
        }
        let rows = self
            .nodes
            .iter()
            .zip(&alive)
            .map(|(rel, keep)| {
                let mut out = NodeRows {
                    vars: rel.vars.clone(),
                    ..NodeRows::default()
                };
                for t in 0..rel.len {
                    if keep[t] {
                        out.rows.extend_from_slice(rel.tuple(t));
                        out.src.push(rel.src[t]);
                        out.len += 1;
                    }
                }
                out
            })
            .collect();
        TreeRelations::from_rows(self.tree.clone(), rows, self.nvars)
    }

    /// `cnt(t)` for every tuple: the number of partial answers of its subtree.
    pub fn tuple_counts(&self) -> Vec<Vec<Count>> {
        let mut cnt: Vec<Vec<Count>> = vec![Vec::new(); self.nodes.len()];
        let mut group_cnt: Vec<Vec<Count>> = vec![Vec::new(); self.nodes.len()];
        for u in self.tree.bottom_up() {
            let rel = &self.nodes[u];
            let mut c = vec![Count::one(); rel.len];
            for (k, &ch) in self.tree.nodes[u].children.iter().enumerate() {
                for (t, ct) in c.iter_mut().enumerate() {
                    let g = rel.child_groups[k][t];
                    if g == NO_GROUP {
                        ct.set_zero();
                    } else if !ct.is_zero() {
                        *ct *= &group_cnt[ch][g as usize];
                    }
                }
            }
            let mut gc = vec![Count::zero(); rel.group_count()];
            for (t, ct) in c.iter().enumerate() {
                gc[rel.group_of[t] as usize] += ct;
            }
            cnt[u] = c;
            group_cnt[u] = gc;
        }
        cnt
    }

    pub fn count(&self) -> Count {
        let cnt = self.tuple_counts();
        cnt[self.tree.root].iter().sum()
    }

    /// All answers as assignments over the instance's variables.
    pub fn materialize_answers(&self, budget: Option<usize>) -> Result<Vec<Vec<ValueId>>> {
        let mut out = Vec::new();
        let mut assign = vec![0 as ValueId; self.nvars];
        let root = self.tree.root;
        let mut pending: Vec<(usize, u32)> = Vec::new();
        for t in 0..self.nodes[root].len {
            self.place(root, t, &mut assign, &mut pending);
            self.expand(&mut pending, &mut assign, &mut out, budget)?;
            let k = self.tree.nodes[root].children.len();
            pending.truncate(pending.len() - k);
        }
        Ok(out)
    }

    fn place(&self, u: usize, t: usize, assign: &mut [ValueId], pending: &mut Vec<(usize, u32)>) {
        let rel = &self.nodes[u];
        for (c, &v) in rel.vars.iter().enumerate() {
            assign[v] = rel.tuple(t)[c];
        }
        for (k, &ch) in self.tree.nodes[u].children.iter().enumerate() {
            pending.push((ch, rel.child_groups[k][t]));
        }
    }

    fn expand(
        &self,
        pending: &mut Vec<(usize, u32)>,
        assign: &mut Vec<ValueId>,
        out: &mut Vec<Vec<ValueId>>,
        budget: Option<usize>,
    ) -> Result<()> {
        let Some((u, g)) = pending.pop() else {
            if let Some(b) = budget {
                if out.len() >= b {
                    return Err(Error::OracleBudget(b));
                }
            }
            out.push(assign.clone());
            return Ok(());
        };
        if g != NO_GROUP {
            let k = self.tree.nodes[u].children.len();
            for &t in self.nodes[u].group(g) {
                self.place(u, t as usize, assign, pending);
                self.expand(pending, assign, out, budget)?;
                pending.truncate(pending.len() - k);
            }
        }
        pending.push((u, g));
        Ok(())
    }
}

fn group_rows(node: usize, tree: &JoinTree, r: NodeRows) -> NodeRelation {
    let shared = tree.shared_with_parent(node);
    let key_cols: Vec<usize> = shared
        .iter()
        .map(|v| r.vars.iter().position(|x| x == v).unwrap())
        .collect();
    let arity = r.vars.len();
    let mut group_index: FxHashMap<Box<[ValueId]>, u32> = FxHashMap::default();
    let mut group_of = Vec::with_capacity(r.len);
    let mut sizes: Vec<u32> = Vec::new();
    let mut key = Vec::with_capacity(key_cols.len());
    for t in 0..r.len {
        let row = &r.rows[t * arity..(t + 1) * arity];
        key.clear();
        key.extend(key_cols.iter().map(|&c| row[c]));
        let next = group_index.len() as u32;
        let g = *group_index.entry(key.clone().into_boxed_slice()).or_insert(next);
        if g == next {
            sizes.push(0);
        }
        sizes[g as usize] += 1;
        group_of.push(g);
    }
    let mut group_start = Vec::with_capacity(sizes.len() + 1);
    group_start.push(0u32);
    for s in &sizes {
        group_start.push(group_start.last().unwrap() + s);
    }
    let mut fill = group_start.clone();
    let mut group_items = vec![0u32; r.len];
    for (t, &g) in group_of.iter().enumerate() {
        group_items[fill[g as usize] as usize] = t as u32;
        fill[g as usize] += 1;
    }
    NodeRelation {
        node,
        vars: r.vars,
        len: r.len,
        rows: r.rows,
        src: r.src,
        key_cols,
        group_of,
        group_start,
        group_items,
        group_index,
        child_groups: Vec::new(),
    }
}

/// Join tree with artificial root, materialized and fully reduced.
pub fn reduced_relations(inst: &Instance) -> Result<TreeRelations> {
    let h = crate::plan::Hypergraph::of_instance(inst);
    let tree = crate::plan::add_artificial_root(&crate::plan::join_tree(&h)?);
    Ok(TreeRelations::materialize(inst, &tree).full_reduce())
}

pub fn count_answers(inst: &Instance) -> Result<Count> {
    Ok(reduced_relations(inst)?.count())
}

pub fn materialize_answers(inst: &Instance, budget: Option<usize>) -> Result<Vec<Vec<ValueId>>> {
    reduced_relations(inst)?.materialize_answers(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatabaseBuilder, JoinQuery};
    use crate::gen::fig1;

    #[test]
    fn figure_one_counts() {
        let (q, d, _) = fig1();
        let inst = Instance::bind(&q, &d).unwrap();
        let rels = reduced_relations(&inst).unwrap();
        assert_eq!(rels.count(), Count::from(13u32));
        // grouping: S by x1, T by x2, U by x4 under root R
        let h = crate::plan::Hypergraph::of_instance(&inst);
        let t = crate::plan::join_tree(&h).unwrap();
        let r = TreeRelations::materialize(&inst, &crate::plan::add_artificial_root(&t));
        assert_eq!(r.nodes[1].key_cols, vec![0]);
        assert_eq!(r.nodes[2].key_cols, vec![0]);
        assert_eq!(r.nodes[3].key_cols, vec![0]);
        let root_counts = &r.full_reduce().tuple_counts()[0];
        assert_eq!(root_counts, &vec![Count::from(9u32), Count::from(4u32)]);
    }

    #[test]
    fn artificial_root_has_one_group() {
        let (q, d, _) = fig1();
        let inst = Instance::bind(&q, &d).unwrap();
        let rels = reduced_relations(&inst).unwrap();
        let old_root = rels.tree.nodes[rels.tree.root].children[0];
        assert_eq!(rels.nodes[old_root].group_count(), 1);
        assert_eq!(rels.root().len(), 1);
    }

    #[test]
    fn dangling_tuples_are_removed() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a", "b"], [[1i64, 2], [3, 4]]);
        b.relation("S", &["b", "c"], [[2i64, 5], [9, 9]]);
        let d = b.build();
        let inst = Instance::bind(&JoinQuery::parse("R(x,y), S(y,z)").unwrap(), &d).unwrap();
        let rels = reduced_relations(&inst).unwrap();
        assert!(rels.nodes.iter().filter(|n| n.arity() > 0).all(|n| n.len() == 1));
        let again = rels.full_reduce();
        assert_eq!(again.total_size(), rels.total_size());
    }

    #[test]
    fn empty_relation_counts_zero() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a"], [[1i64]]);
        b.relation("S", &["a"], Vec::<[i64; 1]>::new());
        let d = b.build();
        let inst = Instance::bind(&JoinQuery::parse("R(x), S(y)").unwrap(), &d).unwrap();
        assert_eq!(count_answers(&inst).unwrap(), Count::zero());
        assert!(materialize_answers(&inst, None).unwrap().is_empty());
    }

    #[test]
    fn products_materialize() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a"], [[1i64], [2], [3]]);
        b.relation("S", &["a"], [[4i64], [5], [6]]);
        let d = b.build();
        let inst = Instance::bind(&JoinQuery::parse("R(x), S(y)").unwrap(), &d).unwrap();
        let ans = materialize_answers(&inst, None).unwrap();
        assert_eq!(ans.len(), 9);
        assert!(materialize_answers(&inst, Some(5)).is_err());
        let single = Instance::bind(&JoinQuery::parse("R(x)").unwrap(), &d).unwrap();
        assert_eq!(materialize_answers(&single, None).unwrap().len(), 3);
    }
}
