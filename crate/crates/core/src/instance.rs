//! A join query bound to its database: one relation per atom, distinct
//! variables per atom, variables addressed by dense ids.
//!
//! Every algorithm in the crate runs on [`Instance`]s. Trimmings produce new
//! instances whose variable list extends the input's, so the original
//! variables always form a prefix.

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::data::{Atom, Database, Dictionary, JoinQuery, Relation, ValueId};
use crate::error::Result;

pub type VarId = usize;

#[derive(Clone, Debug)]
pub struct BoundAtom {
    pub name: String,
    /// Distinct variables; column `i` of `rel` holds `vars[i]`.
    pub vars: Vec<VarId>,
    pub rel: Arc<Relation>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    vars: Vec<String>,
    index: FxHashMap<String, VarId>,
    atoms: Vec<BoundAtom>,
    dict: Arc<Dictionary>,
}

impl Instance {
    pub fn bind(q: &JoinQuery, d: &Database) -> Result<Instance> {
        q.validate(d)?;
        let vars = q.vars();
        let index: FxHashMap<String, VarId> =
            vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut names: FxHashSet<String> = FxHashSet::default();
        let mut atoms = Vec::with_capacity(q.atoms.len());
        for atom in &q.atoms {
            let rel = d.relation(&atom.relation).expect("validated");
            let mut name = atom.relation.clone();
            let mut k = 1;
            while !names.insert(name.clone()) {
                name = format!("{}_{}", atom.relation, k);
                k += 1;
            }
            let (ids, rel) = normalize_atom(atom, rel, &index);
            atoms.push(BoundAtom {
                name,
                vars: ids,
                rel,
            });
        }
        Ok(Instance {
            vars,
            index,
            atoms,
            dict: d.dictionary().clone(),
        })
    }

    pub(crate) fn from_parts(vars: Vec<String>, atoms: Vec<BoundAtom>, dict: Arc<Dictionary>) -> Self {
        let index = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Instance {
            vars,
            index,
            atoms,
            dict,
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn atoms(&self) -> &[BoundAtom] {
        &self.atoms
    }

    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    /// Total tuple count over atoms.
    pub fn size(&self) -> usize {
        self.atoms.iter().map(|a| a.rel.len()).sum()
    }

    /// Converts back to a query and database; relation symbols are the atom names.
    pub fn to_parts(&self) -> (JoinQuery, Database) {
        let mut db = Database::new(self.dict.clone());
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                db.insert(a.name.clone(), a.rel.clone());
                Atom {
                    relation: a.name.clone(),
                    vars: a.vars.iter().map(|&v| self.vars[v].clone()).collect(),
                }
            })
            .collect();
        (JoinQuery { atoms }, db)
    }

    /// Positions of `targets` within this instance's variable list.
    pub fn positions_of(&self, targets: &[String]) -> Option<Vec<VarId>> {
        targets.iter().map(|t| self.var_id(t)).collect()
    }
}

fn normalize_atom(
    atom: &Atom,
    rel: &Arc<Relation>,
    index: &FxHashMap<String, VarId>,
) -> (Vec<VarId>, Arc<Relation>) {
    let mut ids: Vec<VarId> = Vec::new();
    let mut first_pos: Vec<usize> = Vec::new();
    // (position, position of first occurrence) for repeats
    let mut repeats: Vec<(usize, usize)> = Vec::new();
    for (pos, v) in atom.vars.iter().enumerate() {
        let id = index[v];
        match ids.iter().position(|&x| x == id) {
            Some(k) => repeats.push((pos, first_pos[k])),
            None => {
                ids.push(id);
                first_pos.push(pos);
            }
        }
    }
    if repeats.is_empty() {
        return (ids, rel.clone());
    }
    let columns: Vec<String> = first_pos.iter().map(|&p| rel.columns()[p].clone()).collect();
    let mut flat: Vec<ValueId> = Vec::new();
    let mut len = 0;
    for t in rel.tuples() {
        if repeats.iter().all(|&(p, q)| t[p] == t[q]) {
            flat.extend(first_pos.iter().map(|&p| t[p]));
            len += 1;
        }
    }
    (ids, Arc::new(Relation::from_flat(columns, len, flat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatabaseBuilder;

    #[test]
    fn repeated_variables_filter_and_project() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a", "b", "c"], [[1i64, 1, 5], [1, 2, 5], [3, 3, 6]]);
        let db = b.build();
        let q = JoinQuery::parse("R(x,x,y)").unwrap();
        let inst = Instance::bind(&q, &db).unwrap();
        let a = &inst.atoms()[0];
        assert_eq!(a.vars, vec![0, 1]);
        assert_eq!(a.rel.len(), 2);
        assert_eq!(a.rel.arity(), 2);
    }

    #[test]
    fn self_joined_atoms_get_distinct_names() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a", "b"], [[1i64, 2]]);
        let db = b.build();
        let q = JoinQuery::parse("R(x,y), R(y,z)").unwrap();
        let inst = Instance::bind(&q, &db).unwrap();
        let (q2, d2) = inst.to_parts();
        assert!(q2.is_self_join_free());
        assert_eq!(d2.len(), 2);
    }
}
