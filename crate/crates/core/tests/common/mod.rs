//! Random acyclic instances for integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use jqq::{Aggregate, Atom, Database, DatabaseBuilder, JoinQuery, RankingSpec};

pub struct Case {
    pub q: JoinQuery,
    pub d: Database,
}

pub struct Shape {
    pub max_atoms: usize,
    pub max_n: usize,
    pub max_domain: u64,
}

/// Atoms attach to a random earlier atom and share some of its variables,
/// so every generated query is acyclic.
pub fn random_query<R: Rng>(rng: &mut R, max_atoms: usize) -> JoinQuery {
    let ell = rng.random_range(1..=max_atoms);
    let mut next_var = 0;
    let mut fresh = |k: usize| -> Vec<String> {
        (0..k)
            .map(|_| {
                next_var += 1;
                format!("x{next_var}")
            })
            .collect()
    };
    let mut atoms: Vec<Vec<String>> = Vec::new();
    for i in 0..ell {
        let mut vars = if i == 0 {
            let k = rng.random_range(1..=3);
            fresh(k)
        } else {
            let parent = atoms[rng.random_range(0..i)].clone();
            let k = rng.random_range(0..=parent.len().min(2));
            let mut shared: Vec<String> = parent.choose_multiple(rng, k).cloned().collect();
            let own = rng.random_range(if shared.is_empty() { 1 } else { 0 }..=2);
            shared.extend(fresh(own));
            shared
        };
        vars.shuffle(rng);
        atoms.push(vars);
    }
    let atoms = atoms
        .iter()
        .enumerate()
        .map(|(i, vars)| {
            let vs: Vec<&str> = vars.iter().map(String::as_str).collect();
            Atom::new(format!("R{}", i + 1), &vs)
        })
        .collect();
    JoinQuery::new(atoms)
}

pub fn random_database<R: Rng>(rng: &mut R, q: &JoinQuery, max_n: usize, domain: u64) -> Database {
    let mut b = DatabaseBuilder::new();
    for atom in &q.atoms {
        let n = rng.random_range(1..=max_n);
        let arity = atom.vars.len();
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..arity).map(|_| rng.random_range(0..domain) as i64).collect())
            .collect();
        let cols: Vec<String> = (0..arity).map(|c| format!("c{c}")).collect();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        b.relation(&atom.relation, &cols, rows);
    }
    b.build()
}

/// A random instance whose answer count lies in `[min_answers, max_answers]`.
pub fn random_case<R: Rng>(rng: &mut R, shape: &Shape, min_answers: usize, max_answers: usize) -> Case {
    loop {
        let q = random_query(rng, shape.max_atoms);
        let domain = rng.random_range(2..=shape.max_domain);
        let d = random_database(rng, &q, shape.max_n, domain);
        match jqq::oracle::oracle_answers(&q, &d, Some(max_answers)) {
            Ok(a) if a.len() >= min_answers => return Case { q, d },
            _ => continue,
        }
    }
}

/// Random weighted variables; half the time with explicit weights that may
/// be negative.
pub fn random_ranking<R: Rng>(rng: &mut R, q: &JoinQuery, d: &Database, agg: Aggregate) -> RankingSpec {
    let vars = q.vars();
    let k = rng.random_range(1..=vars.len());
    let chosen: Vec<String> = vars.choose_multiple(rng, k).cloned().collect();
    let names: Vec<&str> = chosen.iter().map(String::as_str).collect();
    let mut spec = RankingSpec::new(agg, &names);
    if rng.random_bool(0.5) {
        let labels: Vec<String> = (0..d.dictionary().len() as u32)
            .map(|id| d.dictionary().render(id))
            .collect();
        for x in &chosen {
            let table: BTreeMap<String, i64> =
                labels.iter().map(|l| (l.clone(), rng.random_range(-20..=20))).collect();
            spec.weights.insert(x.clone(), table);
        }
    }
    spec
}

pub fn ceil_mul(num: u128, den: u128, n: usize) -> usize {
    ((num * n as u128).div_ceil(den)) as usize
}

/// Tries every labeled tree on the edges (Prüfer sequences).
pub fn brute_acyclic(edges: &[u8], nv: usize) -> bool {
    let m = edges.len();
    if m <= 1 {
        return true;
    }
    let trees: Vec<Vec<(usize, usize)>> = if m == 2 {
        vec![vec![(0, 1)]]
    } else {
        let mut out = Vec::new();
        let total = m.pow((m - 2) as u32);
        for code in 0..total {
            let mut seq = Vec::new();
            let mut c = code;
            for _ in 0..m - 2 {
                seq.push(c % m);
                c /= m;
            }
            let mut degree = vec![1; m];
            for &s in &seq {
                degree[s] += 1;
            }
            let mut tree = Vec::new();
            for &s in &seq {
                let leaf = (0..m).find(|&i| degree[i] == 1).unwrap();
                tree.push((leaf, s));
                degree[leaf] -= 1;
                degree[s] -= 1;
            }
            let rest: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
            tree.push((rest[0], rest[1]));
            out.push(tree);
        }
        out
    };
    trees.iter().any(|tree| {
        (0..nv).all(|v| {
            let holders: Vec<usize> = (0..m).filter(|&i| edges[i] >> v & 1 == 1).collect();
            connected(&holders, tree)
        })
    })
}

fn connected(nodes: &[usize], tree: &[(usize, usize)]) -> bool {
    if nodes.len() <= 1 {
        return true;
    }
    let mut seen = vec![nodes[0]];
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in tree {
            for (x, y) in [(a, b), (b, a)] {
                if seen.contains(&x) && !seen.contains(&y) && nodes.contains(&y) {
                    seen.push(y);
                    changed = true;
                }
            }
        }
    }
    seen.len() == nodes.len()
}
