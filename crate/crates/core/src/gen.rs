//! Deterministic instance generators for tests and benchmarks.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Atom, Database, DatabaseBuilder, JoinQuery};
use crate::error::{Error, Result};
use crate::rank::{Aggregate, RankingSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `R1(x0,x1), R2(x1,x2), …`
    Path(usize),
    /// `R1(x0,x1), R2(x0,x2), …`
    Star(usize),
    /// `Ri(x⌊i/2⌋, xi)` for i = 1..ℓ.
    BinaryTree(usize),
    /// `R1(x1), R2(x2), …`: a cross product.
    Product(usize),
    Fig1,
}

impl Shape {
    pub fn atoms(self) -> usize {
        match self {
            Shape::Path(l) | Shape::Star(l) | Shape::BinaryTree(l) | Shape::Product(l) => l,
            Shape::Fig1 => 4,
        }
    }

    pub fn query(self) -> JoinQuery {
        let bin = |i: usize, a: usize, b: usize| Atom::new(format!("R{i}"), &[x(a).as_str(), x(b).as_str()]);
        let atoms = match self {
            Shape::Path(l) => (1..=l).map(|i| bin(i, i - 1, i)).collect(),
            Shape::Star(l) => (1..=l).map(|i| bin(i, 0, i)).collect(),
            Shape::BinaryTree(l) => (1..=l).map(|i| bin(i, i / 2, i)).collect(),
            Shape::Product(l) => (1..=l).map(|i| Atom::new(format!("R{i}"), &[x(i).as_str()])).collect(),
            Shape::Fig1 => return fig1().0,
        };
        JoinQuery::new(atoms)
    }
}

fn x(i: usize) -> String {
    format!("x{i}")
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Shape> {
        if s == "fig1" {
            return Ok(Shape::Fig1);
        }
        let (kind, l) = s.rsplit_once('-').ok_or_else(|| Error::UnknownShape(s.into()))?;
        let l: usize = l.parse().map_err(|_| Error::UnknownShape(s.into()))?;
        if l == 0 {
            return Err(Error::UnknownShape(s.into()));
        }
        match kind {
            "path" => Ok(Shape::Path(l)),
            "star" => Ok(Shape::Star(l)),
            "binary-tree" => Ok(Shape::BinaryTree(l)),
            "product" => Ok(Shape::Product(l)),
            _ => Err(Error::UnknownShape(s.into())),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Path(l) => write!(f, "path-{l}"),
            Shape::Star(l) => write!(f, "star-{l}"),
            Shape::BinaryTree(l) => write!(f, "binary-tree-{l}"),
            Shape::Product(l) => write!(f, "product-{l}"),
            Shape::Fig1 => f.write_str("fig1"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub shape: Shape,
    /// Tuples drawn per relation (before deduplication).
    pub n: usize,
    /// Values are uniform in `0..domain`; weights are the values.
    pub domain: u64,
    pub seed: u64,
    pub agg: Aggregate,
    /// Defaults to every query variable.
    pub weighted: Option<Vec<String>>,
}

impl InstanceSpec {
    pub fn new(shape: Shape, n: usize, seed: u64) -> Self {
        InstanceSpec {
            shape,
            n,
            domain: n.max(1) as u64,
            seed,
            agg: Aggregate::Sum,
            weighted: None,
        }
    }

    pub fn agg(mut self, agg: Aggregate) -> Self {
        self.agg = agg;
        self
    }

    pub fn domain(mut self, domain: u64) -> Self {
        self.domain = domain.max(1);
        self
    }

    pub fn weighted(mut self, vars: &[&str]) -> Self {
        self.weighted = Some(vars.iter().map(|v| v.to_string()).collect());
        self
    }
}

pub fn generate_instance(spec: &InstanceSpec) -> (JoinQuery, Database, RankingSpec) {
    let q = spec.shape.query();
    let db = if spec.shape == Shape::Fig1 {
        fig1().1
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut b = DatabaseBuilder::new();
        for atom in &q.atoms {
            let arity = atom.vars.len();
            let rows: Vec<Vec<i64>> = (0..spec.n)
                .map(|_| (0..arity).map(|_| rng.random_range(0..spec.domain) as i64).collect())
                .collect();
            let cols: Vec<String> = (0..arity).map(|c| format!("c{c}")).collect();
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            b.relation(&atom.relation, &cols, rows);
        }
        b.build()
    };
    let vars = spec.weighted.clone().unwrap_or_else(|| q.vars());
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let ranking = RankingSpec::new(spec.agg, &names);
    (q, db, ranking)
}

/// The running example: 13 answers, 9 through `R(1,1)` and 4 through `R(2,2)`.
pub fn fig1() -> (JoinQuery, Database, RankingSpec) {
    let mut b = DatabaseBuilder::new();
    b.relation("R", &["a", "b"], [[1i64, 1], [2, 2]]);
    b.relation("S", &["a", "c"], [[1i64, 3], [1, 4], [1, 5], [2, 3], [2, 4]]);
    b.relation("T", &["b", "d"], [[1i64, 6], [1, 7], [2, 7]]);
    b.relation("U", &["d", "e"], [[6i64, 8], [7, 8], [7, 9]]);
    let q = JoinQuery::parse("R(x1,x2), S(x1,x3), T(x2,x4), U(x4,x5)").expect("static query");
    let r = RankingSpec::new(Aggregate::Sum, &["x1", "x2", "x3", "x4", "x5"]);
    (q, b.build(), r)
}

/// Writes `manifest.csv`, one CSV per relation and `query.toml` into `dir`.
pub fn write_instance(dir: &Path, q: &JoinQuery, d: &Database, r: &RankingSpec) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    let mut names: Vec<&str> = d.relations().map(|(k, _)| k).collect();
    names.sort_unstable();
    for name in names {
        let rel = d.relation(name).expect("listed");
        let file = format!("{name}.csv");
        let path = dir.join(&file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Csv {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.clone(),
            message: e.to_string(),
        };
        w.write_record(rel.columns()).map_err(csv_err)?;
        for t in rel.tuples() {
            w.write_record(t.iter().map(|&id| d.dictionary().render(id)))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!("{name},{file}\n"));
    }
    let mpath = dir.join("manifest.csv");
    fs::write(&mpath, manifest).map_err(|e| Error::io(&mpath, e))?;
    let qpath = dir.join("query.toml");
    fs::write(&qpath, spec_toml(q, r)).map_err(|e| Error::io(&qpath, e))?;
    Ok(())
}

fn spec_toml(q: &JoinQuery, r: &RankingSpec) -> String {
    let list = |xs: Vec<String>| {
        xs.iter()
            .map(|s| format!("\"{s}\""))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = format!(
        "atoms = [{}]\nagg = \"{}\"\nweighted_vars = [{}]\n",
        list(q.atoms.iter().map(|a| a.to_string()).collect()),
        r.agg,
        list(r.weighted_vars.clone()),
    );
    if r.agg == Aggregate::Lex {
        out.push_str(&format!("lex_order = [{}]\n", list(r.lex_order.clone())));
    }
    for (var, table) in &r.weights {
        out.push_str(&format!("\n[weights.{var}]\n"));
        for (value, w) in table {
            out.push_str(&format!("\"{value}\" = {w}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{build_hypergraph, is_acyclic};
    use crate::query_spec::parse_query;

    #[test]
    fn shapes_roundtrip_and_are_acyclic() {
        for s in ["path-3", "star-4", "binary-tree-5", "product-3", "fig1"] {
            let shape: Shape = s.parse().unwrap();
            assert_eq!(shape.to_string(), s);
            let q = shape.query();
            assert_eq!(q.len(), shape.atoms());
            assert!(is_acyclic(&build_hypergraph(&q)));
        }
        assert!("ring-3".parse::<Shape>().is_err());
        assert!("path-0".parse::<Shape>().is_err());
    }

    #[test]
    fn seeds_reproduce_databases() {
        let spec = InstanceSpec::new(Shape::Path(3), 50, 7);
        let (_, a, _) = generate_instance(&spec);
        let (_, b, _) = generate_instance(&spec);
        for (name, rel) in a.relations() {
            let other = b.relation(name).unwrap();
            assert_eq!(rel.flat(), other.flat());
        }
    }

    #[test]
    fn written_instances_load_back() {
        let (q, d, r) = fig1();
        let dir = tempfile::tempdir().unwrap();
        write_instance(dir.path(), &q, &d, &r).unwrap();
        let d2 = crate::data::load_database(dir.path().join("manifest.csv")).unwrap();
        assert_eq!(d2.size(), d.size());
        let text = fs::read_to_string(dir.path().join("query.toml")).unwrap();
        let (q2, r2) = parse_query(&text).unwrap();
        assert_eq!(q2, q);
        assert_eq!(r2, r);
    }
}
