//! Dictionary-encoded relational instances, join queries, CSV ingestion and
//! self-join elimination.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};

/// Dense per-database identifier of a domain constant.
pub type ValueId = u32;

/// Original value of a domain constant. Cells that parse as 64-bit signed
/// integers keep their numeric value; everything else is text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Text(String),
}

impl Value {
    pub fn parse(cell: &str) -> Value {
        match cell.parse::<i64>() {
            Ok(v) => Value::Int(v),
            Err(_) => Value::Text(cell.to_string()),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Text(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::parse(s)
    }
}

/// Bijective id <-> value map. Ids are dense: `0..len()`.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    values: Vec<Value>,
    index: FxHashMap<Value, ValueId>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, value: Value) -> ValueId {
        if let Some(&id) = self.index.get(&value) {
            return id;
        }
        let id = ValueId::try_from(self.values.len()).expect("dictionary exceeds u32 ids");
        self.values.push(value.clone());
        self.index.insert(value, id);
        id
    }

    pub fn lookup(&self, value: &Value) -> Option<ValueId> {
        self.index.get(value).copied()
    }

    /// `None` for ids minted by trimmings (partition ids, interval ids),
    /// which never enter the dictionary.
    pub fn decode(&self, id: ValueId) -> Option<&Value> {
        self.values.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn render(&self, id: ValueId) -> String {
        match self.decode(id) {
            Some(v) => v.to_string(),
            None => format!("#{id}"),
        }
    }
}

/// A set of fixed-arity tuples stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    columns: Vec<String>,
    len: usize,
    rows: Vec<ValueId>,
}

impl Relation {
    /// Builds a relation from rows, dropping duplicates (first occurrence wins).
    pub fn from_rows<I>(columns: Vec<String>, rows: I) -> Self
    where
        I: IntoIterator<Item = Vec<ValueId>>,
    {
        let arity = columns.len();
        let mut seen: FxHashSet<Vec<ValueId>> = FxHashSet::default();
        let mut flat = Vec::new();
        let mut len = 0;
        for row in rows {
            assert_eq!(row.len(), arity, "row arity differs from relation arity");
            if seen.insert(row.clone()) {
                flat.extend_from_slice(&row);
                len += 1;
            }
        }
        Relation {
            columns,
            len,
            rows: flat,
        }
    }

    /// Builds a relation from flat rows that are already known to be distinct.
    pub(crate) fn from_flat(columns: Vec<String>, len: usize, rows: Vec<ValueId>) -> Self {
        debug_assert_eq!(rows.len(), len * columns.len());
        Relation { columns, len, rows }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn tuple(&self, i: usize) -> &[ValueId] {
        let a = self.arity();
        &self.rows[i * a..(i + 1) * a]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[ValueId]> + '_ {
        (0..self.len).map(move |i| self.tuple(i))
    }

    pub(crate) fn flat(&self) -> &[ValueId] {
        &self.rows
    }
}

/// A relational instance: one relation per symbol, sharing one dictionary.
#[derive(Clone, Debug)]
pub struct Database {
    dict: Arc<Dictionary>,
    relations: IndexMap<String, Arc<Relation>>,
}

impl Database {
    pub fn new(dict: Arc<Dictionary>) -> Self {
        Database {
            dict,
            relations: IndexMap::new(),
        }
    }

    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    pub fn relation(&self, name: &str) -> Option<&Arc<Relation>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Arc<Relation>)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn insert(&mut self, name: impl Into<String>, relation: Arc<Relation>) {
        self.relations.insert(name.into(), relation);
    }

    /// Total number of tuples across relations.
    pub fn size(&self) -> usize {
        self.relations.values().map(|r| r.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

/// Incremental construction of a [`Database`] from raw values.
#[derive(Debug, Default)]
pub struct DatabaseBuilder {
    dict: Dictionary,
    relations: IndexMap<String, Relation>,
}

impl DatabaseBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn relation<I, R, V>(&mut self, name: &str, columns: &[&str], rows: I) -> &mut Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = V>,
        V: Into<Value>,
    {
        let encoded: Vec<Vec<ValueId>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|v| self.dict.encode(v.into())).collect())
            .collect();
        let cols = columns.iter().map(|c| c.to_string()).collect();
        self.relations
            .insert(name.to_string(), Relation::from_rows(cols, encoded));
        self
    }

    pub fn encode(&mut self, value: Value) -> ValueId {
        self.dict.encode(value)
    }

    pub fn insert_encoded(&mut self, name: &str, relation: Relation) -> &mut Self {
        self.relations.insert(name.to_string(), relation);
        self
    }

    pub fn build(self) -> Database {
        let dict = Arc::new(self.dict);
        let relations = self
            .relations
            .into_iter()
            .map(|(k, v)| (k, Arc::new(v)))
            .collect();
        Database { dict, relations }
    }
}

/// `R(x, y, ...)`: a relation symbol applied to variables. Repeated variables
/// force equal values at their positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub vars: Vec<String>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, vars: &[&str]) -> Self {
        Atom {
            relation: relation.into(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Atom> {
        let text = text.trim();
        let bad = || Error::QuerySpec(format!("malformed atom `{text}`"));
        let open = text.find('(').ok_or_else(bad)?;
        if !text.ends_with(')') {
            return Err(bad());
        }
        let relation = text[..open].trim();
        if !is_identifier(relation) {
            return Err(bad());
        }
        let inner = text[open + 1..text.len() - 1].trim();
        let vars: Vec<String> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|v| v.trim().to_string()).collect()
        };
        if vars.iter().any(|v| !is_identifier(v)) {
            return Err(bad());
        }
        Ok(Atom {
            relation: relation.to_string(),
            vars,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.vars.join(","))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// A full conjunctive query without projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinQuery {
    pub atoms: Vec<Atom>,
}

impl JoinQuery {
    pub fn new(atoms: Vec<Atom>) -> Self {
        JoinQuery { atoms }
    }

    pub fn parse(text: &str) -> Result<JoinQuery> {
        // split on commas that are outside parentheses
        let mut atoms = Vec::new();
        let mut depth = 0usize;
        let mut start = 0;
        for (i, c) in text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    atoms.push(Atom::parse(&text[start..i])?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        if !text[start..].trim().is_empty() {
            atoms.push(Atom::parse(&text[start..])?);
        }
        if atoms.is_empty() {
            return Err(Error::QuerySpec("query has no atoms".into()));
        }
        Ok(JoinQuery { atoms })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut seen = FxHashSet::default();
        let mut out = Vec::new();
        for atom in &self.atoms {
            for v in &atom.vars {
                if seen.insert(v.as_str()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn is_self_join_free(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.atoms.iter().all(|a| seen.insert(a.relation.as_str()))
    }

    /// Checks relation symbols and arities against a database.
    pub fn validate(&self, db: &Database) -> Result<()> {
        for (i, atom) in self.atoms.iter().enumerate() {
            let rel = db
                .relation(&atom.relation)
                .ok_or_else(|| Error::UnknownRelation(atom.relation.clone()))?;
            if rel.arity() != atom.vars.len() {
                return Err(Error::ArityMismatch {
                    atom: i,
                    relation: atom.relation.clone(),
                    arity: rel.arity(),
                    found: atom.vars.len(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for JoinQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Loads a database from a manifest of `<symbol>,<csv-path>` lines. Relative
/// CSV paths resolve against the manifest's directory.
pub fn load_database(manifest_path: impl AsRef<Path>) -> Result<Database> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut builder = DatabaseBuilder::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (symbol, path) = line.split_once(',').ok_or_else(|| Error::Manifest {
            line: lineno + 1,
            message: "expected `<symbol>,<csv-path>`".into(),
        })?;
        let symbol = symbol.trim();
        if !is_identifier(symbol) {
            return Err(Error::Manifest {
                line: lineno + 1,
                message: format!("invalid relation symbol `{symbol}`"),
            });
        }
        let mut csv_path = PathBuf::from(path.trim());
        if csv_path.is_relative() {
            csv_path = base.join(csv_path);
        }
        let relation = read_csv(&csv_path, &mut builder.dict)?;
        builder.insert_encoded(symbol, relation);
    }
    Ok(builder.build())
}

fn read_csv(path: &Path, dict: &mut Dictionary) -> Result<Relation> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |e: csv::Error| {
        let message = match e.kind() {
            csv::ErrorKind::Utf8 { .. } => format!("non-UTF-8 cell: {e}"),
            csv::ErrorKind::UnequalLengths { .. } => {
                format!("arity mismatch between header and row: {e}")
            }
            _ => e.to_string(),
        };
        Error::Csv {
            path: path.to_path_buf(),
            message,
        }
    };
    let columns: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        rows.push(record.iter().map(|c| dict.encode(Value::parse(c))).collect());
    }
    Ok(Relation::from_rows(columns, rows))
}

/// Gives every repeated relation symbol occurrence its own copy of the
/// relation. The answer sets of the two queries are identical.
pub fn eliminate_self_joins(q: &JoinQuery, d: &Database) -> Result<(JoinQuery, Database)> {
    q.validate(d)?;
    if q.is_self_join_free() {
        return Ok((q.clone(), d.clone()));
    }
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for a in &q.atoms {
        *occurrences.entry(a.relation.as_str()).or_default() += 1;
    }
    let mut taken: FxHashSet<String> = d.relations().map(|(k, _)| k.to_string()).collect();
    let mut out_db = d.clone();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut atoms = Vec::with_capacity(q.atoms.len());
    for a in &q.atoms {
        if occurrences[a.relation.as_str()] == 1 {
            atoms.push(a.clone());
            continue;
        }
        let k = seen.entry(a.relation.as_str()).or_default();
        *k += 1;
        let mut name = format!("{}_{}", a.relation, k);
        while taken.contains(&name) {
            name.push('_');
        }
        taken.insert(name.clone());
        let rel = d.relation(&a.relation).expect("validated").clone();
        out_db.insert(name.clone(), rel);
        atoms.push(Atom {
            relation: name,
            vars: a.vars.clone(),
        });
    }
    Ok((JoinQuery { atoms }, out_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &[u8]) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p).unwrap().write_all(body).unwrap();
        p
    }

    #[test]
    fn empty_manifest_gives_empty_database() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.txt", b"");
        let db = load_database(&m).unwrap();
        assert_eq!(db.size(), 0);
        assert!(db.is_empty());
    }

    #[test]
    fn csv_rows_are_deduplicated() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "r.csv", b"a,b\n1,2\n1,2\n2,3\n");
        let m = write(dir.path(), "m.txt", b"R,r.csv\n");
        let db = load_database(&m).unwrap();
        assert_eq!(db.relation("R").unwrap().len(), 2);
        assert_eq!(db.size(), 2);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "r.csv", b"a,b\n1,2\n1,2,3\n");
        let m = write(dir.path(), "m.txt", b"R,r.csv\n");
        let err = load_database(&m).unwrap_err();
        assert!(err.to_string().contains("arity mismatch"), "{err}");
    }

    #[test]
    fn non_utf8_cell_aborts_load() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "r.csv", b"a,b\n1,\xff\xfe\n");
        let m = write(dir.path(), "m.txt", b"R,r.csv\n");
        let err = load_database(&m).unwrap_err();
        assert!(err.to_string().contains("UTF-8"), "{err}");
    }

    #[test]
    fn missing_csv_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.txt", b"R,nope.csv\n");
        assert!(matches!(load_database(&m), Err(Error::Io { .. })));
    }

    #[test]
    fn dictionary_round_trips() {
        let mut d = Dictionary::new();
        let vals = [Value::Int(-4), Value::Text("abc".into()), Value::Int(7)];
        let ids: Vec<_> = vals.iter().map(|v| d.encode(v.clone())).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        for (v, id) in vals.iter().zip(ids) {
            assert_eq!(d.decode(id), Some(v));
        }
        assert_eq!(d.encode(Value::Int(7)), 2);
    }

    #[test]
    fn parses_atoms_and_queries() {
        let q = JoinQuery::parse("R1(x1, x2), R2(x2,x3)").unwrap();
        assert_eq!(q.atoms.len(), 2);
        assert_eq!(q.vars(), vec!["x1", "x2", "x3"]);
        assert!(Atom::parse("R(x").is_err());
        assert!(Atom::parse("(x)").is_err());
        assert!(Atom::parse("R(x,)").is_err());
    }

    #[test]
    fn self_join_copies() {
        let mut b = DatabaseBuilder::new();
        b.relation("R", &["a", "b"], [[1i64, 2], [2, 3], [3, 1]]);
        let db = b.build();
        let q = JoinQuery::parse("R(x,y), R(y,z)").unwrap();
        let (q2, d2) = eliminate_self_joins(&q, &db).unwrap();
        assert!(q2.is_self_join_free());
        assert_eq!(q2.atoms[0].relation, "R_1");
        assert_eq!(q2.atoms[1].relation, "R_2");
        assert_eq!(d2.relation("R_1").unwrap().len(), 3);
        assert_eq!(d2.relation("R_2").unwrap().len(), 3);

        let q = JoinQuery::parse("R(x,y)").unwrap();
        let (q3, _) = eliminate_self_joins(&q, &db).unwrap();
        assert_eq!(q3, q);
    }
}
