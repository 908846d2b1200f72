use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("query spec: {0}")]
    QuerySpec(String),

    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),

    #[error("atom {atom} has {found} variables but relation `{relation}` has arity {arity}")]
    ArityMismatch {
        atom: usize,
        relation: String,
        arity: usize,
        found: usize,
    },

    #[error("weighted variable `{0}` does not occur in the query")]
    WeightedVarNotInQuery(String),

    #[error("lex order: {0}")]
    LexOrder(String),

    #[error("variable `{var}` has no weight for value `{value}`")]
    UnweightedValue { var: String, value: String },

    #[error("sum of weights overflows 64-bit signed integers")]
    WeightOverflow,

    #[error("cannot compare weights of different kinds")]
    MixedWeights,

    #[error("query is cyclic: {0}")]
    Cyclic(String),

    #[error("weighted variables cannot be placed on one or two adjacent join-tree nodes: {0}")]
    NotAdjacent(String),

    #[error("exact SUM quantiles are intractable for this query: {0}")]
    NotTractable(String),

    #[error("the query has no answers")]
    EmptyResult,

    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(String),

    #[error("phi must lie in [0, 1], got {0}")]
    PhiOutOfRange(String),

    #[error("cannot parse fraction `{0}`")]
    BadFraction(String),

    #[error("weighted median of an empty multiset")]
    EmptyInput,

    #[error("predicate does not match ranking: {0}")]
    PredicateKind(String),

    #[error("oracle budget exceeded: more than {0} answers")]
    OracleBudget(usize),

    #[error("unknown instance shape `{0}`")]
    UnknownShape(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
