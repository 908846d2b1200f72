//! Exact and approximate quantiles over acyclic join queries, computed on the
//! join tree without materializing the join.

pub mod bench;
pub mod data;
pub mod driver;
pub mod error;
pub mod exec;
pub mod gen;
pub mod instance;
pub mod oracle;
pub mod par;
pub mod pivot;
pub mod plan;
pub mod predicate;
pub mod query_spec;
pub mod rank;
pub mod ratio;
pub mod select;
pub mod sketch;
pub mod trim;

pub use data::{load_database, Atom, Database, DatabaseBuilder, JoinQuery, Relation, Value, ValueId};
pub use driver::{quantile, quantile_instance, QuantileAnswer, QuantileRequest, QuantileStats};
pub use error::{Error, Result};
pub use exec::{count_answers, Count};
pub use instance::Instance;
pub use par::ExecMode;
pub use predicate::{Direction, Predicate};
pub use query_spec::parse_query;
pub use rank::{Aggregate, Bound, Ranking, RankingSpec, WeightValue};
pub use ratio::Fraction;
