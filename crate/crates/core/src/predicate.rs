use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rank::{Aggregate, Bound, WeightValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Lt,
    Gt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredicateKind {
    SumLt,
    SumGt,
    MinLt,
    MinGt,
    MaxLt,
    MaxGt,
    LexLt,
    LexGt,
}

impl PredicateKind {
    pub fn new(agg: Aggregate, dir: Direction) -> Self {
        use PredicateKind::*;
        match (agg, dir) {
            (Aggregate::Sum, Direction::Lt) => SumLt,
            (Aggregate::Sum, Direction::Gt) => SumGt,
            (Aggregate::Min, Direction::Lt) => MinLt,
            (Aggregate::Min, Direction::Gt) => MinGt,
            (Aggregate::Max, Direction::Lt) => MaxLt,
            (Aggregate::Max, Direction::Gt) => MaxGt,
            (Aggregate::Lex, Direction::Lt) => LexLt,
            (Aggregate::Lex, Direction::Gt) => LexGt,
        }
    }

    pub fn agg(self) -> Aggregate {
        use PredicateKind::*;
        match self {
            SumLt | SumGt => Aggregate::Sum,
            MinLt | MinGt => Aggregate::Min,
            MaxLt | MaxGt => Aggregate::Max,
            LexLt | LexGt => Aggregate::Lex,
        }
    }

    pub fn direction(self) -> Direction {
        use PredicateKind::*;
        match self {
            SumLt | MinLt | MaxLt | LexLt => Direction::Lt,
            SumGt | MinGt | MaxGt | LexGt => Direction::Gt,
        }
    }
}

/// `w(U_w) ≺ λ` or `w(U_w) ≻ λ`, always strict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub bound: Bound,
}

impl Predicate {
    pub fn new(agg: Aggregate, dir: Direction, bound: Bound) -> Self {
        Predicate {
            kind: PredicateKind::new(agg, dir),
            bound,
        }
    }

    pub fn lt(agg: Aggregate, bound: Bound) -> Self {
        Self::new(agg, Direction::Lt, bound)
    }

    pub fn gt(agg: Aggregate, bound: Bound) -> Self {
        Self::new(agg, Direction::Gt, bound)
    }

    pub fn direction(&self) -> Direction {
        self.kind.direction()
    }

    pub fn holds(&self, w: &WeightValue) -> bool {
        // bound.cmp_weight(w) is the order of λ against w
        match self.direction() {
            Direction::Lt => self.bound.cmp_weight(w) == Ordering::Greater,
            Direction::Gt => self.bound.cmp_weight(w) == Ordering::Less,
        }
    }

    /// `Some(true)` when every weight satisfies the predicate, `Some(false)`
    /// when none does, `None` for a finite threshold.
    pub fn constant(&self) -> Option<bool> {
        match (&self.bound, self.direction()) {
            (Bound::PosInf, Direction::Lt) | (Bound::NegInf, Direction::Gt) => Some(true),
            (Bound::NegInf, Direction::Lt) | (Bound::PosInf, Direction::Gt) => Some(false),
            (Bound::Finite(_), _) => None,
        }
    }

    pub(crate) fn expect_agg(&self, agg: Aggregate) -> Result<()> {
        if self.kind.agg() != agg {
            return Err(Error::PredicateKind(format!(
                "{:?} against a {agg} ranking",
                self.kind
            )));
        }
        Ok(())
    }

    pub(crate) fn scalar_bound(&self) -> Result<i64> {
        match &self.bound {
            Bound::Finite(WeightValue::Scalar(v)) => Ok(*v),
            other => Err(Error::PredicateKind(format!("expected a scalar threshold, got {other}"))),
        }
    }

    pub(crate) fn lex_bound(&self) -> Result<&[i64]> {
        match &self.bound {
            Bound::Finite(WeightValue::Lex(v)) => Ok(v),
            other => Err(Error::PredicateKind(format!("expected a lex threshold, got {other}"))),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction() {
            Direction::Lt => "<",
            Direction::Gt => ">",
        };
        write!(f, "{}(U_w) {op} {}", self.kind.agg(), self.bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinels_are_constant() {
        let p = Predicate::lt(Aggregate::Sum, Bound::PosInf);
        assert_eq!(p.constant(), Some(true));
        assert!(p.holds(&WeightValue::Scalar(i64::MAX)));
        let p = Predicate::gt(Aggregate::Sum, Bound::PosInf);
        assert_eq!(p.constant(), Some(false));
        assert!(!p.holds(&WeightValue::Scalar(i64::MAX)));
    }

    #[test]
    fn strict_bounds() {
        let p = Predicate::lt(Aggregate::Max, Bound::Finite(WeightValue::Scalar(5)));
        assert!(p.holds(&WeightValue::Scalar(4)));
        assert!(!p.holds(&WeightValue::Scalar(5)));
        let p = Predicate::gt(Aggregate::Max, Bound::Finite(WeightValue::Scalar(5)));
        assert!(p.holds(&WeightValue::Scalar(6)));
        assert!(!p.holds(&WeightValue::Scalar(5)));
    }
}
