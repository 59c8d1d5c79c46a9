use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;

use crate::rational::format_rational;

/// The value of a word: a rational, or `NegInf` when there is no accepting run.
///
/// `NegInf` is smaller than every rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueResult {
    NegInf,
    Value(BigRational),
}

impl ValueResult {
    pub fn is_neg_inf(&self) -> bool {
        matches!(self, ValueResult::NegInf)
    }

    pub fn value(&self) -> Option<&BigRational> {
        match self {
            ValueResult::NegInf => None,
            ValueResult::Value(v) => Some(v),
        }
    }

    pub fn into_value(self) -> Option<BigRational> {
        match self {
            ValueResult::NegInf => None,
            ValueResult::Value(v) => Some(v),
        }
    }
}

impl From<BigRational> for ValueResult {
    fn from(v: BigRational) -> Self {
        ValueResult::Value(v)
    }
}

impl Ord for ValueResult {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValueResult::NegInf, ValueResult::NegInf) => Ordering::Equal,
            (ValueResult::NegInf, _) => Ordering::Less,
            (_, ValueResult::NegInf) => Ordering::Greater,
            (ValueResult::Value(a), ValueResult::Value(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ValueResult {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ValueResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueResult::NegInf => write!(f, "-inf"),
            ValueResult::Value(v) => write!(f, "{}", format_rational(v)),
        }
    }
}
