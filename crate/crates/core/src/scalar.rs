//! Numeric backends for exact and floating-point probability mass.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// Probability mass arithmetic: exact rationals or 64-bit floats.
pub trait Mass: Num + Signed + Clone + PartialOrd + Debug + Send + Sync {
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn backend() -> Backend;
}

/// Name of a numeric backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Backend::Rational),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected rational or float)")),
        }
    }
}

impl Mass for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn backend() -> Backend {
        Backend::Float
    }
}

impl Mass for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn backend() -> Backend {
        Backend::Rational
    }
}
