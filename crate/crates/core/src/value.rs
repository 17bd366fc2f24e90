//! Exact nonnegative extended reals of the form `sqrt(q)` or infinity.
//!
//! Every distance, diameter, mesh and Lebesgue number in this crate is a
//! [`Value`]. A finite value is stored by its radicand, so `3/8` is held as
//! `9/64` and `sqrt(2)` as `2`. Ordering compares radicands, which is exact
//! because squaring is monotone on nonnegative numbers.
//!
//! There is deliberately no addition: sums of two square roots leave the
//! representable set.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational used for coordinates, radicands and scales.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("negative radicand {0}")]
    NegativeRadicand(Rational),
    #[error("negative rational {0} cannot be a distance")]
    Negative(Rational),
    #[error("negative scale factor {0}")]
    NegativeScale(Rational),
    #[error("indeterminate product 0 * inf")]
    Indeterminate,
    #[error("cannot parse value {0:?}")]
    Parse(String),
}

/// `sqrt(radicand)` for a nonnegative rational radicand, or `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Finite(Rational),
    Infinite,
}

impl Value {
    pub fn zero() -> Self {
        Value::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        Value::Finite(Rational::one())
    }

    pub fn infinity() -> Self {
        Value::Infinite
    }

    /// The value `q` itself (stored as `q^2`).
    pub fn from_rational(q: Rational) -> Result<Self, ValueError> {
        if q.is_negative() {
            return Err(ValueError::Negative(q));
        }
        Ok(Value::Finite(&q * &q))
    }

    /// Infallible variant of [`Value::from_rational`] taking the absolute value.
    pub fn abs_rational(q: &Rational) -> Self {
        Value::Finite(q * q)
    }

    pub fn from_integer(n: u64) -> Self {
        Value::abs_rational(&Rational::from_integer(BigInt::from(n)))
    }

    /// The value `sqrt(radicand)`.
    pub fn sqrt(radicand: Rational) -> Result<Self, ValueError> {
        if radicand.is_negative() {
            return Err(ValueError::NegativeRadicand(radicand));
        }
        Ok(Value::Finite(radicand))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Finite(r) if r.is_zero())
    }

    /// Square of the represented number; `None` for infinity.
    pub fn radicand(&self) -> Option<&Rational> {
        match self {
            Value::Finite(r) => Some(r),
            Value::Infinite => None,
        }
    }

    /// The represented number as a rational, when the radicand is a perfect
    /// square of a rational.
    pub fn as_rational(&self) -> Option<Rational> {
        let r = self.radicand()?;
        let num = exact_isqrt(r.numer())?;
        let den = exact_isqrt(r.denom())?;
        Some(Rational::new(num, den))
    }

    pub fn is_rational_exact(&self) -> bool {
        match self {
            Value::Infinite => true,
            Value::Finite(_) => self.as_rational().is_some(),
        }
    }

    /// `c * self` for a rational `c >= 0`.
    pub fn scale(&self, c: &Rational) -> Result<Value, ValueError> {
        if c.is_negative() {
            return Err(ValueError::NegativeScale(c.clone()));
        }
        self.scale_sqrt(&(c * c))
    }

    /// `sqrt(c_sq) * self`; the form used for quasi-homothety bounds, where
    /// only squared coefficients are rational.
    pub fn scale_sqrt(&self, c_sq: &Rational) -> Result<Value, ValueError> {
        if c_sq.is_negative() {
            return Err(ValueError::NegativeScale(c_sq.clone()));
        }
        match self {
            Value::Finite(r) => Ok(Value::Finite(r * c_sq)),
            Value::Infinite if c_sq.is_zero() => Err(ValueError::Indeterminate),
            Value::Infinite => Ok(Value::Infinite),
        }
    }

    /// `self - c` for a rational `c`, floored at zero. Only defined on
    /// rational-exact values.
    pub fn saturating_sub_rational(&self, c: &Rational) -> Option<Value> {
        match self {
            Value::Infinite => Some(Value::Infinite),
            Value::Finite(_) => {
                let q = self.as_rational()? - c;
                Some(if q.is_negative() {
                    Value::zero()
                } else {
                    Value::abs_rational(&q)
                })
            }
        }
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Infinite, Value::Infinite) => Ordering::Equal,
            (Value::Infinite, Value::Finite(_)) => Ordering::Greater,
            (Value::Finite(_), Value::Infinite) => Ordering::Less,
            (Value::Finite(a), Value::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order on values.
pub fn value_cmp(a: &Value, b: &Value) -> Ordering {
    a.cmp(b)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ValueError> {
    let t = s.trim();
    let q: Rational = t.parse().map_err(|_| ValueError::Parse(s.to_string()))?;
    Ok(q)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Infinite => f.write_str("inf"),
            Value::Finite(r) => match self.as_rational() {
                Some(q) => f.write_str(&format_rational(&q)),
                None => write!(f, "sqrt({})", format_rational(r)),
            },
        }
    }
}

impl FromStr for Value {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Value::Infinite);
        }
        if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            return Value::sqrt(parse_rational(inner)?);
        }
        Value::from_rational(parse_rational(t)?)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for rationals written as `"p/q"` strings.
pub mod rational_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`, with `null` for `None`.
pub mod opt_rational_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Serde adapter for `Vec<Rational>` as a list of strings.
pub mod rational_vec_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for an optional point, `null` or a list of strings.
pub mod opt_point_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(format_rational).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| {
                v.iter()
                    .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .transpose()
    }
}

/// Shorthand for building rationals in tests and fixtures.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}
