//! Exact rational scalars and their text/JSON encodings.
//!
//! Every real quantity in the crate is a [`Rational`] (an arbitrary-precision
//! `BigRational`, always normalized to lowest terms with a positive
//! denominator). Text form is the canonical `p/q` string, or `p` for
//! integers; parsing rejects anything that would not format back to the same
//! bytes.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` is not in canonical lowest-terms form")]
    NotCanonical(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p` or `p/q`, requiring lowest terms, a positive denominator and no
/// redundant signs or leading zeros.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num: BigInt = num.parse().map_err(|_| invalid())?;
    let den: BigInt = match den {
        Some(d) => d.parse().map_err(|_| invalid())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    let value = Rational::new(num, den);
    if value.to_string() != text {
        return Err(ParseRationalError::NotCanonical(text.to_string()));
    }
    Ok(value)
}

pub fn format(value: &Rational) -> String {
    value.to_string()
}

pub fn pow(value: &Rational, exp: u32) -> Rational {
    num_traits::pow(value.clone(), exp as usize)
}

pub fn ceil_to_bigint(value: &Rational) -> BigInt {
    value.ceil().to_integer()
}

/// Decimal rendering with `digits` significant digits. Convenience output
/// only; never parsed back.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let abs = value.abs();
    // scale so that abs * 10^shift has `digits` integer digits
    let mut exponent: i64 = abs.numer().to_string().len() as i64 - abs.denom().to_string().len() as i64;
    let ten = BigInt::from(10u32);
    let scaled = |e: i64| -> Rational {
        if e >= 0 {
            &abs / Rational::from_integer(num_traits::pow(ten.clone(), e as usize))
        } else {
            &abs * Rational::from_integer(num_traits::pow(ten.clone(), (-e) as usize))
        }
    };
    while scaled(exponent) >= Rational::one() {
        exponent += 1;
    }
    while scaled(exponent - 1) < Rational::one() {
        exponent -= 1;
    }
    // abs = 0.d1d2... * 10^exponent
    let shift = digits as i64 - exponent;
    let shifted = scaled(-shift);
    let (q, r) = shifted.numer().div_rem(shifted.denom());
    let mut digits_int = q;
    if Rational::new(r * 2, shifted.denom().clone()) >= Rational::one() {
        digits_int += 1;
    }
    let mut text = digits_int.to_string();
    let mut point: i64 = text.len() as i64 - shift;
    if text.len() > digits {
        // rounding carried into a new digit
        text.pop();
        point = text.len() as i64 - shift + 1;
    }
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), text)
    } else if point as usize >= text.len() {
        format!("{}{}", text, "0".repeat(point as usize - text.len()))
    } else {
        let (a, b) = text.split_at(point as usize);
        format!("{a}.{b}")
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter: a rational as its canonical string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(de)?;
        parse(&text).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>` as an optional string.
pub mod opt_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => ser.serialize_some(&format(v)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(de)?
            .map(|t| parse(&t).map_err(de::Error::custom))
            .transpose()
    }
}

/// Serde adapter for vectors of rationals as strings.
pub mod vec_string {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rational], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(values.iter().map(format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(de)?
            .iter()
            .map(|t| parse(t).map_err(de::Error::custom))
            .collect()
    }
}

/// A scalar in instance files: a JSON integer, or a string `p/q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar(pub Rational);

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(v) = self.0.numer().to_i64() {
                return ser.serialize_i64(v);
            }
        }
        ser.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar(int(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok(Scalar(Rational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Err(E::custom(format_args!("floating-point scalar {v} is not allowed")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                parse(v).map(Scalar).map_err(E::custom)
            }
        }

        de.deserialize_any(ScalarVisitor)
    }
}
