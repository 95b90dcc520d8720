//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |m: &str| Error::Parse {
        location: format!("rational {s:?}"),
        message: m.to_string(),
    };
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad("invalid numerator"))?;
    let d: BigInt = den.parse().map_err(|_| bad("invalid denominator"))?;
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Lowest-terms rendering: `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Returns `Some(k)` when `q` is a nonnegative integer fitting in `u32`.
pub fn as_nonneg_u32(q: &Rational) -> Option<u32> {
    if !is_integer(q) || q.is_negative() {
        return None;
    }
    u32::try_from(q.numer()).ok()
}

/// Serializes as the string produced by [`format_rational`].
pub fn serialize<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub fn serialize_vec<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&format_rational(q))?;
    }
    seq.end()
}
