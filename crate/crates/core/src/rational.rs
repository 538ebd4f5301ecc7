//! Exact rationals and their string grammar (`"p/q"` in lowest terms, or `"p"`).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always normalized (lowest terms, positive
/// denominator).
pub type Rational = num_rational::BigRational;

fn is_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `"p/q"` (with `gcd(p, q) = 1`, `q ≥ 1`) or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::ParseRational(s.to_owned());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits = num.strip_prefix('-').unwrap_or(num);
    if !is_decimal(digits) {
        return Err(err());
    }
    let p: BigInt = num.parse().map_err(|_| err())?;
    let q: BigInt = match den {
        None => BigInt::one(),
        Some(d) => {
            if !is_decimal(d) {
                return Err(err());
            }
            d.parse().map_err(|_| err())?
        }
    };
    if q.is_zero() || !p.gcd(&q).is_one() {
        // zero is only accepted as "0" or "0/1"
        return Err(err());
    }
    Ok(Rational::new_raw(p, q))
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn from_integer(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigUint {
    values.into_iter().fold(BigUint::one(), |acc, v| {
        let d = v.denom().magnitude();
        acc.lcm(d)
    })
}

/// `v · scale` as an unsigned integer; `None` when not a non-negative integer.
pub fn scale_to_integer(v: &Rational, scale: &BigUint) -> Option<BigUint> {
    let scaled = v * Rational::from_integer(BigInt::from(scale.clone()));
    if !scaled.is_integer() || scaled.is_negative() {
        return None;
    }
    scaled.to_integer().to_biguint()
}

pub fn from_biguint_ratio(num: &BigUint, den: &BigUint) -> Rational {
    Rational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn is_positive(v: &Rational) -> bool {
    v.is_positive()
}
