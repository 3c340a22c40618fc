//! Canonical text form for exact rationals.
//!
//! Every value in the crate is a [`Rational`] (a `BigRational`), which is kept
//! in lowest terms with a positive denominator by construction. On the wire a
//! rational is written `"a"` or `"a/b"` with `b > 1` and `gcd(|a|, b) = 1`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Natural, Rational};
use crate::Error;

/// Parses the canonical rational syntax, rejecting anything not already in
/// lowest terms (leading `+`, whitespace, zero or negative denominators,
/// `"4/2"`, `"3/1"`).
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let bad = || Error::ParseRational(text.to_string());
    let (num_text, den_text) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let numer = parse_signed(num_text).ok_or_else(bad)?;
    let denom = match den_text {
        None => BigInt::one(),
        Some(d) => {
            if !is_digits(d) {
                return Err(bad());
            }
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d <= BigInt::one() {
                // zero is invalid, one must be written without a slash
                return Err(bad());
            }
            if !numer.abs().gcd(&d).is_one() {
                return Err(bad());
            }
            d
        }
    };
    Ok(Rational::new(numer, denom))
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_signed(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if !is_digits(digits) {
        return None;
    }
    // "-0" and zero-padded forms are not canonical
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    if s.starts_with('-') && digits == "0" {
        return None;
    }
    s.parse().ok()
}

/// Canonical string: `"a"` for integers, `"a/b"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rational_from_natural(n: &Natural) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

pub fn rational_from_u64(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Returns the value as a natural number if it is a nonnegative integer.
pub fn rational_to_natural(value: &Rational) -> Option<Natural> {
    if value.is_integer() && !value.is_negative() {
        value.numer().to_biguint()
    } else {
        None
    }
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}

pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}
