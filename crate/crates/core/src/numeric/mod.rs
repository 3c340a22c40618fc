//! Arbitrary-precision naturals, exact rationals, primality and factorization.

mod factor;
mod primality;
mod rational;
mod sieve;

pub use factor::{factorize, factorize_small, nu, prime_multiset, Factorization};
pub use primality::{is_prime, is_prime_u64};
pub use rational::{
    format_rational, is_nonnegative, is_zero, parse_rational, rational_from_natural,
    rational_from_u64, rational_to_natural,
};
pub use sieve::{sieve, Sieve, SIEVE_LIMIT};

/// A nonnegative integer of unbounded size.
pub type Natural = num_bigint::BigUint;

/// An exact signed rational, always stored in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Parses a decimal natural number (no sign, no whitespace).
pub fn parse_natural(text: &str) -> Result<Natural, crate::Error> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(crate::Error::ParseNatural(text.to_string()));
    }
    text.parse()
        .map_err(|_| crate::Error::ParseNatural(text.to_string()))
}
