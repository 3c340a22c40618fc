//! Arithmetic subderivatives computed from the definition
//! `D_S(n) = n * sum_{p in S} nu_p(n) / p`.
//!
//! These deliberately do not go through [`crate::spec`], so the two can check
//! each other.

use num_traits::Zero;

use crate::numeric::{factorize, is_prime, rational_from_natural, rational_to_natural, Factorization, Natural, Rational};
use crate::spec::PrimeSet;
use crate::Error;

/// `ld_S(n) = sum_{p in S} nu_p(n) / p`, from an existing factorization.
pub fn log_subderivative_factored(n: &Factorization, set: &PrimeSet) -> Rational {
    n.factors()
        .iter()
        .filter(|(p, _)| set.contains(p))
        .fold(Rational::zero(), |acc, (p, e)| {
            acc + Rational::from_integer((*e).into()) / rational_from_natural(p)
        })
}

pub fn log_subderivative(n: &Natural, set: &PrimeSet) -> Result<Rational, Error> {
    Ok(log_subderivative_factored(&factorize(n)?, set))
}

/// `D_S(n)` from an existing factorization; `value` must equal the product.
pub fn subderivative_factored(value: &Natural, n: &Factorization, set: &PrimeSet) -> Natural {
    let exact = rational_from_natural(value) * log_subderivative_factored(n, set);
    // each term n * nu_p(n) / p is an integer because p divides n
    rational_to_natural(&exact).expect("subderivative is a nonnegative integer")
}

pub fn subderivative(n: &Natural, set: &PrimeSet) -> Result<Natural, Error> {
    Ok(subderivative_factored(n, &factorize(n)?, set))
}

/// `D(n) = D_P(n)`.
pub fn arithmetic_derivative(n: &Natural) -> Result<Natural, Error> {
    subderivative(n, &PrimeSet::All)
}

/// `D_{p}(n) = n * nu_p(n) / p`.
pub fn partial_derivative(n: &Natural, p: &Natural) -> Result<Natural, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    subderivative(n, &PrimeSet::Finite([p.clone()].into()))
}
