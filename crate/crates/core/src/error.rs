use thiserror::Error;

use crate::numeric::Natural;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a positive integer, got 0")]
    ZeroInput,
    #[error("{0} is not prime")]
    NotPrime(Natural),
    #[error("invalid natural number {0:?}")]
    ParseNatural(String),
    #[error("invalid rational {0:?}: expected \"a\" or \"a/b\" in lowest terms with b > 1")]
    ParseRational(String),
    #[error("the prime set must not be empty")]
    EmptyPrimeSet,
    #[error("multiplicative value at prime {0} is zero")]
    ZeroMultiplicativeValue(Natural),
    #[error("multiplicative default rule evaluates to zero")]
    ZeroMultiplicativeDefault,
    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),
    #[error("builtin {0} requires a prime set")]
    MissingPrimeSet(String),
    #[error("builtin {0} is not Leibniz-additive")]
    NotLAdditive(String),
    #[error("malformed function spec: {0}")]
    SpecFormat(String),
    #[error("malformed table at line {line}: {message}")]
    TableFormat { line: usize, message: String },
    #[error("n = {n} is outside the table (limit {limit})")]
    OutsideTable { n: u64, limit: u64 },
    #[error("f vanishes on every prime up to {0}; h cannot be reconstructed (any h applies to the zero function)")]
    VanishesOnPrimes(u64),
    #[error("reconstructed h({0}) is zero")]
    ZeroReconstructedH(u64),
    #[error("bounds need n >= 2, got {0}")]
    BoundsNeedComposite(Natural),
    #[error("gave up factoring {0}: no factor found within the rho budget")]
    FactorizationBudget(Natural),
    #[error("invalid sweep configuration: {0}")]
    SweepConfig(String),
}
