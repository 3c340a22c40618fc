//! Arithmetic subderivatives and Leibniz-additive functions over the positive
//! integers, evaluated with exact rational arithmetic.
//!
//! An arithmetic function `f` is *Leibniz-additive* when some nonzero-valued,
//! completely multiplicative `h` satisfies `f(mn) = f(m) h(n) + f(n) h(m)`.
//! The arithmetic derivative `D` (with `h = N`, the identity) and every
//! completely additive function (with `h = E = 1`) are examples.
//!
//! Modules:
//! - [`numeric`]: big naturals, rationals, primality, factorization.
//! - [`spec`]: functions described by their values at primes, and closed-form
//!   evaluation.
//! - [`subderivative`]: `D_S` and `ld_S` computed straight from the definition.
//! - [`reconstruction`]: recovering `h` from a table of `f`, `f = g h`
//!   decomposition, and Leibniz-additivity checks.
//! - [`bounds`]: exact verification of the upper and lower bounds.
//! - [`sweep`]: the brute-force verification harness.

pub mod bounds;
mod error;
pub mod numeric;
pub mod reconstruction;
pub mod spec;
pub mod subderivative;
pub mod sweep;

pub use error::Error;
pub use numeric::{Factorization, Natural, Rational};
