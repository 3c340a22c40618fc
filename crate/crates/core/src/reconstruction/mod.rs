//! Recovering `h_f` from a table of `f`, and deciding Leibniz-additivity of
//! tabulated functions.
//!
//! With `U = {p : f(p) != 0}` and `V = {p : f(p) = 0}`, a Leibniz-additive
//! `f` that is not identically zero has
//!
//! - `h(p) = f(p^2) / (2 f(p))` for `p` in `U`,
//! - `h(p) = f(pq) / f(q)` for `p` in `V`, with any `q` in `U`.
//!
//! Everything here is range-limited: a table only covers `[1, N]`, so an
//! accepted table is Leibniz-additive on that range and nothing more.

mod conditions;
mod table;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{Map, Value};

use crate::numeric::{format_rational, sieve, Rational};
use crate::Error;

pub use conditions::{
    check_conditions, check_l_additive, quotient_sweep, ConditionParams, ConditionReport, ConditionWitness,
    LAdditivity, Verdict,
};
pub use table::FunctionTable;

/// Primes up to a bound, split by whether `f` vanishes there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportPartition {
    pub u_primes: Vec<u64>,
    pub v_primes: Vec<u64>,
    /// Smallest prime of `U`, used as the `q` in `h(p) = f(pq) / f(q)`.
    pub witness_q: Option<u64>,
}

pub fn support_partition(table: &FunctionTable, prime_bound: u64) -> Result<SupportPartition, Error> {
    if prime_bound > table.limit() {
        return Err(Error::OutsideTable { n: prime_bound, limit: table.limit() });
    }
    let (u_primes, v_primes): (Vec<u64>, Vec<u64>) = sieve()
        .primes_up_to(prime_bound)
        .iter()
        .map(|&p| u64::from(p))
        .partition(|&p| !table.get(p).unwrap().is_zero());
    let witness_q = u_primes.first().copied();
    Ok(SupportPartition { u_primes, v_primes, witness_q })
}

/// `floor(sqrt(limit))`: the largest prime bound for which every prime can be
/// reconstructed from a table on `[1, limit]`.
pub fn default_prime_bound(limit: u64) -> u64 {
    let mut r = (limit as f64).sqrt() as u64;
    while r * r > limit {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= limit {
        r += 1;
    }
    r
}

/// Reconstructed values `h(p)` for primes up to the bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructedH {
    pub partition: SupportPartition,
    pub values: BTreeMap<u64, Rational>,
}

impl ReconstructedH {
    /// The values as a JSON override object, `{"2": "2", "3": "3", ...}`.
    pub fn to_json(&self) -> Value {
        Value::Object(overrides_json(&self.values))
    }
}

pub(crate) fn overrides_json(values: &BTreeMap<u64, Rational>) -> Map<String, Value> {
    values
        .iter()
        .map(|(p, v)| (p.to_string(), Value::String(format_rational(v))))
        .collect()
}

pub fn reconstruct_h(table: &FunctionTable, prime_bound: u64) -> Result<ReconstructedH, Error> {
    let partition = support_partition(table, prime_bound)?;
    let q = partition.witness_q.ok_or(Error::VanishesOnPrimes(prime_bound))?;
    let f_q = table.at(q)?.clone();
    let mut values = BTreeMap::new();
    for &p in &partition.u_primes {
        let h = table.at(p * p)? / (table.at(p)? * Rational::from_integer(2.into()));
        values.insert(p, h);
    }
    for &p in &partition.v_primes {
        let h = table.at(p * q)? / &f_q;
        values.insert(p, h);
    }
    if let Some((&p, _)) = values.iter().find(|(_, h)| h.is_zero()) {
        return Err(Error::ZeroReconstructedH(p));
    }
    Ok(ReconstructedH { partition, values })
}

/// Checks that `f(pq) / f(q)` is the same for every `q` in `U` with
/// `pq <= limit`. Returns the common ratio, or the first pair `(q1, q2)`
/// that disagrees.
pub fn witness_independence(table: &FunctionTable, p: u64) -> Result<Option<Rational>, (u64, u64)> {
    let mut first: Option<(u64, Rational)> = None;
    for &q in sieve().primes_up_to(table.limit() / p) {
        let q = u64::from(q);
        let f_q = table.get(q).unwrap();
        if f_q.is_zero() {
            continue;
        }
        let ratio = table.get(p * q).unwrap() / f_q;
        match &first {
            None => first = Some((q, ratio)),
            Some((q1, r1)) if *r1 != ratio => return Err((*q1, q)),
            Some(_) => {}
        }
    }
    Ok(first.map(|(_, r)| r))
}
