//! Prime factorization.
//!
//! Values inside the sieve are split with the smallest-prime-factor table.
//! Larger values are trial-divided by every sieved prime, and whatever
//! cofactor survives (all of its prime factors exceed the sieve limit) is
//! split with Brent's variant of Pollard rho.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::primality::{gcd, is_prime};
use super::sieve::{sieve, SIEVE_LIMIT};
use super::Natural;
use crate::Error;

/// Iterations allowed per rho polynomial before giving up on it.
const RHO_ITERATION_BUDGET: u64 = 1 << 24;
const RHO_POLYNOMIALS: u64 = 16;

/// The exponent map `p -> nu_p(n)` of a positive integer, primes ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(Natural, u32)>,
}

impl Factorization {
    /// The factorization of 1.
    pub fn one() -> Self {
        Factorization { factors: Vec::new() }
    }

    /// Builds a factorization from `(prime, exponent)` pairs. Pairs are
    /// sorted and merged; primality is not rechecked.
    pub(crate) fn from_pairs(mut pairs: Vec<(Natural, u32)>) -> Self {
        pairs.retain(|(_, e)| *e > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut factors: Vec<(Natural, u32)> = Vec::with_capacity(pairs.len());
        for (p, e) in pairs {
            match factors.last_mut() {
                Some((q, k)) if *q == p => *k += e,
                _ => factors.push((p, e)),
            }
        }
        Factorization { factors }
    }

    pub fn factors(&self) -> &[(Natural, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// `nu_p(n)`; zero when `p` does not divide `n`.
    pub fn exponent_of(&self, p: &Natural) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// Number of prime factors counted with multiplicity (big omega).
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// The nondecreasing prime multiset `q_1 <= ... <= q_r`.
    pub fn prime_multiset(&self) -> Vec<Natural> {
        self.factors
            .iter()
            .flat_map(|(p, e)| std::iter::repeat(p.clone()).take(*e as usize))
            .collect()
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> Natural {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &Natural> {
        self.factors.iter().map(|(p, _)| p)
    }
}

pub fn factorize(n: &Natural) -> Result<Factorization, Error> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    if let Some(small) = n.to_u64() {
        if small <= u64::from(SIEVE_LIMIT) {
            return Ok(factorize_small(small as u32));
        }
    }
    let mut pairs = Vec::new();
    let mut rest = n.clone();
    for &p in sieve().primes() {
        if let Some(r) = rest.to_u64() {
            if u64::from(p) * u64::from(p) > r {
                break;
            }
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((BigUint::from(p), e));
        }
    }
    if !rest.is_one() {
        // every remaining prime factor exceeds the sieve limit, so anything
        // below its square is prime
        let limit = u64::from(SIEVE_LIMIT);
        if rest.to_u64().is_some_and(|r| r / limit < limit) {
            pairs.push((rest, 1));
        } else {
            split_large(rest, &mut pairs)?;
        }
    }
    Ok(Factorization::from_pairs(pairs))
}

/// Factorization of a value within the sieve.
pub fn factorize_small(n: u32) -> Factorization {
    assert!(n >= 1 && n <= SIEVE_LIMIT, "{n} is outside the sieve");
    let s = sieve();
    let mut factors: Vec<(Natural, u32)> = Vec::new();
    let mut rest = n;
    while rest > 1 {
        let p = s.smallest_factor(rest);
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        factors.push((BigUint::from(p), e));
    }
    Factorization { factors }
}

fn split_large(n: Natural, out: &mut Vec<(Natural, u32)>) -> Result<(), Error> {
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            out.push((m, 1));
            continue;
        }
        if let Some(root) = exact_square_root(&m) {
            stack.push(root.clone());
            stack.push(root);
            continue;
        }
        let d = (1..=RHO_POLYNOMIALS)
            .find_map(|c| pollard_brent(&m, c))
            .ok_or_else(|| Error::FactorizationBudget(m.clone()))?;
        stack.push(&m / &d);
        stack.push(d);
    }
    Ok(())
}

fn exact_square_root(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// One run of Brent's cycle search on `x -> x^2 + c (mod n)`. Returns a
/// nontrivial divisor, or `None` if this polynomial fails or runs out of
/// budget.
fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let c = BigUint::from(c);
    let step = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut x = y.clone();
    let mut saved = y.clone();
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = step(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            saved = y.clone();
            for _ in 0..BATCH.min(r - k) {
                y = step(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = gcd(&q, n);
            k += BATCH;
        }
        spent += r;
        if spent > RHO_ITERATION_BUDGET {
            return None;
        }
        r *= 2;
    }
    if &g == n {
        // the batch overshot; redo it one step at a time
        loop {
            saved = step(&saved);
            let diff = if x > saved { &x - &saved } else { &saved - &x };
            g = gcd(&diff, n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n && !g.is_one()).then_some(g)
}

/// `nu_p(n)` for prime `p`.
pub fn nu(n: &Natural, p: &Natural) -> Result<u32, Error> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    let mut e = 0;
    let mut rest = n.clone();
    while (&rest % p).is_zero() {
        rest /= p;
        e += 1;
    }
    Ok(e)
}

/// The prime multiset `q_1 <= ... <= q_r` of `n`.
pub fn prime_multiset(n: &Natural) -> Result<Vec<Natural>, Error> {
    Ok(factorize(n)?.prime_multiset())
}
