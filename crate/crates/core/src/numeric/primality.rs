//! Deterministic primality testing.
//!
//! - `n <= SIEVE_LIMIT`: table lookup.
//! - `n < 3.317e24` (covers all of `u64`): Miller-Rabin with the first 13
//!   prime bases, which is proven exact below that bound (Sorenson & Webster).
//! - larger `n`: Miller-Rabin with every base `a <= 2 ln(n)^2` (Bach's bound,
//!   exact under GRH).

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::sieve::{sieve, SIEVE_LIMIT};
use super::Natural;

const SMALL_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn exact_bases_limit() -> &'static BigUint {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    LIMIT.get_or_init(|| "3317044064679887385961981".parse().unwrap())
}

pub fn is_prime(n: &Natural) -> bool {
    match n.to_u64() {
        Some(v) => is_prime_u64(v),
        None => is_prime_big(n),
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n <= u64::from(SIEVE_LIMIT) {
        return sieve().is_prime(n as u32);
    }
    for &p in &SMALL_BASES {
        if n % p == 0 {
            return false;
        }
    }
    SMALL_BASES.iter().all(|&a| strong_probable_prime_u64(n, a))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn strong_probable_prime(n: &BigUint, n_minus_one: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n_minus_one {
            return true;
        }
    }
    false
}

fn is_prime_big(n: &BigUint) -> bool {
    for &p in sieve().primes().iter().take(200) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    if n < exact_bases_limit() {
        return SMALL_BASES
            .iter()
            .all(|&a| strong_probable_prime(n, &n_minus_one, &d, s, &BigUint::from(a)));
    }
    let ln_n = n.bits() as f64 * std::f64::consts::LN_2;
    let max_base = (2.0 * ln_n * ln_n).ceil() as u64;
    (2..=max_base).all(|a| strong_probable_prime(n, &n_minus_one, &d, s, &BigUint::from(a)))
}

/// Greatest common divisor helper shared with the factoring code.
pub(super) fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}
