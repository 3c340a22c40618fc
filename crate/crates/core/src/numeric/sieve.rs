//! Smallest-prime-factor table, built once on first use.

use std::sync::OnceLock;

/// Upper bound (inclusive) of the smallest-prime-factor table.
pub const SIEVE_LIMIT: u32 = 1_000_000;

pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    fn build(limit: u32) -> Self {
        let limit = limit as usize;
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        // linear sieve: each composite is written exactly once by its least prime
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let least = spf[i];
            for &p in &primes {
                if p > least || i * p as usize > limit {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        Sieve { spf, primes }
    }

    pub fn limit(&self) -> u32 {
        (self.spf.len() - 1) as u32
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn smallest_factor(&self, n: u32) -> u32 {
        self.spf[n as usize]
    }

    pub fn is_prime(&self, n: u32) -> bool {
        n >= 2 && self.spf[n as usize] == n
    }

    /// All primes up to the sieve limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= bound`, ascending. `bound` is clamped to the sieve limit.
    pub fn primes_up_to(&self, bound: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| u64::from(p) <= bound);
        &self.primes[..end]
    }
}

/// The process-wide sieve up to [`SIEVE_LIMIT`].
pub fn sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(|| Sieve::build(SIEVE_LIMIT))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smallest_by_trial(n: u32) -> u32 {
        (2..=n).find(|d| n % d == 0).unwrap()
    }

    #[test]
    fn smallest_factor_matches_trial_division() {
        let s = Sieve::build(5000);
        for n in 2..=5000 {
            assert_eq!(s.smallest_factor(n), smallest_by_trial(n), "n = {n}");
        }
    }

    #[test]
    fn prime_count_below_one_million() {
        // pi(10^6) = 78498
        assert_eq!(sieve().primes().len(), 78_498);
        assert_eq!(sieve().primes_up_to(100).len(), 25);
        assert_eq!(*sieve().primes_up_to(97).last().unwrap(), 97);
    }
}
