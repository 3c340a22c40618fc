//! Arithmetic functions described by their values at primes.
//!
//! A completely additive `g` is determined by `g(p)`, a completely
//! multiplicative `h` by `h(p)`, and a Leibniz-additive `f` by the pair
//! `(f(p), h_f(p))`. The prime-indexed sequences are stored as a [`PrimeMap`]:
//! finitely many explicit overrides plus a [`DefaultRule`] for every other
//! prime. Evaluation only visits the primes dividing `n`.

mod builtin;
mod json;

use std::collections::BTreeSet;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::numeric::{factorize, is_prime, rational_from_natural, Factorization, Natural, Rational};
use crate::Error;

pub use builtin::{builtin, builtin_ref, parse_builtin_ref, parse_prime_list, AnySpec, Builtin};

/// A non-empty-by-construction set of primes: all of them, a finite set, or
/// everything except a finite set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeSet {
    All,
    Finite(BTreeSet<Natural>),
    Complement(BTreeSet<Natural>),
}

impl PrimeSet {
    /// A finite set of primes. Rejects an empty set and non-primes.
    pub fn finite<I: IntoIterator<Item = Natural>>(primes: I) -> Result<Self, Error> {
        let set = checked_primes(primes)?;
        if set.is_empty() {
            return Err(Error::EmptyPrimeSet);
        }
        Ok(PrimeSet::Finite(set))
    }

    /// Every prime except the listed ones.
    pub fn complement<I: IntoIterator<Item = Natural>>(excluded: I) -> Result<Self, Error> {
        Ok(PrimeSet::Complement(checked_primes(excluded)?))
    }

    pub fn finite_u64(primes: &[u64]) -> Result<Self, Error> {
        Self::finite(primes.iter().map(|&p| Natural::from(p)))
    }

    pub fn contains(&self, p: &Natural) -> bool {
        match self {
            PrimeSet::All => true,
            PrimeSet::Finite(s) => s.contains(p),
            PrimeSet::Complement(s) => !s.contains(p),
        }
    }
}

fn checked_primes<I: IntoIterator<Item = Natural>>(primes: I) -> Result<BTreeSet<Natural>, Error> {
    primes
        .into_iter()
        .map(|p| if is_prime(&p) { Ok(p) } else { Err(Error::NotPrime(p)) })
        .collect()
}

/// Value assigned to primes without an explicit override.
///
/// `Monomial { coeff, exponent }` is `coeff * p^exponent`. It only arises from
/// dividing two rules (see [`PrimeMap::quotient`]); the constructors normalize
/// it back to one of the three named shapes whenever possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefaultRule {
    Const(Rational),
    PrimeItself,
    ReciprocalPrime,
    Monomial { coeff: Rational, exponent: i32 },
}

impl DefaultRule {
    pub fn monomial(coeff: Rational, exponent: i32) -> Self {
        if coeff.is_zero() || exponent == 0 {
            DefaultRule::Const(coeff)
        } else if coeff.is_one() && exponent == 1 {
            DefaultRule::PrimeItself
        } else if coeff.is_one() && exponent == -1 {
            DefaultRule::ReciprocalPrime
        } else {
            DefaultRule::Monomial { coeff, exponent }
        }
    }

    fn as_monomial(&self) -> (Rational, i32) {
        match self {
            DefaultRule::Const(c) => (c.clone(), 0),
            DefaultRule::PrimeItself => (Rational::one(), 1),
            DefaultRule::ReciprocalPrime => (Rational::one(), -1),
            DefaultRule::Monomial { coeff, exponent } => (coeff.clone(), *exponent),
        }
    }

    pub fn apply(&self, p: &Natural) -> Rational {
        match self {
            DefaultRule::Const(c) => c.clone(),
            DefaultRule::PrimeItself => rational_from_natural(p),
            DefaultRule::ReciprocalPrime => rational_from_natural(p).recip(),
            DefaultRule::Monomial { coeff, exponent } => coeff * rational_from_natural(p).pow(*exponent),
        }
    }

    /// True if the rule yields zero at some (hence every) prime.
    pub fn is_zero_rule(&self) -> bool {
        match self {
            DefaultRule::Const(c) => c.is_zero(),
            DefaultRule::Monomial { coeff, .. } => coeff.is_zero(),
            DefaultRule::PrimeItself | DefaultRule::ReciprocalPrime => false,
        }
    }
}

/// A prime-indexed sequence: explicit overrides, then the default rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeMap {
    overrides: BTreeMap<Natural, Rational>,
    default: DefaultRule,
}

impl PrimeMap {
    pub fn new(default: DefaultRule) -> Self {
        PrimeMap { overrides: BTreeMap::new(), default }
    }

    pub fn constant(value: Rational) -> Self {
        Self::new(DefaultRule::Const(value))
    }

    pub fn with_override(mut self, p: Natural, value: Rational) -> Result<Self, Error> {
        if !is_prime(&p) {
            return Err(Error::NotPrime(p));
        }
        self.overrides.insert(p, value);
        Ok(self)
    }

    pub fn overrides(&self) -> &BTreeMap<Natural, Rational> {
        &self.overrides
    }

    pub fn default_rule(&self) -> &DefaultRule {
        &self.default
    }

    pub fn lookup(&self, p: &Natural) -> Rational {
        match self.overrides.get(p) {
            Some(v) => v.clone(),
            None => self.default.apply(p),
        }
    }

    /// The pointwise quotient `self(p) / divisor(p)`. `divisor` must never
    /// be zero.
    pub fn quotient(&self, divisor: &PrimeMap) -> PrimeMap {
        let keys: BTreeSet<&Natural> = self.overrides.keys().chain(divisor.overrides.keys()).collect();
        let overrides = keys
            .into_iter()
            .map(|p| (p.clone(), self.lookup(p) / divisor.lookup(p)))
            .collect();
        let (c1, k1) = self.default.as_monomial();
        let (c2, k2) = divisor.default.as_monomial();
        PrimeMap {
            overrides,
            default: DefaultRule::monomial(c1 / c2, k1 - k2),
        }
    }

    fn ensure_nonzero(&self) -> Result<(), Error> {
        if self.default.is_zero_rule() {
            return Err(Error::ZeroMultiplicativeDefault);
        }
        if let Some((p, _)) = self.overrides.iter().find(|(_, v)| v.is_zero()) {
            return Err(Error::ZeroMultiplicativeValue(p.clone()));
        }
        Ok(())
    }
}

/// A completely additive function `g(n) = sum_p nu_p(n) x_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CAdditiveSpec {
    pub x: PrimeMap,
}

impl CAdditiveSpec {
    pub fn new(x: PrimeMap) -> Self {
        CAdditiveSpec { x }
    }

    pub fn eval(&self, n: &Natural) -> Result<Rational, Error> {
        Ok(self.eval_factored(&factorize(n)?))
    }

    pub fn eval_factored(&self, n: &Factorization) -> Rational {
        n.factors()
            .iter()
            .fold(Rational::zero(), |acc, (p, e)| acc + self.x.lookup(p) * Rational::from_integer((*e).into()))
    }

    /// Viewed as Leibniz-additive with `h = E`.
    pub fn to_l_additive(&self) -> LAdditiveSpec {
        LAdditiveSpec {
            x: self.x.clone(),
            y: PrimeMap::constant(Rational::one()),
        }
    }
}

/// A completely multiplicative, nonzero-valued `h(n) = prod_p y_p^nu_p(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMultiplicativeSpec {
    y: PrimeMap,
}

impl CMultiplicativeSpec {
    /// Rejects maps that can evaluate to zero.
    pub fn new(y: PrimeMap) -> Result<Self, Error> {
        y.ensure_nonzero()?;
        Ok(CMultiplicativeSpec { y })
    }

    pub fn y(&self) -> &PrimeMap {
        &self.y
    }

    pub fn eval(&self, n: &Natural) -> Result<Rational, Error> {
        Ok(self.eval_factored(&factorize(n)?))
    }

    pub fn eval_factored(&self, n: &Factorization) -> Rational {
        multiplicative_value(&self.y, n)
    }
}

fn multiplicative_value(y: &PrimeMap, n: &Factorization) -> Rational {
    n.factors()
        .iter()
        .fold(Rational::one(), |acc, (p, e)| acc * y.lookup(p).pow(*e as i32))
}

/// A Leibniz-additive function given by `f(p) = x_p` and `h_f(p) = y_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LAdditiveSpec {
    x: PrimeMap,
    y: PrimeMap,
}

impl LAdditiveSpec {
    /// Rejects a `y` that can evaluate to zero.
    pub fn new(x: PrimeMap, y: PrimeMap) -> Result<Self, Error> {
        y.ensure_nonzero()?;
        Ok(LAdditiveSpec { x, y })
    }

    pub fn x(&self) -> &PrimeMap {
        &self.x
    }

    pub fn y(&self) -> &PrimeMap {
        &self.y
    }

    pub fn h(&self) -> CMultiplicativeSpec {
        CMultiplicativeSpec { y: self.y.clone() }
    }

    pub fn eval(&self, n: &Natural) -> Result<Rational, Error> {
        Ok(self.eval_factored(&factorize(n)?))
    }

    /// `f(n) = (sum_p nu_p(n) x_p / y_p) * prod_p y_p^nu_p(n)`.
    pub fn eval_factored(&self, n: &Factorization) -> Rational {
        let mut log_part = Rational::zero();
        let mut h = Rational::one();
        for (p, e) in n.factors() {
            let x = self.x.lookup(p);
            let y = self.y.lookup(p);
            h *= y.pow(*e as i32);
            if !x.is_zero() {
                log_part += x * Rational::from_integer((*e).into()) / y;
            }
        }
        log_part * h
    }

    pub fn eval_h(&self, n: &Natural) -> Result<Rational, Error> {
        Ok(self.eval_h_factored(&factorize(n)?))
    }

    pub fn eval_h_factored(&self, n: &Factorization) -> Rational {
        multiplicative_value(&self.y, n)
    }

    /// `f(p^a) = a f(p) h(p)^(a-1)`.
    pub fn eval_prime_power(&self, p: &Natural, a: u32) -> Result<Rational, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p.clone()));
        }
        if a == 0 {
            return Err(Error::ZeroInput);
        }
        let x = self.x.lookup(p);
        let y = self.y.lookup(p);
        Ok(Rational::from_integer(a.into()) * x * y.pow(a as i32 - 1))
    }

    /// The unique `f = g h` split: `g(p) = x_p / y_p`, `h = y`.
    pub fn decompose(&self) -> (CAdditiveSpec, CMultiplicativeSpec) {
        (CAdditiveSpec::new(self.x.quotient(&self.y)), self.h())
    }
}
