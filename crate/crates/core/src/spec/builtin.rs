//! Named functions: `D`, `D_S`, `ld`, `ld_S`, `N`, `E` and `theta`.

use std::str::FromStr;

use num_traits::{One, Zero};

use super::{CAdditiveSpec, CMultiplicativeSpec, DefaultRule, LAdditiveSpec, PrimeMap, PrimeSet};
use crate::numeric::{Natural, Rational};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Arithmetic derivative.
    D,
    /// Arithmetic subderivative with respect to a prime set.
    DS,
    /// Arithmetic logarithmic derivative.
    Ld,
    LdS,
    /// Identity `N(n) = n`.
    N,
    /// Constant one.
    E,
    /// The zero function.
    Theta,
}

impl Builtin {
    pub fn needs_set(self) -> bool {
        matches!(self, Builtin::DS | Builtin::LdS)
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::D => "D",
            Builtin::DS => "D_S",
            Builtin::Ld => "ld",
            Builtin::LdS => "ld_S",
            Builtin::N => "N",
            Builtin::E => "E",
            Builtin::Theta => "theta",
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "D" => Builtin::D,
            "D_S" => Builtin::DS,
            "ld" => Builtin::Ld,
            "ld_S" => Builtin::LdS,
            "N" => Builtin::N,
            "E" => Builtin::E,
            "theta" => Builtin::Theta,
            other => return Err(Error::UnknownBuiltin(other.to_string())),
        })
    }
}

/// Any of the three spec kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnySpec {
    LAdditive(LAdditiveSpec),
    CAdditive(CAdditiveSpec),
    CMultiplicative(CMultiplicativeSpec),
}

impl AnySpec {
    pub fn eval(&self, n: &Natural) -> Result<Rational, Error> {
        match self {
            AnySpec::LAdditive(s) => s.eval(n),
            AnySpec::CAdditive(s) => s.eval(n),
            AnySpec::CMultiplicative(s) => s.eval(n),
        }
    }

    /// Completely additive functions are Leibniz-additive with `h = E`;
    /// completely multiplicative ones are not Leibniz-additive at all.
    pub fn into_l_additive(self) -> Result<LAdditiveSpec, Error> {
        match self {
            AnySpec::LAdditive(s) => Ok(s),
            AnySpec::CAdditive(s) => Ok(s.to_l_additive()),
            AnySpec::CMultiplicative(_) => Err(Error::NotLAdditive("completely multiplicative function".into())),
        }
    }
}

/// Builds a named function. `D_S` and `ld_S` require `set`; the others
/// reject one.
pub fn builtin(name: &str, set: Option<PrimeSet>) -> Result<AnySpec, Error> {
    let which: Builtin = name.parse()?;
    let set = match (which.needs_set(), set) {
        (true, None) => return Err(Error::MissingPrimeSet(which.name().into())),
        (false, Some(_)) => {
            return Err(Error::SpecFormat(format!("builtin {} takes no prime set", which.name())))
        }
        (_, s) => s,
    };
    let one = Rational::one;
    let identity = || PrimeMap::new(DefaultRule::PrimeItself);
    let spec = match which {
        Builtin::D => AnySpec::LAdditive(LAdditiveSpec::new(PrimeMap::constant(one()), identity())?),
        Builtin::DS => {
            let x = indicator(set.as_ref().unwrap(), DefaultRule::Const(one()))?;
            AnySpec::LAdditive(LAdditiveSpec::new(x, identity())?)
        }
        Builtin::Ld => AnySpec::CAdditive(CAdditiveSpec::new(PrimeMap::new(DefaultRule::ReciprocalPrime))),
        Builtin::LdS => {
            let x = indicator(set.as_ref().unwrap(), DefaultRule::ReciprocalPrime)?;
            AnySpec::CAdditive(CAdditiveSpec::new(x))
        }
        Builtin::N => AnySpec::CMultiplicative(CMultiplicativeSpec::new(identity())?),
        Builtin::E => AnySpec::CMultiplicative(CMultiplicativeSpec::new(PrimeMap::constant(one()))?),
        Builtin::Theta => AnySpec::LAdditive(LAdditiveSpec::new(
            PrimeMap::constant(Rational::zero()),
            PrimeMap::constant(one()),
        )?),
    };
    Ok(spec)
}

/// Parses a prime list `2,3,5`. An empty list is an error.
pub fn parse_prime_list(text: &str) -> Result<Vec<Natural>, Error> {
    if text.is_empty() {
        return Err(Error::EmptyPrimeSet);
    }
    text.split(',').map(crate::numeric::parse_natural).collect()
}

/// Parses a builtin reference `NAME` or `NAME:SET`, where `SET` is `all`,
/// a prime list like `2,5`, or `!2,3` for every prime except 2 and 3.
pub fn parse_builtin_ref(text: &str) -> Result<(Builtin, Option<PrimeSet>), Error> {
    let (name, set) = match text.split_once(':') {
        None => (text, None),
        Some((name, "all")) => (name, Some(PrimeSet::All)),
        Some((name, rest)) => match rest.strip_prefix('!') {
            Some(excluded) if excluded.is_empty() => (name, Some(PrimeSet::All)),
            Some(excluded) => (name, Some(PrimeSet::complement(parse_prime_list(excluded)?)?)),
            None => (name, Some(PrimeSet::finite(parse_prime_list(rest)?)?)),
        },
    };
    Ok((name.parse()?, set))
}

/// Inverse of [`parse_builtin_ref`].
pub fn builtin_ref(which: Builtin, set: Option<&PrimeSet>) -> String {
    let list = |s: &std::collections::BTreeSet<Natural>| {
        s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
    };
    match set {
        None => which.name().to_string(),
        Some(PrimeSet::All) => format!("{}:all", which.name()),
        Some(PrimeSet::Finite(s)) => format!("{}:{}", which.name(), list(s)),
        Some(PrimeSet::Complement(s)) if s.is_empty() => format!("{}:all", which.name()),
        Some(PrimeSet::Complement(s)) => format!("{}:!{}", which.name(), list(s)),
    }
}

/// `rule(p)` on `set`, zero elsewhere.
fn indicator(set: &PrimeSet, rule: DefaultRule) -> Result<PrimeMap, Error> {
    match set {
        PrimeSet::All => Ok(PrimeMap::new(rule)),
        PrimeSet::Finite(primes) => primes.iter().try_fold(PrimeMap::constant(Rational::zero()), |m, p| {
            m.with_override(p.clone(), rule.apply(p))
        }),
        PrimeSet::Complement(excluded) => excluded
            .iter()
            .try_fold(PrimeMap::new(rule.clone()), |m, p| m.with_override(p.clone(), Rational::zero())),
    }
}
