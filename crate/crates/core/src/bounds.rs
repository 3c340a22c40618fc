//! Exact checks of the upper and lower bounds for the arithmetic derivative
//! and for Leibniz-additive functions.
//!
//! Write `n = q_1 ... q_r` with `q_1 <= ... <= q_r`. Bounds with irrational
//! sides are compared after raising both sides to an integer power:
//!
//! | bound                                      | compared as                         |
//! |--------------------------------------------|-------------------------------------|
//! | `r n^((r-1)/r) <= D(n)`                    | `r^r n^(r-1) <= D(n)^r`             |
//! | `r n / 2 <= n log2(n) / 2`                 | `2^r <= n`                          |
//! | `f(n) >= r m h(n)^((r-1)/r)`               | `r^r m^r h(n)^(r-1) <= f(n)^r`      |
//!
//! Every [`BoundVerdict`] reads `lhs <= rhs`.
//!
//! Besides each bound, this module predicts exactly when equality holds.
//! Several of the equality conditions as commonly stated are narrower than
//! what is true (for example `D(9) = 6 = 2 * 9^(1/2)`), so the
//! `stated_*` predicates keep the usual statement and the `exact_*`
//! predicates the verified one. Sweeps report disagreements between the two
//! as deviations.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::numeric::{factorize, format_rational, rational_from_natural, Factorization, Natural, Rational};
use crate::spec::LAdditiveSpec;
use crate::subderivative::subderivative_factored;
use crate::spec::PrimeSet;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Strict,
    Equal,
    Violated,
    PreconditionViolated(String),
}

impl Relation {
    pub fn label(&self) -> String {
        match self {
            Relation::Strict => "strict".into(),
            Relation::Equal => "equal".into(),
            Relation::Violated => "violated".into(),
            Relation::PreconditionViolated(why) => format!("precondition-violated({why})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundVerdict {
    pub link: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
    pub relation: Relation,
}

impl BoundVerdict {
    fn compare(link: &'static str, lhs: Rational, rhs: Rational) -> Self {
        let relation = match lhs.cmp(&rhs) {
            std::cmp::Ordering::Less => Relation::Strict,
            std::cmp::Ordering::Equal => Relation::Equal,
            std::cmp::Ordering::Greater => Relation::Violated,
        };
        BoundVerdict { link, lhs, rhs, relation }
    }

    fn gated(link: &'static str, lhs: Rational, rhs: Rational, failed: &Option<String>) -> Self {
        match failed {
            Some(why) => BoundVerdict { link, lhs, rhs, relation: Relation::PreconditionViolated(why.clone()) },
            None => Self::compare(link, lhs, rhs),
        }
    }

    pub fn is_equal(&self) -> bool {
        self.relation == Relation::Equal
    }

    pub fn is_violated(&self) -> bool {
        self.relation == Relation::Violated
    }

    pub fn precondition_failed(&self) -> bool {
        matches!(self.relation, Relation::PreconditionViolated(_))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "link": self.link,
            "lhs": format_rational(&self.lhs),
            "rhs": format_rational(&self.rhs),
            "relation": self.relation.label(),
        })
    }
}

impl fmt::Display for BoundVerdict {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            out,
            "{}\t{}\t{}\t{}",
            self.link,
            format_rational(&self.lhs),
            format_rational(&self.rhs),
            self.relation.label()
        )
    }
}

fn int(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

fn two_pow(k: u32) -> Rational {
    Rational::from_integer(num_bigint::BigInt::one() << k)
}

fn need_two(n: &Natural, f: &Factorization) -> Result<(), Error> {
    if f.is_one() || n.is_zero() {
        return Err(Error::BoundsNeedComposite(n.clone()));
    }
    Ok(())
}

pub const CHAIN_LOWER: &str = "r*n^((r-1)/r) <= D(n)";
pub const CHAIN_MIDDLE: &str = "D(n) <= r*n/2";
pub const CHAIN_RIGHT: &str = "r*n/2 <= n*log2(n)/2";
pub const WESTRICK: &str = "D(n) <= (r-1)*n/2 + 2^(r-1)";
pub const WESTRICK_IMPROVES: &str = "(r-1)*n/2 + 2^(r-1) <= r*n/2";
pub const EXT_UPPER: &str = "f(n) <= s*M*h(n)/2";
pub const EXT_UPPER_LOG: &str = "s*M*h(n)/2 <= M*log2(n)*h(n)/2";
pub const EXT_WESTRICK: &str = "f(n) <= ((s-1)/2*h(n) + h(2^(s-1)))*M";
pub const EXT_LOWER: &str = "r*m*h(n)^((r-1)/r) <= f(n)";

/// The three links of `r n^((r-1)/r) <= D(n) <= r n / 2 <= n log2(n) / 2`.
pub fn classic_bounds(n: &Natural) -> Result<[BoundVerdict; 3], Error> {
    classic_bounds_factored(n, &factorize(n)?)
}

pub fn classic_bounds_factored(n: &Natural, fac: &Factorization) -> Result<[BoundVerdict; 3], Error> {
    need_two(n, fac)?;
    let d = rational_from_natural(&subderivative_factored(n, fac, &PrimeSet::All));
    let n_q = rational_from_natural(n);
    let r = fac.big_omega();
    let r_q = int(u64::from(r));
    Ok([
        BoundVerdict::compare(CHAIN_LOWER, r_q.pow(r as i32) * n_q.pow(r as i32 - 1), d.pow(r as i32)),
        BoundVerdict::compare(CHAIN_MIDDLE, d, &r_q * &n_q / int(2)),
        BoundVerdict::compare(CHAIN_RIGHT, two_pow(r), n_q),
    ])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WestrickVerdict {
    pub bound: BoundVerdict,
    /// `rhs <= r n / 2`: the bound is at least as strong as the middle link.
    pub improvement: BoundVerdict,
}

/// `D(n) <= (r-1) n / 2 + 2^(r-1)`.
pub fn westrick_bound(n: &Natural) -> Result<WestrickVerdict, Error> {
    westrick_bound_factored(n, &factorize(n)?)
}

pub fn westrick_bound_factored(n: &Natural, fac: &Factorization) -> Result<WestrickVerdict, Error> {
    need_two(n, fac)?;
    let d = rational_from_natural(&subderivative_factored(n, fac, &PrimeSet::All));
    let n_q = rational_from_natural(n);
    let r = fac.big_omega();
    let rhs = int(u64::from(r - 1)) * &n_q / int(2) + two_pow(r - 1);
    Ok(WestrickVerdict {
        bound: BoundVerdict::compare(WESTRICK, d, rhs.clone()),
        improvement: BoundVerdict::compare(WESTRICK_IMPROVES, rhs, int(u64::from(r)) * n_q / int(2)),
    })
}

/// Everything the extended bounds need about `f` at `n`.
#[derive(Clone, Debug)]
pub struct BoundContext {
    pub n: Natural,
    /// `q_1 <= ... <= q_r`.
    pub q_list: Vec<Natural>,
    pub r: u32,
    /// How many `q_i` have `f(q_i) != 0`.
    pub s: u32,
    pub p_list: Vec<Natural>,
    /// `max f(q_i)`.
    pub max_f: Rational,
    /// `min f(q_i)`.
    pub min_f: Rational,
    pub f_n: Rational,
    pub h_n: Rational,
    pub h_2: Rational,
    /// `(p, f(p), h(p))` for each distinct prime of `n`.
    pub primes: Vec<(Natural, Rational, Rational)>,
}

impl BoundContext {
    pub fn new(spec: &LAdditiveSpec, n: &Natural) -> Result<Self, Error> {
        Self::from_factored(spec, n, &factorize(n)?)
    }

    pub fn from_factored(spec: &LAdditiveSpec, n: &Natural, fac: &Factorization) -> Result<Self, Error> {
        need_two(n, fac)?;
        let primes: Vec<(Natural, Rational, Rational)> = fac
            .primes()
            .map(|p| (p.clone(), spec.x().lookup(p), spec.y().lookup(p)))
            .collect();
        let q_list = fac.prime_multiset();
        let p_list: Vec<Natural> = fac
            .factors()
            .iter()
            .zip(&primes)
            .filter(|(_, (_, x, _))| !x.is_zero())
            .flat_map(|((p, e), _)| std::iter::repeat(p.clone()).take(*e as usize))
            .collect();
        let max_f = primes.iter().map(|(_, x, _)| x).max().unwrap().clone();
        let min_f = primes.iter().map(|(_, x, _)| x).min().unwrap().clone();
        Ok(BoundContext {
            n: n.clone(),
            r: q_list.len() as u32,
            s: p_list.len() as u32,
            q_list,
            p_list,
            max_f,
            min_f,
            f_n: spec.eval_factored(fac),
            h_n: spec.eval_h_factored(fac),
            h_2: spec.y().lookup(&Natural::from(2u32)),
            primes,
        })
    }

    fn negative_f(&self) -> Option<String> {
        self.primes
            .iter()
            .find(|(_, x, _)| x.is_negative())
            .map(|(p, _, _)| format!("f({p}) < 0"))
    }

    /// Nonnegative `f` at the primes of `n`, `h(p) >= p` where `f(p) != 0`,
    /// and `h(n) > 0`.
    fn upper_precondition(&self) -> Option<String> {
        self.negative_f()
            .or_else(|| {
                self.primes
                    .iter()
                    .find(|(p, x, y)| !x.is_zero() && *y < rational_from_natural(p))
                    .map(|(p, _, _)| format!("h({p}) < {p}"))
            })
            .or_else(|| (!self.h_n.is_positive()).then(|| "h(n) <= 0".to_string()))
    }

    fn lower_precondition(&self) -> Option<String> {
        self.negative_f().or_else(|| {
            self.primes
                .iter()
                .find(|(_, _, y)| !y.is_positive())
                .map(|(p, _, _)| format!("h({p}) <= 0"))
        })
    }

    pub fn is_power_of_two(&self) -> bool {
        self.q_list.iter().all(|q| *q == Natural::from(2u32))
    }

    fn leading_twos(&self, list: &[Natural]) -> bool {
        let two = Natural::from(2u32);
        list.iter().take(list.len().saturating_sub(1)).all(|q| *q == two)
    }
}

/// `f(n) <= s M h(n) / 2 <= M log2(n) h(n) / 2`. The second link is compared
/// as `2^s <= n`.
pub fn extended_upper(spec: &LAdditiveSpec, n: &Natural) -> Result<[BoundVerdict; 2], Error> {
    Ok(extended_upper_ctx(&BoundContext::new(spec, n)?))
}

pub fn extended_upper_ctx(ctx: &BoundContext) -> [BoundVerdict; 2] {
    let failed = ctx.upper_precondition();
    let s = int(u64::from(ctx.s));
    [
        BoundVerdict::gated(EXT_UPPER, ctx.f_n.clone(), &s * &ctx.max_f * &ctx.h_n / int(2), &failed),
        BoundVerdict::gated(EXT_UPPER_LOG, two_pow(ctx.s), rational_from_natural(&ctx.n), &failed),
    ]
}

/// `f(n) <= ((s-1)/2 h(n) + h(2)^(s-1)) M`, gated on `s = r`.
pub fn extended_westrick(spec: &LAdditiveSpec, n: &Natural) -> Result<BoundVerdict, Error> {
    Ok(extended_westrick_ctx(&BoundContext::new(spec, n)?))
}

pub fn extended_westrick_ctx(ctx: &BoundContext) -> BoundVerdict {
    let failed = ctx
        .upper_precondition()
        .or_else(|| (ctx.s < ctx.r).then(|| "s<r".to_string()));
    let s_minus_one = ctx.s as i32 - 1;
    let rhs = (Rational::from_integer(s_minus_one.into()) / int(2) * &ctx.h_n + ctx.h_2.pow(s_minus_one)) * &ctx.max_f;
    BoundVerdict::gated(EXT_WESTRICK, ctx.f_n.clone(), rhs, &failed)
}

/// `f(n) >= r m h(n)^((r-1)/r)`, compared as `r^r m^r h(n)^(r-1) <= f(n)^r`.
pub fn extended_lower(spec: &LAdditiveSpec, n: &Natural) -> Result<BoundVerdict, Error> {
    Ok(extended_lower_ctx(&BoundContext::new(spec, n)?))
}

pub fn extended_lower_ctx(ctx: &BoundContext) -> BoundVerdict {
    let failed = ctx.lower_precondition();
    let r = ctx.r as i32;
    let r_q = int(u64::from(ctx.r));
    let lhs = r_q.pow(r) * ctx.min_f.pow(r) * ctx.h_n.pow(r - 1);
    BoundVerdict::gated(EXT_LOWER, lhs, ctx.f_n.pow(r), &failed)
}

/// Structural class of `n >= 2`, from its prime multiset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualityClass {
    Prime,
    /// `2^k`, `k >= 2`.
    PowerOfTwo(u32),
    /// `p^k` for odd `p`, `k >= 2`.
    PrimePower(Natural, u32),
    /// `q_1 = ... = q_{r-1} = 2 < q_r`.
    TwoSmoothTail,
    Other,
}

impl EqualityClass {
    pub fn name(&self) -> &'static str {
        match self {
            EqualityClass::Prime => "prime",
            EqualityClass::PowerOfTwo(_) => "power_of_two",
            EqualityClass::PrimePower(..) => "prime_power",
            EqualityClass::TwoSmoothTail => "two_smooth_tail",
            EqualityClass::Other => "other",
        }
    }

    pub fn is_prime_power(&self) -> bool {
        matches!(self, EqualityClass::Prime | EqualityClass::PowerOfTwo(_) | EqualityClass::PrimePower(..))
    }

    pub fn is_two_tail(&self) -> bool {
        matches!(self, EqualityClass::Prime | EqualityClass::PowerOfTwo(_) | EqualityClass::TwoSmoothTail)
    }
}

pub fn classify_equality(n: &Natural) -> Result<EqualityClass, Error> {
    let fac = factorize(n)?;
    need_two(n, &fac)?;
    Ok(classify_factored(&fac))
}

pub fn classify_factored(fac: &Factorization) -> EqualityClass {
    let two = Natural::from(2u32);
    match fac.factors() {
        [(_, 1)] => EqualityClass::Prime,
        [(p, k)] if *p == two => EqualityClass::PowerOfTwo(*k),
        [(p, k)] => EqualityClass::PrimePower(p.clone(), *k),
        [(p, _), (_, 1)] if *p == two => EqualityClass::TwoSmoothTail,
        _ => EqualityClass::Other,
    }
}

fn is_power_of_two(n: &Natural) -> bool {
    n.count_ones() == 1
}

/// Exact equality sets of the chain links `[lower, middle, right]` for `D`.
pub fn exact_equality_classic(n: &Natural, class: &EqualityClass) -> [bool; 3] {
    let pow2 = is_power_of_two(n);
    [class.is_prime_power(), pow2, pow2]
}

/// The chain's equality conditions as usually stated: upper links iff `n` is
/// a power of 2, the lower link iff `n` is a prime or a power of 2.
pub fn stated_equality_classic(n: &Natural, class: &EqualityClass) -> [bool; 3] {
    let pow2 = is_power_of_two(n);
    [*class == EqualityClass::Prime || pow2, pow2, pow2]
}

/// Equality in `D(n) <= (r-1) n / 2 + 2^(r-1)` iff `n` is prime or
/// `q_1 = ... = q_{r-1} = 2` (exact and as stated).
pub fn exact_equality_westrick(class: &EqualityClass) -> bool {
    class.is_two_tail()
}

/// Exact equality sets of [`extended_upper`] when its preconditions hold:
/// the first link iff every prime of `n` in `U` is 2 and `h(2) = 2` (or
/// `s = 0`); the second iff `n = 2^s`.
pub fn exact_equality_ext_upper(ctx: &BoundContext) -> [bool; 2] {
    let two = Natural::from(2u32);
    let first = ctx.s == 0 || (ctx.p_list.iter().all(|p| *p == two) && ctx.h_2 == int(2));
    let second = two_pow(ctx.s) == rational_from_natural(&ctx.n);
    [first, second]
}

/// As usually stated: equality iff `n` is a power of 2.
pub fn stated_equality_ext_upper(ctx: &BoundContext) -> [bool; 2] {
    [ctx.is_power_of_two(), ctx.is_power_of_two()]
}

/// Exact equality set of [`extended_westrick`] when its preconditions hold
/// (so `s = r`): `n` prime, or `q_1 = ... = q_{r-1} = 2 = h(2)` together with
/// `f(2) = f(q_r)`.
pub fn exact_equality_ext_westrick(ctx: &BoundContext) -> bool {
    if ctx.r == 1 {
        return true;
    }
    let first_f = &ctx.primes[0].1;
    let last_f = &ctx.primes[ctx.primes.len() - 1].1;
    ctx.leading_twos(&ctx.q_list) && ctx.h_2 == int(2) && first_f == last_f
}

/// As usually stated: `n` prime, or `p_1 = ... = p_{s-1} = 2 = h(2)`.
pub fn stated_equality_ext_westrick(ctx: &BoundContext) -> bool {
    ctx.r == 1 || (ctx.leading_twos(&ctx.p_list) && ctx.h_2 == int(2))
}

/// Exact equality set of [`extended_lower`] when its preconditions hold:
/// `f` is constant on the primes of `n`, and either that constant is 0 or
/// `h` is also constant there.
pub fn exact_equality_ext_lower(ctx: &BoundContext) -> bool {
    let (_, x0, y0) = &ctx.primes[0];
    let x_const = ctx.primes.iter().all(|(_, x, _)| x == x0);
    let y_const = ctx.primes.iter().all(|(_, _, y)| y == y0);
    x_const && (x0.is_zero() || y_const)
}

/// As usually stated: `n` prime or a power of 2.
pub fn stated_equality_ext_lower(ctx: &BoundContext) -> bool {
    ctx.r == 1 || ctx.is_power_of_two()
}
