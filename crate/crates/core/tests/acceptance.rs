//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use leibniz_core::bounds::{self, BoundVerdict, Relation};
use leibniz_core::numeric::{factorize_small, parse_rational, rational_from_natural};
use leibniz_core::reconstruction::{
    check_conditions, check_l_additive, reconstruct_h, witness_independence, ConditionParams, FunctionTable,
    LAdditivity,
};
use leibniz_core::spec::{builtin, Builtin, DefaultRule, LAdditiveSpec, PrimeMap, PrimeSet};
use leibniz_core::subderivative::subderivative;
use leibniz_core::sweep::{definition_oracle_d, run_sweep, Property, Subject, SweepConfig};
use leibniz_core::{Natural, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn nat(v: u64) -> Natural {
    Natural::from(v)
}

fn int(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

fn set(primes: &[u64]) -> PrimeSet {
    PrimeSet::finite_u64(primes).unwrap()
}

fn named(name: &str, s: Option<PrimeSet>) -> LAdditiveSpec {
    builtin(name, s).unwrap().into_l_additive().unwrap()
}

/// Plain sieve of Eratosthenes, independent of the library's sieve.
fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for i in 2..=limit as usize {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit as usize {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// `p^k <= limit` with `k >= 1`.
fn powers(p: u64, limit: u64) -> impl Iterator<Item = u64> {
    std::iter::successors(Some(p), move |v| v.checked_mul(p)).take_while(move |&v| v <= limit)
}

fn ac1_leibniz() -> Outcome {
    // (spec, f by the definition, h by the definition)
    type Oracle = Box<dyn Fn(u64) -> (Rational, Rational)>;
    let d_oracle = |s: PrimeSet| -> Oracle {
        Box::new(move |n| (rational_from_natural(&definition_oracle_d(&nat(n), &s)), int(n)))
    };
    let cases: Vec<(&str, LAdditiveSpec, Oracle)> = vec![
        ("D", named("D", None), d_oracle(PrimeSet::All)),
        ("D_{2}", named("D_S", Some(set(&[2]))), d_oracle(set(&[2]))),
        ("D_{2,5}", named("D_S", Some(set(&[2, 5]))), d_oracle(set(&[2, 5]))),
        (
            "ld",
            named("ld", None),
            Box::new(|n| (rational_from_natural(&definition_oracle_d(&nat(n), &PrimeSet::All)) / int(n), Rational::one())),
        ),
        ("theta", named("theta", None), Box::new(|_| (Rational::zero(), Rational::one()))),
    ];
    let mut pairs = 0u64;
    for (name, spec, oracle) in &cases {
        let f: Vec<Rational> = (0..=300u64 * 300).map(|n| if n == 0 { Rational::zero() } else { spec.eval(&nat(n)).unwrap() }).collect();
        let h: Vec<Rational> = (0..=300u64).map(|n| if n == 0 { Rational::zero() } else { spec.eval_h(&nat(n)).unwrap() }).collect();
        for n in 1..=300u64 {
            let (of, oh) = oracle(n);
            ensure!(f[n as usize] == of && h[n as usize] == oh, "{name}: spec disagrees with the definition at n = {n}");
        }
        for m in 1..=300usize {
            for n in 1..=300usize {
                let rhs = &f[m] * &h[n] + &f[n] * &h[m];
                ensure!(f[m * n] == rhs, "{name}: f({m}*{n}) != f(m)h(n) + f(n)h(m)");
                pairs += 1;
            }
        }
        for n in (1..=300u64 * 300).step_by(97) {
            ensure!(f[n as usize] == oracle(n).0, "{name}: spec disagrees with the definition at n = {n}");
        }
    }
    Ok(format!("{pairs} pairs over 5 specs"))
}

fn ac2_evaluation() -> Outcome {
    let sets = [("P", PrimeSet::All), ("{2}", set(&[2])), ("{3}", set(&[3])), ("{2,5}", set(&[2, 5]))];
    for (label, s) in &sets {
        let spec = named("D_S", Some(s.clone()));
        for n in 1..=100_000u64 {
            let n_nat = nat(n);
            let e = spec.eval_factored(&factorize_small(n as u32));
            let sub = subderivative(&n_nat, s).unwrap();
            let oracle = definition_oracle_d(&n_nat, s);
            ensure!(sub == oracle, "S = {label}: subderivative({n}) = {sub}, definition gives {oracle}");
            ensure!(e == rational_from_natural(&oracle), "S = {label}: spec eval at {n} differs");
        }
    }
    let d = named("D", None);
    for n in (1..=100_000u64).step_by(7) {
        ensure!(d.eval(&nat(n)).unwrap() == rational_from_natural(&definition_oracle_d(&nat(n), &PrimeSet::All)), "D at {n}");
    }
    Ok("n <= 100000 for S = P, {2}, {3}, {2,5}".into())
}

fn ac3_reconstruction() -> Outcome {
    let primes = primes_up_to(97);
    let d_table = FunctionTable::from_spec(&named("D", None), 10_000).unwrap();
    let h = reconstruct_h(&d_table, 97).map_err(|e| e.to_string())?;
    ensure!(h.values.keys().copied().eq(primes.iter().copied()), "D: wrong primes reconstructed");
    for &p in &primes {
        ensure!(h.values[&p] == int(p), "D: h({p}) = {}", h.values[&p]);
    }
    let d2_table = FunctionTable::from_spec(&named("D_S", Some(set(&[2]))), 10_000).unwrap();
    let h2 = reconstruct_h(&d2_table, 97).map_err(|e| e.to_string())?;
    ensure!(h2.partition.u_primes == vec![2], "D_{{2}}: U = {:?}", h2.partition.u_primes);
    ensure!(h2.partition.v_primes == primes[1..], "D_{{2}}: V wrong");
    for &p in &primes {
        ensure!(h2.values[&p] == int(p), "D_{{2}}: h({p}) = {}", h2.values[&p]);
    }
    for &p in &primes[1..] {
        ensure!(
            witness_independence(&d2_table, p) == Ok(Some(int(p))),
            "D_{{2}}: f({p}q)/f(q) depends on q"
        );
    }
    // D_{2,5} has two primes in U, so the witness choice is actually exercised
    let d25_table = FunctionTable::from_spec(&named("D_S", Some(set(&[2, 5]))), 10_000).unwrap();
    for &p in primes.iter().filter(|&&p| p != 2 && p != 5) {
        ensure!(witness_independence(&d25_table, p) == Ok(Some(int(p))), "D_{{2,5}}: witness dependence at {p}");
    }
    Ok(format!("{} primes, D and D_{{2}}; witness independence for {} V-primes", primes.len(), primes.len() - 1))
}

fn ac4_decomposition() -> Outcome {
    let (g, h) = named("D", None).decompose();
    for p in primes_up_to(97) {
        let p_nat = nat(p);
        ensure!(g.x.lookup(&p_nat) == Rational::new(1.into(), p.into()), "g({p})");
        ensure!(h.y().lookup(&p_nat) == int(p), "h({p})");
    }
    let ld = named("ld", None);
    for n in 1..=10_000u64 {
        let n_nat = nat(n);
        let gn = g.eval(&n_nat).unwrap();
        ensure!(gn == ld.eval(&n_nat).unwrap(), "g({n}) != ld({n})");
        ensure!(h.eval(&n_nat).unwrap() == int(n), "h({n}) != {n}");
        let d = rational_from_natural(&definition_oracle_d(&n_nat, &PrimeSet::All));
        ensure!(gn * int(n) == d, "g({n}) h({n}) != D({n})");
    }
    Ok("g = ld, h = N at primes <= 97; g h = D on [1, 10000]".into())
}

fn ac5_conditions() -> Outcome {
    let params = ConditionParams { max_exponent: 3, prime_bound: 30 };
    let mut detail = Vec::new();
    for (name, spec) in [("D", named("D", None)), ("D_{2,5}", named("D_S", Some(set(&[2, 5]))))] {
        let table = FunctionTable::from_spec(&spec, 100_000).unwrap();
        let report = check_conditions(&table, params).map_err(|e| e.to_string())?;
        for (cond, v) in report.verdicts() {
            ensure!(!v.is_violated(), "{name}: {cond} {v}");
        }
        ensure!(report.necessary_conditions_hold(), "{name}");
        detail.push(format!("{name}: (iii) {}", report.cancellation));
    }
    let mut corrupted = FunctionTable::from_spec(&named("D", None), 1000).unwrap();
    corrupted.set(4, parse_rational("3").unwrap());
    corrupted.set(8, parse_rational("5").unwrap());
    match check_l_additive(&corrupted, 31).map_err(|e| e.to_string())? {
        LAdditivity::Rejected(w) => detail.push(format!("corrupted table rejected: {w}")),
        other => return Err(format!("corrupted table not rejected: {other:?}")),
    }
    Ok(detail.join("; "))
}

const MAX: u64 = 1_000_000;

fn ac6_chain() -> Outcome {
    let config = SweepConfig { max_n: MAX, subjects: vec![], properties: vec![Property::ChainEq10], workers: 4 };
    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    let r = report.property(Property::ChainEq10).unwrap();
    ensure!(r.passed(), "violations: {:?}", r.violations);
    ensure!(r.checked == MAX - 1, "checked {}", r.checked);
    let classes = r.classes_for("builtin:D").unwrap();
    let pow2 = powers(2, MAX).count() as u64;
    for link in [bounds::CHAIN_MIDDLE, bounds::CHAIN_RIGHT] {
        ensure!(classes.total(link) == pow2, "{link}: {} equalities, {pow2} powers of 2", classes.total(link));
        ensure!(
            classes.count(link, "prime") + classes.count(link, "power_of_two") == pow2,
            "{link}: equality outside the powers of 2"
        );
    }
    let primes = primes_up_to(MAX);
    let prime_powers: u64 = primes.iter().map(|&p| powers(p, MAX).count() as u64).sum();
    let odd_higher = prime_powers - primes.len() as u64 - (pow2 - 1);
    ensure!(classes.total(bounds::CHAIN_LOWER) == prime_powers, "lower link: {} equalities", classes.total(bounds::CHAIN_LOWER));
    ensure!(classes.count(bounds::CHAIN_LOWER, "other") == 0, "lower link: equality off the prime powers");
    let dev = r.deviations.iter().find(|d| d.link == bounds::CHAIN_LOWER).ok_or("no deviation recorded")?;
    ensure!(dev.count == odd_higher && dev.examples[0] == 9, "deviation {dev:?}");
    Ok(format!(
        "n <= {MAX}: middle/right equal on {pow2} powers of 2, lower on {prime_powers} prime powers ({odd_higher} beyond the stated set, first 9)"
    ))
}

fn ac7_westrick() -> Outcome {
    let config = SweepConfig { max_n: MAX, subjects: vec![], properties: vec![Property::WestrickEq11], workers: 4 };
    let report = run_sweep(&config).map_err(|e| e.to_string())?;
    let r = report.property(Property::WestrickEq11).unwrap();
    ensure!(r.passed(), "violations: {:?}", r.violations);
    let classes = r.classes_for("builtin:D").unwrap();
    // n = 2^k q with q prime, k >= 0
    let expected: u64 = primes_up_to(MAX).iter().map(|&q| powers(2, MAX / q).count() as u64 + 1).sum();
    ensure!(classes.total(bounds::WESTRICK) == expected, "{} equalities, expected {expected}", classes.total(bounds::WESTRICK));
    ensure!(classes.count(bounds::WESTRICK, "other") == 0 && classes.count(bounds::WESTRICK, "prime_power") == 0, "equality outside the set");
    let pow2 = powers(2, MAX).count() as u64;
    ensure!(classes.total(bounds::WESTRICK_IMPROVES) == pow2, "improvement equal {} times", classes.total(bounds::WESTRICK_IMPROVES));
    Ok(format!("n <= {MAX}: equality on {expected} n = 2^k q, improvement tight on {pow2} powers of 2"))
}

fn same(a: &BoundVerdict, b: &BoundVerdict) -> bool {
    a.lhs == b.lhs && a.rhs == b.rhs && a.relation == b.relation
}

fn ac8_extended() -> Outcome {
    let d = named("D", None);
    for n in 2..=100_000u64 {
        let n_nat = nat(n);
        let fac = factorize_small(n as u32);
        let chain = bounds::classic_bounds_factored(&n_nat, &fac).unwrap();
        let west = bounds::westrick_bound_factored(&n_nat, &fac).unwrap();
        let ctx = bounds::BoundContext::from_factored(&d, &n_nat, &fac).unwrap();
        let upper = bounds::extended_upper_ctx(&ctx);
        ensure!(same(&upper[0], &chain[1]) && same(&upper[1], &chain[2]), "upper differs from the chain at {n}");
        ensure!(same(&bounds::extended_westrick_ctx(&ctx), &west.bound), "extended Westrick differs at {n}");
        ensure!(same(&bounds::extended_lower_ctx(&ctx), &chain[0]), "lower differs from the chain at {n}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(20_251_016);
    let mut x = PrimeMap::constant(Rational::zero());
    for p in primes_up_to(10_000) {
        let value = Rational::new(rng.gen_range(0..=10).into(), rng.gen_range(1..=10).into());
        x = x.with_override(nat(p), value).unwrap();
    }
    let random = LAdditiveSpec::new(x, PrimeMap::new(DefaultRule::PrimeItself)).unwrap();
    let (mut held, mut gated) = (0u64, 0u64);
    for n in 2..=10_000u64 {
        let ctx = bounds::BoundContext::from_factored(&random, &nat(n), &factorize_small(n as u32)).unwrap();
        let [u1, u2] = bounds::extended_upper_ctx(&ctx);
        for v in [u1, u2, bounds::extended_westrick_ctx(&ctx), bounds::extended_lower_ctx(&ctx)] {
            ensure!(!v.is_violated(), "random spec violates {} at {n}: {v}", v.link);
            if v.precondition_failed() {
                gated += 1;
            } else {
                held += 1;
            }
        }
    }

    let d2 = named("D_S", Some(set(&[2])));
    let upper = bounds::extended_upper(&d2, &nat(6)).unwrap();
    ensure!(upper[0].relation == Relation::Equal, "D_{{2}} at 6: {}", upper[0]);
    ensure!(!bounds::stated_equality_ext_upper(&bounds::BoundContext::new(&d2, &nat(6)).unwrap())[0], "6 counted as a power of 2");
    let w = bounds::extended_westrick(&d2, &nat(6)).unwrap();
    ensure!(
        w.relation == Relation::PreconditionViolated("s<r".into()) && w.lhs == int(3) && w.rhs == int(1),
        "D_{{2}} at 6: {w}"
    );
    Ok(format!(
        "D matches the classic verdicts on [2, 100000]; random spec: {held} checks held, {gated} precondition-gated; D_{{2}} at 6: equal / precondition-violated(s<r) 3 vs 1"
    ))
}

fn ac9_determinism() -> Outcome {
    let mut corrupted = FunctionTable::from_spec(&named("D", None), 5000).unwrap();
    corrupted.set(4, parse_rational("3").unwrap());
    corrupted.set(8, parse_rational("5").unwrap());
    let subjects = vec![
        Subject::builtin(Builtin::D, None),
        Subject::builtin(Builtin::DS, Some(set(&[2]))),
        Subject::builtin(Builtin::DS, Some(set(&[2, 5]))),
        Subject::builtin(Builtin::Theta, None),
        Subject::table("corrupted.csv", corrupted),
    ];
    let run = |workers| {
        let config = SweepConfig { max_n: 20_000, subjects: subjects.clone(), properties: Property::ALL.to_vec(), workers };
        run_sweep(&config).map(|r| r.to_json_string()).map_err(|e| e.to_string())
    };
    let one = run(1)?;
    for w in [4, 8] {
        ensure!(run(w)? == one, "report with {w} workers differs");
    }
    Ok(format!("{} bytes, identical for 1, 4, 8 workers", one.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 Leibniz identity", ac1_leibniz),
        ("AC2 evaluation consistency", ac2_evaluation),
        ("AC3 h reconstruction", ac3_reconstruction),
        ("AC4 decomposition", ac4_decomposition),
        ("AC5 condition checkers", ac5_conditions),
        ("AC6 classic bound chain", ac6_chain),
        ("AC7 Westrick bound", ac7_westrick),
        ("AC8 extended bounds", ac8_extended),
        ("AC9 sweep determinism", ac9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
