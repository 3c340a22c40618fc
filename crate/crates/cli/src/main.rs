//! `leibniz`: exact arithmetic subderivatives and Leibniz-additive functions
//! from the command line.
//!
//! Exit codes: 0 success, 1 a property was rejected or violated, 2 bad
//! usage or input.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leibniz_core::bounds::{self, BoundVerdict, EqualityClass};
use leibniz_core::numeric::{factorize, format_rational, parse_natural, Rational};
use leibniz_core::reconstruction::{
    check_conditions, check_l_additive, default_prime_bound, reconstruct_h, ConditionParams, FunctionTable,
    LAdditivity,
};
use leibniz_core::spec::{builtin, parse_builtin_ref, parse_prime_list, AnySpec, LAdditiveSpec, PrimeSet};
use leibniz_core::subderivative::{log_subderivative, subderivative};
use leibniz_core::sweep::{run_sweep, Property, Subject, SweepConfig};
use leibniz_core::{Error, Natural};
use num_traits::ToPrimitive;
use serde_json::json;

/// Spec arguments are a JSON file path or `builtin:NAME[:SET]`, where SET is
/// `all`, `2,5` or `!2,3`.
#[derive(Parser)]
#[command(name = "leibniz", version, about = "Arithmetic subderivatives and Leibniz-additive functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prime factorization.
    Factor { n: String },
    /// Arithmetic subderivative D_S(n).
    Deriv {
        n: String,
        #[command(flatten)]
        set: SetArgs,
    },
    /// Logarithmic subderivative ld_S(n) = D_S(n)/n.
    Ld {
        n: String,
        #[command(flatten)]
        set: SetArgs,
        /// Add an approximate decimal column.
        #[arg(long)]
        float: bool,
    },
    /// Evaluate a spec at n.
    Eval {
        spec: String,
        n: String,
        /// Also print h(n).
        #[arg(long)]
        with_h: bool,
        #[arg(long)]
        float: bool,
    },
    /// The g and h of f = g h.
    Decompose { spec: String },
    /// Recover h at the primes from an n,f table.
    Reconstruct {
        table: String,
        /// Largest prime to reconstruct (default floor(sqrt(N))).
        #[arg(long)]
        primes: Option<u64>,
    },
    /// Decide Leibniz-additivity of a table on its range.
    Check {
        table: Option<String>,
        /// Tabulate a spec instead of reading a table.
        #[arg(long, conflicts_with = "table", requires = "max")]
        spec: Option<String>,
        #[arg(long)]
        max: Option<u64>,
        #[arg(long)]
        primes: Option<u64>,
        /// Also print the necessary conditions (i) to (iv).
        #[arg(long)]
        conditions: bool,
    },
    /// Exact bound verdicts at n: the classic bounds for D, or the extended
    /// bounds for a spec.
    Bounds {
        n: String,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Exhaustive sweep over [2, max]; prints a JSON report.
    Sweep {
        #[arg(long)]
        max: u64,
        /// Builtin subject NAME[:SET]; repeatable. D if no subject is given.
        #[arg(long = "builtin")]
        builtins: Vec<String>,
        #[arg(long = "spec")]
        specs: Vec<String>,
        #[arg(long = "table")]
        tables: Vec<String>,
        /// Comma-separated property names, or all.
        #[arg(long, default_value = "all")]
        props: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct SetArgs {
    /// Every prime (the default).
    #[arg(long)]
    all: bool,
    /// A finite set, e.g. 2,3,5.
    #[arg(long, value_name = "PRIMES")]
    set: Option<String>,
    /// Every prime except these.
    #[arg(long, value_name = "PRIMES")]
    complement: Option<String>,
}

impl SetArgs {
    fn prime_set(&self) -> Result<PrimeSet, Fail> {
        Ok(match (&self.set, &self.complement) {
            (Some(s), _) => PrimeSet::finite(parse_prime_list(s)?)?,
            (_, Some(c)) => PrimeSet::complement(parse_prime_list(c)?)?,
            _ => PrimeSet::All,
        })
    }
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn input(message: impl Into<String>) -> Self {
        Fail { code: 2, message: message.into() }
    }

    fn rejected(message: impl Into<String>) -> Self {
        Fail { code: 1, message: message.into() }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::input(e.to_string())
    }
}

fn read(path: &str) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::input(format!("{path}: {e}")))
}

fn load_spec(reference: &str) -> Result<AnySpec, Fail> {
    if let Some(r) = reference.strip_prefix("builtin:") {
        let (which, set) = parse_builtin_ref(r)?;
        return Ok(builtin(which.name(), set)?);
    }
    let text = read(reference)?;
    LAdditiveSpec::from_json(&text)
        .map(AnySpec::LAdditive)
        .map_err(|e| Fail::input(format!("{reference}: {e}")))
}

fn load_l_additive(reference: &str) -> Result<LAdditiveSpec, Fail> {
    Ok(load_spec(reference)?.into_l_additive()?)
}

fn load_table(path: &str) -> Result<FunctionTable, Fail> {
    FunctionTable::from_csv(&read(path)?).map_err(|e| Fail::input(format!("{path}: {e}")))
}

fn natural(text: &str) -> Result<Natural, Fail> {
    Ok(parse_natural(text)?)
}

fn with_float(value: &Rational, float: bool) -> String {
    match (float, value.to_f64()) {
        (true, Some(x)) => format!("{}\t{x}", format_rational(value)),
        _ => format_rational(value),
    }
}

fn class_label(class: &EqualityClass) -> String {
    match class {
        EqualityClass::PowerOfTwo(k) => format!("power_of_two({k})"),
        EqualityClass::PrimePower(p, k) => format!("prime_power({p}, {k})"),
        other => other.name().to_string(),
    }
}

fn print_verdicts(verdicts: &[BoundVerdict]) {
    println!("link\tlhs\trhs\trelation");
    for v in verdicts {
        println!("{v}");
    }
}

fn run(cli: Cli) -> Result<ExitCode, Fail> {
    match cli.command {
        Command::Factor { n } => {
            let n = natural(&n)?;
            let fac = factorize(&n)?;
            if fac.is_one() {
                println!("1");
            } else {
                let parts: Vec<String> = fac
                    .factors()
                    .iter()
                    .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
                    .collect();
                println!("{}", parts.join(" * "));
            }
        }
        Command::Deriv { n, set } => {
            println!("{}", subderivative(&natural(&n)?, &set.prime_set()?)?);
        }
        Command::Ld { n, set, float } => {
            println!("{}", with_float(&log_subderivative(&natural(&n)?, &set.prime_set()?)?, float));
        }
        Command::Eval { spec, n, with_h, float } => {
            let n = natural(&n)?;
            let spec = load_spec(&spec)?;
            println!("{}", with_float(&spec.eval(&n)?, float));
            if with_h {
                let l = spec.into_l_additive()?;
                println!("{}", with_float(&l.eval_h(&n)?, float));
            }
        }
        Command::Decompose { spec } => {
            let (g, h) = load_l_additive(&spec)?.decompose();
            let out = json!({"g": g.to_json(), "h": h.to_json()});
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        }
        Command::Reconstruct { table, primes } => {
            let t = load_table(&table)?;
            let bound = primes.unwrap_or_else(|| default_prime_bound(t.limit()));
            match reconstruct_h(&t, bound) {
                Ok(h) => println!("{}", h.to_json()),
                Err(e @ (Error::VanishesOnPrimes(_) | Error::ZeroReconstructedH(_))) => {
                    return Err(Fail::rejected(e.to_string()))
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Check { table, spec, max, primes, conditions } => {
            let t = match (table, spec) {
                (Some(path), None) => load_table(&path)?,
                (None, Some(spec)) => FunctionTable::from_spec(&load_l_additive(&spec)?, max.unwrap_or(0))?,
                _ => return Err(Fail::input("give a table file or --spec with --max")),
            };
            let bound = primes.unwrap_or_else(|| default_prime_bound(t.limit()));
            if conditions {
                let report = check_conditions(&t, ConditionParams { max_exponent: 3, prime_bound: bound })?;
                for (name, v) in report.verdicts() {
                    println!("{name}\t{v}");
                }
            }
            match check_l_additive(&t, bound) {
                Ok(LAdditivity::Accepted { h, g, checked_pairs, skipped_pairs }) => {
                    println!("accepted");
                    let fmt = |m: &std::collections::BTreeMap<u64, Rational>| {
                        let obj: serde_json::Map<_, _> =
                            m.iter().map(|(p, v)| (p.to_string(), json!(format_rational(v)))).collect();
                        serde_json::Value::Object(obj).to_string()
                    };
                    println!("h\t{}", fmt(&h));
                    println!("g\t{}", fmt(&g));
                    println!("pairs\t{checked_pairs} checked, {skipped_pairs} skipped, range [1, {}]", t.limit());
                }
                Ok(LAdditivity::Zero) => println!("accepted (zero function; every h applies)"),
                Ok(LAdditivity::Rejected(w)) => {
                    println!("rejected: {w}");
                    return Ok(ExitCode::from(1));
                }
                Err(e @ Error::VanishesOnPrimes(_)) => return Err(Fail::rejected(e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Bounds { n, spec } => {
            let n = natural(&n)?;
            let fac = factorize(&n)?;
            let verdicts: Vec<BoundVerdict> = match spec {
                None => {
                    let mut v = bounds::classic_bounds_factored(&n, &fac)?.to_vec();
                    let w = bounds::westrick_bound_factored(&n, &fac)?;
                    v.extend([w.bound, w.improvement]);
                    v
                }
                Some(spec) => {
                    let ctx = bounds::BoundContext::from_factored(&load_l_additive(&spec)?, &n, &fac)?;
                    let mut v = bounds::extended_upper_ctx(&ctx).to_vec();
                    v.push(bounds::extended_westrick_ctx(&ctx));
                    v.push(bounds::extended_lower_ctx(&ctx));
                    v
                }
            };
            println!("class\t{}", class_label(&bounds::classify_factored(&fac)));
            print_verdicts(&verdicts);
            if verdicts.iter().any(BoundVerdict::is_violated) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep { max, builtins, specs, tables, props, workers, out } => {
            let mut subjects = Vec::new();
            for b in &builtins {
                let (which, set) = parse_builtin_ref(b)?;
                subjects.push(Subject::builtin(which, set));
            }
            for path in &specs {
                subjects.push(Subject::spec_json(path.clone(), read(path)?));
            }
            for path in &tables {
                subjects.push(Subject::table_csv(path.clone(), read(path)?));
            }
            if subjects.is_empty() {
                subjects.push(Subject::builtin(leibniz_core::spec::Builtin::D, None));
            }
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let config = SweepConfig { max_n: max, subjects, properties: Property::parse_list(&props)?, workers };
            let report = run_sweep(&config)?;
            let text = report.to_json_string();
            match out {
                Some(path) => fs::write(&path, text + "\n").map_err(|e| Fail::input(format!("{path}: {e}")))?,
                None => println!("{text}"),
            }
            for (subject, error) in &report.rejected_subjects {
                eprintln!("rejected subject {subject}: {error}");
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
