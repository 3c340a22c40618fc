//! Exhaustive verification sweeps over `[2, N]`.
//!
//! A sweep runs a list of properties against a list of subjects (specs or
//! tables) and collects violations, equality-set counts and deviations
//! between the usual statement of an equality condition and what is observed.
//! Deviations never count as violations.
//!
//! Work is split into fixed-size chunks that do not depend on the worker
//! count, and chunk results are merged in order, so reports are identical
//! for any number of workers.

use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::bounds::{self, BoundContext, BoundVerdict, EqualityClass};
use crate::numeric::{factorize_small, format_rational, Factorization, Natural, Rational, SIEVE_LIMIT};
use crate::reconstruction::{
    check_conditions, check_l_additive, default_prime_bound, reconstruct_h, witness_independence,
    ConditionParams, FunctionTable, LAdditivity,
};
use crate::spec::{builtin, builtin_ref, Builtin, DefaultRule, LAdditiveSpec, PrimeMap, PrimeSet};
use crate::Error;

const CHUNK: u64 = 4096;
const WITNESS_CAP: usize = 20;
const EXAMPLE_CAP: usize = 10;
/// The definition oracle is cross-checked on `n` up to this bound.
pub const ORACLE_LIMIT: u64 = 100_000;
/// Largest `a`, `b` for conditions (i) and (ii).
const CONDITION_EXPONENT: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Leibniz,
    ChainEq10,
    WestrickEq11,
    ExtendedEq15,
    ExtendedEq16,
    ExtendedLower,
    ReconstructionRoundtrip,
    Conditions,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Leibniz,
        Property::ChainEq10,
        Property::WestrickEq11,
        Property::ExtendedEq15,
        Property::ExtendedEq16,
        Property::ExtendedLower,
        Property::ReconstructionRoundtrip,
        Property::Conditions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Leibniz => "leibniz",
            Property::ChainEq10 => "chain-eq10",
            Property::WestrickEq11 => "westrick-eq11",
            Property::ExtendedEq15 => "extended-eq15",
            Property::ExtendedEq16 => "extended-eq16",
            Property::ExtendedLower => "extended-lower",
            Property::ReconstructionRoundtrip => "reconstruction-roundtrip",
            Property::Conditions => "conditions",
        }
    }

    /// Properties about `D` alone, run once whatever the subjects.
    pub fn is_derivative_only(self) -> bool {
        matches!(self, Property::ChainEq10 | Property::WestrickEq11)
    }

    /// Parses `all` or a comma-separated list of names.
    pub fn parse_list(text: &str) -> Result<Vec<Property>, Error> {
        if text == "all" {
            return Ok(Property::ALL.to_vec());
        }
        text.split(',').map(str::parse).collect()
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::SweepConfig(format!("unknown property {s:?}")))
    }
}

impl fmt::Display for Property {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub enum SubjectSource {
    Builtin(Builtin, Option<PrimeSet>),
    Spec(LAdditiveSpec),
    SpecJson(String),
    Table(FunctionTable),
    TableCsv(String),
}

/// Something to sweep. The label appears in witnesses and in their recheck
/// commands, so for files it should be the path.
#[derive(Clone, Debug)]
pub struct Subject {
    pub label: String,
    pub source: SubjectSource,
}

impl Subject {
    pub fn builtin(which: Builtin, set: Option<PrimeSet>) -> Self {
        Subject { label: format!("builtin:{}", builtin_ref(which, set.as_ref())), source: SubjectSource::Builtin(which, set) }
    }

    pub fn spec(label: impl Into<String>, spec: LAdditiveSpec) -> Self {
        Subject { label: label.into(), source: SubjectSource::Spec(spec) }
    }

    pub fn spec_json(label: impl Into<String>, text: impl Into<String>) -> Self {
        Subject { label: label.into(), source: SubjectSource::SpecJson(text.into()) }
    }

    pub fn table(label: impl Into<String>, table: FunctionTable) -> Self {
        Subject { label: label.into(), source: SubjectSource::Table(table) }
    }

    pub fn table_csv(label: impl Into<String>, text: impl Into<String>) -> Self {
        Subject { label: label.into(), source: SubjectSource::TableCsv(text.into()) }
    }

    fn resolve(&self) -> Result<Resolved, Error> {
        Ok(match &self.source {
            SubjectSource::Builtin(which, set) => {
                Resolved::Spec(builtin(which.name(), set.clone())?.into_l_additive()?)
            }
            SubjectSource::Spec(s) => Resolved::Spec(s.clone()),
            SubjectSource::SpecJson(text) => Resolved::Spec(LAdditiveSpec::from_json(text)?),
            SubjectSource::Table(t) => Resolved::Table(t.clone()),
            SubjectSource::TableCsv(text) => Resolved::Table(FunctionTable::from_csv(text)?),
        })
    }
}

enum Resolved {
    Spec(LAdditiveSpec),
    Table(FunctionTable),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub max_n: u64,
    pub subjects: Vec<Subject>,
    pub properties: Vec<Property>,
    pub workers: usize,
}

impl SweepConfig {
    fn validate(&self) -> Result<Vec<Property>, Error> {
        if self.max_n < 2 || self.max_n > u64::from(SIEVE_LIMIT) {
            return Err(Error::SweepConfig(format!("max_n must lie in [2, {SIEVE_LIMIT}], got {}", self.max_n)));
        }
        if self.properties.is_empty() {
            return Err(Error::SweepConfig("no properties selected".into()));
        }
        if self.workers == 0 {
            return Err(Error::SweepConfig("workers must be positive".into()));
        }
        let mut props = self.properties.clone();
        props.sort();
        props.dedup();
        Ok(props)
    }
}

/// `D_S(n)` by repeated trial division, sharing no code with the factoring
/// routines.
pub fn definition_oracle_d(n: &Natural, set: &PrimeSet) -> Natural {
    let Some(small) = n.to_u64() else {
        return definition_oracle_big(n, set);
    };
    let mut m = small;
    let mut total = Natural::zero();
    let mut d = 2u64;
    let mut add = |p: u64, count: u64| {
        let p_big = Natural::from(p);
        if count > 0 && set.contains(&p_big) {
            total += Natural::from(small / p) * count;
        }
    };
    while d * d <= m {
        let mut count = 0;
        while m % d == 0 {
            m /= d;
            count += 1;
        }
        add(d, count);
        d += 1;
    }
    if m > 1 {
        add(m, 1);
    }
    total
}

fn definition_oracle_big(n: &Natural, set: &PrimeSet) -> Natural {
    let mut m = n.clone();
    let mut total = Natural::zero();
    let mut d = Natural::from(2u32);
    while &d * &d <= m {
        let mut count = 0u32;
        while (&m % &d).is_zero() {
            m /= &d;
            count += 1;
        }
        if count > 0 && set.contains(&d) {
            total += n / &d * count;
        }
        d += 1u32;
    }
    if m > Natural::from(1u32) && set.contains(&m) {
        total += n / &m;
    }
    total
}

const CLASS_NAMES: [&str; 5] = ["prime", "power_of_two", "prime_power", "two_smooth_tail", "other"];

fn class_index(class: &EqualityClass) -> usize {
    match class {
        EqualityClass::Prime => 0,
        EqualityClass::PowerOfTwo(_) => 1,
        EqualityClass::PrimePower(..) => 2,
        EqualityClass::TwoSmoothTail => 3,
        EqualityClass::Other => 4,
    }
}

/// A recorded disagreement between a usual statement and the observed set.
struct DeviationSlot {
    link: &'static str,
    stated: &'static str,
    observed: &'static str,
}

struct Layout {
    links: &'static [&'static str],
    deviations: &'static [DeviationSlot],
}

const NO_LINKS: Layout = Layout { links: &[], deviations: &[] };

const CHAIN_LAYOUT: Layout = Layout {
    links: &[bounds::CHAIN_LOWER, bounds::CHAIN_MIDDLE, bounds::CHAIN_RIGHT],
    deviations: &[DeviationSlot {
        link: bounds::CHAIN_LOWER,
        stated: "equality iff n is a prime or a power of 2",
        observed: "equality iff n is a prime power",
    }],
};

const WESTRICK_LAYOUT: Layout = Layout { links: &[bounds::WESTRICK, bounds::WESTRICK_IMPROVES], deviations: &[] };

const UPPER_LAYOUT: Layout = Layout {
    links: &[bounds::EXT_UPPER, bounds::EXT_UPPER_LOG],
    deviations: &[
        DeviationSlot {
            link: bounds::EXT_UPPER,
            stated: "equality iff n is a power of 2",
            observed: "equality iff s = 0, or every prime of n where f is nonzero is 2 and h(2) = 2",
        },
        DeviationSlot {
            link: bounds::EXT_UPPER_LOG,
            stated: "equality iff n is a power of 2",
            observed: "equality iff n = 2^s",
        },
    ],
};

const WESTRICK_EXT_LAYOUT: Layout = Layout {
    links: &[bounds::EXT_WESTRICK],
    deviations: &[
        DeviationSlot {
            link: bounds::EXT_WESTRICK,
            stated: "equality iff n is prime or p_1 = ... = p_(s-1) = 2 = h(2)",
            observed: "equality iff n is prime, or q_1 = ... = q_(r-1) = 2 = h(2) and f(2) = f(q_r)",
        },
        DeviationSlot {
            link: bounds::EXT_WESTRICK,
            stated: "the inequality holds without assuming s = r",
            observed: "the inequality fails for some n with s < r",
        },
    ],
};

const LOWER_LAYOUT: Layout = Layout {
    links: &[bounds::EXT_LOWER],
    deviations: &[DeviationSlot {
        link: bounds::EXT_LOWER,
        stated: "equality iff n is a prime or a power of 2",
        observed: "equality iff f is constant on the primes of n, and h is too unless that constant is 0",
    }],
};

fn layout(property: Property) -> &'static Layout {
    match property {
        Property::ChainEq10 => &CHAIN_LAYOUT,
        Property::WestrickEq11 => &WESTRICK_LAYOUT,
        Property::ExtendedEq15 => &UPPER_LAYOUT,
        Property::ExtendedEq16 => &WESTRICK_EXT_LAYOUT,
        Property::ExtendedLower => &LOWER_LAYOUT,
        _ => &NO_LINKS,
    }
}

/// Results for one subject over part of the range.
#[derive(Default)]
struct Tally {
    checked: u64,
    violation_count: u64,
    violations: Vec<Value>,
    classes: Vec<[u64; 5]>,
    deviations: Vec<(u64, Vec<u64>)>,
    precondition_failed: u64,
    notes: Vec<String>,
}

impl Tally {
    fn new(layout: &Layout) -> Self {
        Tally {
            classes: vec![[0; 5]; layout.links.len()],
            deviations: vec![(0, Vec::new()); layout.deviations.len()],
            ..Tally::default()
        }
    }

    fn violation(&mut self, witness: Value) {
        self.violation_count += 1;
        if self.violations.len() < WITNESS_CAP {
            self.violations.push(witness);
        }
    }

    fn deviation(&mut self, slot: usize, n: u64) {
        let (count, examples) = &mut self.deviations[slot];
        *count += 1;
        if examples.len() < EXAMPLE_CAP {
            examples.push(n);
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.violation_count += other.violation_count;
        let room = WITNESS_CAP.saturating_sub(self.violations.len());
        self.violations.extend(other.violations.into_iter().take(room));
        for (mine, theirs) in self.classes.iter_mut().zip(other.classes) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        for ((count, examples), (c, e)) in self.deviations.iter_mut().zip(other.deviations) {
            *count += c;
            let room = EXAMPLE_CAP.saturating_sub(examples.len());
            examples.extend(e.into_iter().take(room));
        }
        self.precondition_failed += other.precondition_failed;
        self.notes.extend(other.notes);
    }

    /// Records one bound link at `n`: a violation when the inequality fails
    /// or equality disagrees with the exact prediction, and a deviation when
    /// it disagrees with the stated condition.
    fn link(&mut self, at: &Point<'_>, index: usize, verdict: &BoundVerdict, exact: bool, stated: Option<(usize, bool)>) {
        let equal = verdict.is_equal();
        if verdict.is_violated() {
            self.violation(bound_witness(at, verdict, "inequality violated"));
        } else if equal != exact {
            let kind = if equal { "unexpected equality" } else { "expected equality" };
            self.violation(bound_witness(at, verdict, kind));
        }
        if equal {
            self.classes[index][class_index(at.class)] += 1;
        }
        if let Some((slot, stated)) = stated {
            if stated != equal {
                self.deviation(slot, at.n);
            }
        }
    }
}

struct Point<'a> {
    subject: &'a str,
    n: u64,
    class: &'a EqualityClass,
    recheck: String,
}

fn bound_witness(at: &Point<'_>, v: &BoundVerdict, kind: &str) -> Value {
    json!({
        "subject": at.subject,
        "n": at.n,
        "link": v.link,
        "kind": kind,
        "lhs": format_rational(&v.lhs),
        "rhs": format_rational(&v.rhs),
        "relation": v.relation.label(),
        "recheck": at.recheck,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub subject: String,
    pub link: &'static str,
    pub stated: &'static str,
    pub observed: &'static str,
    pub count: u64,
    pub examples: Vec<u64>,
}

/// Equality counts by class for each link of one subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityCounts {
    pub subject: String,
    pub links: Vec<(&'static str, [u64; 5])>,
}

impl EqualityCounts {
    pub fn link(&self, name: &str) -> Option<&[u64; 5]> {
        self.links.iter().find(|(l, _)| *l == name).map(|(_, c)| c)
    }

    /// Count for a class name such as `"power_of_two"`.
    pub fn count(&self, link: &str, class: &str) -> u64 {
        let i = CLASS_NAMES.iter().position(|c| *c == class).expect("known class");
        self.link(link).map_or(0, |c| c[i])
    }

    pub fn total(&self, link: &str) -> u64 {
        self.link(link).map_or(0, |c| c.iter().sum())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub checked: u64,
    pub violation_count: u64,
    pub violations: Vec<Value>,
    pub equality_classes: Vec<EqualityCounts>,
    pub deviations: Vec<Deviation>,
    pub precondition_failed: Vec<(String, u64)>,
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn classes_for(&self, subject: &str) -> Option<&EqualityCounts> {
        self.equality_classes.iter().find(|c| c.subject == subject)
    }

    fn absorb(&mut self, subject: &str, layout: &Layout, tally: Tally) {
        self.checked += tally.checked;
        self.violation_count += tally.violation_count;
        let room = WITNESS_CAP.saturating_sub(self.violations.len());
        self.violations.extend(tally.violations.into_iter().take(room));
        if !layout.links.is_empty() {
            self.equality_classes.push(EqualityCounts {
                subject: subject.to_string(),
                links: layout.links.iter().copied().zip(tally.classes).collect(),
            });
        }
        for (slot, (count, examples)) in layout.deviations.iter().zip(tally.deviations) {
            if count > 0 {
                self.deviations.push(Deviation {
                    subject: subject.to_string(),
                    link: slot.link,
                    stated: slot.stated,
                    observed: slot.observed,
                    count,
                    examples,
                });
            }
        }
        if tally.precondition_failed > 0 {
            self.precondition_failed.push((subject.to_string(), tally.precondition_failed));
        }
        self.notes.extend(tally.notes);
    }

    pub fn to_json(&self) -> Value {
        let mut classes = Map::new();
        for counts in &self.equality_classes {
            let mut links = Map::new();
            for (link, c) in &counts.links {
                let by_class: Map<String, Value> = CLASS_NAMES
                    .iter()
                    .zip(c)
                    .filter(|(_, &v)| v > 0)
                    .map(|(name, v)| (name.to_string(), json!(v)))
                    .collect();
                links.insert(link.to_string(), Value::Object(by_class));
            }
            classes.insert(counts.subject.clone(), Value::Object(links));
        }
        let deviations: Vec<Value> = self
            .deviations
            .iter()
            .map(|d| {
                json!({
                    "subject": d.subject,
                    "link": d.link,
                    "stated": d.stated,
                    "observed": d.observed,
                    "count": d.count,
                    "examples": d.examples,
                })
            })
            .collect();
        let mut out = Map::new();
        out.insert("checked".into(), json!(self.checked));
        out.insert("violation_count".into(), json!(self.violation_count));
        out.insert("violations".into(), Value::Array(self.violations.clone()));
        out.insert("equality_classes".into(), Value::Object(classes));
        out.insert("deviations".into(), Value::Array(deviations));
        if !self.precondition_failed.is_empty() {
            let pre: Map<String, Value> =
                self.precondition_failed.iter().map(|(s, c)| (s.clone(), json!(c))).collect();
            out.insert("precondition_failed".into(), Value::Object(pre));
        }
        if !self.notes.is_empty() {
            out.insert("notes".into(), json!(self.notes));
        }
        Value::Object(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepReport {
    pub max_n: u64,
    pub subjects: Vec<String>,
    pub rejected_subjects: Vec<(String, String)>,
    pub properties: Vec<(Property, PropertyReport)>,
}

impl SweepReport {
    pub fn property(&self, p: Property) -> Option<&PropertyReport> {
        self.properties.iter().find(|(q, _)| *q == p).map(|(_, r)| r)
    }

    pub fn violation_count(&self) -> u64 {
        self.properties.iter().map(|(_, r)| r.violation_count).sum()
    }

    /// No violations. Rejected subjects and deviations do not count.
    pub fn passed(&self) -> bool {
        self.violation_count() == 0
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("max_n".into(), json!(self.max_n));
        out.insert("subjects".into(), json!(self.subjects));
        let rejected: Vec<Value> = self
            .rejected_subjects
            .iter()
            .map(|(s, e)| json!({"subject": s, "error": e}))
            .collect();
        out.insert("rejected_subjects".into(), Value::Array(rejected));
        for (p, report) in &self.properties {
            out.insert(p.name().into(), report.to_json());
        }
        Value::Object(out)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport, Error> {
    let properties = config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::SweepConfig(e.to_string()))?;
    let mut subjects = Vec::new();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for s in &config.subjects {
        match s.resolve() {
            Ok(r) => {
                accepted.push(s.label.clone());
                subjects.push((s.label.as_str(), r));
            }
            Err(e) => rejected.push((s.label.clone(), e.to_string())),
        }
    }
    let sweeper = Sweeper { pool: &pool, max_n: config.max_n };
    let mut reports = Vec::new();
    for &property in &properties {
        let layout = layout(property);
        let mut report = PropertyReport::default();
        if property.is_derivative_only() {
            let tally = match property {
                Property::ChainEq10 => sweeper.chain(),
                _ => sweeper.westrick(),
            };
            report.absorb("builtin:D", layout, tally);
        } else {
            for (label, subject) in &subjects {
                let tally = match subject {
                    Resolved::Spec(spec) => sweeper.spec_property(property, label, spec),
                    Resolved::Table(table) => sweeper.table_property(property, label, table),
                };
                report.absorb(label, layout, tally);
            }
        }
        reports.push((property, report));
    }
    Ok(SweepReport { max_n: config.max_n, subjects: accepted, rejected_subjects: rejected, properties: reports })
}

struct Sweeper<'a> {
    pool: &'a rayon::ThreadPool,
    max_n: u64,
}

impl Sweeper<'_> {
    /// Runs `visit` on every `n` in `[lo, hi]`, in parallel chunks merged in
    /// order.
    fn range<F>(&self, lo: u64, hi: u64, layout: &Layout, visit: F) -> Tally
    where
        F: Fn(u64, &mut Tally) + Sync,
    {
        let starts: Vec<u64> = (lo..=hi).step_by(CHUNK as usize).collect();
        let parts: Vec<Tally> = self.pool.install(|| {
            starts
                .par_iter()
                .map(|&a| {
                    let mut t = Tally::new(layout);
                    for n in a..=(a + CHUNK - 1).min(hi) {
                        visit(n, &mut t);
                    }
                    t
                })
                .collect()
        });
        let mut total = Tally::new(layout);
        for part in parts {
            total.merge(part);
        }
        total
    }

    /// `(f(n), h(n))` for `n` in `[1, limit]`.
    fn tabulate(&self, spec: &LAdditiveSpec, limit: u64) -> (Vec<Rational>, Vec<Rational>) {
        let starts: Vec<u64> = (1..=limit).step_by(CHUNK as usize).collect();
        let parts: Vec<Vec<(Rational, Rational)>> = self.pool.install(|| {
            starts
                .par_iter()
                .map(|&a| {
                    (a..=(a + CHUNK - 1).min(limit))
                        .map(|n| {
                            let fac = factorize_small(n as u32);
                            (spec.eval_factored(&fac), spec.eval_h_factored(&fac))
                        })
                        .collect()
                })
                .collect()
        });
        parts.into_iter().flatten().unzip()
    }

    fn chain(&self) -> Tally {
        self.range(2, self.max_n, &CHAIN_LAYOUT, |n, t| {
            let fac = factorize_small(n as u32);
            let n_nat = Natural::from(n);
            let verdicts = bounds::classic_bounds_factored(&n_nat, &fac).expect("n >= 2");
            let class = bounds::classify_factored(&fac);
            let at = Point { subject: "builtin:D", n, class: &class, recheck: format!("leibniz bounds {n}") };
            t.checked += 1;
            let exact = bounds::exact_equality_classic(&n_nat, &class);
            let stated = bounds::stated_equality_classic(&n_nat, &class);
            for (i, v) in verdicts.iter().enumerate() {
                let slot = (i == 0).then_some((0, stated[0]));
                t.link(&at, i, v, exact[i], slot);
            }
            if n <= ORACLE_LIMIT {
                let oracle = definition_oracle_d(&n_nat, &PrimeSet::All);
                if Rational::from_integer(oracle.clone().into()) != verdicts[1].lhs {
                    t.violation(json!({
                        "subject": "builtin:D",
                        "n": n,
                        "kind": "definition oracle disagrees",
                        "oracle": oracle.to_string(),
                        "computed": format_rational(&verdicts[1].lhs),
                        "recheck": format!("leibniz deriv {n} --all"),
                    }));
                }
            }
        })
    }

    fn westrick(&self) -> Tally {
        self.range(2, self.max_n, &WESTRICK_LAYOUT, |n, t| {
            let fac = factorize_small(n as u32);
            let n_nat = Natural::from(n);
            let w = bounds::westrick_bound_factored(&n_nat, &fac).expect("n >= 2");
            let class = bounds::classify_factored(&fac);
            let at = Point { subject: "builtin:D", n, class: &class, recheck: format!("leibniz bounds {n}") };
            t.checked += 1;
            t.link(&at, 0, &w.bound, bounds::exact_equality_westrick(&class), None);
            t.link(&at, 1, &w.improvement, n.is_power_of_two(), None);
        })
    }

    fn spec_property(&self, property: Property, label: &str, spec: &LAdditiveSpec) -> Tally {
        let layout = layout(property);
        match property {
            Property::Leibniz => self.leibniz(label, spec),
            Property::ExtendedEq15 => self.extended(label, spec, layout, |ctx, at, t| {
                let v = bounds::extended_upper_ctx(ctx);
                if v[0].precondition_failed() {
                    t.precondition_failed += 1;
                    return;
                }
                t.checked += 1;
                let exact = bounds::exact_equality_ext_upper(ctx);
                let stated = bounds::stated_equality_ext_upper(ctx);
                for i in 0..2 {
                    t.link(at, i, &v[i], exact[i], Some((i, stated[i])));
                }
            }),
            Property::ExtendedEq16 => self.extended(label, spec, layout, |ctx, at, t| {
                let v = bounds::extended_westrick_ctx(ctx);
                if v.precondition_failed() {
                    t.precondition_failed += 1;
                    if v.relation == bounds::Relation::PreconditionViolated("s<r".into()) && v.lhs > v.rhs {
                        t.deviation(1, at.n);
                    }
                    return;
                }
                t.checked += 1;
                let stated = bounds::stated_equality_ext_westrick(ctx);
                t.link(at, 0, &v, bounds::exact_equality_ext_westrick(ctx), Some((0, stated)));
            }),
            Property::ExtendedLower => self.extended(label, spec, layout, |ctx, at, t| {
                let v = bounds::extended_lower_ctx(ctx);
                if v.precondition_failed() {
                    t.precondition_failed += 1;
                    return;
                }
                t.checked += 1;
                let stated = bounds::stated_equality_ext_lower(ctx);
                t.link(at, 0, &v, bounds::exact_equality_ext_lower(ctx), Some((0, stated)));
            }),
            Property::ReconstructionRoundtrip => self.spec_roundtrip(label, spec),
            Property::Conditions => {
                let table = self.spec_table(spec);
                self.conditions(label, &table, &format!("leibniz check --spec {label} --max {}", self.max_n))
            }
            Property::ChainEq10 | Property::WestrickEq11 => unreachable!("run once for D"),
        }
    }

    fn table_property(&self, property: Property, label: &str, table: &FunctionTable) -> Tally {
        match property {
            Property::ReconstructionRoundtrip => {
                let mut t = Tally::new(&NO_LINKS);
                self.rebuild(label, table, &format!("leibniz check {label}"), &mut t);
                t
            }
            Property::Conditions => self.conditions(label, table, &format!("leibniz check {label}")),
            _ => {
                let mut t = Tally::new(layout(property));
                t.notes.push(format!("{label}: {property} needs a spec, not a table; skipped"));
                t
            }
        }
    }

    fn spec_table(&self, spec: &LAdditiveSpec) -> FunctionTable {
        let (f, _) = self.tabulate(spec, self.max_n);
        FunctionTable::new(f).expect("limit within the sieve")
    }

    fn extended<F>(&self, label: &str, spec: &LAdditiveSpec, layout: &Layout, check: F) -> Tally
    where
        F: Fn(&BoundContext, &Point<'_>, &mut Tally) + Sync,
    {
        self.range(2, self.max_n, layout, |n, t| {
            let fac = factorize_small(n as u32);
            let ctx = BoundContext::from_factored(spec, &Natural::from(n), &fac).expect("n >= 2");
            let class = bounds::classify_factored(&fac);
            let at = Point { subject: label, n, class: &class, recheck: format!("leibniz bounds {n} --spec {label}") };
            check(&ctx, &at, t);
        })
    }

    /// `f(mn) = f(m) h(n) + f(n) h(m)` for `m <= n`, `mn <= N`.
    fn leibniz(&self, label: &str, spec: &LAdditiveSpec) -> Tally {
        let (f, h) = self.tabulate(spec, self.max_n);
        let max_n = self.max_n;
        let ms: Vec<u64> = (1..).take_while(|m| m * m <= max_n).collect();
        let parts: Vec<Tally> = self.pool.install(|| {
            ms.par_iter()
                .map(|&m| {
                    let mut t = Tally::new(&NO_LINKS);
                    let (fm, hm) = (&f[m as usize - 1], &h[m as usize - 1]);
                    for n in m..=max_n / m {
                        let (fn_, hn) = (&f[n as usize - 1], &h[n as usize - 1]);
                        let lhs = &f[(m * n) as usize - 1];
                        let rhs = fm * hn + fn_ * hm;
                        t.checked += 1;
                        if *lhs != rhs {
                            t.violation(json!({
                                "subject": label,
                                "m": m,
                                "n": n,
                                "f(mn)": format_rational(lhs),
                                "f(m)h(n)+f(n)h(m)": format_rational(&rhs),
                                "recheck": format!("leibniz eval {label} {}", m * n),
                            }));
                        }
                    }
                    t
                })
                .collect()
        });
        let mut total = Tally::new(&NO_LINKS);
        for part in parts {
            total.merge(part);
        }
        total
    }

    /// Reconstructs `h` from the tabulated spec and compares it with the
    /// spec's own `h`; checks witness independence, `g h = f`, and the
    /// rebuild of the table from the reconstruction.
    fn spec_roundtrip(&self, label: &str, spec: &LAdditiveSpec) -> Tally {
        let mut t = Tally::new(&NO_LINKS);
        let table = self.spec_table(spec);
        let bound = default_prime_bound(self.max_n);
        let recheck = format!("leibniz eval {label}");
        match reconstruct_h(&table, bound) {
            Err(Error::VanishesOnPrimes(_)) => {
                t.notes.push(format!("{label}: f vanishes on every prime up to {bound}, so h is not determined"));
            }
            Err(e) => t.violation(json!({"subject": label, "kind": "reconstruction failed", "error": e.to_string()})),
            Ok(h) => {
                for (&p, hp) in &h.values {
                    t.checked += 1;
                    let expected = spec.y().lookup(&Natural::from(p));
                    if *hp != expected {
                        t.violation(json!({
                            "subject": label,
                            "p": p,
                            "kind": "reconstructed h differs",
                            "reconstructed": format_rational(hp),
                            "expected": format_rational(&expected),
                            "recheck": format!("{recheck} {}", p * p),
                        }));
                    }
                }
                for &p in &h.partition.v_primes {
                    t.checked += 1;
                    if let Err((q1, q2)) = witness_independence(&table, p) {
                        t.violation(json!({
                            "subject": label,
                            "p": p,
                            "kind": "f(pq)/f(q) depends on q",
                            "q1": q1,
                            "q2": q2,
                            "recheck": format!("{recheck} {}", p * q2),
                        }));
                    }
                }
                self.rebuild(label, &table, &recheck, &mut t);
            }
        }
        let (g, h) = spec.decompose();
        let product = self.range(1, self.max_n, &NO_LINKS, |n, t| {
            let fac = factorize_small(n as u32);
            let lhs = g.eval_factored(&fac) * h.eval_factored(&fac);
            let f = table.get(n).unwrap();
            t.checked += 1;
            if lhs != *f {
                t.violation(json!({
                    "subject": label,
                    "n": n,
                    "kind": "g(n) h(n) != f(n)",
                    "gh": format_rational(&lhs),
                    "f": format_rational(f),
                    "recheck": format!("leibniz decompose {label}"),
                }));
            }
        });
        t.merge(product);
        t
    }

    /// Rebuilds `f` from its values at primes and the reconstructed `h`, on
    /// every `n` whose primes are at most `sqrt(N)`, and compares with the
    /// table.
    fn rebuild(&self, label: &str, table: &FunctionTable, recheck: &str, t: &mut Tally) {
        let bound = default_prime_bound(table.limit());
        let h = match reconstruct_h(table, bound) {
            Ok(h) => h,
            Err(Error::VanishesOnPrimes(_)) => {
                t.notes.push(format!("{label}: f vanishes on every prime up to {bound}, so h is not determined"));
                return;
            }
            Err(e) => {
                t.violation(json!({"subject": label, "kind": "reconstruction failed", "error": e.to_string(), "recheck": recheck}));
                return;
            }
        };
        let mut x = PrimeMap::constant(Rational::zero());
        let mut y = PrimeMap::new(DefaultRule::Const(Rational::from_integer(1.into())));
        for (&p, hp) in &h.values {
            let p_nat = Natural::from(p);
            x = x.with_override(p_nat.clone(), table.get(p).unwrap().clone()).expect("p is prime");
            y = y.with_override(p_nat, hp.clone()).expect("p is prime");
        }
        let rebuilt = LAdditiveSpec::new(x, y).expect("reconstructed h is nonzero");
        let within = |fac: &Factorization| fac.primes().all(|p| p.to_u64().is_some_and(|p| p <= bound));
        let part = self.range(1, table.limit(), &NO_LINKS, |n, t| {
            let fac = factorize_small(n as u32);
            if !within(&fac) {
                return;
            }
            t.checked += 1;
            let value = rebuilt.eval_factored(&fac);
            let f = table.get(n).unwrap();
            if value != *f {
                t.violation(json!({
                    "subject": label,
                    "n": n,
                    "kind": "table differs from the function rebuilt from f(p) and h(p)",
                    "table": format_rational(f),
                    "rebuilt": format_rational(&value),
                    "recheck": recheck,
                }));
            }
        });
        t.merge(part);
    }

    fn conditions(&self, label: &str, table: &FunctionTable, recheck: &str) -> Tally {
        let mut t = Tally::new(&NO_LINKS);
        let bound = default_prime_bound(table.limit());
        let params = ConditionParams { max_exponent: CONDITION_EXPONENT, prime_bound: bound };
        let report = match check_conditions(table, params) {
            Ok(r) => r,
            Err(e) => {
                t.violation(json!({"subject": label, "kind": "conditions not checkable", "error": e.to_string(), "recheck": recheck}));
                return t;
            }
        };
        for (name, verdict) in report.verdicts() {
            match verdict {
                crate::reconstruction::Verdict::HoldsOnRange { checked, .. } => t.checked += checked,
                crate::reconstruction::Verdict::Violated(w) => {
                    t.checked += 1;
                    t.violation(json!({
                        "subject": label,
                        "condition": name,
                        "witness": w.to_string(),
                        "recheck": recheck,
                    }));
                }
                crate::reconstruction::Verdict::Vacuous(_) => {}
            }
        }
        if report.necessary_conditions_hold() && report.quotient_c_additive.is_violated() {
            t.notes.push(format!(
                "{label}: conditions (i) to (iv) hold on the range but f/h is not completely additive"
            ));
        }
        match check_l_additive(table, bound) {
            Ok(LAdditivity::Rejected(w)) => t.violation(json!({
                "subject": label,
                "condition": "L-additive on the range",
                "witness": w.to_string(),
                "recheck": recheck,
            })),
            Ok(_) => {}
            Err(Error::VanishesOnPrimes(_)) => {
                t.notes.push(format!("{label}: f vanishes on every prime up to {bound}, so h is not determined"));
            }
            Err(e) => t.violation(json!({"subject": label, "kind": "check failed", "error": e.to_string(), "recheck": recheck})),
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational;
    use crate::subderivative::subderivative;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    fn config(max_n: u64, subjects: Vec<Subject>, properties: &[Property], workers: usize) -> SweepConfig {
        SweepConfig { max_n, subjects, properties: properties.to_vec(), workers }
    }

    fn d() -> Subject {
        Subject::builtin(Builtin::D, None)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(definition_oracle_d(&nat(60), &PrimeSet::All), nat(92));
        assert_eq!(definition_oracle_d(&nat(1), &PrimeSet::All), nat(0));
        assert_eq!(definition_oracle_d(&nat(1 << 10), &PrimeSet::finite_u64(&[2]).unwrap()), nat(5120));
        // 2^64 + 1 = 274177 * 67280421310721 goes through the big path
        let big = (Natural::from(1u32) << 64) + 1u32;
        assert_eq!(definition_oracle_d(&big, &PrimeSet::All), subderivative(&big, &PrimeSet::All).unwrap());
    }

    #[test]
    fn oracle_agrees_with_subderivative() {
        let sets = [
            PrimeSet::All,
            PrimeSet::finite_u64(&[2]).unwrap(),
            PrimeSet::finite_u64(&[3]).unwrap(),
            PrimeSet::finite_u64(&[2, 5]).unwrap(),
        ];
        for s in &sets {
            for n in 1..=20_000u64 {
                assert_eq!(definition_oracle_d(&nat(n), s), subderivative(&nat(n), s).unwrap(), "n = {n}");
            }
        }
    }

    /// `p^k <= limit` with `p` odd and `k >= 2`, by trial division.
    fn odd_prime_powers(limit: u64) -> u64 {
        let is_prime = |p: u64| p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0);
        (3..)
            .take_while(|p| p * p <= limit)
            .filter(|&p| is_prime(p))
            .map(|p| std::iter::successors(Some(p * p), |v| Some(v * p)).take_while(|&v| v <= limit).count() as u64)
            .sum()
    }

    #[test]
    fn derivative_sweep_all_properties() {
        let report = run_sweep(&config(10_000, vec![d()], &Property::ALL, 4)).unwrap();
        for (p, r) in &report.properties {
            assert!(r.passed(), "{p}: {:?}", r.violations);
            assert!(r.checked > 0, "{p}");
        }
        let chain = report.property(Property::ChainEq10).unwrap();
        let classes = chain.classes_for("builtin:D").unwrap();
        // 2^1 .. 2^13
        assert_eq!(classes.total(bounds::CHAIN_MIDDLE), 13);
        let odd_powers = odd_prime_powers(10_000);
        assert_eq!(classes.count(bounds::CHAIN_LOWER, "prime_power"), odd_powers);
        let dev = &chain.deviations[0];
        assert_eq!(dev.link, bounds::CHAIN_LOWER);
        assert_eq!(dev.examples[0], 9);
        assert_eq!(dev.count, odd_powers);
        // for D the extended lower bound is the classic one
        let lower = report.property(Property::ExtendedLower).unwrap();
        assert_eq!(lower.deviations[0].count, odd_powers);
    }

    #[test]
    fn theta_leibniz_passes_trivially() {
        let report =
            run_sweep(&config(100, vec![Subject::builtin(Builtin::Theta, None)], &[Property::Leibniz], 2)).unwrap();
        let r = report.property(Property::Leibniz).unwrap();
        assert!(r.passed());
        assert!(r.checked > 0);
    }

    fn corrupted_d(limit: u64) -> FunctionTable {
        let spec = builtin("D", None).unwrap().into_l_additive().unwrap();
        let mut t = FunctionTable::from_spec(&spec, limit).unwrap();
        t.set(4, parse_rational("3").unwrap());
        t.set(8, parse_rational("5").unwrap());
        t
    }

    #[test]
    fn corrupted_table_is_caught() {
        let report = run_sweep(&config(
            1000,
            vec![Subject::table("corrupted.csv", corrupted_d(1000))],
            &[Property::ReconstructionRoundtrip, Property::Conditions, Property::Leibniz],
            2,
        ))
        .unwrap();
        let r = report.property(Property::ReconstructionRoundtrip).unwrap();
        assert!(!r.passed());
        assert!(r.violations.iter().any(|w| w["n"] == 8 && w["rebuilt"] == "27/4"));
        let c = report.property(Property::Conditions).unwrap();
        assert!(c.violations.iter().any(|w| w["witness"].as_str().unwrap().starts_with("g(8) \u{2260} g(2)+g(4)")));
        let l = report.property(Property::Leibniz).unwrap();
        assert!(l.passed() && l.notes.len() == 1);
    }

    #[test]
    fn partial_derivative_deviations() {
        let d2 = Subject::builtin(Builtin::DS, Some(PrimeSet::finite_u64(&[2]).unwrap()));
        let props = [Property::ExtendedEq15, Property::ExtendedEq16, Property::ExtendedLower, Property::Leibniz];
        let report = run_sweep(&config(200, vec![d2], &props, 3)).unwrap();
        assert!(report.passed(), "{}", report.to_json_string());
        let upper = report.property(Property::ExtendedEq15).unwrap();
        assert_eq!(upper.deviations[0].link, bounds::EXT_UPPER);
        assert!(upper.deviations[0].examples.contains(&6));
        let west = report.property(Property::ExtendedEq16).unwrap();
        let gate = west.deviations.iter().find(|d| d.stated.contains("s = r")).unwrap();
        assert_eq!(gate.examples[0], 6);
    }

    #[test]
    fn rejected_subjects_are_not_fatal() {
        let subjects = vec![
            Subject::builtin(Builtin::N, None),
            Subject::spec_json("bad.json", "{\"x\": 1}"),
            Subject::table_csv("bad.csv", "n,f\n2,0\n"),
            d(),
        ];
        let report = run_sweep(&config(50, subjects, &[Property::Leibniz], 1)).unwrap();
        assert_eq!(report.subjects, vec!["builtin:D".to_string()]);
        assert_eq!(report.rejected_subjects.len(), 3);
        assert!(report.passed());
    }

    #[test]
    fn config_errors() {
        for c in [
            config(1, vec![d()], &[Property::Leibniz], 1),
            config(2_000_000, vec![d()], &[Property::Leibniz], 1),
            config(10, vec![d()], &[], 1),
            config(10, vec![d()], &[Property::Leibniz], 0),
        ] {
            assert!(matches!(run_sweep(&c), Err(Error::SweepConfig(_))));
        }
        assert_eq!(Property::parse_list("leibniz,chain-eq10").unwrap(), vec![Property::Leibniz, Property::ChainEq10]);
        assert_eq!(Property::parse_list("all").unwrap().len(), 8);
        assert!(Property::parse_list("leibniz,nope").is_err());
    }

    #[test]
    fn reports_do_not_depend_on_worker_count() {
        let subjects = vec![
            d(),
            Subject::builtin(Builtin::DS, Some(PrimeSet::finite_u64(&[2, 5]).unwrap())),
            Subject::table("corrupted.csv", corrupted_d(3000)),
        ];
        let run = |w| run_sweep(&config(20_000, subjects.clone(), &Property::ALL, w)).unwrap().to_json_string();
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(8));
    }

    #[test]
    fn witnesses_recheck_individually() {
        let report = run_sweep(&config(
            1000,
            vec![Subject::table("corrupted.csv", corrupted_d(1000))],
            &[Property::ReconstructionRoundtrip],
            2,
        ))
        .unwrap();
        let table = corrupted_d(1000);
        let r = report.property(Property::ReconstructionRoundtrip).unwrap();
        for w in &r.violations {
            let n = w["n"].as_u64().unwrap();
            assert_eq!(format_rational(table.get(n).unwrap()), w["table"]);
            assert_ne!(w["table"], w["rebuilt"]);
        }
    }
}
