use std::fmt::Write as _;

use crate::numeric::{factorize_small, format_rational, parse_natural, parse_rational, Rational, SIEVE_LIMIT};
use crate::spec::LAdditiveSpec;
use crate::Error;

/// Values of an arithmetic function on every `n` in `[1, limit]`.
///
/// Tables are limited to the factor sieve so every index can be factored by
/// table lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    values: Vec<Rational>,
}

impl FunctionTable {
    pub fn new(values: Vec<Rational>) -> Result<Self, Error> {
        if values.is_empty() || values.len() > SIEVE_LIMIT as usize {
            return Err(Error::TableFormat {
                line: 0,
                message: format!("a table needs between 1 and {SIEVE_LIMIT} rows, got {}", values.len()),
            });
        }
        Ok(FunctionTable { values })
    }

    pub fn tabulate(limit: u64, f: impl Fn(u64) -> Rational) -> Result<Self, Error> {
        Self::new((1..=limit).map(f).collect())
    }

    /// `f(n)` for `n` in `[1, limit]` from a spec's closed form.
    pub fn from_spec(spec: &LAdditiveSpec, limit: u64) -> Result<Self, Error> {
        if limit == 0 || limit > u64::from(SIEVE_LIMIT) {
            return Err(Error::TableFormat {
                line: 0,
                message: format!("a table needs between 1 and {SIEVE_LIMIT} rows, got {limit}"),
            });
        }
        Self::tabulate(limit, |n| spec.eval_factored(&factorize_small(n as u32)))
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn get(&self, n: u64) -> Option<&Rational> {
        if n == 0 {
            return None;
        }
        self.values.get(n as usize - 1)
    }

    /// `f(n)`, or an error naming the missing point.
    pub fn at(&self, n: u64) -> Result<&Rational, Error> {
        self.get(n).ok_or(Error::OutsideTable { n, limit: self.limit() })
    }

    /// Replaces `f(n)`; panics if `n` is outside the table.
    pub fn set(&mut self, n: u64, value: Rational) {
        self.values[n as usize - 1] = value;
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Parses `n,f` CSV: the header line `n,f`, then one row per `n = 1..N`
    /// in order.
    pub fn from_csv(text: &str) -> Result<Self, Error> {
        let err = |line: usize, message: String| Error::TableFormat { line, message };
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        match lines.next() {
            Some("n,f") => {}
            other => return Err(err(1, format!("expected header \"n,f\", found {:?}", other.unwrap_or("")))),
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let (n_text, f_text) = line
                .split_once(',')
                .ok_or_else(|| err(line_no, format!("expected \"n,f\", found {line:?}")))?;
            let n = parse_natural(n_text).map_err(|e| err(line_no, e.to_string()))?;
            let expected = values.len() + 1;
            if n != expected.into() {
                let message = if n < expected.into() {
                    format!("duplicate or out-of-order n = {n}")
                } else {
                    format!("missing n = {expected}")
                };
                return Err(err(line_no, message));
            }
            values.push(parse_rational(f_text).map_err(|e| err(line_no, e.to_string()))?);
        }
        if values.is_empty() {
            return Err(err(2, "table has no rows".into()));
        }
        Self::new(values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,f\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, format_rational(v)).unwrap();
        }
        out
    }
}
