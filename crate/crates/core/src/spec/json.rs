//! JSON form of function specs.
//!
//! ```json
//! { "x": { "overrides": {"2": "1/2"}, "default": {"kind": "const", "value": "0"} },
//!   "y": { "default": {"kind": "prime"} } }
//! ```
//!
//! `kind` is one of `const`, `prime`, `reciprocal-prime`, or `monomial`
//! (`coeff * p^exponent`, only emitted when a quotient of two rules needs it).
//! `overrides` may be omitted. Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{CAdditiveSpec, CMultiplicativeSpec, DefaultRule, LAdditiveSpec, PrimeMap};
use crate::numeric::{format_rational, parse_natural, parse_rational};
use crate::Error;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLAdditive {
    x: RawPrimeMap,
    y: RawPrimeMap,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrimeMap {
    #[serde(default)]
    overrides: BTreeMap<String, String>,
    default: RawDefault,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefault {
    kind: String,
    value: Option<String>,
    coeff: Option<String>,
    exponent: Option<i32>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::SpecFormat(msg.into())
}

impl RawDefault {
    fn into_rule(self) -> Result<DefaultRule, Error> {
        let no_monomial_fields = self.coeff.is_none() && self.exponent.is_none();
        match (self.kind.as_str(), self.value) {
            ("const", Some(v)) if no_monomial_fields => Ok(DefaultRule::Const(parse_rational(&v)?)),
            ("const", None) => Err(format_err("default of kind \"const\" needs a \"value\"")),
            ("prime", None) if no_monomial_fields => Ok(DefaultRule::PrimeItself),
            ("reciprocal-prime", None) if no_monomial_fields => Ok(DefaultRule::ReciprocalPrime),
            ("monomial", None) => match (self.coeff, self.exponent) {
                (Some(c), Some(e)) => Ok(DefaultRule::monomial(parse_rational(&c)?, e)),
                _ => Err(format_err("default of kind \"monomial\" needs \"coeff\" and \"exponent\"")),
            },
            ("const" | "prime" | "reciprocal-prime" | "monomial", _) => Err(format_err(format!(
                "unexpected fields for default of kind {:?}",
                self.kind
            ))),
            (other, _) => Err(format_err(format!("unknown default kind {other:?}"))),
        }
    }
}

impl RawPrimeMap {
    fn into_map(self) -> Result<PrimeMap, Error> {
        let mut map = PrimeMap::new(self.default.into_rule()?);
        for (p, v) in self.overrides {
            map = map.with_override(parse_natural(&p)?, parse_rational(&v)?)?;
        }
        Ok(map)
    }
}

fn parse_value<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| format_err(e.to_string()))
}

impl PrimeMap {
    pub fn to_json(&self) -> Value {
        let overrides: Map<String, Value> = self
            .overrides
            .iter()
            .map(|(p, v)| (p.to_string(), Value::String(format_rational(v))))
            .collect();
        let default = match &self.default {
            DefaultRule::Const(c) => json!({"kind": "const", "value": format_rational(c)}),
            DefaultRule::PrimeItself => json!({"kind": "prime"}),
            DefaultRule::ReciprocalPrime => json!({"kind": "reciprocal-prime"}),
            DefaultRule::Monomial { coeff, exponent } => {
                json!({"kind": "monomial", "coeff": format_rational(coeff), "exponent": exponent})
            }
        };
        json!({"overrides": overrides, "default": default})
    }
}

impl LAdditiveSpec {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let raw: RawLAdditive = parse_value(text)?;
        LAdditiveSpec::new(raw.x.into_map()?, raw.y.into_map()?)
    }

    pub fn to_json(&self) -> Value {
        json!({"x": self.x.to_json(), "y": self.y.to_json()})
    }
}

impl CAdditiveSpec {
    pub fn to_json(&self) -> Value {
        json!({"x": self.x.to_json()})
    }
}

impl CMultiplicativeSpec {
    pub fn to_json(&self) -> Value {
        json!({"y": self.y.to_json()})
    }
}
