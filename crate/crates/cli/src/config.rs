//! Experiment parameters: a typed schema per experiment, values merged
//! from defaults, an optional flat `key = value` file and command-line
//! flags (later sources win).

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::report::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Flag,
    Text,
}

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` makes the parameter optional with no value.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn float(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: Kind::Float, default: Some(default), help }
    }

    pub const fn optional_float(name: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: Kind::Float, default: None, help }
    }

    pub const fn int(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: Kind::Int, default: Some(default), help }
    }

    pub const fn flag(name: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: Kind::Flag, default: Some("false"), help }
    }

    pub const fn text(name: &'static str, default: &'static str, help: &'static str) -> Self {
        ParamSpec { name, kind: Kind::Text, default: Some(default), help }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Float(f64),
    Int(usize),
    Flag(bool),
    Text(String),
}

/// Fully resolved, typed parameters of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub experiment: String,
    values: Vec<(&'static str, Option<ParamValue>)>,
}

fn parse_value(spec: &ParamSpec, raw: &str) -> Result<ParamValue, CliError> {
    let bad = |what: &str| CliError::Usage(format!("--{}: expected {what}, got {raw:?}", spec.name));
    let raw = raw.trim();
    Ok(match spec.kind {
        Kind::Float => {
            let v: f64 = raw.parse().map_err(|_| bad("a number"))?;
            if !v.is_finite() {
                return Err(bad("a finite number"));
            }
            ParamValue::Float(v)
        }
        Kind::Int => ParamValue::Int(raw.parse().map_err(|_| bad("a non-negative integer"))?),
        Kind::Flag => match raw {
            "true" | "1" | "yes" => ParamValue::Flag(true),
            "false" | "0" | "no" => ParamValue::Flag(false),
            _ => return Err(bad("true or false")),
        },
        Kind::Text => ParamValue::Text(raw.to_string()),
    })
}

impl Config {
    /// Check `raw` against `specs` and fill in defaults. Unknown keys are
    /// rejected.
    pub fn resolve(experiment: &str, specs: &[ParamSpec], raw: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = raw.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            return Err(CliError::Usage(format!("experiment `{experiment}` has no parameter `{k}`")));
        }
        let values = specs
            .iter()
            .map(|s| {
                let v = match raw.get(s.name).map(String::as_str).or(s.default) {
                    Some(r) => Some(parse_value(s, r)?),
                    None => None,
                };
                Ok((s.name, v))
            })
            .collect::<Result<_, CliError>>()?;
        Ok(Config { experiment: experiment.to_string(), values })
    }

    /// Convenience for programmatic runs.
    pub fn from_pairs(experiment: &str, specs: &[ParamSpec], pairs: &[(&str, &str)]) -> Result<Self, CliError> {
        let raw = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Self::resolve(experiment, specs, &raw)
    }

    fn get(&self, name: &str) -> Result<Option<&ParamValue>, CliError> {
        self.values
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v.as_ref())
            .ok_or_else(|| CliError::Usage(format!("parameter `{name}` is not defined for `{}`", self.experiment)))
    }

    pub fn opt_float(&self, name: &str) -> Result<Option<f64>, CliError> {
        match self.get(name)? {
            Some(ParamValue::Float(v)) => Ok(Some(*v)),
            None => Ok(None),
            Some(_) => Err(CliError::Usage(format!("`{name}` is not a number"))),
        }
    }

    pub fn float(&self, name: &str) -> Result<f64, CliError> {
        self.opt_float(name)?
            .ok_or_else(|| CliError::Usage(format!("`{name}` requires a value")))
    }

    pub fn int(&self, name: &str) -> Result<usize, CliError> {
        match self.get(name)? {
            Some(ParamValue::Int(v)) => Ok(*v),
            _ => Err(CliError::Usage(format!("`{name}` is not an integer"))),
        }
    }

    pub fn flag(&self, name: &str) -> Result<bool, CliError> {
        match self.get(name)? {
            Some(ParamValue::Flag(v)) => Ok(*v),
            _ => Err(CliError::Usage(format!("`{name}` is not a flag"))),
        }
    }

    pub fn text(&self, name: &str) -> Result<&str, CliError> {
        match self.get(name)? {
            Some(ParamValue::Text(v)) => Ok(v),
            _ => Err(CliError::Usage(format!("`{name}` is not text"))),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (name, v) in &self.values {
            let j = match v {
                None => Value::Null,
                Some(ParamValue::Float(x)) => num(*x),
                Some(ParamValue::Int(i)) => Value::from(*i),
                Some(ParamValue::Flag(b)) => Value::Bool(*b),
                Some(ParamValue::Text(s)) => Value::String(s.clone()),
            };
            m.insert(name.to_string(), j);
        }
        Value::Object(m)
    }
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Usage(format!("config line {}: bad key {:?}", lineno + 1, k.trim())));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(out)
}

/// `start:stop:step` inclusive grid, e.g. `1:1.95:0.05`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid {text:?}: expected start:stop:step with step > 0"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [a, b, h] = parts[..] else { return Err(bad()) };
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(CliError::Usage(format!("grid {text:?} has too many points")));
    }
    Ok((0..=n).map(|k| a + k as f64 * h).collect())
}
