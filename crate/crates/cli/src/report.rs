//! JSON reports. Every reported quantity carries a provenance tag, and
//! floats are printed with 17 significant digits so reruns are
//! byte-identical.

use num_complex::Complex64;
use serde_json::{Map, Value};
use vortexlab::export::fmt17;
use vortexlab::Vec2;

use crate::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Produced by a numerical computation.
    Computed,
    /// Evaluated from an analytic formula.
    ClosedForm,
    /// Taken from the configuration.
    Input,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Computed => "computed",
            Provenance::ClosedForm => "closed_form",
            Provenance::Input => "input",
        }
    }
}

/// A float as a JSON number in 17-significant-digit scientific notation;
/// non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt17(x)).expect("formatted float is valid JSON")
    } else {
        Value::String(format!("{x}"))
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn complex(z: Complex64) -> Value {
    nums(&[z.re, z.im])
}

pub fn point(p: Vec2) -> Value {
    nums(&[p.x, p.y])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    experiment: String,
    config: Value,
    results: Map<String, Value>,
}

impl Report {
    pub fn new(config: &Config) -> Self {
        Report {
            experiment: config.experiment.clone(),
            config: config.to_json(),
            results: Map::new(),
        }
    }

    pub fn put(&mut self, key: &str, value: Value, provenance: Provenance) {
        let mut m = Map::new();
        m.insert("value".into(), value);
        m.insert("provenance".into(), Value::String(provenance.as_str().into()));
        self.results.insert(key.to_string(), Value::Object(m));
    }

    pub fn scalar(&mut self, key: &str, x: f64, provenance: Provenance) {
        self.put(key, num(x), provenance);
    }

    pub fn results(&self) -> &Map<String, Value> {
        &self.results
    }

    pub fn to_json(&self, files: &[String]) -> Value {
        let mut versions = Map::new();
        versions.insert("vortexlab".into(), Value::String(vortexlab::VERSION.into()));
        versions.insert("vortexlab-cli".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        let mut top = Map::new();
        top.insert("experiment".into(), Value::String(self.experiment.clone()));
        top.insert("versions".into(), Value::Object(versions));
        top.insert("config".into(), self.config.clone());
        top.insert("results".into(), Value::Object(self.results.clone()));
        top.insert("files".into(), Value::Array(files.iter().cloned().map(Value::String).collect()));
        Value::Object(top)
    }
}

/// Everything an experiment produces; the driver decides where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Report,
    pub files: Vec<(String, Vec<u8>)>,
    /// Set when the experiment ran but its checks did not hold.
    pub failure: Option<String>,
}

impl Output {
    pub fn new(report: Report) -> Self {
        Output { report, files: Vec::new(), failure: None }
    }

    pub fn add_file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn file_names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.0.clone()).collect()
    }

    pub fn json_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(&self.report.to_json(&self.file_names())).expect("report serializes");
        s.push('\n');
        s.into_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParamSpec;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = num(0.1);
        assert_eq!(v.to_string(), "1.0000000000000001e-1");
        assert_eq!(num(-3.0).to_string(), "-3.0000000000000000e+0");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        let back: f64 = v.to_string().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn report_layout() {
        let specs = [ParamSpec::float("alpha", "1", "")];
        let c = Config::from_pairs("spectrum", &specs, &[]).unwrap();
        let mut r = Report::new(&c);
        r.scalar("lambda0", 0.25, Provenance::Computed);
        r.scalar("alpha", 1.0, Provenance::Input);
        let mut out = Output::new(r);
        out.add_file("a.csv", b"x\n".to_vec());
        let j: Value = serde_json::from_slice(&out.json_bytes()).unwrap();
        assert_eq!(j["experiment"], "spectrum");
        assert_eq!(j["results"]["lambda0"]["provenance"], "computed");
        assert_eq!(j["results"]["alpha"]["provenance"], "input");
        assert_eq!(j["files"][0], "a.csv");
        assert_eq!(j["versions"]["vortexlab"], vortexlab::VERSION);
        let keys: Vec<_> = j.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["experiment", "versions", "config", "results", "files"]);
    }
}
