//! Experiments are trait objects looked up by name.

use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::experiments;
use crate::report::Output;

/// Options shared by every experiment run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fan independent grid points out over threads.
    pub parallel: bool,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn params(&self) -> Vec<ParamSpec>;
    fn run(&self, config: &Config, options: RunOptions) -> Result<Output, CliError>;
}

pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { entries: Vec::new() }
    }

    /// All built-in experiments.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(experiments::crystal::CrystalExperiment));
        r.register(Box::new(experiments::spectrum::SpectrumExperiment));
        r.register(Box::new(experiments::bounds::BoundsExperiment));
        r.register(Box::new(experiments::escape::EscapeExperiment));
        r.register(Box::new(experiments::blob::BlobExperiment));
        r.register(Box::new(experiments::domain::DomainExperiment));
        r.register(Box::new(experiments::verify::VerifyExperiment));
        r
    }

    /// Panics on a duplicate name.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        assert!(self.get(e.name()).is_none(), "experiment `{}` registered twice", e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }

    /// Resolve `pairs` against the named experiment and run it.
    pub fn run_pairs(&self, name: &str, pairs: &[(&str, &str)], options: RunOptions) -> Result<Output, CliError> {
        let e = self
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment `{name}`")))?;
        let config = Config::from_pairs(name, &e.params(), pairs)?;
        e.run(&config, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Report;

    struct Dummy;

    impl Experiment for Dummy {
        fn name(&self) -> &'static str {
            "dummy"
        }
        fn about(&self) -> &'static str {
            "test"
        }
        fn params(&self) -> Vec<ParamSpec> {
            vec![ParamSpec::int("k", "2", "")]
        }
        fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
            let mut r = Report::new(config);
            r.scalar("k", config.int("k")? as f64, crate::report::Provenance::Input);
            Ok(Output::new(r))
        }
    }

    #[test]
    fn lookup_and_run() {
        let mut r = Registry::empty();
        r.register(Box::new(Dummy));
        assert!(r.get("dummy").is_some());
        assert!(r.get("other").is_none());
        let out = r.run_pairs("dummy", &[("k", "5")], RunOptions::default()).unwrap();
        assert_eq!(out.report.results()["k"]["value"].to_string(), "5.0000000000000000e+0");
        assert!(matches!(r.run_pairs("nope", &[], RunOptions::default()), Err(CliError::Usage(_))));
        assert!(matches!(r.run_pairs("dummy", &[("j", "1")], RunOptions::default()), Err(CliError::Usage(_))));
    }

    #[test]
    #[should_panic(expected = "registered twice")]
    fn duplicate_names_panic() {
        let mut r = Registry::empty();
        r.register(Box::new(Dummy));
        r.register(Box::new(Dummy));
    }

    #[test]
    fn standard_names() {
        let names: Vec<_> = Registry::standard().iter().map(|e| e.name()).collect();
        assert_eq!(names, ["crystal", "spectrum", "bounds", "escape", "blob", "domain", "verify"]);
    }
}
