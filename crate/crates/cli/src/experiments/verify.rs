use serde_json::{Map, Value};

use crate::acceptance::{run_selected, AcceptanceSettings, CriterionResult, ALL};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{num, Output, Provenance, Report};

pub struct VerifyExperiment;

/// Parse `all` or a comma-separated list of criterion numbers.
pub fn parse_criteria(text: &str) -> Result<Vec<usize>, CliError> {
    if text.trim() == "all" {
        return Ok(ALL.to_vec());
    }
    let mut ids = Vec::new();
    for part in text.split(',') {
        let id: usize = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--criteria: expected `all` or numbers 1-10, got {part:?}")))?;
        if !ALL.contains(&id) {
            return Err(CliError::Usage(format!("--criteria: no criterion {id}")));
        }
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(ids)
}

fn criterion_json(r: &CriterionResult) -> Value {
    let checks = r
        .checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("label".into(), Value::String(c.label.clone()));
            m.insert("passed".into(), Value::Bool(c.passed));
            m.insert("detail".into(), Value::String(c.detail.clone()));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("id".into(), Value::from(r.id));
    m.insert("title".into(), Value::String(r.title.into()));
    m.insert("passed".into(), Value::Bool(r.passed()));
    m.insert("elapsed_seconds".into(), num(r.elapsed.as_secs_f64()));
    m.insert("budget_seconds".into(), Value::from(r.budget.as_secs()));
    m.insert("checks".into(), Value::Array(checks));
    Value::Object(m)
}

impl Experiment for VerifyExperiment {
    fn name(&self) -> &'static str {
        "verify"
    }

    fn about(&self) -> &'static str {
        "run the acceptance checks and report PASS/FAIL per criterion (exit 1 on any failure)"
    }

    fn params(&self) -> Vec<ParamSpec> {
        vec![
            ParamSpec::text("criteria", "all", "`all` or a comma-separated list such as 1,3,5"),
            ParamSpec::float("probe-seconds", "45", "wall-clock probe for the full-scale blob run"),
        ]
    }

    fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
        let ids = parse_criteria(config.text("criteria")?)?;
        let probe = config.float("probe-seconds")?;
        if !(probe > 0.0) {
            return Err(CliError::Usage(format!("--probe-seconds must be positive, got {probe}")));
        }
        let results = run_selected(&ids, AcceptanceSettings { probe_seconds: probe }, |r| {
            eprintln!("{}", r.summary_line());
            for l in r.detail_lines() {
                eprintln!("{l}");
            }
        });
        let failed: Vec<String> = results.iter().filter(|r| !r.passed()).map(|r| r.id.to_string()).collect();
        let mut rep = Report::new(config);
        rep.put("criteria", Value::Array(results.iter().map(criterion_json).collect()), Provenance::Computed);
        rep.put("all_passed", Value::Bool(failed.is_empty()), Provenance::Computed);
        let mut out = Output::new(rep);
        if !failed.is_empty() {
            out.failure = Some(format!("criteria {} failed", failed.join(", ")));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_lists() {
        assert_eq!(parse_criteria("all").unwrap(), ALL.to_vec());
        assert_eq!(parse_criteria("3, 1,3").unwrap(), vec![3, 1]);
        assert!(matches!(parse_criteria("0"), Err(CliError::Usage(_))));
        assert!(matches!(parse_criteria("x"), Err(CliError::Usage(_))));
    }
}
