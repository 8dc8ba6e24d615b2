use std::time::Duration;

use serde_json::Value;
use vortexlab::blob::{blob_escape_experiment, BlobEscapeConfig};
use vortexlab::export::{write_csv_header, write_csv_row};

use super::{crystal_params, render, settings, settings_params};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{num, Output, Provenance, Report};

pub struct BlobExperiment;

pub fn blob_config(config: &Config) -> Result<BlobEscapeConfig, CliError> {
    let budget = config.float("budget")?;
    if !(budget > 0.0) {
        return Err(CliError::Usage(format!("--budget must be positive, got {budget}")));
    }
    Ok(BlobEscapeConfig {
        n_total: config.int("n")?,
        alpha: config.float("alpha")?,
        epsilon: config.float("epsilon")?,
        nu: config.float("nu")?,
        beta: config.float("beta")?,
        markers: config.int("markers")?,
        settings: settings(config)?,
        snapshot_interval: config.float("snapshot")?,
        wall_budget: Some(Duration::from_secs_f64(budget)),
    })
}

impl Experiment for BlobExperiment {
    fn name(&self) -> &'static str {
        "blob"
    }

    fn about(&self) -> &'static str {
        "evolve vortex patches (marker clouds) from a perturbed crystal and compare with point vortices"
    }

    fn params(&self) -> Vec<ParamSpec> {
        let mut p = crystal_params();
        p.extend([
            ParamSpec::float("epsilon", "0.1", "perturbation size"),
            ParamSpec::float("nu", "2", "concentration exponent: patch radius eps^(nu/2)/4"),
            ParamSpec::float("beta", "0.75", "exit radius exponent"),
            ParamSpec::int("markers", "30", "markers per patch"),
            ParamSpec::float("snapshot", "0.05", "minimum time between recorded snapshots"),
            ParamSpec::float("budget", "300", "wall-clock budget in seconds"),
        ]);
        p.extend(settings_params("1e-9", "1e-12"));
        p
    }

    fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
        let cfg = blob_config(config)?;
        let res = blob_escape_experiment(&cfg)?;
        let gap_limit = cfg.epsilon.powf(cfg.beta) / 10.0;
        let exit = res.diagnostics.exit_time;
        let mut r = Report::new(config);
        r.scalar("lambda0", res.lambda0, Provenance::Computed);
        r.scalar("kappa1", res.kappa1, Provenance::Computed);
        r.scalar("kappa2", res.kappa2, Provenance::Computed);
        r.put("exit_time", exit.map_or(Value::Null, num), Provenance::Computed);
        r.scalar("exit_bound", res.exit_bound, Provenance::Computed);
        r.put(
            "exit_within_bound",
            Value::Bool(exit.is_some_and(|t| t <= res.exit_bound)),
            Provenance::Computed,
        );
        r.scalar("oracle_tau_z", res.oracle.tau_z, Provenance::Computed);
        r.scalar("max_gap", res.max_gap, Provenance::Computed);
        r.scalar("gap_limit", gap_limit, Provenance::Computed);
        r.scalar("inertia_ratio", res.inertia_ratio, Provenance::Computed);
        r.scalar("envelope_constant", res.envelope_constant, Provenance::Computed);
        r.put("regularizations", Value::from(res.regularizations), Provenance::Computed);
        r.scalar("momentum_drift", res.momentum_drift, Provenance::Computed);
        r.scalar("oracle_hamiltonian_drift", res.oracle.invariant_drift().hamiltonian, Provenance::Computed);
        let diag = render(|w| res.diagnostics.write_csv(w))?;
        let gap = render(|w| {
            write_csv_header(w, &["t", "gap"])?;
            for &(t, g) in &res.gap {
                write_csv_row(w, &[t, g])?;
            }
            Ok(())
        })?;
        let mut out = Output::new(r);
        out.add_file("blob_diagnostics.csv", diag);
        out.add_file("blob_gap.csv", gap);
        Ok(out)
    }
}
