use serde_json::Value;
use vortexlab::ode::escape::{escape_experiment, EscapeOptions};

use super::{crystal_params, crystal_spec, render, settings, settings_params};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{nums, Output, Provenance, Report};

pub struct EscapeExperiment;

impl Experiment for EscapeExperiment {
    fn name(&self) -> &'static str {
        "escape"
    }

    fn about(&self) -> &'static str {
        "perturb a crystal by eps/2 along its unstable eigenvector and time the exit from 2 eps^beta"
    }

    fn params(&self) -> Vec<ParamSpec> {
        let mut p = crystal_params();
        p.extend([
            ParamSpec::float("epsilon", "1e-4", "perturbation size (start at sup-distance eps/2)"),
            ParamSpec::float("beta", "0.75", "exit radius exponent: exit at 2 eps^beta"),
            ParamSpec::float("window-lower", "1", "fit window lower edge, in units of eps"),
            ParamSpec::float("window-upper", "0.5", "fit window upper edge, in units of eps^beta"),
            ParamSpec::optional_float("horizon", "give up after this time"),
        ]);
        p.extend(settings_params("1e-12", "1e-14"));
        p
    }

    fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
        let spec = crystal_spec(config)?;
        let options = EscapeOptions {
            window_lower: config.float("window-lower")?,
            window_upper: config.float("window-upper")?,
            horizon: config.opt_float("horizon")?,
            ..Default::default()
        };
        let eps = config.float("epsilon")?;
        let res = escape_experiment(&spec, eps, config.float("beta")?, &settings(config)?, &options)?;
        let mut r = Report::new(config);
        r.scalar("lambda0", res.lambda0, Provenance::Computed);
        r.scalar("tau_z", res.tau_z, Provenance::Computed);
        r.scalar("tau_z_over_abs_ln_eps", res.tau_z / eps.ln().abs(), Provenance::Computed);
        r.scalar("fitted_rate", res.fitted_rate, Provenance::Computed);
        r.scalar("prediction", res.prediction, Provenance::Computed);
        r.scalar(
            "prediction_with_offset",
            res.prediction + 4f64.ln() / res.lambda0,
            Provenance::Computed,
        );
        r.scalar("exit_radius", res.exit_radius, Provenance::Computed);
        r.put("fit_window", nums(&[res.window.0, res.window.1]), Provenance::Computed);
        r.put("fit_points", Value::from(res.fit_points), Provenance::Computed);
        r.put("accepted_steps", Value::from(res.trajectory.solution.stats.accepted), Provenance::Computed);
        let d = res.invariant_drift();
        r.scalar("hamiltonian_drift", d.hamiltonian, Provenance::Computed);
        r.scalar("linear_momentum_drift", d.linear_momentum, Provenance::Computed);
        r.scalar("angular_impulse_drift", d.angular_impulse, Provenance::Computed);
        let csv = render(|w| res.trajectory.write_csv(w))?;
        let mut out = Output::new(r);
        out.add_file("escape_trajectory.csv", csv);
        Ok(out)
    }
}
