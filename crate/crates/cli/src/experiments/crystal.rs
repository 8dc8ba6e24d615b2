use serde_json::Value;
use vortexlab::crystal::{build_crystal, center_intensity, stationarity_residual};
use vortexlab::export::{write_csv_header, write_csv_row};

use super::{crystal_params, crystal_spec, render};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{num, point, Output, Provenance, Report};

pub struct CrystalExperiment;

impl Experiment for CrystalExperiment {
    fn name(&self) -> &'static str {
        "crystal"
    }

    fn about(&self) -> &'static str {
        "build a stationary vortex crystal and report its residual"
    }

    fn params(&self) -> Vec<ParamSpec> {
        crystal_params()
    }

    fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
        let spec = crystal_spec(config)?;
        let model = *spec.model();
        let z = build_crystal(&spec);
        let mut r = Report::new(config);
        r.scalar("c_alpha", model.c_alpha(), Provenance::ClosedForm);
        r.scalar("center_intensity", center_intensity(&spec), Provenance::ClosedForm);
        r.put(
            "positions",
            Value::Array(z.positions().into_iter().map(point).collect()),
            Provenance::ClosedForm,
        );
        r.put(
            "intensities",
            Value::Array(z.intensities().into_iter().map(num).collect()),
            Provenance::ClosedForm,
        );
        r.scalar("residual_sup_norm", stationarity_residual(&model, &z)?, Provenance::Computed);
        r.scalar("min_pair_distance", z.min_pair_distance(), Provenance::Computed);
        let csv = render(|w| {
            write_csv_header(w, &["x", "y", "a"])?;
            for v in z.vortices() {
                write_csv_row(w, &[v.position.x, v.position.y, v.intensity])?;
            }
            Ok(())
        })?;
        let mut out = Output::new(r);
        out.add_file("crystal.csv", csv);
        Ok(out)
    }
}
