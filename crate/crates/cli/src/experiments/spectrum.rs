use std::f64::consts::PI;

use serde_json::Value;
use vortexlab::crystal::build_crystal;
use vortexlab::export::{write_csv_header, write_csv_row};
use vortexlab::linearization::linearize;

use super::{crystal_params, crystal_spec, render};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{complex, nums, Output, Provenance, Report};

pub struct SpectrumExperiment;

/// C_α(2 − 2^{−α})√α, the three-vortex instability rate.
pub fn three_vortex_lambda0(c_alpha: f64, alpha: f64) -> f64 {
    c_alpha * (2.0 - 2f64.powf(-alpha)) * alpha.sqrt()
}

impl Experiment for SpectrumExperiment {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn about(&self) -> &'static str {
        "linearize a crystal: eigenvalues, instability rate and Lipschitz constants"
    }

    fn params(&self) -> Vec<ParamSpec> {
        let mut p = crystal_params();
        p.push(ParamSpec::flag("matrix", "also write the Jacobian as jacobian.csv"));
        p
    }

    fn run(&self, config: &Config, _: RunOptions) -> Result<Output, CliError> {
        let spec = crystal_spec(config)?;
        let model = *spec.model();
        let z = build_crystal(&spec);
        let (jac, rep) = linearize(&model, &z)?;
        let mut r = Report::new(config);
        r.scalar("c_alpha", model.c_alpha(), Provenance::ClosedForm);
        r.put(
            "eigenvalues",
            Value::Array(rep.eigenvalues.iter().map(|&e| complex(e)).collect()),
            Provenance::Computed,
        );
        r.scalar("lambda0", rep.lambda0, Provenance::Computed);
        r.scalar("lambda0_imag", rep.lambda0_imag, Provenance::Computed);
        r.put("dominant_is_real", Value::Bool(rep.dominant_is_real()), Provenance::Computed);
        r.put(
            "unstable_eigenvector",
            rep.unstable_eigenvector.as_deref().map_or(Value::Null, nums),
            Provenance::Computed,
        );
        r.scalar("kappa1", rep.kappa1, Provenance::Computed);
        r.scalar("kappa2", rep.kappa2, Provenance::Computed);
        r.scalar("kappa2_over_c_alpha", rep.kappa2_over_c_alpha, Provenance::Computed);
        r.scalar("pairing_defect", rep.pairing_defect, Provenance::Computed);
        r.scalar("trace", jac.trace(), Provenance::Computed);
        let alpha = model.alpha();
        if spec.n_total() == 3 {
            r.scalar(
                "lambda0_closed_form",
                three_vortex_lambda0(model.c_alpha(), alpha),
                Provenance::ClosedForm,
            );
        }
        if spec.n_total() == 7 && alpha == 1.0 {
            r.scalar("lambda0_closed_form", 9.0 / (4.0 * PI), Provenance::ClosedForm);
            r.scalar("kappa2_over_c_alpha_closed_form", 5.0 * 7f64.sqrt() / 2.0, Provenance::ClosedForm);
        }
        let mut out = Output::new(r);
        if config.flag("matrix")? {
            let m = jac.entries();
            let csv = render(|w| {
                let header: Vec<String> = (1..=m.ncols()).map(|j| format!("c{j}")).collect();
                write_csv_header(w, &header)?;
                for i in 0..m.nrows() {
                    let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
                    write_csv_row(w, &row)?;
                }
                Ok(())
            })?;
            out.add_file("jacobian.csv", csv);
        }
        Ok(out)
    }
}
