use rayon::prelude::*;
use serde_json::Value;
use vortexlab::bounds::{c0, critical_beta, g_three_vortex, nu_curve, threshold_report, NuCurvePoint};
use vortexlab::crystal::build_crystal;
use vortexlab::export::{write_csv_header, write_csv_row};
use vortexlab::linearization::linearize;

use super::{crystal_params, crystal_spec, render};
use crate::config::{parse_grid, Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{num, Output, Provenance, Report};

pub struct BoundsExperiment;

/// ν thresholds of the `n`-vortex crystal over `alphas`, in order.
pub fn curve(n: usize, alphas: &[f64], parallel: bool) -> Result<Vec<NuCurvePoint>, CliError> {
    let points = if parallel {
        alphas
            .par_iter()
            .map(|&a| nu_curve(n, &[a]).map(|mut v| v.remove(0)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        nu_curve(n, alphas)?
    };
    Ok(points)
}

impl Experiment for BoundsExperiment {
    fn name(&self) -> &'static str {
        "bounds"
    }

    fn about(&self) -> &'static str {
        "confinement thresholds (nu, xi1, beta0); --curve tabulates nu over an alpha grid"
    }

    fn params(&self) -> Vec<ParamSpec> {
        let mut p = crystal_params();
        p.extend([
            ParamSpec::optional_float("nu", "concentration exponent for beta0"),
            ParamSpec::flag("curve", "write bounds_curve.csv over --alpha-grid"),
            ParamSpec::text("alpha-grid", "1:1.95:0.05", "start:stop:step grid of alpha"),
        ]);
        p
    }

    fn run(&self, config: &Config, options: RunOptions) -> Result<Output, CliError> {
        let mut r = Report::new(config);
        r.scalar("c0", c0(), Provenance::ClosedForm);
        r.scalar("g_three_vortex_at_1", g_three_vortex(1.0)?, Provenance::ClosedForm);
        let n = config.int("n")?;
        if config.flag("curve")? {
            let alphas = parse_grid(config.text("alpha-grid")?)?;
            let pts = curve(n, &alphas, options.parallel)?;
            let g: Vec<f64> = alphas.iter().map(|&a| g_three_vortex(a)).collect::<Result<_, _>>()?;
            let csv = render(|w| {
                write_csv_header(w, &["alpha", "g", "h", "lambda0", "kappa1", "kappa2", "dominant_is_real"])?;
                for (p, gv) in pts.iter().zip(&g) {
                    let real = if p.dominant_is_real { 1.0 } else { 0.0 };
                    write_csv_row(w, &[p.alpha, *gv, p.nu_min, p.lambda0, p.kappa1, p.kappa2, real])?;
                }
                Ok(())
            })?;
            let max_h = pts.iter().map(|p| p.nu_min).fold(f64::NEG_INFINITY, f64::max);
            r.put("points", Value::from(pts.len()), Provenance::Computed);
            r.scalar("max_nu_min", max_h, Provenance::Computed);
            r.put("all_nu_min_below_4", Value::Bool(pts.iter().all(|p| p.nu_min < 4.0)), Provenance::Computed);
            r.put(
                "g",
                Value::Array(g.iter().map(|&x| num(x)).collect()),
                Provenance::ClosedForm,
            );
            let mut out = Output::new(r);
            out.add_file("bounds_curve.csv", csv);
            return Ok(out);
        }

        let spec = crystal_spec(config)?;
        let model = *spec.model();
        let (_, rep) = linearize(&model, &build_crystal(&spec))?;
        let t = threshold_report(model.alpha(), rep.kappa1, rep.kappa2, rep.lambda0, config.opt_float("nu")?)?;
        r.scalar("lambda0", t.lambda0, Provenance::Computed);
        r.scalar("kappa1", t.kappa1, Provenance::Computed);
        r.scalar("kappa2", t.kappa2, Provenance::Computed);
        r.scalar("nu_min", t.nu_min, Provenance::Computed);
        r.scalar("xi1_factor", t.xi1_factor, Provenance::Computed);
        r.scalar("critical_beta", critical_beta(model.alpha()), Provenance::ClosedForm);
        r.put("beta0", t.beta0.map_or(Value::Null, num), Provenance::Computed);
        if n == 3 {
            r.scalar("g", g_three_vortex(model.alpha())?, Provenance::ClosedForm);
        }
        if n == 7 && model.alpha() == 1.0 {
            r.scalar("nu_min_closed_form", (12.0 + 5.0 * 7f64.sqrt()) / 9.0 + 1.0, Provenance::ClosedForm);
        }
        Ok(Output::new(r))
    }
}
