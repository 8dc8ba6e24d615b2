use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::Value;
use vortexlab::bounds::{c0, domain_thresholds};
use vortexlab::domain::robin::{
    domain_bounded_run, domain_escape, domain_lambda0, robin_field, saddle_data, write_robin_csv, DomainEscapeConfig,
    RobinSample,
};
use vortexlab::domain::HexDomain;
use vortexlab::export::{write_csv_header, write_csv_row};
use vortexlab::ode::escape::{predicted_exit_time, EscapeOptions};
use vortexlab::ode::Solution;
use vortexlab::Vec2;

use super::{render, settings, settings_params};
use crate::config::{Config, ParamSpec};
use crate::error::CliError;
use crate::registry::{Experiment, RunOptions};
use crate::report::{complex, num, nums, point, Output, Provenance, Report};
use crate::svg::{bounds_of, colormap, Canvas};

pub struct DomainExperiment;

/// δ used for the unstable reference run whose horizon the stable case
/// reuses.
pub const REFERENCE_DELTA: f64 = 0.9;

/// Horizon 3·(1−β)|ln ε|/λ₀ + 10/λ₀ of the escape run at δ = 0.9.
pub fn reference_horizon(epsilon: f64, beta: f64, intensity: f64) -> f64 {
    let l0 = domain_lambda0(REFERENCE_DELTA, intensity);
    3.0 * predicted_exit_time(epsilon, beta, l0) + 10.0 / l0
}

fn trajectory_csv(sol: &Solution) -> Result<Vec<u8>, CliError> {
    render(|w| {
        write_csv_header(w, &["t", "x", "y"])?;
        for (t, y) in sol.times.iter().zip(&sol.states) {
            write_csv_row(w, &[*t, y[0], y[1]])?;
        }
        Ok(())
    })
}

fn closed(points: &[Complex64]) -> Vec<(f64, f64)> {
    points.iter().map(|z| (z.re, z.im)).collect()
}

fn boundary_svg(d: &HexDomain) -> Result<String, CliError> {
    let pts = closed(d.boundary());
    let mut c = Canvas::new(600.0, 520.0, bounds_of(pts.iter().copied(), 0.08), true);
    c.frame("x", "y");
    c.polyline(&pts, "#1f4e99", 2.0, true);
    for v in d.vertices()? {
        c.circle(v.re, v.im, 4.0, "#c0392b");
    }
    c.circle(0.0, 0.0, 3.0, "#000000");
    Ok(c.finish(&format!("Hexagonal domain, delta = {}", d.delta())))
}

fn family_svg(domains: &[HexDomain]) -> String {
    let all = domains.iter().flat_map(|d| closed(d.boundary()));
    let mut c = Canvas::new(640.0, 560.0, bounds_of(all, 0.08), true);
    c.frame("x", "y");
    let n = domains.len().max(2) - 1;
    for (k, d) in domains.iter().enumerate() {
        let col = colormap(k as f64 / n as f64);
        let pts = closed(d.boundary());
        c.polyline(&pts, &col, 1.8, true);
        let top = pts.iter().copied().fold((0.0, f64::NEG_INFINITY), |a, p| if p.1 > a.1 { p } else { a });
        c.label(top.0, top.1, &format!("delta = {:.4}", d.delta()), 11.0);
    }
    c.finish("Hexagonal domains for several delta")
}

fn robin_svg(d: &HexDomain, field: &[RobinSample]) -> String {
    let pts = closed(d.boundary());
    let mut c = Canvas::new(600.0, 520.0, bounds_of(pts.iter().copied(), 0.08), true);
    c.frame("x", "y");
    let (lo, hi) = field
        .iter()
        .map(|s| s.data.conformal_radius)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, r| (a.0.min(r), a.1.max(r)));
    for s in field {
        let t = (s.data.conformal_radius - lo) / (hi - lo).max(f64::MIN_POSITIVE);
        c.circle(s.z.re, s.z.im, 3.0, &colormap(t));
    }
    c.polyline(&pts, "#222222", 1.5, true);
    c.finish(&format!("Conformal radius, delta = {} (low dark, high light)", d.delta()))
}

impl Experiment for DomainExperiment {
    fn name(&self) -> &'static str {
        "domain"
    }

    fn about(&self) -> &'static str {
        "hexagonal domain: Taylor data, saddle criteria, boundary and Robin field, optional single-vortex run"
    }

    fn params(&self) -> Vec<ParamSpec> {
        let mut p = vec![
            ParamSpec::float("delta", "0.75", "domain parameter in (0,1)"),
            ParamSpec::float("intensity", "1", "vortex intensity a"),
            ParamSpec::flag("svg", "write domain.svg, domains.svg and robin.svg"),
            ParamSpec::int("grid-radii", "24", "Robin grid: radii"),
            ParamSpec::int("grid-angles", "72", "Robin grid: angles"),
            ParamSpec::float("grid-max", "0.98", "Robin grid: largest disk radius"),
            ParamSpec::flag("run", "integrate a single vortex: escape at a saddle, bounded run otherwise"),
            ParamSpec::float("epsilon", "1e-4", "perturbation size for --run"),
            ParamSpec::float("beta", "0.75", "exit radius exponent for --run"),
            ParamSpec::optional_float("horizon", "time horizon for --run (defaults to the delta = 0.9 escape horizon)"),
        ];
        p.extend(settings_params("1e-12", "1e-14"));
        p
    }

    fn run(&self, config: &Config, options: RunOptions) -> Result<Output, CliError> {
        let delta = config.float("delta")?;
        let a = config.float("intensity")?;
        if a == 0.0 {
            return Err(CliError::Usage("--intensity must be nonzero".into()));
        }
        let d = HexDomain::new(delta)?;
        let t = d.taylor();
        let mut r = Report::new(config);
        r.put("s_prime_0", complex(t.s1), Provenance::Computed);
        r.put("s_second_0", complex(t.s2), Provenance::Computed);
        r.put("s_third_0", complex(t.s3), Provenance::Computed);
        r.put("t_prime_0", complex(t.t1), Provenance::Computed);
        r.put("t_second_0", complex(t.t2), Provenance::Computed);
        r.put("t_third_0", complex(t.t3), Provenance::Computed);
        r.scalar("abs_s_third_closed_form", (6.0 * delta - 2.0).abs(), Provenance::ClosedForm);
        r.put(
            "interior_angles_over_pi",
            nums(&(0..6).map(|k| d.interior_angle(k)).collect::<Vec<_>>()),
            Provenance::ClosedForm,
        );
        r.put(
            "vertices",
            Value::Array(d.vertices()?.into_iter().map(|v| point(Vec2::new(v.re, v.im))).collect()),
            Provenance::Computed,
        );

        let th = domain_thresholds(t.t1.norm(), t.t3.norm(), a)?;
        r.put("saddle", Value::Bool(th.saddle), Provenance::Computed);
        r.scalar("lambda_plus", th.lambda_plus, Provenance::Computed);
        r.scalar("lambda_minus", th.lambda_minus, Provenance::Computed);
        r.scalar("lambda0", th.lambda0, Provenance::Computed);
        r.scalar("lambda0_closed_form", domain_lambda0(delta, a), Provenance::ClosedForm);
        r.scalar("kappa1", th.kappa1, Provenance::Computed);
        r.scalar("kappa2", th.kappa2, Provenance::Computed);
        r.put("nu_min", th.nu_min.map_or(Value::Null, num), Provenance::Computed);
        r.scalar("c0", c0(), Provenance::ClosedForm);
        r.scalar("delta_nu4_threshold", (c0() + 2.0) / 6.0, Provenance::ClosedForm);

        let s = saddle_data(&d, a)?;
        r.put(
            "robin_hessian",
            Value::Array(s.hessian.iter().map(|row| nums(row)).collect()),
            Provenance::Computed,
        );
        r.put(
            "robin_hessian_closed_form",
            nums(&[3.0 * delta / PI, (2.0 - 3.0 * delta) / PI]),
            Provenance::ClosedForm,
        );
        r.scalar("lambda0_from_hessian", s.lambda0, Provenance::Computed);

        let mut out = Output::new(r);
        let boundary = render(|w| d.write_boundary_csv(w))?;
        out.add_file("domain_boundary.csv", boundary);
        let field = robin_field(&d, config.int("grid-radii")?, config.int("grid-angles")?, config.float("grid-max")?)?;
        out.add_file("robin_field.csv", render(|w| write_robin_csv(&field, w))?);

        if config.flag("run")? {
            let eps = config.float("epsilon")?;
            let beta = config.float("beta")?;
            let st = settings(config)?;
            if s.saddle {
                let mut cfg = DomainEscapeConfig::new(delta, eps, beta);
                cfg.intensity = a;
                cfg.settings = st;
                cfg.options = EscapeOptions { horizon: config.opt_float("horizon")?, ..Default::default() };
                let e = domain_escape(&d, &cfg)?;
                let rep = &mut out.report;
                rep.scalar("run_tau_z", e.tau_z, Provenance::Computed);
                rep.scalar("run_fitted_rate", e.fitted_rate, Provenance::Computed);
                rep.scalar("run_prediction", e.prediction, Provenance::Computed);
                rep.scalar("run_robin_drift", e.robin_drift, Provenance::Computed);
                rep.put("run_initial", point(e.initial), Provenance::Computed);
                out.add_file("domain_trajectory.csv", trajectory_csv(&e.solution)?);
            } else {
                let horizon = match config.opt_float("horizon")? {
                    Some(h) => h,
                    None => reference_horizon(eps, beta, a),
                };
                let b = domain_bounded_run(&d, a, Vec2::new(0.5 * eps, 0.0), horizon, &st)?;
                let rep = &mut out.report;
                rep.scalar("run_horizon", b.horizon, Provenance::Computed);
                rep.scalar("run_radius_ratio", b.radius_ratio, Provenance::Computed);
                rep.scalar("run_robin_drift", b.robin_drift, Provenance::Computed);
                out.add_file("domain_trajectory.csv", trajectory_csv(&b.solution)?);
            }
        }

        if config.flag("svg")? {
            out.add_file("domain.svg", boundary_svg(&d)?.into_bytes());
            let deltas = [0.5, 2.0 / 3.0, 0.75, 0.9];
            let build = |&x: &f64| HexDomain::new(x);
            let family: Vec<HexDomain> = if options.parallel {
                deltas.par_iter().map(build).collect::<Result<_, _>>()?
            } else {
                deltas.iter().map(build).collect::<Result<_, _>>()?
            };
            out.add_file("domains.svg", family_svg(&family).into_bytes());
            out.add_file("robin.svg", robin_svg(&d, &field).into_bytes());
        }
        Ok(out)
    }
}
