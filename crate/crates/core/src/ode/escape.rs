//! Escape from an unstable equilibrium: perturb by ε/2 along a direction,
//! integrate until the sup-distance first reaches 2ε^β, and fit the
//! exponential growth rate.

use super::{integrate_with, Control, DriftMonitor, IntegratorSettings, PointVortexField, Solution, Trajectory, VectorField};
use crate::crystal::{build_crystal, CrystalSpec};
use crate::linearization::linearize;
use crate::model::{sup_distance, sup_norm, AlphaModel, Configuration, InvariantDrift};
use crate::{Result, VortexError};

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeOptions {
    /// Fitting window lower edge, in units of ε.
    pub window_lower: f64,
    /// Fitting window upper edge, in units of ε^β.
    pub window_upper: f64,
    /// Give up after this time; defaults to 3× the predicted exit time
    /// plus 10/λ₀.
    pub horizon: Option<f64>,
    /// Uniform dense-output samples on [0, τ] used by the fit.
    pub fit_samples: usize,
    /// Bisection tolerance on the exit time.
    pub event_tolerance: f64,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            window_lower: 1.0,
            window_upper: 0.5,
            horizon: None,
            fit_samples: 2000,
            event_tolerance: 1e-10,
        }
    }
}

/// Outcome of a generic escape run.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeRun {
    pub tau: f64,
    pub fitted_rate: f64,
    pub fit_points: usize,
    pub window: (f64, f64),
    pub exit_radius: f64,
    pub horizon: f64,
    pub solution: Solution,
}

pub fn check_escape_parameters(epsilon: f64, beta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(VortexError::Domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(VortexError::Domain(format!("beta must lie in (0,1), got {beta}")));
    }
    Ok(())
}

/// (1 − β)|ln ε|/λ₀.
pub fn predicted_exit_time(epsilon: f64, beta: f64, lambda0: f64) -> f64 {
    (1.0 - beta) * epsilon.ln().abs() / lambda0
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, y) in points {
        sxy += (t - mt) * (y.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Integrate `field` from `y0` until `|y − y_star|_∞ ≥ 2ε^β` (sup over
/// planar pairs). `on_step` sees every accepted state.
#[allow(clippy::too_many_arguments)]
pub fn run_escape(
    field: &dyn VectorField,
    y_star: &[f64],
    y0: &[f64],
    epsilon: f64,
    beta: f64,
    horizon: f64,
    settings: &IntegratorSettings,
    options: &EscapeOptions,
    on_step: &mut dyn FnMut(&[f64]) -> Result<()>,
) -> Result<EscapeRun> {
    check_escape_parameters(epsilon, beta)?;
    let exit_radius = 2.0 * epsilon.powf(beta);
    let window = (options.window_lower * epsilon, options.window_upper * epsilon.powf(beta));
    let mut sol = Solution::start(0.0, y0);
    let tol = options.event_tolerance;
    let out = integrate_with(field, 0.0, y0, horizon, settings, &mut |v| {
        on_step(v.y1)?;
        if sup_distance(v.y1, y_star) < exit_radius {
            sol.push(v, v.t1, v.y1.to_vec());
            return Ok(Control::Continue);
        }
        let (mut lo, mut hi) = (v.t0, v.t1);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if sup_distance(&v.segment.eval(mid), y_star) >= exit_radius {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sol.push(v, hi, v.segment.eval(hi));
        Ok(Control::StopAt(hi))
    })?;
    sol.stats = out.stats;
    if !out.stopped {
        return Err(VortexError::NoEscape { radius: exit_radius, horizon });
    }
    let tau = out.t;

    let samples = options.fit_samples.max(3);
    let points: Vec<(f64, f64)> = (0..=samples)
        .map(|k| tau * k as f64 / samples as f64)
        .filter_map(|t| {
            let d = sup_distance(&sol.interpolate(t)?, y_star);
            (d >= window.0 && d <= window.1).then_some((t, d))
        })
        .collect();
    let fitted_rate = log_slope(&points).ok_or_else(|| {
        VortexError::Domain(format!(
            "fitting window [{:e}, {:e}] holds {} samples; widen it",
            window.0,
            window.1,
            points.len()
        ))
    })?;
    Ok(EscapeRun {
        tau,
        fitted_rate,
        fit_points: points.len(),
        window,
        exit_radius,
        horizon,
        solution: sol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeResult {
    pub epsilon: f64,
    pub beta: f64,
    pub lambda0: f64,
    pub tau_z: f64,
    pub fitted_rate: f64,
    /// (1 − β)|ln ε|/λ₀.
    pub prediction: f64,
    pub exit_radius: f64,
    pub window: (f64, f64),
    pub fit_points: usize,
    pub initial: Configuration,
    pub trajectory: Trajectory,
}

impl EscapeResult {
    pub fn invariant_drift(&self) -> InvariantDrift {
        self.trajectory.invariant_drift
    }
}

/// Escape of the point-vortex system from `z_star` after a perturbation of
/// sup-norm ε/2 along `direction` (flat, length 2N).
#[allow(clippy::too_many_arguments)]
pub fn escape_along(
    model: &AlphaModel,
    z_star: &Configuration,
    direction: &[f64],
    lambda0: f64,
    epsilon: f64,
    beta: f64,
    settings: &IntegratorSettings,
    options: &EscapeOptions,
) -> Result<EscapeResult> {
    check_escape_parameters(epsilon, beta)?;
    if !(lambda0 > 0.0) {
        return Err(VortexError::NoInstability(format!("lambda0 = {lambda0}")));
    }
    let star = z_star.to_flat();
    if direction.len() != star.len() {
        return Err(VortexError::Domain("direction length does not match configuration".into()));
    }
    let exit_radius = 2.0 * epsilon.powf(beta);
    if z_star.len() > 1 && exit_radius >= 0.5 * z_star.min_pair_distance() {
        return Err(VortexError::Domain(format!(
            "exit radius 2 eps^beta = {exit_radius} must be below half the minimal distance {}",
            z_star.min_pair_distance()
        )));
    }
    let scale = sup_norm(direction);
    if !(scale > 0.0) {
        return Err(VortexError::Domain("perturbation direction is zero".into()));
    }
    let y0: Vec<f64> = star
        .iter()
        .zip(direction)
        .map(|(z, v)| z + 0.5 * epsilon * v / scale)
        .collect();
    let initial = Configuration::from_flat(&y0, &z_star.intensities())?;
    let field = PointVortexField::for_configuration(*model, z_star)?;
    let prediction = predicted_exit_time(epsilon, beta, lambda0);
    let horizon = options.horizon.unwrap_or(3.0 * prediction + 10.0 / lambda0);

    let mut monitor = DriftMonitor::new(*model, field.intensities(), &y0)?;
    let run = run_escape(
        &field,
        &star,
        &y0,
        epsilon,
        beta,
        horizon,
        settings,
        options,
        &mut |y| monitor.observe(y),
    )?;
    Ok(EscapeResult {
        epsilon,
        beta,
        lambda0,
        tau_z: run.tau,
        fitted_rate: run.fitted_rate,
        prediction,
        exit_radius: run.exit_radius,
        window: run.window,
        fit_points: run.fit_points,
        initial,
        trajectory: Trajectory {
            solution: run.solution,
            intensities: z_star.intensities(),
            invariant_drift: monitor.worst,
        },
    })
}

/// Escape of a vortex crystal along the eigenvector of its instability rate.
pub fn escape_experiment(
    spec: &CrystalSpec,
    epsilon: f64,
    beta: f64,
    settings: &IntegratorSettings,
    options: &EscapeOptions,
) -> Result<EscapeResult> {
    let model = *spec.model();
    let z_star = build_crystal(spec);
    let (_, rep) = linearize(&model, &z_star)?;
    let v = rep.unstable_eigenvector.ok_or_else(|| {
        VortexError::NoInstability(format!(
            "crystal N={} alpha={} has no real unstable eigenvector (lambda0 = {})",
            spec.n_total(),
            model.alpha(),
            rep.lambda0
        ))
    })?;
    escape_along(&model, &z_star, &v, rep.lambda0, epsilon, beta, settings, options)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn spec3(alpha: f64) -> CrystalSpec {
        CrystalSpec::new(3, AlphaModel::new(alpha).unwrap()).unwrap()
    }

    #[test]
    fn log_slope_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 3.0 * (0.7 * k as f64).exp())).collect();
        assert!((log_slope(&pts).unwrap() - 0.7).abs() < 1e-12);
        assert!(log_slope(&pts[..2]).is_none());
    }

    #[test]
    fn three_vortex_escape_rate() {
        let r = escape_experiment(&spec3(1.0), 1e-4, 0.75, &IntegratorSettings::default(), &EscapeOptions::default())
            .unwrap();
        let l0 = 3.0 / (4.0 * PI);
        assert!((r.fitted_rate - l0).abs() < 0.05 * l0, "{}", r.fitted_rate);
        assert!((sup_distance(&r.initial.to_flat(), &build_crystal(&spec3(1.0)).to_flat()) - 0.5e-4).abs() < 1e-16);
        let exit = sup_distance(r.trajectory.solution.final_state(), &build_crystal(&spec3(1.0)).to_flat());
        assert!((exit - r.exit_radius).abs() < 1e-9);
        assert!(r.invariant_drift().hamiltonian < 1e-8);
        assert!(r.invariant_drift().linear_momentum < 1e-10);
    }

    #[test]
    fn halving_epsilon_shifts_exit_time_by_ln2_law() {
        let s = IntegratorSettings::default();
        let o = EscapeOptions::default();
        let a = escape_experiment(&spec3(1.0), 1e-4, 0.75, &s, &o).unwrap();
        let b = escape_experiment(&spec3(1.0), 0.5e-4, 0.75, &s, &o).unwrap();
        let expected = 0.25 * 2f64.ln() / a.lambda0;
        let diff = b.tau_z - a.tau_z;
        assert!((diff - expected).abs() < 0.1 * expected, "{diff} vs {expected}");
    }

    #[test]
    fn translation_does_not_escape() {
        let spec = spec3(1.0);
        let z = build_crystal(&spec);
        let dir = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let options = EscapeOptions { horizon: Some(60.0), ..Default::default() };
        let err = escape_along(spec.model(), &z, &dir, 3.0 / (4.0 * PI), 1e-3, 0.75, &IntegratorSettings::default(), &options)
            .unwrap_err();
        assert!(matches!(err, VortexError::NoEscape { .. }));
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = IntegratorSettings::default();
        let o = EscapeOptions::default();
        assert!(escape_experiment(&spec3(1.0), 0.0, 0.75, &s, &o).is_err());
        assert!(escape_experiment(&spec3(1.0), 1e-3, 1.0, &s, &o).is_err());
        // 2 ε^β must stay below half the minimal distance (1/2 here).
        assert!(escape_experiment(&spec3(1.0), 0.2, 0.75, &s, &o).is_err());
    }

    #[test]
    fn rate_improves_as_epsilon_shrinks() {
        for &alpha in &[1.0, 1.5] {
            let spec = spec3(alpha);
            let mut errs = Vec::new();
            for &eps in &[1e-2, 1e-3, 1e-4] {
                let r = escape_experiment(&spec, eps, 0.75, &IntegratorSettings::default(), &EscapeOptions::default())
                    .unwrap();
                errs.push((r.fitted_rate - r.lambda0).abs());
            }
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "alpha {alpha}: {errs:?}");
        }
    }
}
