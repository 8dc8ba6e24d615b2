//! Robin function and conformal radius of Ω_δ, and the motion of a single
//! vortex along its level lines.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use super::HexDomain;
use crate::export::{write_csv_header, write_csv_row};
use crate::geom::Vec2;
use crate::ode::escape::{check_escape_parameters, predicted_exit_time, run_escape, EscapeOptions};
use crate::ode::{integrate_with, Control, IntegratorSettings, Solution, VectorField};
use crate::{Result, VortexError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinData {
    pub gamma_tilde: f64,
    pub conformal_radius: f64,
}

/// γ̃ and r at S(w), from r = |S'(w)|(1 − |w|²) and r = e^{−2πγ̃}.
pub fn robin_data(domain: &HexDomain, w: Complex64) -> Result<RobinData> {
    if !(w.norm() < 1.0) {
        return Err(VortexError::Domain(format!("w = {w} must lie in the open unit disk")));
    }
    let ln_r = domain.log_sc_derivative(w)?.re + (-w.norm_sqr()).ln_1p();
    Ok(RobinData {
        gamma_tilde: -ln_r / (2.0 * PI),
        conformal_radius: ln_r.exp(),
    })
}

/// ∇γ̃ at z = S(w), given w.
pub fn robin_gradient_at(domain: &HexDomain, w: Complex64) -> Result<Vec2> {
    let sp = domain.sc_derivative(w)?;
    let gw = -(domain.log_derivative(w).conj() - 2.0 * w / (1.0 - w.norm_sqr())) / (2.0 * PI);
    let gz = gw / sp.conj();
    Ok(Vec2::new(gz.re, gz.im))
}

/// ∇γ̃ at a point z of Ω_δ.
pub fn robin_gradient(domain: &HexDomain, z: Vec2) -> Result<Vec2> {
    let w = domain.inverse_map(Complex64::new(z.x, z.y))?;
    robin_gradient_at(domain, w)
}

/// γ̃ at a point z of Ω_δ.
pub fn robin_value(domain: &HexDomain, z: Vec2) -> Result<f64> {
    let w = domain.inverse_map(Complex64::new(z.x, z.y))?;
    Ok(robin_data(domain, w)?.gamma_tilde)
}

/// Velocity (a/2)∇⊥γ̃ of a lone vortex of intensity `a` at z.
pub fn domain_vortex_rhs(domain: &HexDomain, a: f64, z: Vec2) -> Result<Vec2> {
    let g = robin_gradient(domain, z)?;
    Ok(Vec2::new(-0.5 * a * g.y, 0.5 * a * g.x))
}

/// The single-vortex law as a planar vector field.
pub struct DomainVortexField<'a> {
    domain: &'a HexDomain,
    intensity: f64,
}

impl<'a> DomainVortexField<'a> {
    pub fn new(domain: &'a HexDomain, intensity: f64) -> Self {
        DomainVortexField { domain, intensity }
    }
}

impl VectorField for DomainVortexField<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let v = domain_vortex_rhs(self.domain, self.intensity, Vec2::new(y[0], y[1]))?;
        dy[0] = v.x;
        dy[1] = v.y;
        Ok(())
    }
}

/// Hessian of γ̃ at the origin, by central differences of the gradient.
pub fn robin_hessian_at_origin(domain: &HexDomain, step: f64) -> Result<[[f64; 2]; 2]> {
    if !(step > 0.0) {
        return Err(VortexError::Domain(format!("step must be positive, got {step}")));
    }
    let gx = |s: f64| robin_gradient(domain, Vec2::new(s, 0.0));
    let gy = |s: f64| robin_gradient(domain, Vec2::new(0.0, s));
    let (xp, xm, yp, ym) = (gx(step)?, gx(-step)?, gy(step)?, gy(-step)?);
    let hxx = (xp.x - xm.x) / (2.0 * step);
    let hyx = (xp.y - xm.y) / (2.0 * step);
    let hxy = (yp.x - ym.x) / (2.0 * step);
    let hyy = (yp.y - ym.y) / (2.0 * step);
    let off = 0.5 * (hxy + hyx);
    Ok([[hxx, off], [off, hyy]])
}

/// Closed-form instability rate (|a|/4π)√(12δ(3δ−2)); zero when δ ≤ 2/3.
pub fn domain_lambda0(delta: f64, a: f64) -> f64 {
    let d = 12.0 * delta * (3.0 * delta - 2.0);
    if d > 0.0 {
        a.abs() / (4.0 * PI) * d.sqrt()
    } else {
        0.0
    }
}

/// Linearization of the single-vortex law at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleData {
    pub hessian: [[f64; 2]; 2],
    /// Rate from the differenced Hessian (0 at a center).
    pub lambda0: f64,
    pub lambda0_closed_form: f64,
    pub saddle: bool,
    /// Unit unstable direction, when the origin is a saddle.
    pub unstable_direction: Option<Vec2>,
}

pub fn saddle_data(domain: &HexDomain, a: f64) -> Result<SaddleData> {
    let h = robin_hessian_at_origin(domain, 1e-4)?;
    // Velocity Jacobian (a/2)·[[−h_yx, −h_yy], [h_xx, h_xy]].
    let j = [
        [-0.5 * a * h[1][0], -0.5 * a * h[1][1]],
        [0.5 * a * h[0][0], 0.5 * a * h[0][1]],
    ];
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = 0.25 * tr * tr - det;
    let saddle = h[0][0] * h[1][1] - h[0][1] * h[1][0] < 0.0;
    let (lambda0, dir) = if disc > 0.0 {
        let l = 0.5 * tr + disc.sqrt();
        let v = if j[0][1].abs() >= j[1][0].abs() {
            Vec2::new(j[0][1], l - j[0][0])
        } else {
            Vec2::new(l - j[1][1], j[1][0])
        };
        (l, Some(v * (1.0 / v.norm())))
    } else {
        (0.0, None)
    };
    Ok(SaddleData {
        hessian: h,
        lambda0,
        lambda0_closed_form: domain_lambda0(domain.delta(), a),
        saddle,
        unstable_direction: if saddle { dir } else { None },
    })
}

/// Tracks |γ̃(z) − γ̃(z₀)| and the largest excursion |z − z*|.
struct RobinMonitor<'a> {
    domain: &'a HexDomain,
    start: f64,
    worst: f64,
    max_radius: f64,
}

impl<'a> RobinMonitor<'a> {
    fn new(domain: &'a HexDomain, z0: Vec2) -> Result<Self> {
        Ok(RobinMonitor {
            domain,
            start: robin_value(domain, z0)?,
            worst: 0.0,
            max_radius: z0.norm(),
        })
    }

    fn observe(&mut self, y: &[f64]) -> Result<()> {
        let z = Vec2::new(y[0], y[1]);
        self.worst = self.worst.max((robin_value(self.domain, z)? - self.start).abs());
        self.max_radius = self.max_radius.max(z.norm());
        Ok(())
    }

    /// Drift relative to the quadratic scale ‖H‖ρ²/2 of γ̃ over the run.
    fn relative_drift(&self, hessian: &[[f64; 2]; 2]) -> f64 {
        let norm = hessian
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        self.worst / (0.5 * norm * self.max_radius * self.max_radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainEscapeConfig {
    pub delta: f64,
    pub intensity: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub settings: IntegratorSettings,
    pub options: EscapeOptions,
}

impl DomainEscapeConfig {
    pub fn new(delta: f64, epsilon: f64, beta: f64) -> Self {
        DomainEscapeConfig {
            delta,
            intensity: 1.0,
            epsilon,
            beta,
            settings: IntegratorSettings::default(),
            options: EscapeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainEscapeResult {
    pub saddle: SaddleData,
    pub tau_z: f64,
    pub fitted_rate: f64,
    pub prediction: f64,
    pub exit_radius: f64,
    pub window: (f64, f64),
    pub fit_points: usize,
    pub horizon: f64,
    pub initial: Vec2,
    /// Robin-level drift relative to ‖H‖ρ²/2.
    pub robin_drift: f64,
    pub solution: Solution,
}

/// Escape of a lone vortex from the saddle at the origin after an ε/2
/// displacement along the unstable direction.
pub fn domain_escape(domain: &HexDomain, cfg: &DomainEscapeConfig) -> Result<DomainEscapeResult> {
    check_escape_parameters(cfg.epsilon, cfg.beta)?;
    let saddle = saddle_data(domain, cfg.intensity)?;
    let dir = saddle.unstable_direction.ok_or_else(|| {
        VortexError::NoInstability(format!("delta = {} gives no saddle at the origin", domain.delta()))
    })?;
    let z0 = dir * (0.5 * cfg.epsilon);
    let prediction = predicted_exit_time(cfg.epsilon, cfg.beta, saddle.lambda0);
    let horizon = cfg.options.horizon.unwrap_or(3.0 * prediction + 10.0 / saddle.lambda0);
    let field = DomainVortexField::new(domain, cfg.intensity);
    let mut monitor = RobinMonitor::new(domain, z0)?;
    let run = run_escape(
        &field,
        &[0.0, 0.0],
        &[z0.x, z0.y],
        cfg.epsilon,
        cfg.beta,
        horizon,
        &cfg.settings,
        &cfg.options,
        &mut |y| monitor.observe(y),
    )?;
    Ok(DomainEscapeResult {
        robin_drift: monitor.relative_drift(&saddle.hessian),
        saddle,
        tau_z: run.tau,
        fitted_rate: run.fitted_rate,
        prediction,
        exit_radius: run.exit_radius,
        window: run.window,
        fit_points: run.fit_points,
        horizon,
        initial: z0,
        solution: run.solution,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedRun {
    pub initial: Vec2,
    pub horizon: f64,
    /// max |z(t)| / |z(0)| over [0, horizon].
    pub radius_ratio: f64,
    pub robin_drift: f64,
    pub solution: Solution,
}

/// Integrate a lone vortex started at `z0` up to `horizon` and record how
/// far it strays from the origin.
pub fn domain_bounded_run(
    domain: &HexDomain,
    intensity: f64,
    z0: Vec2,
    horizon: f64,
    settings: &IntegratorSettings,
) -> Result<BoundedRun> {
    if !(z0.norm() > 0.0) {
        return Err(VortexError::Domain("initial displacement must be nonzero".into()));
    }
    let field = DomainVortexField::new(domain, intensity);
    let hessian = robin_hessian_at_origin(domain, 1e-4)?;
    let mut monitor = RobinMonitor::new(domain, z0)?;
    let y0 = [z0.x, z0.y];
    let mut sol = Solution::start(0.0, &y0);
    let out = integrate_with(&field, 0.0, &y0, horizon, settings, &mut |v| {
        monitor.observe(v.y1)?;
        sol.push(v, v.t1, v.y1.to_vec());
        Ok(Control::Continue)
    })?;
    sol.stats = out.stats;
    Ok(BoundedRun {
        initial: z0,
        horizon,
        radius_ratio: monitor.max_radius / z0.norm(),
        robin_drift: monitor.relative_drift(&hessian),
        solution: sol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinSample {
    pub w: Complex64,
    pub z: Complex64,
    pub data: RobinData,
}

/// γ̃ and r on a polar grid of the disk (radii up to `max_radius`) plus
/// the origin, mapped into Ω_δ.
pub fn robin_field(domain: &HexDomain, radii: usize, angles: usize, max_radius: f64) -> Result<Vec<RobinSample>> {
    if radii == 0 || angles == 0 || !(max_radius > 0.0 && max_radius < 1.0) {
        return Err(VortexError::Domain("robin grid needs radii, angles > 0 and max radius in (0,1)".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![RobinSample { w: zero, z: zero, data: robin_data(domain, zero)? }];
    for k in 0..angles {
        let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64);
        let (mut w_prev, mut z_prev) = (zero, zero);
        for j in 1..=radii {
            let w = dir * (max_radius * j as f64 / radii as f64);
            let z = z_prev + domain.segment_integral(w_prev, w)?;
            out.push(RobinSample { w, z, data: robin_data(domain, w)? });
            (w_prev, z_prev) = (w, z);
        }
    }
    Ok(out)
}

/// CSV `u,v,x,y,gamma_tilde,conformal_radius`.
pub fn write_robin_csv(samples: &[RobinSample], out: &mut dyn Write) -> std::io::Result<()> {
    write_csv_header(out, &["u", "v", "x", "y", "gamma_tilde", "conformal_radius"])?;
    for s in samples {
        write_csv_row(
            out,
            &[s.w.re, s.w.im, s.z.re, s.z.im, s.data.gamma_tilde, s.data.conformal_radius],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn robin_at_origin_and_near_boundary() {
        let d = HexDomain::new(0.75).unwrap();
        let r = robin_data(&d, c(0.0, 0.0)).unwrap();
        assert!((r.conformal_radius - 1.0).abs() < 1e-14);
        assert!(r.gamma_tilde.abs() < 1e-14);
        let near = robin_data(&d, Complex64::from_polar(0.999999, 0.5)).unwrap();
        assert!(near.conformal_radius < 1e-3 && near.conformal_radius > 0.0);
        assert!(robin_data(&d, c(1.0, 0.0)).is_err());
        assert!(robin_data(&d, c(0.8, 0.8)).is_err());
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        for &delta in &[0.4, 0.5, 0.75, 0.9] {
            let d = HexDomain::new(delta).unwrap();
            let g = robin_gradient(&d, Vec2::new(0.0, 0.0)).unwrap();
            assert!(g.norm() < 1e-15, "{delta}: {g:?}");
            let v = domain_vortex_rhs(&d, 1.0, Vec2::new(0.0, 0.0)).unwrap();
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for &delta in &[0.4, 0.75, 0.9] {
            let d = HexDomain::new(delta).unwrap();
            for k in 0..12 {
                let w = Complex64::from_polar(0.1 + 0.06 * k as f64, 0.37 + 0.9 * k as f64);
                let z = d.sc_map(w).unwrap();
                let zv = Vec2::new(z.re, z.im);
                let g = robin_gradient(&d, zv).unwrap();
                let f = |p: Vec2| robin_value(&d, p).unwrap();
                let fx = (f(zv + Vec2::new(h, 0.0)) - f(zv - Vec2::new(h, 0.0))) / (2.0 * h);
                let fy = (f(zv + Vec2::new(0.0, h)) - f(zv - Vec2::new(0.0, h))) / (2.0 * h);
                let err = (Vec2::new(fx, fy) - g).norm();
                assert!(err < 1e-6 * g.norm().max(1e-3), "delta {delta}, w {w}: {g:?} vs ({fx}, {fy})");
            }
        }
    }

    #[test]
    fn hessian_is_diagonal_with_expected_entries() {
        for &delta in &[0.4, 0.5, 0.75, 0.9] {
            let d = HexDomain::new(delta).unwrap();
            let h = robin_hessian_at_origin(&d, 1e-4).unwrap();
            assert!((h[0][0] - 3.0 * delta / PI).abs() < 1e-7, "{delta}: {h:?}");
            assert!((h[1][1] - (2.0 - 3.0 * delta) / PI).abs() < 1e-7, "{delta}: {h:?}");
            assert!(h[0][1].abs() < 1e-9);
        }
    }

    #[test]
    fn saddle_iff_delta_above_two_thirds() {
        for &delta in &[0.4, 0.5, 0.6, 0.65, 0.68, 0.7, 0.75, 0.9, 0.95] {
            let d = HexDomain::new(delta).unwrap();
            let s = saddle_data(&d, 1.0).unwrap();
            assert_eq!(s.saddle, delta > 2.0 / 3.0, "{delta}");
            assert_eq!(s.unstable_direction.is_some(), s.saddle);
            assert!((s.lambda0 - s.lambda0_closed_form).abs() < 1e-6, "{delta}: {s:?}");
        }
        assert!((domain_lambda0(0.9, 1.0) - 7.56f64.sqrt() / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(domain_lambda0(0.5, 1.0), 0.0);
    }

    #[test]
    fn unstable_direction_grows_under_the_flow() {
        let d = HexDomain::new(0.9).unwrap();
        let s = saddle_data(&d, 1.0).unwrap();
        let v = s.unstable_direction.unwrap();
        let z = v * 1e-6;
        let vel = domain_vortex_rhs(&d, 1.0, z).unwrap();
        let expected = z * s.lambda0;
        assert!((vel - expected).norm() < 1e-4 * expected.norm());
    }

    #[test]
    fn escape_rate_at_delta_nine_tenths() {
        let d = HexDomain::new(0.9).unwrap();
        let r = domain_escape(&d, &DomainEscapeConfig::new(0.9, 1e-4, 0.75)).unwrap();
        let l0 = 7.56f64.sqrt() / (4.0 * PI);
        assert!((r.fitted_rate - l0).abs() < 0.07 * l0, "{}", r.fitted_rate);
        assert!(r.robin_drift < 1e-7, "{}", r.robin_drift);
        let end = r.solution.final_state();
        assert!((end[0].hypot(end[1]) - r.exit_radius).abs() < 1e-9);
    }

    #[test]
    fn stable_center_stays_bounded() {
        let d = HexDomain::new(0.4).unwrap();
        let run = domain_bounded_run(&d, 1.0, Vec2::new(0.5e-4, 0.0), 40.0, &IntegratorSettings::default()).unwrap();
        assert!(run.radius_ratio < 2.0, "{}", run.radius_ratio);
        assert!(run.robin_drift < 1e-7, "{}", run.robin_drift);
        assert!(domain_escape(&d, &DomainEscapeConfig::new(0.4, 1e-4, 0.75)).is_err());
    }

    #[test]
    fn robin_field_grid() {
        let d = HexDomain::new(0.75).unwrap();
        let g = robin_field(&d, 5, 8, 0.9).unwrap();
        assert_eq!(g.len(), 41);
        for s in &g {
            let z = d.sc_map(s.w).unwrap();
            assert!((z - s.z).norm() < 1e-12);
            assert!(s.data.conformal_radius > 0.0);
        }
        let mut buf = Vec::new();
        write_robin_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u,v,x,y,gamma_tilde,conformal_radius\n"));
        assert_eq!(text.lines().count(), 42);
        assert!(robin_field(&d, 0, 8, 0.9).is_err());
    }
}
