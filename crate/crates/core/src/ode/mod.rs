//! Adaptive integration of autonomous and non-autonomous ODEs on flat
//! `f64` state vectors, plus the point-vortex field and its trajectories.

mod dopri;
pub mod escape;

use std::io::Write;

pub use dopri::integrate_with;

use crate::export::{write_csv_header, write_csv_row};
use crate::geom::Vec2;
use crate::model::{invariants_of, AlphaModel, Configuration, InvariantDrift, InvariantSnapshot};
use crate::{Result, VortexError};

/// Right-hand side `y' = f(t, y)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Accepted plus rejected steps.
    pub max_steps: usize,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.rel_tol) || !pos(self.abs_tol) {
            return Err(VortexError::Domain(format!(
                "tolerances must be positive, got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.max_step > 0.0) || self.max_steps == 0 {
            return Err(VortexError::Domain("max_step and max_steps must be positive".into()));
        }
        if let Some(h) = self.initial_step {
            if !pos(h) {
                return Err(VortexError::Domain(format!("initial step {h} must be positive")));
            }
        }
        Ok(())
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        IntegratorSettings {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Dense output over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment {
    t0: f64,
    h: f64,
    coeffs: Vec<f64>,
}

impl DenseSegment {
    pub fn dim(&self) -> usize {
        self.coeffs.len() / 5
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = self.dim();
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.coeffs;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = c[i]
                + th * (c[n + i] + th1 * (c[2 * n + i] + th * (c[3 * n + i] + th1 * c[4 * n + i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }
}

/// An accepted step as seen by an observer.
pub struct StepView<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64],
    pub y1: &'a [f64],
    pub segment: &'a DenseSegment,
}

pub enum Control {
    Continue,
    /// Stop at a time inside the current step; the final state is taken
    /// from the dense output.
    StopAt(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    /// True when an observer ended the run before `t_end`.
    pub stopped: bool,
    pub stats: IntegrationStats,
}

/// Every accepted step with its dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    segments: Vec<DenseSegment>,
    pub stats: IntegrationStats,
}

impl Solution {
    pub(crate) fn start(t0: f64, y0: &[f64]) -> Self {
        Solution {
            times: vec![t0],
            states: vec![y0.to_vec()],
            segments: Vec::new(),
            stats: IntegrationStats::default(),
        }
    }

    pub(crate) fn push(&mut self, view: &StepView<'_>, t_end: f64, y_end: Vec<f64>) {
        self.times.push(t_end);
        self.states.push(y_end);
        self.segments.push(view.segment.clone());
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("nonempty")
    }

    /// State at any `t` between the first and last recorded time.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let (a, b) = (self.t_start(), self.t_final());
        if t < a.min(b) || t > a.max(b) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.states[0].clone());
        }
        let forward = b >= a;
        let k = self
            .times
            .partition_point(|&s| if forward { s <= t } else { s >= t })
            .clamp(1, self.segments.len());
        Some(self.segments[k - 1].eval(t))
    }
}

/// Run and record every step.
pub fn integrate_recorded(
    field: &dyn VectorField,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<Solution> {
    let mut sol = Solution::start(t0, y0);
    let out = integrate_with(field, t0, y0, t_end, settings, &mut |v| {
        sol.push(v, v.t1, v.y1.to_vec());
        Ok(Control::Continue)
    })?;
    sol.stats = out.stats;
    Ok(sol)
}

/// The point-vortex system on flat `(p_1, q_1, …)` states, failing with a
/// collision error when two vortices come closer than `collision_floor`.
#[derive(Debug, Clone)]
pub struct PointVortexField {
    model: AlphaModel,
    intensities: Vec<f64>,
    collision_floor: f64,
}

impl PointVortexField {
    pub fn new(model: AlphaModel, intensities: Vec<f64>, collision_floor: f64) -> Result<Self> {
        if !(collision_floor >= 0.0) {
            return Err(VortexError::Domain(format!("collision floor {collision_floor} is negative")));
        }
        Ok(PointVortexField { model, intensities, collision_floor })
    }

    /// Floor of 1e−3 times the minimal pairwise distance of `z`.
    pub fn for_configuration(model: AlphaModel, z: &Configuration) -> Result<Self> {
        let floor = if z.len() > 1 { 1e-3 * z.min_pair_distance() } else { 0.0 };
        Self::new(model, z.intensities(), floor)
    }

    pub fn model(&self) -> &AlphaModel {
        &self.model
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn collision_floor(&self) -> f64 {
        self.collision_floor
    }
}

impl VectorField for PointVortexField {
    fn dim(&self) -> usize {
        2 * self.intensities.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.intensities.len();
        let floor2 = self.collision_floor * self.collision_floor;
        let c = self.model.c_alpha();
        for i in 0..n {
            let (xi, yi) = (y[2 * i], y[2 * i + 1]);
            let (mut u, mut v) = (0.0, 0.0);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dx = xi - y[2 * j];
                let dyy = yi - y[2 * j + 1];
                let r2 = dx * dx + dyy * dyy;
                if r2 <= floor2 || r2 == 0.0 {
                    return Err(VortexError::Collision {
                        t,
                        i: i.min(j),
                        j: i.max(j),
                        distance: r2.sqrt(),
                    });
                }
                let w = self.intensities[j] * self.model.inv_pow(r2);
                u -= dyy * w;
                v += dx * w;
            }
            dy[2 * i] = c * u;
            dy[2 * i + 1] = c * v;
        }
        Ok(())
    }
}

fn positions_of(flat: &[f64]) -> Vec<Vec2> {
    flat.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect()
}

/// Tracks the largest drift of the first integrals over a run.
#[derive(Debug, Clone)]
pub(crate) struct DriftMonitor {
    model: AlphaModel,
    intensities: Vec<f64>,
    reference: InvariantSnapshot,
    pub(crate) worst: InvariantDrift,
}

impl DriftMonitor {
    pub(crate) fn new(model: AlphaModel, intensities: &[f64], y0: &[f64]) -> Result<Self> {
        let reference = invariants_of(&model, &positions_of(y0), intensities)?;
        Ok(DriftMonitor {
            model,
            intensities: intensities.to_vec(),
            reference,
            worst: InvariantDrift::default(),
        })
    }

    pub(crate) fn observe(&mut self, y: &[f64]) -> Result<()> {
        let p = positions_of(y);
        let cur = invariants_of(&self.model, &p, &self.intensities)?;
        let d = InvariantDrift::between(&self.reference, &cur, &p, &self.intensities);
        self.worst = self.worst.max_with(d);
        Ok(())
    }
}

/// Point-vortex trajectory with dense output and invariant drift.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub solution: Solution,
    pub intensities: Vec<f64>,
    /// Largest drift of each first integral over the accepted steps.
    pub invariant_drift: InvariantDrift,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.solution.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn configuration(&self, k: usize) -> Result<Configuration> {
        Configuration::from_flat(&self.solution.states[k], &self.intensities)
    }

    pub fn final_configuration(&self) -> Result<Configuration> {
        Configuration::from_flat(self.solution.final_state(), &self.intensities)
    }

    /// CSV with columns `t, p1, q1, …, pN, qN`.
    pub fn write_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let n = self.intensities.len();
        let mut header = vec!["t".to_string()];
        for i in 1..=n {
            header.push(format!("p{i}"));
            header.push(format!("q{i}"));
        }
        write_csv_header(w, &header)?;
        for (t, y) in self.solution.times.iter().zip(&self.solution.states) {
            let mut row = Vec::with_capacity(1 + y.len());
            row.push(*t);
            row.extend_from_slice(y);
            write_csv_row(w, &row)?;
        }
        Ok(())
    }
}

/// Integrate the point-vortex system from `z0` over `[0, t_end]`
/// (`t_end < 0` integrates backward).
pub fn integrate(
    model: &AlphaModel,
    z0: &Configuration,
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    let field = PointVortexField::for_configuration(*model, z0)?;
    integrate_field(&field, 0.0, &z0.to_flat(), t_end, settings)
}

pub fn integrate_field(
    field: &PointVortexField,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    let mut monitor = DriftMonitor::new(field.model, &field.intensities, y0)?;
    let mut sol = Solution::start(t0, y0);
    let out = integrate_with(field, t0, y0, t_end, settings, &mut |v| {
        monitor.observe(v.y1)?;
        sol.push(v, v.t1, v.y1.to_vec());
        Ok(Control::Continue)
    })?;
    sol.stats = out.stats;
    Ok(Trajectory {
        solution: sol,
        intensities: field.intensities.clone(),
        invariant_drift: monitor.worst,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::crystal::{build_crystal, CrystalSpec};
    use crate::model::sup_distance;

    struct Harmonic;

    impl VectorField for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    struct Decay;

    impl VectorField for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = -y[0] + t.cos();
            Ok(())
        }
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let s = IntegratorSettings::default();
        let sol = integrate_recorded(&Harmonic, 0.0, &[1.0, 0.0], 10.0, &s).unwrap();
        let y = sol.final_state();
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
        assert_eq!(sol.t_final(), 10.0);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let s = IntegratorSettings { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() };
        let sol = integrate_recorded(&Harmonic, 0.0, &[1.0, 0.0], 6.0, &s).unwrap();
        for k in 0..=600 {
            let t = k as f64 * 0.01;
            let y = sol.interpolate(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-8, "t {t}");
        }
        assert!(sol.interpolate(6.5).is_none());
    }

    #[test]
    fn non_autonomous_and_backward() {
        // y' = −y + cos t, y(0) = 1/2: y = (cos t + sin t)/2.
        let s = IntegratorSettings::default();
        let sol = integrate_recorded(&Decay, 0.0, &[0.5], 3.0, &s).unwrap();
        let exact = |t: f64| 0.5 * (t.cos() + t.sin());
        assert!((sol.final_state()[0] - exact(3.0)).abs() < 1e-11);
        let back = integrate_recorded(&Decay, 3.0, sol.final_state(), 0.0, &s).unwrap();
        assert!((back.final_state()[0] - 0.5).abs() < 1e-9);
        assert!(back.times.windows(2).all(|w| w[1] < w[0]));
        let mid = back.interpolate(1.5).unwrap()[0];
        assert!((mid - exact(1.5)).abs() < 1e-9);
    }

    #[test]
    fn settings_validation_and_budget() {
        let bad = IntegratorSettings { rel_tol: 0.0, ..Default::default() };
        assert!(integrate_recorded(&Harmonic, 0.0, &[1.0, 0.0], 1.0, &bad).is_err());
        let tiny = IntegratorSettings { max_steps: 3, ..Default::default() };
        assert!(matches!(
            integrate_recorded(&Harmonic, 0.0, &[1.0, 0.0], 100.0, &tiny),
            Err(VortexError::StepBudget { .. })
        ));
        assert!(integrate_recorded(&Harmonic, 0.0, &[1.0], 1.0, &IntegratorSettings::default()).is_err());
    }

    #[test]
    fn observer_can_stop() {
        let s = IntegratorSettings::default();
        let out = integrate_with(&Harmonic, 0.0, &[1.0, 0.0], 10.0, &s, &mut |v| {
            Ok(if v.t1 > 1.0 { Control::StopAt(1.0_f64.max(v.t0)) } else { Control::Continue })
        })
        .unwrap();
        assert!(out.stopped);
        assert!((out.y[0] - out.t.cos()).abs() < 1e-10);
    }

    #[test]
    fn crystal_stays_put() {
        let model = AlphaModel::euler();
        let z = build_crystal(&CrystalSpec::new(3, model).unwrap());
        let traj = integrate(&model, &z, 100.0, &IntegratorSettings::default()).unwrap();
        assert!(sup_distance(traj.solution.final_state(), &z.to_flat()) < 1e-9);
    }

    #[test]
    fn corotating_pair_period() {
        // Pair a = (1, 1) at (±1, 0): each vortex moves on the unit circle at
        // speed C_α 2^{−α}, so the period is 2π 2^α / C_α.
        for &alpha in &[1.0, 1.5] {
            let model = AlphaModel::new(alpha).unwrap();
            let z = Configuration::from_parts(&[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)], &[1.0, 1.0])
                .unwrap();
            let period = 2.0 * PI * 2f64.powf(alpha) / model.c_alpha();
            let traj = integrate(&model, &z, period, &IntegratorSettings::default()).unwrap();
            let err = sup_distance(traj.solution.final_state(), &z.to_flat());
            assert!(err < 1e-8 * 2.0 * PI, "alpha {alpha}: {err:e}");
            // Quarter period lands on the imaginary axis.
            let q = traj.solution.interpolate(period / 4.0).unwrap();
            assert!(q[0].abs() < 1e-8 && (q[1] - 1.0).abs() < 1e-8);
            assert!(traj.invariant_drift.hamiltonian < 1e-10);
        }
    }

    #[test]
    fn time_reversibility() {
        let model = AlphaModel::new(1.3).unwrap();
        let z = Configuration::from_parts(
            &[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2), Vec2::new(-0.4, 0.9)],
            &[1.0, -0.5, 0.8],
        )
        .unwrap();
        let s = IntegratorSettings::default();
        let fwd = integrate(&model, &z, 2.0, &s).unwrap();
        let field = PointVortexField::for_configuration(model, &z).unwrap();
        let back = integrate_field(&field, 2.0, fwd.solution.final_state(), 0.0, &s).unwrap();
        assert!(sup_distance(back.solution.final_state(), &z.to_flat()) < 1e-7);
        assert!(fwd.invariant_drift.linear_momentum < 1e-10);
        assert!(fwd.invariant_drift.hamiltonian < 1e-8);
    }

    #[test]
    fn collision_is_reported_with_time() {
        // A floor above the initial separation trips on the first evaluation.
        let model = AlphaModel::euler();
        let z = Configuration::from_parts(&[Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)], &[1.0, 1.0]).unwrap();
        let field = PointVortexField::new(model, vec![1.0, 1.0], 2.0).unwrap();
        let err = integrate_field(&field, 0.0, &z.to_flat(), 1.0, &IntegratorSettings::default()).unwrap_err();
        assert!(matches!(err, VortexError::Collision { t, i: 0, j: 1, .. } if t == 0.0));
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let model = AlphaModel::euler();
        let z = build_crystal(&CrystalSpec::new(3, model).unwrap());
        let traj = integrate(&model, &z, 1.0, &IntegratorSettings::default()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,p1,q1,p2,q2,p3,q3");
        assert_eq!(lines.count(), traj.len());
    }
}
