//! The acceptance criteria as executable checks, shared by the `verify`
//! experiment and the `acceptance` test target.

use std::f64::consts::PI;
use std::fmt::Display;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexlab::blob::{blob_escape_experiment, BlobEscapeConfig, BlobEscapeResult};
use vortexlab::bounds::{g_three_vortex, nu_curve};
use vortexlab::crystal::{build_crystal, stationarity_residual, CrystalSpec};
use vortexlab::domain::robin::{domain_bounded_run, domain_escape, DomainEscapeConfig};
use vortexlab::domain::HexDomain;
use vortexlab::eigen::spectral_norm;
use vortexlab::linearization::{jacobian_analytic, jacobian_fd, linearize};
use vortexlab::model::kernel;
use vortexlab::ode::escape::{escape_experiment, EscapeOptions, EscapeResult};
use vortexlab::ode::IntegratorSettings;
use vortexlab::{AlphaModel, Configuration, Vec2, VortexError};

use crate::registry::{Registry, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

fn check(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { label: label.into(), passed, detail: detail.into() }
}

/// Record a failed check for `result` when it is an error.
fn attempt<T, E: Display>(checks: &mut Vec<Check>, label: &str, result: Result<T, E>) -> Option<T> {
    match result {
        Ok(v) => Some(v),
        Err(e) => {
            checks.push(check(label, false, format!("error: {e}")));
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed) && self.within_budget()
    }

    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:>2}: {}  {}  [{:.2} s, budget {} s]",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }

    pub fn detail_lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("    [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.label, c.detail))
            .collect();
        if !self.within_budget() {
            v.push(format!(
                "    [FAIL] runtime {:.2} s exceeds {} s",
                self.elapsed.as_secs_f64(),
                self.budget.as_secs()
            ));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceSettings {
    /// Wall-clock seconds granted to the full-scale blob run before its
    /// total runtime is projected.
    pub probe_seconds: f64,
}

impl Default for AcceptanceSettings {
    fn default() -> Self {
        AcceptanceSettings { probe_seconds: 45.0 }
    }
}

/// Invariant drift of one integration, collected for criterion 10.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftRecord {
    pub source: String,
    pub hamiltonian: f64,
    pub momentum: Option<f64>,
}

pub const ALL: [usize; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "crystal stationarity",
        2 => "three-vortex spectrum",
        3 => "seven-vortex spectrum",
        4 => "nu curves",
        5 => "escape law",
        6 => "Jacobian oracle",
        7 => "blob confinement at desk scale",
        8 => "domain Taylor data",
        9 => "domain instability",
        10 => "invariant suites and determinism",
        _ => "unknown",
    }
}

fn budget(id: usize) -> Duration {
    Duration::from_secs(match id {
        1 | 2 | 3 => 1,
        4 => 10,
        5 => 30,
        6 | 8 => 5,
        7 => 300,
        9 => 60,
        _ => 120,
    })
}

pub struct Suite {
    settings: AcceptanceSettings,
    drifts: Vec<DriftRecord>,
}

impl Suite {
    pub fn new(settings: AcceptanceSettings) -> Self {
        Suite { settings, drifts: Vec::new() }
    }

    pub fn drifts(&self) -> &[DriftRecord] {
        &self.drifts
    }

    pub fn run(&mut self, id: usize) -> CriterionResult {
        let start = Instant::now();
        let checks = match id {
            1 => criterion1(),
            2 => criterion2(),
            3 => criterion3(),
            4 => criterion4(),
            5 => self.criterion5(),
            6 => criterion6(),
            7 => self.criterion7(),
            8 => criterion8(),
            9 => self.criterion9(),
            10 => self.criterion10(),
            _ => vec![check("criterion", false, format!("no criterion {id}"))],
        };
        CriterionResult { id, title: title(id), checks, elapsed: start.elapsed(), budget: budget(id) }
    }

    fn record_escape(&mut self, source: String, r: &EscapeResult) {
        let d = r.invariant_drift();
        self.drifts.push(DriftRecord { source, hamiltonian: d.hamiltonian, momentum: Some(d.linear_momentum) });
    }

    fn criterion5(&mut self) -> Vec<Check> {
        let mut checks = Vec::new();
        let spec = CrystalSpec::new(3, AlphaModel::euler()).expect("valid crystal");
        let beta = 0.75;
        let l0 = 3.0 / (4.0 * PI);
        let s = IntegratorSettings::default();
        let o = EscapeOptions::default();
        let mut run = |checks: &mut Vec<Check>, eps: f64| {
            let r = attempt(checks, &format!("escape at eps={eps:e}"), escape_experiment(&spec, eps, beta, &s, &o));
            if let Some(r) = &r {
                self.record_escape(format!("escape N=3 eps={eps:e}"), r);
            }
            r
        };
        let r4 = run(&mut checks, 1e-4);
        let r5 = run(&mut checks, 1e-5);
        let r4h = run(&mut checks, 5e-5);
        if let Some(r) = &r4 {
            let rel = (r.fitted_rate - l0).abs() / l0;
            checks.push(check(
                "fitted rate at eps=1e-4 within 5% of 3/(4 pi)",
                rel < 0.05,
                format!("rate {:.6}, target {:.6}, rel. error {:.2e}", r.fitted_rate, l0, rel),
            ));
        }
        if let Some(r) = &r5 {
            let lneps = 1e-5f64.ln().abs();
            let target = (1.0 - beta) / l0;
            let ratio = r.tau_z / lneps;
            let rel = (ratio - target).abs() / target;
            let offset_removed = (r.tau_z - 4f64.ln() / l0) / lneps;
            checks.push(check(
                "tau_Z/|ln eps| at eps=1e-5 within 10% of (1-beta)/lambda0",
                rel < 0.10,
                format!(
                    "measured {ratio:.6}, target {target:.6}, rel. error {rel:.3}; without the ln4/lambda0 start-to-exit offset {offset_removed:.6}"
                ),
            ));
        }
        if let (Some(a), Some(b)) = (&r4, &r4h) {
            let shift = b.tau_z - a.tau_z;
            let target = (1.0 - beta) * 2f64.ln() / l0;
            let rel = (shift - target).abs() / target;
            checks.push(check(
                "tau_Z(eps/2) - tau_Z(eps) within 10% of (1-beta) ln2/lambda0",
                rel < 0.10,
                format!("shift {shift:.6}, target {target:.6}, rel. error {rel:.2e}"),
            ));
        }
        checks
    }

    fn criterion7(&mut self) -> Vec<Check> {
        let mut checks = Vec::new();
        let settings = IntegratorSettings { rel_tol: 1e-9, abs_tol: 1e-12, ..Default::default() };
        let full = BlobEscapeConfig {
            n_total: 3,
            alpha: 1.0,
            epsilon: 0.05,
            nu: 4.0,
            beta: 0.75,
            markers: 200,
            settings,
            snapshot_interval: 0.01,
            wall_budget: Some(Duration::from_secs_f64(self.settings.probe_seconds)),
        };
        let started = Instant::now();
        match blob_escape_experiment(&full) {
            Ok(r) => {
                let elapsed = started.elapsed().as_secs_f64();
                self.record_blob("blob full scale", &r);
                blob_checks(&mut checks, "full scale", &r);
                checks.push(check("full-scale runtime under 300 s", elapsed < 300.0, format!("{elapsed:.1} s")));
            }
            Err(VortexError::WallClock { t, accepted, .. }) => {
                let elapsed = started.elapsed().as_secs_f64();
                let needed = attempt(&mut checks, "point-vortex reference", blob_reference_exit(&full));
                if let Some(needed) = needed {
                    let projected = elapsed * needed / t.max(f64::MIN_POSITIVE);
                    checks.push(check(
                        "full scale (eps=0.05, nu=4, M=200) completes within 300 s",
                        projected <= 300.0,
                        format!(
                            "probe reached t = {t:.3e} of the {needed:.3} needed in {elapsed:.1} s ({accepted} steps); \
                             projected runtime {projected:.2e} s"
                        ),
                    ));
                }
            }
            Err(e) => checks.push(check("full-scale blob run", false, format!("error: {e}"))),
        }

        let reduced = BlobEscapeConfig {
            epsilon: 0.1,
            nu: 2.0,
            markers: 30,
            snapshot_interval: 0.05,
            wall_budget: Some(Duration::from_secs(120)),
            ..full
        };
        if let Some(r) = attempt(&mut checks, "reduced-scale blob run", blob_escape_experiment(&reduced)) {
            self.record_blob("blob reduced scale", &r);
            blob_checks(&mut checks, "reduced scale (eps=0.1, nu=2, M=30)", &r);
        }
        checks
    }

    fn record_blob(&mut self, source: &str, r: &BlobEscapeResult) {
        self.drifts.push(DriftRecord {
            source: format!("{source}: point-vortex reference"),
            hamiltonian: r.oracle.invariant_drift().hamiltonian,
            momentum: Some(r.oracle.invariant_drift().linear_momentum),
        });
        self.drifts.push(DriftRecord {
            source: format!("{source}: marker cloud"),
            hamiltonian: 0.0,
            momentum: Some(r.momentum_drift),
        });
    }

    fn criterion9(&mut self) -> Vec<Check> {
        let mut checks = Vec::new();
        let target = 7.56f64.sqrt() / (4.0 * PI);
        let Some(d9) = attempt(&mut checks, "build delta=0.9", HexDomain::new(0.9)) else { return checks };
        let cfg = DomainEscapeConfig::new(0.9, 1e-4, 0.75);
        let Some(e) = attempt(&mut checks, "escape at delta=0.9", domain_escape(&d9, &cfg)) else { return checks };
        let rel = (e.fitted_rate - target).abs() / target;
        checks.push(check(
            "delta=0.9 escape rate within 7% of 0.21879",
            rel < 0.07,
            format!("rate {:.6}, target {target:.6}, rel. error {rel:.2e}", e.fitted_rate),
        ));
        checks.push(check("delta=0.9 Robin-level drift < 1e-7", e.robin_drift < 1e-7, format!("{:.2e}", e.robin_drift)));
        self.drifts.push(DriftRecord { source: "domain delta=0.9".into(), hamiltonian: e.robin_drift, momentum: None });

        let Some(d4) = attempt(&mut checks, "build delta=0.4", HexDomain::new(0.4)) else { return checks };
        let z0 = Vec2::new(0.5e-4, 0.0);
        let settings = IntegratorSettings::default();
        if let Some(b) = attempt(&mut checks, "run at delta=0.4", domain_bounded_run(&d4, 1.0, z0, e.horizon, &settings)) {
            checks.push(check(
                "delta=0.4 stays within 2x the initial radius",
                b.radius_ratio < 2.0,
                format!("max |z|/|z0| = {:.4} over t <= {:.2}", b.radius_ratio, b.horizon),
            ));
            checks.push(check("delta=0.4 Robin-level drift < 1e-7", b.robin_drift < 1e-7, format!("{:.2e}", b.robin_drift)));
            self.drifts.push(DriftRecord { source: "domain delta=0.4".into(), hamiltonian: b.robin_drift, momentum: None });
        }
        checks
    }

    fn criterion10(&mut self) -> Vec<Check> {
        let mut checks = vec![kernel_symmetry_check()];
        if self.drifts.is_empty() {
            checks.push(check("invariant drift records", false, "criteria 5, 7 and 9 have not run"));
        }
        for d in &self.drifts {
            let ok = d.hamiltonian < 1e-8 && d.momentum.is_none_or(|m| m < 1e-8);
            let detail = match d.momentum {
                Some(m) => format!("energy {:.2e}, momentum {:.2e}", d.hamiltonian, m),
                None => format!("energy {:.2e}", d.hamiltonian),
            };
            checks.push(check(format!("conservation < 1e-8: {}", d.source), ok, detail));
        }
        checks.extend(determinism_checks());
        checks
    }
}

fn blob_checks(checks: &mut Vec<Check>, scale: &str, r: &BlobEscapeResult) {
    let cfg = &r.config;
    checks.push(check(
        format!("{scale}: I_i(t) <= I_i(0) e^(2.4 kappa1 t) up to exit"),
        r.inertia_ratio <= 1.0,
        format!("largest ratio {:.4}", r.inertia_ratio),
    ));
    let limit = cfg.epsilon.powf(cfg.beta) / 10.0;
    checks.push(check(
        format!("{scale}: barycentre gap < eps^beta/10 up to tau_Z"),
        r.max_gap < limit,
        format!("max gap {:.3e}, limit {:.3e}", r.max_gap, limit),
    ));
    let exit = r.diagnostics.exit_time;
    checks.push(check(
        format!("{scale}: exit time <= 1.1 (1-beta)|ln eps|/lambda0"),
        exit.is_some_and(|t| t <= r.exit_bound),
        match exit {
            Some(t) => format!("exit {t:.4}, bound {:.4}", r.exit_bound),
            None => format!("no exit observed, bound {:.4}", r.exit_bound),
        },
    ));
}

/// Time the point-vortex reference needs to carry a centre ε^β away from
/// the crystal, capped by the exit bound: the shortest span a blob run must
/// cover to decide criterion 7.
fn blob_reference_exit(cfg: &BlobEscapeConfig) -> Result<f64, VortexError> {
    let model = AlphaModel::new(cfg.alpha)?;
    let spec = CrystalSpec::new(cfg.n_total, model)?;
    let star = build_crystal(&spec).to_flat();
    let r = escape_experiment(
        &spec,
        cfg.epsilon,
        cfg.beta,
        &cfg.settings,
        &EscapeOptions { window_lower: 0.0, ..Default::default() },
    )?;
    let radius = cfg.epsilon.powf(cfg.beta);
    let sol = &r.trajectory.solution;
    let t_disk = sol
        .times
        .iter()
        .zip(&sol.states)
        .find(|(_, y)| {
            y.chunks(2)
                .zip(star.chunks(2))
                .any(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]) >= radius)
        })
        .map_or(r.tau_z, |(t, _)| *t);
    let bound = 1.1 * (1.0 - cfg.beta) * cfg.epsilon.ln().abs() / r.lambda0;
    Ok(t_disk.min(bound))
}

fn alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..20).map(|k| 1.0 + 0.05 * k as f64).collect();
    g.push(1.99);
    g
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// multisets of equal size.
pub fn multiset_distance(computed: &[Complex64], expected: &[Complex64]) -> f64 {
    if computed.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; computed.len()];
    let mut worst: f64 = 0.0;
    for e in expected {
        let (k, d) = computed
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, c)| (k, (c - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn criterion1() -> Vec<Check> {
    let mut worst = (0.0, 0, 0.0);
    let mut checks = Vec::new();
    for n in 3..=12 {
        for alpha in [1.0, 1.25, 1.5, 1.75, 1.99] {
            let Some(m) = attempt(&mut checks, "model", AlphaModel::new(alpha)) else { continue };
            let Some(spec) = attempt(&mut checks, "crystal", CrystalSpec::new(n, m)) else { continue };
            let z = build_crystal(&spec);
            if let Some(r) = attempt(&mut checks, "residual", stationarity_residual(&m, &z)) {
                if r >= worst.0 {
                    worst = (r, n, alpha);
                }
            }
        }
    }
    checks.push(check(
        "sup-norm residual < 1e-12 for N in 3..12, alpha in {1, 1.25, 1.5, 1.75, 1.99}",
        worst.0 < 1e-12,
        format!("worst {:.2e} at N={}, alpha={}", worst.0, worst.1, worst.2),
    ));
    checks
}

fn criterion2() -> Vec<Check> {
    let mut checks = Vec::new();
    let (mut eig_err, mut vec_err, mut res_err) = (0.0f64, 0.0f64, 0.0f64);
    for alpha in alpha_grid() {
        let model = AlphaModel::new(alpha).expect("alpha in range");
        let z = build_crystal(&CrystalSpec::new(3, model).expect("valid crystal"));
        let Some((jac, rep)) = attempt(&mut checks, "linearize", linearize(&model, &z)) else { continue };
        let l = model.c_alpha() * (2.0 - 2f64.powf(-alpha)) * alpha.sqrt();
        let mut expected = vec![Complex64::new(l, 0.0), Complex64::new(-l, 0.0)];
        expected.extend([Complex64::new(0.0, 0.0); 4]);
        eig_err = eig_err.max(multiset_distance(&rep.eigenvalues, &expected));

        let sa = alpha.sqrt();
        let p = 2f64.powf(alpha + 1.0);
        let reference = DVector::from_vec(vec![-1.0, sa, -1.0, sa, -p, sa * p]);
        let rn = &reference / reference.norm();
        match &rep.unstable_eigenvector {
            Some(v) => {
                let v = DVector::from_column_slice(v);
                let vn = &v / v.norm();
                vec_err = vec_err.max((&vn - &rn).norm().min((&vn + &rn).norm()));
            }
            None => vec_err = f64::INFINITY,
        }
        let res = (jac.entries() * &rn - &rn * l).amax();
        res_err = res_err.max(res);
    }
    checks.push(check(
        "eigenvalues {0 x4, +-C(2-2^-alpha)sqrt(alpha)} to 1e-10",
        eig_err < 1e-10,
        format!("worst distance {eig_err:.2e} over 21 alphas"),
    ));
    checks.push(check(
        "unstable eigenvector parallel to the closed form",
        vec_err < 1e-9,
        format!("worst unit-vector distance {vec_err:.2e}"),
    ));
    checks.push(check(
        "closed-form eigenvector residual < 1e-9",
        res_err < 1e-9,
        format!("worst |Jv - lambda v|_inf {res_err:.2e}"),
    ));
    checks
}

/// The 14×14 bracket matrix of the seven-vortex Euler crystal
/// (Jacobian divided by C_1 = 1/2π), as printed.
pub fn printed_seven_vortex_matrix() -> DMatrix<f64> {
    let s3 = 3f64.sqrt();
    let c1 = 1.0 / (2.0 * s3) - 13.0 * s3 / 8.0;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(14, 14, &[
        c1, -(35.0 / 24.0), 0.0, 1.0, -(1.0 / (2.0 * s3)), 1.0 / 6.0, -(s3 / 8.0), -0.125, 0.0, -(1.0 / 3.0), s3 / 2.0, -0.5, 5.0 * s3 / 4.0, 1.25,
        -(35.0 / 24.0), -c1, 1.0, 0.0, 1.0 / 6.0, 1.0 / (2.0 * s3), -0.125, s3 / 8.0, -(1.0 / 3.0), 0.0, -0.5, -(s3 / 2.0), 1.25, -(5.0 * s3 / 4.0),
        0.0, 1.0, -c1, -(35.0 / 24.0), -(s3 / 2.0), -0.5, 0.0, -(1.0 / 3.0), s3 / 8.0, -0.125, 1.0 / (2.0 * s3), 1.0 / 6.0, -(5.0 * s3 / 4.0), 1.25,
        1.0, 0.0, -(35.0 / 24.0), c1, -0.5, s3 / 2.0, -(1.0 / 3.0), 0.0, -0.125, -(s3 / 8.0), 1.0 / 6.0, -(1.0 / (2.0 * s3)), 1.25, 5.0 * s3 / 4.0,
        -(1.0 / (2.0 * s3)), 1.0 / 6.0, -(s3 / 2.0), -0.5, 0.0, 35.0 / 12.0, s3 / 2.0, -0.5, 1.0 / (2.0 * s3), 1.0 / 6.0, 0.0, 0.25, 0.0, -2.5,
        1.0 / 6.0, 1.0 / (2.0 * s3), -0.5, s3 / 2.0, 35.0 / 12.0, 0.0, -0.5, -(s3 / 2.0), 1.0 / 6.0, -(1.0 / (2.0 * s3)), 0.25, 0.0, -2.5, 0.0,
        -(s3 / 8.0), -0.125, 0.0, -(1.0 / 3.0), s3 / 2.0, -0.5, c1, -(35.0 / 24.0), 0.0, 1.0, -(1.0 / (2.0 * s3)), 1.0 / 6.0, 5.0 * s3 / 4.0, 1.25,
        -0.125, s3 / 8.0, -(1.0 / 3.0), 0.0, -0.5, -(s3 / 2.0), -(35.0 / 24.0), -c1, 1.0, 0.0, 1.0 / 6.0, 1.0 / (2.0 * s3), 1.25, -(5.0 * s3 / 4.0),
        0.0, -(1.0 / 3.0), s3 / 8.0, -0.125, 1.0 / (2.0 * s3), 1.0 / 6.0, 0.0, 1.0, -c1, -(35.0 / 24.0), -(s3 / 2.0), -0.5, -(5.0 * s3 / 4.0), 1.25,
        -(1.0 / 3.0), 0.0, -0.125, -(s3 / 8.0), 1.0 / 6.0, -(1.0 / (2.0 * s3)), 1.0, 0.0, -(35.0 / 24.0), c1, -0.5, s3 / 2.0, 1.25, 5.0 * s3 / 4.0,
        s3 / 2.0, -0.5, 1.0 / (2.0 * s3), 1.0 / 6.0, 0.0, 0.25, -(1.0 / (2.0 * s3)), 1.0 / 6.0, -(s3 / 2.0), -0.5, 0.0, 35.0 / 12.0, 0.0, -2.5,
        -0.5, -(s3 / 2.0), 1.0 / 6.0, -(1.0 / (2.0 * s3)), 0.25, 0.0, 1.0 / 6.0, 1.0 / (2.0 * s3), -0.5, s3 / 2.0, 35.0 / 12.0, 0.0, -2.5, 0.0,
        -(s3 / 2.0), -0.5, s3 / 2.0, -0.5, 0.0, 1.0, -(s3 / 2.0), -0.5, s3 / 2.0, -0.5, 0.0, 1.0, 0.0, 0.0,
        -0.5, s3 / 2.0, -0.5, -(s3 / 2.0), 1.0, 0.0, -0.5, s3 / 2.0, -0.5, -(s3 / 2.0), 1.0, 0.0, 0.0, 0.0,
    ]);
    m
}

fn criterion3() -> Vec<Check> {
    let mut checks = Vec::new();
    let model = AlphaModel::euler();
    let z = build_crystal(&CrystalSpec::new(7, model).expect("valid crystal"));
    let Some((jac, rep)) = attempt(&mut checks, "linearize", linearize(&model, &z)) else { return checks };
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let w = 35f64.sqrt() / (4.0 * PI);
    let mut expected = vec![c(0.0, 0.0); 4];
    expected.extend([c(0.0, w), c(0.0, w), c(0.0, -w), c(0.0, -w)]);
    expected.extend([c(2.0 / PI, 0.0), c(2.0 / PI, 0.0), c(-2.0 / PI, 0.0), c(-2.0 / PI, 0.0)]);
    expected.extend([c(9.0 / (4.0 * PI), 0.0), c(-9.0 / (4.0 * PI), 0.0)]);
    let dist = multiset_distance(&rep.eigenvalues, &expected);
    checks.push(check(
        "spectrum {0 x4, +-i sqrt35/(4pi) x2, +-2/pi x2, +-9/(4pi)} to 1e-8",
        dist < 1e-8,
        format!("matching distance {dist:.2e}"),
    ));
    let printed = printed_seven_vortex_matrix();
    let norm = spectral_norm(&printed);
    let target = 5.0 * 7f64.sqrt() / 2.0;
    checks.push(check(
        "printed matrix spectral norm 5 sqrt7/2 to 1e-8",
        (norm - target).abs() < 1e-8,
        format!("{norm:.12} vs {target:.12}"),
    ));
    let agree = (jac.entries() - &printed / (2.0 * PI)).amax();
    checks.push(check(
        "Jacobian equals printed matrix times C_1",
        agree < 1e-10,
        format!("max entry difference {agree:.2e}"),
    ));
    checks.push(check(
        "kappa2 conventions",
        (rep.kappa2_over_c_alpha - target).abs() < 1e-8 && (rep.kappa2 - target / (2.0 * PI)).abs() < 1e-8,
        format!(
            "|Df| = {:.10} = 5 sqrt7/(4 pi); |Df|/C_1 = {:.10} = 5 sqrt7/2 (printed bracket)",
            rep.kappa2, rep.kappa2_over_c_alpha
        ),
    ));
    checks
}

fn criterion4() -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(g1) = attempt(&mut checks, "g(1)", g_three_vortex(1.0)) {
        checks.push(check("g(1) > 4", g1 > 4.0, format!("g(1) = {g1:.10}")));
    }
    if let Some(p) = attempt(&mut checks, "N=7 curve", nu_curve(7, &[1.0])) {
        let expected = (12.0 + 5.0 * 7f64.sqrt()) / 9.0 + 1.0;
        let v = p[0].nu_min;
        checks.push(check(
            "N=7 alpha=1 bound equals (12+5 sqrt7)/9 + 1 < 4 to 1e-10",
            (v - expected).abs() < 1e-10 && v < 4.0,
            format!("{v:.12} vs {expected:.12}"),
        ));
    }
    let grid: Vec<f64> = (0..20).map(|k| 1.0 + 0.05 * k as f64).collect();
    if let Some(pts) = attempt(&mut checks, "N=9 curve", nu_curve(9, &grid)) {
        let worst = pts.iter().map(|p| p.nu_min).fold(f64::NEG_INFINITY, f64::max);
        checks.push(check(
            "N=9 nu_min < 4 on alpha = 1.0:0.05:1.95",
            pts.iter().all(|p| p.nu_min < 4.0),
            format!("largest {worst:.6} over {} points", pts.len()),
        ));
    }
    checks
}

fn random_configuration(rng: &mut ChaCha8Rng) -> Configuration {
    let n = rng.random_range(2..=8);
    loop {
        let pos: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let min = pos
            .iter()
            .enumerate()
            .flat_map(|(i, p)| pos[i + 1..].iter().map(move |q| (*p - *q).norm()))
            .fold(f64::INFINITY, f64::min);
        if min < 0.2 {
            continue;
        }
        let a: Vec<f64> = (0..n)
            .map(|_| {
                let m: f64 = rng.random_range(0.2..2.0);
                if rng.random_bool(0.5) { m } else { -m }
            })
            .collect();
        return Configuration::from_parts(&pos, &a).expect("separated, nonzero intensities");
    }
}

fn criterion6() -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let alpha = rng.random_range(1.0..1.99);
        let model = AlphaModel::new(alpha).expect("alpha in range");
        let z = random_configuration(&mut rng);
        let pair = jacobian_analytic(&model, &z).and_then(|a| Ok((a, jacobian_fd(&model, &z, 1e-6)?)));
        if let Some((a, f)) = attempt(&mut checks, "Jacobians", pair) {
            worst = worst.max(a.relative_difference(&f));
        }
    }
    checks.push(check(
        "analytic vs finite-difference Jacobian, rel. < 1e-6 on 50 random configurations",
        worst < 1e-6,
        format!("worst relative difference {worst:.2e}"),
    ));
    checks
}

fn criterion8() -> Vec<Check> {
    let mut checks = Vec::new();
    for delta in [0.5, 2.0 / 3.0, 0.75, 0.9] {
        let Some(d) = attempt(&mut checks, &format!("build delta={delta:.4}"), HexDomain::new(delta)) else { continue };
        let t = d.taylor();
        let e1 = (t.s1.norm() - 1.0).abs();
        let e2 = t.s2.norm();
        let e3 = (t.s3.norm() - (6.0 * delta - 2.0)).abs();
        checks.push(check(
            format!("delta={delta:.4}: |S'(0)|-1, |S''(0)|, ||S'''(0)|-(6delta-2)| < 1e-8"),
            e1 < 1e-8 && e2 < 1e-8 && e3 < 1e-8,
            format!("{e1:.1e}, {e2:.1e}, {e3:.1e}"),
        ));
    }
    checks
}

fn kernel_symmetry_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut anti, mut perp) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let alpha = rng.random_range(1.0..1.99);
        let m = AlphaModel::new(alpha).expect("alpha in range");
        let x = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let y = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if (x - y).norm() < 1e-3 {
            continue;
        }
        let (Ok(k), Ok(kr)) = (kernel(&m, x, y), kernel(&m, y, x)) else {
            return check("kernel", false, "kernel evaluation failed");
        };
        anti = anti.max((k + kr).norm() / k.norm());
        perp = perp.max(k.dot(x - y).abs() / (k.norm() * (x - y).norm()));
    }
    check(
        "kernel antisymmetry and perpendicularity on 1000 random pairs",
        anti < 1e-14 && perp < 1e-13,
        format!("max relative |K(x,y)+K(y,x)| {anti:.1e}, max cosine {perp:.1e}"),
    )
}

fn determinism_checks() -> Vec<Check> {
    let reg = Registry::standard();
    let serial = RunOptions::default();
    let cases: [(&str, &[(&str, &str)]); 5] = [
        ("crystal", &[("n", "7"), ("alpha", "1.5")]),
        ("spectrum", &[("n", "3"), ("alpha", "1"), ("matrix", "true")]),
        ("bounds", &[("curve", "true"), ("n", "9")]),
        ("escape", &[("epsilon", "1e-3")]),
        ("domain", &[("delta", "0.75"), ("svg", "true")]),
    ];
    let mut checks = Vec::new();
    for (name, pairs) in cases {
        let a = reg.run_pairs(name, pairs, serial);
        let b = reg.run_pairs(name, pairs, serial);
        let (ok, detail) = match (a, b) {
            (Ok(a), Ok(b)) => {
                let same = a.json_bytes() == b.json_bytes() && a.files == b.files;
                (same, format!("{} files compared", a.files.len() + 1))
            }
            (Err(e), _) | (_, Err(e)) => (false, format!("error: {e}")),
        };
        checks.push(check(format!("byte-identical rerun: {name}"), ok, detail));
    }
    let par = reg.run_pairs("bounds", &[("curve", "true"), ("n", "9")], RunOptions { parallel: true });
    let ser = reg.run_pairs("bounds", &[("curve", "true"), ("n", "9")], serial);
    let ok = matches!((&par, &ser), (Ok(p), Ok(s)) if p.json_bytes() == s.json_bytes() && p.files == s.files);
    checks.push(check("parallel and serial curves identical", ok, "bounds --curve --n 9"));
    checks
}

/// Run the criteria in `ids`, adding 5, 7 and 9 ahead of 10 when missing
/// since criterion 10 audits their integrations.
pub fn run_selected(ids: &[usize], settings: AcceptanceSettings, mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut order: Vec<usize> = ids.to_vec();
    if order.contains(&10) {
        for dep in [5, 7, 9] {
            if !order.contains(&dep) {
                order.insert(order.iter().position(|&x| x == 10).unwrap_or(order.len()), dep);
            }
        }
    }
    let mut suite = Suite::new(settings);
    order
        .into_iter()
        .map(|id| {
            let r = suite.run(id);
            on_result(&r);
            r
        })
        .collect()
}

pub fn run_all(settings: AcceptanceSettings, on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    run_selected(&ALL, settings, on_result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_matching() {
        let c = |r: f64| Complex64::new(r, 0.0);
        assert_eq!(multiset_distance(&[c(1.0), c(2.0)], &[c(2.0), c(1.0)]), 0.0);
        assert!((multiset_distance(&[c(1.0), c(1.0)], &[c(1.0), c(2.0)]) - 1.0).abs() < 1e-15);
        assert_eq!(multiset_distance(&[c(1.0)], &[]), f64::INFINITY);
    }

    #[test]
    fn fast_criteria_pass() {
        let mut suite = Suite::new(AcceptanceSettings::default());
        for id in [1, 2, 3, 4, 6, 8] {
            let r = suite.run(id);
            assert!(r.checks.iter().all(|c| c.passed), "{}\n{}", r.summary_line(), r.detail_lines().join("\n"));
        }
    }

    #[test]
    fn dependencies_of_criterion_ten_are_scheduled() {
        // Only the ordering is checked; criterion ids above 10 run nothing.
        let mut seen = Vec::new();
        let results = run_selected(&[11], AcceptanceSettings::default(), |r| seen.push(r.id));
        assert_eq!(seen, vec![11]);
        assert!(!results[0].passed());
    }

    #[test]
    fn criterion_ten_without_records_fails() {
        let mut suite = Suite::new(AcceptanceSettings::default());
        let checks = suite.criterion10();
        assert!(checks.iter().any(|c| !c.passed && c.label == "invariant drift records"));
    }
}
