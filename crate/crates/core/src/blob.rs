//! Vortex patches discretised as clouds of point markers.
//!
//! Each blob i starts as a uniform disk of radius ε^{ν/2}/4 around its
//! centre, carried by M markers of intensity a_i/M. All markers interact
//! through the full α-kernel. Diagnostics are the blob barycentres B_i,
//! moments of inertia I_i, support radii and the exit time τ_{ε,β}.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use crate::crystal::{build_crystal, CrystalSpec};
use crate::export::{write_csv_header, write_csv_row};
use crate::geom::Vec2;
use crate::linearization::linearize;
use crate::model::AlphaModel;
use crate::ode::escape::{escape_along, EscapeOptions, EscapeResult};
use crate::ode::{integrate_with, Control, IntegrationStats, IntegratorSettings, VectorField};
use crate::{Result, VortexError};

/// Distances below this between markers of one blob are floored.
pub const REGULARIZATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub center: Vec2,
    pub intensity: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub markers: usize,
}

impl PatchSpec {
    pub fn new(center: Vec2, intensity: f64, epsilon: f64, nu: f64, markers: usize) -> Result<Self> {
        if !(intensity != 0.0 && intensity.is_finite()) {
            return Err(VortexError::Domain(format!("intensity must be nonzero, got {intensity}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(VortexError::Domain(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        if !(nu >= 2.0) || !nu.is_finite() {
            return Err(VortexError::Domain(format!("nu must be >= 2, got {nu}")));
        }
        if markers == 0 {
            return Err(VortexError::Domain("a patch needs at least one marker".into()));
        }
        if !center.is_finite() {
            return Err(VortexError::Domain("patch centre must be finite".into()));
        }
        Ok(PatchSpec { center, intensity, epsilon, nu, markers })
    }

    /// ε^{ν/2}/4.
    pub fn radius(&self) -> f64 {
        self.epsilon.powf(0.5 * self.nu) / 4.0
    }

    /// Height 16|a|ε^{−ν}/π of the indicator patch (metadata only).
    pub fn amplitude(&self) -> f64 {
        16.0 * self.intensity.abs() * self.epsilon.powf(-self.nu) / PI
    }

    /// ε^ν/32, the inertia of the continuous patch.
    pub fn continuous_inertia(&self) -> f64 {
        self.epsilon.powf(self.nu) / 32.0
    }
}

/// Sunflower layout of M points in the patch disk, shifted so that their
/// mean is exactly the centre.
pub fn sample_patch(spec: &PatchSpec) -> Vec<Vec2> {
    let m = spec.markers;
    let r = spec.radius();
    let golden = PI * (3.0 - 5f64.sqrt());
    let raw: Vec<Vec2> = (0..m)
        .map(|k| Vec2::from_polar(r * ((k as f64 + 0.5) / m as f64).sqrt(), k as f64 * golden))
        .collect();
    let mean = raw.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / m as f64);
    raw.into_iter().map(|p| spec.center + (p - mean)).collect()
}

/// Marker positions of all blobs, stored blob after blob.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudState {
    markers: Vec<Vec2>,
    starts: Vec<usize>,
    intensities: Vec<f64>,
}

impl CloudState {
    pub fn from_patches(patches: &[PatchSpec]) -> Result<Self> {
        if patches.is_empty() {
            return Err(VortexError::Domain("no patches".into()));
        }
        let mut markers = Vec::new();
        let mut starts = vec![0];
        for p in patches {
            markers.extend(sample_patch(p));
            starts.push(markers.len());
        }
        Ok(CloudState {
            markers,
            starts,
            intensities: patches.iter().map(|p| p.intensity).collect(),
        })
    }

    pub fn n_blobs(&self) -> usize {
        self.intensities.len()
    }

    pub fn n_markers(&self) -> usize {
        self.markers.len()
    }

    pub fn blob(&self, i: usize) -> &[Vec2] {
        &self.markers[self.starts[i]..self.starts[i + 1]]
    }

    pub fn blob_intensity(&self, i: usize) -> f64 {
        self.intensities[i]
    }

    /// a_i / M_i, shared by every marker of blob i.
    pub fn marker_intensity(&self, i: usize) -> f64 {
        self.intensities[i] / (self.starts[i + 1] - self.starts[i]) as f64
    }

    pub fn markers(&self) -> &[Vec2] {
        &self.markers
    }

    pub fn blob_index(&self) -> Vec<usize> {
        (0..self.n_blobs())
            .flat_map(|i| std::iter::repeat_n(i, self.starts[i + 1] - self.starts[i]))
            .collect()
    }

    pub fn marker_weights(&self) -> Vec<f64> {
        self.blob_index().into_iter().map(|i| self.marker_intensity(i)).collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.markers.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Same blob layout with new marker positions.
    pub fn with_flat(&self, flat: &[f64]) -> CloudState {
        CloudState {
            markers: flat.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect(),
            starts: self.starts.clone(),
            intensities: self.intensities.clone(),
        }
    }

    /// Barycentre, inertia about it, and support radius of blob i.
    pub fn moments(&self, i: usize) -> (Vec2, f64, f64) {
        moments(self.blob(i))
    }
}

/// Equal-weight barycentre, inertia and support radius of a marker set.
pub fn moments(markers: &[Vec2]) -> (Vec2, f64, f64) {
    let m = markers.len() as f64;
    let b = markers.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / m);
    let inertia = markers.iter().map(|&p| (p - b).norm_sq()).sum::<f64>() / m;
    let support = markers.iter().map(|&p| (p - b).norm()).fold(0.0, f64::max);
    (b, inertia, support)
}

/// All markers under the full pairwise α-kernel, accumulated in a fixed
/// order.
#[derive(Debug)]
pub struct MarkerCloudField {
    model: AlphaModel,
    weights: Vec<f64>,
    blob_of: Vec<usize>,
    regularizations: AtomicUsize,
}

impl MarkerCloudField {
    pub fn new(model: AlphaModel, state: &CloudState) -> Self {
        MarkerCloudField {
            model,
            weights: state.marker_weights(),
            blob_of: state.blob_index(),
            regularizations: AtomicUsize::new(0),
        }
    }

    /// Times the same-blob distance floor was applied.
    pub fn regularizations(&self) -> usize {
        self.regularizations.load(Ordering::Relaxed)
    }
}

impl VectorField for MarkerCloudField {
    fn dim(&self) -> usize {
        2 * self.weights.len()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.weights.len();
        dy.iter_mut().for_each(|v| *v = 0.0);
        let floor2 = REGULARIZATION_FLOOR * REGULARIZATION_FLOOR;
        for i in 0..n {
            let (xi, yi) = (y[2 * i], y[2 * i + 1]);
            let (mut u, mut v) = (0.0, 0.0);
            for j in i + 1..n {
                let dx = xi - y[2 * j];
                let dyy = yi - y[2 * j + 1];
                let mut r2 = dx * dx + dyy * dyy;
                if r2 < floor2 {
                    if self.blob_of[i] != self.blob_of[j] {
                        return Err(VortexError::Collision { t, i, j, distance: r2.sqrt() });
                    }
                    self.regularizations.fetch_add(1, Ordering::Relaxed);
                    r2 = floor2;
                }
                let g = self.model.inv_pow(r2);
                // perp(d) = (−dy, dx)
                u -= dyy * g * self.weights[j];
                v += dx * g * self.weights[j];
                dy[2 * j] += dyy * g * self.weights[i];
                dy[2 * j + 1] -= dx * g * self.weights[i];
            }
            dy[2 * i] += u;
            dy[2 * i + 1] += v;
        }
        let c = self.model.c_alpha();
        dy.iter_mut().for_each(|v| *v *= c);
        Ok(())
    }
}

/// Stop the cloud run once a marker of blob i is farther than `radius`
/// from `centers[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitWatch {
    pub centers: Vec<Vec2>,
    pub radius: f64,
}

impl ExitWatch {
    fn outside(&self, state: &CloudState, flat: &[f64]) -> bool {
        (0..state.n_blobs()).any(|i| {
            let c = self.centers[i];
            (state.starts[i]..state.starts[i + 1])
                .any(|m| (Vec2::new(flat[2 * m], flat[2 * m + 1]) - c).norm() > self.radius)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolveOptions {
    /// Minimum spacing between recorded snapshots (0 records every step).
    pub snapshot_interval: f64,
    pub stop_on_exit: Option<ExitWatch>,
    /// Abort with a wall-clock error once this much time has elapsed.
    pub wall_budget: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudTrajectory {
    pub layout: CloudState,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub regularizations: usize,
    /// Largest relative drift of Σ w_m x_m, against Σ |w_m||x_m|.
    pub momentum_drift: f64,
    pub stopped_on_exit: bool,
    pub stats: IntegrationStats,
}

impl CloudTrajectory {
    pub fn state(&self, k: usize) -> CloudState {
        self.layout.with_flat(&self.states[k])
    }

    /// Raw marker dump: `t, blob, marker, x, y`.
    pub fn write_markers_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        write_csv_header(w, &["t", "blob", "marker", "x", "y"])?;
        let index = self.layout.blob_index();
        for (t, y) in self.times.iter().zip(&self.states) {
            for (m, c) in y.chunks_exact(2).enumerate() {
                write_csv_row(w, &[*t, index[m] as f64, m as f64, c[0], c[1]])?;
            }
        }
        Ok(())
    }
}

fn momentum(weights: &[f64], y: &[f64]) -> (Vec2, f64) {
    let mut p = Vec2::ZERO;
    let mut scale = 0.0;
    for (w, c) in weights.iter().zip(y.chunks_exact(2)) {
        let x = Vec2::new(c[0], c[1]);
        p += x * *w;
        scale += w.abs() * x.norm();
    }
    (p, scale)
}

/// Evolve every marker from `state` over `[0, t_end]`.
pub fn evolve_cloud(
    model: &AlphaModel,
    state: &CloudState,
    t_end: f64,
    settings: &IntegratorSettings,
    options: &EvolveOptions,
) -> Result<CloudTrajectory> {
    let y0 = state.to_flat();
    for i in 0..state.n_markers() {
        for j in i + 1..state.n_markers() {
            if state.markers[i] == state.markers[j] {
                return Err(VortexError::Coincident { i, j, distance: 0.0 });
            }
        }
    }
    let field = MarkerCloudField::new(*model, state);
    let weights = state.marker_weights();
    let (p0, _) = momentum(&weights, &y0);
    let started = Instant::now();
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut drift: f64 = 0.0;
    let mut stopped_on_exit = false;
    let mut accepted = 0usize;
    let out = integrate_with(&field, 0.0, &y0, t_end, settings, &mut |v| {
        accepted += 1;
        let (p, scale) = momentum(&weights, v.y1);
        drift = drift.max((p - p0).norm() / scale.max(f64::MIN_POSITIVE));
        let exited = options
            .stop_on_exit
            .as_ref()
            .is_some_and(|w| w.outside(state, v.y1));
        if exited || v.t1 == t_end || v.t1 - times.last().unwrap() >= options.snapshot_interval {
            times.push(v.t1);
            states.push(v.y1.to_vec());
        }
        if exited {
            stopped_on_exit = true;
            return Ok(Control::StopAt(v.t1));
        }
        if let Some(budget) = options.wall_budget {
            if started.elapsed() > budget {
                return Err(VortexError::WallClock {
                    budget_secs: budget.as_secs_f64(),
                    t: v.t1,
                    accepted,
                });
            }
        }
        Ok(Control::Continue)
    })?;
    Ok(CloudTrajectory {
        layout: state.clone(),
        times,
        states,
        regularizations: field.regularizations(),
        momentum_drift: drift,
        stopped_on_exit,
        stats: out.stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobDiagnostics {
    pub times: Vec<f64>,
    /// `[snapshot][blob]`.
    pub barycenters: Vec<Vec<Vec2>>,
    pub inertia: Vec<Vec<f64>>,
    pub support_radius: Vec<Vec<f64>>,
    /// First time a marker of blob i leaves D(z_i*, ε^β).
    pub exit_time: Option<f64>,
}

impl BlobDiagnostics {
    /// `t, B1x, B1y, I1, R1, …`.
    pub fn write_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let nb = self.barycenters.first().map_or(0, |b| b.len());
        let mut header = vec!["t".to_string()];
        for i in 1..=nb {
            header.extend([format!("B{i}x"), format!("B{i}y"), format!("I{i}"), format!("R{i}")]);
        }
        write_csv_header(w, &header)?;
        for k in 0..self.times.len() {
            let mut row = vec![self.times[k]];
            for i in 0..nb {
                let b = self.barycenters[k][i];
                row.extend([b.x, b.y, self.inertia[k][i], self.support_radius[k][i]]);
            }
            write_csv_row(w, &row)?;
        }
        Ok(())
    }
}

/// Moments per snapshot and the exit time from the disks D(z_i*, ε^β),
/// located by bisection on the straight-line interpolation between the
/// two snapshots that bracket the first exit.
pub fn diagnostics(traj: &CloudTrajectory, z_star: &[Vec2], epsilon: f64, beta: f64) -> Result<BlobDiagnostics> {
    if traj.times.is_empty() {
        return Err(VortexError::Domain("empty cloud trajectory".into()));
    }
    if z_star.len() != traj.layout.n_blobs() {
        return Err(VortexError::Domain("one centre per blob required".into()));
    }
    let radius = epsilon.powf(beta);
    let watch = ExitWatch { centers: z_star.to_vec(), radius };
    let mut d = BlobDiagnostics {
        times: traj.times.clone(),
        barycenters: Vec::new(),
        inertia: Vec::new(),
        support_radius: Vec::new(),
        exit_time: None,
    };
    for y in &traj.states {
        let s = traj.layout.with_flat(y);
        let (mut b, mut inertia, mut sup) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..s.n_blobs() {
            let (bi, ii, ri) = s.moments(i);
            b.push(bi);
            inertia.push(ii);
            sup.push(ri);
        }
        d.barycenters.push(b);
        d.inertia.push(inertia);
        d.support_radius.push(sup);
    }
    if let Some(k) = traj.states.iter().position(|y| watch.outside(&traj.layout, y)) {
        d.exit_time = Some(if k == 0 {
            traj.times[0]
        } else {
            let (ya, yb) = (&traj.states[k - 1], &traj.states[k]);
            let (ta, tb) = (traj.times[k - 1], traj.times[k]);
            let mut buf = vec![0.0; ya.len()];
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                for (o, (a, b)) in buf.iter_mut().zip(ya.iter().zip(yb)) {
                    *o = a + mid * (b - a);
                }
                if watch.outside(&traj.layout, &buf) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ta + hi * (tb - ta)
        });
    }
    Ok(d)
}

/// Parameters of the crystal-of-blobs escape run.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobEscapeConfig {
    pub n_total: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub beta: f64,
    pub markers: usize,
    pub settings: IntegratorSettings,
    pub snapshot_interval: f64,
    pub wall_budget: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobEscapeResult {
    pub config: BlobEscapeConfig,
    pub lambda0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub diagnostics: BlobDiagnostics,
    pub oracle: EscapeResult,
    /// (t, max_i |B_i(t) − z_i(t)|) at snapshots up to τ_Z.
    pub gap: Vec<(f64, f64)>,
    pub max_gap: f64,
    /// Largest I_i(t) / (I_i(0) e^{1.2·2κ₁ t}) for t up to the exit time.
    pub inertia_ratio: f64,
    /// 1.1 (1 − β)|ln ε| / λ₀.
    pub exit_bound: f64,
    /// Smallest C with gap(t) ≤ C e^{κ₂t} Σ_j √I_j(0) e^{κ₁t}.
    pub envelope_constant: f64,
    pub regularizations: usize,
    pub momentum_drift: f64,
    pub elapsed: Duration,
}

/// Blobs centred on the ε/2-perturbed crystal, evolved until they leave
/// the ε^β-disks, compared with the point-vortex run from the same centres.
pub fn blob_escape_experiment(cfg: &BlobEscapeConfig) -> Result<BlobEscapeResult> {
    let started = Instant::now();
    let model = AlphaModel::new(cfg.alpha)?;
    let spec = CrystalSpec::new(cfg.n_total, model)?;
    let z_star = build_crystal(&spec);
    let (_, rep) = linearize(&model, &z_star)?;
    let v = rep
        .unstable_eigenvector
        .clone()
        .ok_or_else(|| VortexError::NoInstability("no real unstable eigenvector".into()))?;
    let oracle = escape_along(
        &model,
        &z_star,
        &v,
        rep.lambda0,
        cfg.epsilon,
        cfg.beta,
        &cfg.settings,
        // Only the trajectory is used; keep the rate fit valid at large ε.
        &EscapeOptions { window_lower: 0.0, ..Default::default() },
    )?;
    let centers = oracle.initial.positions();
    let patches = centers
        .iter()
        .zip(z_star.intensities())
        .map(|(&c, a)| PatchSpec::new(c, a, cfg.epsilon, cfg.nu, cfg.markers))
        .collect::<Result<Vec<_>>>()?;
    let cloud = CloudState::from_patches(&patches)?;

    let exit_bound = 1.1 * (1.0 - cfg.beta) * cfg.epsilon.ln().abs() / rep.lambda0;
    let t_end = 1.5 * exit_bound.max(oracle.tau_z);
    let stars = z_star.positions();
    let options = EvolveOptions {
        snapshot_interval: cfg.snapshot_interval,
        stop_on_exit: Some(ExitWatch { centers: stars.clone(), radius: cfg.epsilon.powf(cfg.beta) }),
        wall_budget: cfg.wall_budget.map(|b| b.saturating_sub(started.elapsed())),
    };
    let traj = evolve_cloud(&model, &cloud, t_end, &cfg.settings, &options)?;
    let diagnostics = diagnostics(&traj, &stars, cfg.epsilon, cfg.beta)?;

    let sol = &oracle.trajectory.solution;
    let mut gap = Vec::new();
    for (k, &t) in diagnostics.times.iter().enumerate() {
        let Some(z) = sol.interpolate(t) else { break };
        let g = diagnostics.barycenters[k]
            .iter()
            .enumerate()
            .map(|(i, b)| (*b - Vec2::new(z[2 * i], z[2 * i + 1])).norm())
            .fold(0.0, f64::max);
        gap.push((t, g));
    }
    let max_gap = gap.iter().map(|g| g.1).fold(0.0, f64::max);

    let horizon = diagnostics.exit_time.unwrap_or(f64::INFINITY);
    let i0 = &diagnostics.inertia[0];
    let growth = 1.2 * 2.0 * rep.kappa1;
    let mut inertia_ratio: f64 = 0.0;
    for (k, &t) in diagnostics.times.iter().enumerate() {
        if t > horizon {
            break;
        }
        for (i, &ii) in diagnostics.inertia[k].iter().enumerate() {
            if i0[i] > 0.0 {
                inertia_ratio = inertia_ratio.max(ii / (i0[i] * (growth * t).exp()));
            }
        }
    }
    let root_i0: f64 = i0.iter().map(|x| x.sqrt()).sum();
    let envelope_constant = gap
        .iter()
        .map(|&(t, g)| g / (((rep.kappa1 + rep.kappa2) * t).exp() * root_i0).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);

    Ok(BlobEscapeResult {
        config: cfg.clone(),
        lambda0: rep.lambda0,
        kappa1: rep.kappa1,
        kappa2: rep.kappa2,
        diagnostics,
        oracle,
        gap,
        max_gap,
        inertia_ratio,
        exit_bound,
        envelope_constant,
        regularizations: traj.regularizations,
        momentum_drift: traj.momentum_drift,
        elapsed: started.elapsed(),
    })
}
