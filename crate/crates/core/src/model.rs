//! The α-model: interaction kernel, point-vortex vector field and first
//! integrals.
//!
//! Velocities follow `dz_i/dt = Σ_{j≠i} a_j K_α(z_i, z_j)` with
//! `K_α(x, y) = C_α (x−y)^⊥ / |x−y|^{α+1}`, α ∈ [1, 2). α = 1 is the Euler
//! point-vortex system.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::geom::Vec2;
use crate::{Result, VortexError};

/// Interaction exponent α together with its coupling constant C_α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaModel {
    alpha: f64,
    c_alpha: f64,
}

impl AlphaModel {
    pub fn new(alpha: f64) -> Result<Self> {
        let c_alpha = coupling_constant(alpha)?;
        Ok(AlphaModel { alpha, c_alpha })
    }

    /// The Euler case α = 1, C_1 = 1/(2π).
    pub fn euler() -> Self {
        AlphaModel {
            alpha: 1.0,
            c_alpha: 1.0 / (2.0 * PI),
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    /// Fractional order s = (3−α)/2 of the underlying Δ^s.
    pub fn s(&self) -> f64 {
        (3.0 - self.alpha) / 2.0
    }

    /// `1/|d|^{α+1}` from the squared distance; exact fast path at α = 1.
    #[inline]
    pub(crate) fn inv_pow(&self, r2: f64) -> f64 {
        if self.alpha == 1.0 {
            1.0 / r2
        } else {
            r2.powf(-0.5 * (self.alpha + 1.0))
        }
    }

    /// Pair potential G_α. Its gradient is C_α(x−y)/|x−y|^{α+1} at α = 1 and
    /// the negative of that for α > 1.
    ///
    /// α = 1: `ln|x−y| / (2π)`. α > 1: the Riesz potential
    /// `Γ(1−s)/(2^{2s} π Γ(s)) |x−y|^{−(α−1)}`.
    pub fn green(&self, r: f64) -> f64 {
        if self.alpha == 1.0 {
            r.ln() / (2.0 * PI)
        } else {
            self.c_alpha / (self.alpha - 1.0) * r.powf(1.0 - self.alpha)
        }
    }
}

/// C_α = Γ((α+1)/2) / (2^{2−α} π Γ((3−α)/2)).
///
/// Obtained from the gradient of the fundamental solution of Δ^s with
/// s = (3−α)/2; continuous on [1, 2) with C_1 = 1/(2π).
pub fn coupling_constant(alpha: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&alpha) {
        return Err(VortexError::Domain(format!(
            "alpha = {alpha} outside [1, 2)"
        )));
    }
    if alpha == 1.0 {
        return Ok(1.0 / (2.0 * PI));
    }
    let num = gamma((alpha + 1.0) / 2.0);
    let den = 2f64.powf(2.0 - alpha) * PI * gamma((3.0 - alpha) / 2.0);
    Ok(num / den)
}

/// K_α(x, y) = C_α (x−y)^⊥ / |x−y|^{α+1}.
pub fn kernel(model: &AlphaModel, x: Vec2, y: Vec2) -> Result<Vec2> {
    let d = x - y;
    let r2 = d.norm_sq();
    if r2 == 0.0 {
        return Err(VortexError::Singular { x: x.x, y: x.y });
    }
    Ok(d.perp() * (model.c_alpha * model.inv_pow(r2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointVortex {
    pub position: Vec2,
    pub intensity: f64,
}

impl PointVortex {
    pub fn new(position: Vec2, intensity: f64) -> Result<Self> {
        if intensity == 0.0 || !intensity.is_finite() {
            return Err(VortexError::Domain(format!(
                "vortex intensity must be finite and nonzero, got {intensity}"
            )));
        }
        if !position.is_finite() {
            return Err(VortexError::Domain("vortex position is not finite".into()));
        }
        Ok(PointVortex {
            position,
            intensity,
        })
    }
}

/// N ≥ 1 point vortices with pairwise distinct positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    vortices: Vec<PointVortex>,
}

impl Configuration {
    pub fn new(vortices: Vec<PointVortex>) -> Result<Self> {
        if vortices.is_empty() {
            return Err(VortexError::Domain("configuration needs N >= 1".into()));
        }
        let cfg = Configuration { vortices };
        cfg.check_distinct()?;
        Ok(cfg)
    }

    pub fn from_parts(positions: &[Vec2], intensities: &[f64]) -> Result<Self> {
        if positions.len() != intensities.len() {
            return Err(VortexError::Domain(format!(
                "{} positions but {} intensities",
                positions.len(),
                intensities.len()
            )));
        }
        let vortices = positions
            .iter()
            .zip(intensities)
            .map(|(&p, &a)| PointVortex::new(p, a))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vortices)
    }

    /// Rebuild from a flat `(p_1, q_1, …, p_N, q_N)` state.
    pub fn from_flat(state: &[f64], intensities: &[f64]) -> Result<Self> {
        if state.len() != 2 * intensities.len() {
            return Err(VortexError::Domain(format!(
                "flat state of length {} does not match {} intensities",
                state.len(),
                intensities.len()
            )));
        }
        let positions: Vec<Vec2> = state.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        Self::from_parts(&positions, intensities)
    }

    pub fn len(&self) -> usize {
        self.vortices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vortices.is_empty()
    }

    pub fn vortices(&self) -> &[PointVortex] {
        &self.vortices
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.vortices.iter().map(|v| v.position).collect()
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.vortices.iter().map(|v| v.intensity).collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.vortices
            .iter()
            .flat_map(|v| [v.position.x, v.position.y])
            .collect()
    }

    /// Smallest pairwise distance (infinite for N = 1).
    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.vortices.iter().enumerate() {
            for b in &self.vortices[i + 1..] {
                best = best.min((a.position - b.position).norm());
            }
        }
        best
    }

    fn check_distinct(&self) -> Result<()> {
        for (i, a) in self.vortices.iter().enumerate() {
            for (j, b) in self.vortices.iter().enumerate().skip(i + 1) {
                let d = (a.position - b.position).norm();
                if d == 0.0 {
                    return Err(VortexError::Coincident { i, j, distance: d });
                }
            }
        }
        Ok(())
    }
}

/// `|Z|_∞ = max_i |z_i|` over a flat `(p, q)` state.
pub fn sup_norm(flat: &[f64]) -> f64 {
    flat.chunks_exact(2)
        .map(|c| c[0].hypot(c[1]))
        .fold(0.0, f64::max)
}

/// `|Z − W|_∞` over flat states.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.chunks_exact(2)
        .zip(b.chunks_exact(2))
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(0.0, f64::max)
}

/// f(Z): component i is Σ_{j≠i} a_j K_α(z_i, z_j), summed in ascending j.
pub fn velocity_field(model: &AlphaModel, z: &Configuration) -> Result<Vec<Vec2>> {
    let positions = z.positions();
    let intensities = z.intensities();
    let mut out = vec![Vec2::ZERO; positions.len()];
    velocity_into(model, &positions, &intensities, &mut out)?;
    Ok(out)
}

/// Allocation-free form of [`velocity_field`] used by the integrator.
pub fn velocity_into(
    model: &AlphaModel,
    positions: &[Vec2],
    intensities: &[f64],
    out: &mut [Vec2],
) -> Result<()> {
    let c = model.c_alpha();
    for (i, (&zi, slot)) in positions.iter().zip(out.iter_mut()).enumerate() {
        let mut acc = Vec2::ZERO;
        for (j, (&zj, &aj)) in positions.iter().zip(intensities).enumerate() {
            if i == j {
                continue;
            }
            let d = zi - zj;
            let r2 = d.norm_sq();
            if r2 == 0.0 {
                return Err(VortexError::Coincident {
                    i: i.min(j),
                    j: i.max(j),
                    distance: 0.0,
                });
            }
            acc += d.perp() * (aj * model.inv_pow(r2));
        }
        *slot = acc * c;
    }
    Ok(())
}

/// First integrals of the point-vortex system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSnapshot {
    /// Σ_{i<j} a_i a_j G_α(|z_i − z_j|).
    pub hamiltonian: f64,
    /// Σ a_i z_i.
    pub linear_momentum: Vec2,
    /// Σ a_i |z_i|².
    pub angular_impulse: f64,
}

pub fn invariants(model: &AlphaModel, z: &Configuration) -> Result<InvariantSnapshot> {
    invariants_of(model, &z.positions(), &z.intensities())
}

pub fn invariants_of(
    model: &AlphaModel,
    positions: &[Vec2],
    intensities: &[f64],
) -> Result<InvariantSnapshot> {
    let mut hamiltonian = 0.0;
    let mut linear_momentum = Vec2::ZERO;
    let mut angular_impulse = 0.0;
    for (i, (&zi, &ai)) in positions.iter().zip(intensities).enumerate() {
        linear_momentum += zi * ai;
        angular_impulse += ai * zi.norm_sq();
        for (j, (&zj, &aj)) in positions.iter().zip(intensities).enumerate().skip(i + 1) {
            let r = (zi - zj).norm();
            if r == 0.0 {
                return Err(VortexError::Coincident { i, j, distance: 0.0 });
            }
            hamiltonian += ai * aj * model.green(r);
        }
    }
    Ok(InvariantSnapshot {
        hamiltonian,
        linear_momentum,
        angular_impulse,
    })
}

/// Relative drift of each first integral between two snapshots.
///
/// Momentum and angular impulse vanish for centred crystals, so they are
/// measured against `Σ|a_i||z_i|` and `Σ|a_i||z_i|²` when that is larger.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantDrift {
    pub hamiltonian: f64,
    pub linear_momentum: f64,
    pub angular_impulse: f64,
}

impl InvariantDrift {
    pub fn between(
        reference: &InvariantSnapshot,
        current: &InvariantSnapshot,
        positions: &[Vec2],
        intensities: &[f64],
    ) -> Self {
        let momentum_scale: f64 = positions
            .iter()
            .zip(intensities)
            .map(|(z, a)| a.abs() * z.norm())
            .sum();
        let impulse_scale: f64 = positions
            .iter()
            .zip(intensities)
            .map(|(z, a)| a.abs() * z.norm_sq())
            .sum();
        let rel = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
        InvariantDrift {
            hamiltonian: rel(
                (current.hamiltonian - reference.hamiltonian).abs(),
                reference.hamiltonian.abs(),
            ),
            linear_momentum: rel(
                (current.linear_momentum - reference.linear_momentum).norm(),
                reference.linear_momentum.norm().max(momentum_scale),
            ),
            angular_impulse: rel(
                (current.angular_impulse - reference.angular_impulse).abs(),
                reference.angular_impulse.abs().max(impulse_scale),
            ),
        }
    }

    pub fn max_with(self, other: InvariantDrift) -> Self {
        InvariantDrift {
            hamiltonian: self.hamiltonian.max(other.hamiltonian),
            linear_momentum: self.linear_momentum.max(other.linear_momentum),
            angular_impulse: self.angular_impulse.max(other.angular_impulse),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn riesz_potential(alpha: f64, r: f64) -> f64 {
        // Independent oracle: G_s with s = (3−α)/2 written with Γ(1−s), Γ(s).
        let s = (3.0 - alpha) / 2.0;
        if alpha == 1.0 {
            r.ln() / (2.0 * PI)
        } else {
            gamma(1.0 - s) / (2f64.powf(2.0 * s) * PI * gamma(s)) * r.powf(-(2.0 - 2.0 * s))
        }
    }

    #[test]
    fn coupling_constant_at_euler_endpoint() {
        assert!((coupling_constant(1.0).unwrap() - 0.15915494309189535).abs() < 1e-16);
        let near = coupling_constant(1.0 + 1e-9).unwrap();
        assert!((near - 1.0 / (2.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn coupling_constant_rejects_out_of_range() {
        for a in [0.5, 0.999, 2.0, 2.5, f64::NAN] {
            assert!(matches!(coupling_constant(a), Err(VortexError::Domain(_))));
        }
    }

    #[test]
    fn coupling_constant_matches_potential_gradient() {
        // |∇G_s| from central differences must equal C_α r^{−α}.
        for &alpha in &[1.0, 1.2, 1.5, 1.75, 1.9] {
            let c = coupling_constant(alpha).unwrap();
            for &r in &[0.3, 1.0, 2.5] {
                let h = 1e-5 * r;
                let grad = (riesz_potential(alpha, r + h) - riesz_potential(alpha, r - h)) / (2.0 * h);
                let expected = c * r.powf(-alpha);
                assert!(
                    ((grad.abs() - expected) / expected).abs() < 1e-6,
                    "alpha {alpha} r {r}: fd {grad} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let m = AlphaModel::euler();
        let k = kernel(&m, Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap();
        assert!(k.x.abs() < 1e-18);
        assert!((k.y + 1.0 / (2.0 * PI)).abs() < 1e-16);

        let k = kernel(&m, Vec2::new(0.3, -0.4), Vec2::new(0.3, 1.6)).unwrap();
        assert!((k.norm() - 1.0 / (4.0 * PI)).abs() < 1e-16);

        assert!(matches!(
            kernel(&m, Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            Err(VortexError::Singular { .. })
        ));
    }

    #[test]
    fn kernel_is_divergence_free() {
        for &alpha in &[1.0, 1.5, 1.9] {
            let m = AlphaModel::new(alpha).unwrap();
            let y = Vec2::new(0.2, -0.1);
            let x = Vec2::new(1.1, 0.7);
            let h = 1e-5;
            let kx = |p: Vec2| kernel(&m, p, y).unwrap();
            let div = (kx(x + Vec2::new(h, 0.0)).x - kx(x - Vec2::new(h, 0.0)).x) / (2.0 * h)
                + (kx(x + Vec2::new(0.0, h)).y - kx(x - Vec2::new(0.0, h)).y) / (2.0 * h);
            assert!(div.abs() < 1e-8, "alpha {alpha}: div {div}");
        }
    }

    #[test]
    fn two_vortex_rigid_rotation() {
        let m = AlphaModel::euler();
        let z = Configuration::from_parts(&[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)], &[1.0, 1.0])
            .unwrap();
        let v = velocity_field(&m, &z).unwrap();
        assert!((v[0].y - 1.0 / (4.0 * PI)).abs() < 1e-16 && v[0].x.abs() < 1e-18);
        assert!((v[1].y + 1.0 / (4.0 * PI)).abs() < 1e-16 && v[1].x.abs() < 1e-18);
    }

    #[test]
    fn single_vortex_is_still() {
        let m = AlphaModel::new(1.3).unwrap();
        let z = Configuration::from_parts(&[Vec2::new(0.4, 2.0)], &[3.0]).unwrap();
        assert_eq!(velocity_field(&m, &z).unwrap(), vec![Vec2::ZERO]);
        assert_eq!(invariants(&m, &z).unwrap().hamiltonian, 0.0);
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let p = Vec2::new(0.5, 0.5);
        let err = Configuration::from_parts(&[Vec2::ZERO, p, p], &[1.0, 1.0, 1.0]).unwrap_err();
        assert_eq!(err, VortexError::Coincident { i: 1, j: 2, distance: 0.0 });
        let m = AlphaModel::euler();
        let mut out = vec![Vec2::ZERO; 3];
        let err = velocity_into(&m, &[Vec2::ZERO, p, p], &[1.0; 3], &mut out).unwrap_err();
        assert!(matches!(err, VortexError::Coincident { i: 1, j: 2, .. }));
    }

    #[test]
    fn symmetric_pair_invariants() {
        let m = AlphaModel::euler();
        let z = Configuration::from_parts(&[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)], &[1.0, 1.0])
            .unwrap();
        let inv = invariants(&m, &z).unwrap();
        assert_eq!(inv.linear_momentum, Vec2::ZERO);
        assert_eq!(inv.angular_impulse, 2.0);
        assert!((inv.hamiltonian - 2f64.ln() / (2.0 * PI)).abs() < 1e-16);
    }

    fn arb_point() -> impl Strategy<Value = Vec2> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn kernel_antisymmetric_and_perpendicular(
            x in arb_point(), y in arb_point(), alpha in 1.0..1.999f64
        ) {
            prop_assume!((x - y).norm() > 1e-3);
            let m = AlphaModel::new(alpha).unwrap();
            let kxy = kernel(&m, x, y).unwrap();
            let kyx = kernel(&m, y, x).unwrap();
            prop_assert!((kxy + kyx).norm() <= 1e-15 * kxy.norm());
            let dot = (x - y).dot(kxy);
            prop_assert!(dot.abs() < 1e-14 * kxy.norm() * (x - y).norm());
        }

        #[test]
        fn velocity_matches_brute_force(
            pts in proptest::collection::vec((arb_point(), 0.2..2.0f64, any::<bool>()), 1..=12),
            alpha in prop_oneof![Just(1.0), 1.0..1.99f64],
        ) {
            let positions: Vec<Vec2> = pts.iter().map(|p| p.0).collect();
            let intensities: Vec<f64> = pts.iter().map(|p| if p.2 { p.1 } else { -p.1 }).collect();
            let z = match Configuration::from_parts(&positions, &intensities) {
                Ok(z) if z.min_pair_distance() > 1e-3 => z,
                _ => return Ok(()),
            };
            let m = AlphaModel::new(alpha).unwrap();
            let fast = velocity_field(&m, &z).unwrap();
            for i in 0..positions.len() {
                let mut acc = Vec2::ZERO;
                let mut scale = 0.0;
                for j in 0..positions.len() {
                    if i != j {
                        let term = kernel(&m, positions[i], positions[j]).unwrap() * intensities[j];
                        scale += term.norm();
                        acc += term;
                    }
                }
                prop_assert!((fast[i] - acc).norm() <= 1e-14 * scale);
            }
        }
    }
}
