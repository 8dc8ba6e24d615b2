//! Stationary vortex crystals: N−1 unit vortices on the unit circle at
//! `ζ^j`, `ζ = e^{2πi/(N−1)}`, `j = 1..N−1`, plus a central vortex whose
//! intensity cancels the rotation of the ring.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geom::Vec2;
use crate::model::{velocity_field, AlphaModel, Configuration};
use crate::{Result, VortexError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    n_total: usize,
    model: AlphaModel,
}

impl CrystalSpec {
    pub fn new(n_total: usize, model: AlphaModel) -> Result<Self> {
        if n_total < 3 {
            return Err(VortexError::Domain(format!(
                "a crystal needs N >= 3 vortices, got {n_total}"
            )));
        }
        Ok(CrystalSpec { n_total, model })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn model(&self) -> &AlphaModel {
        &self.model
    }

    /// Number of ring vortices, N − 1.
    pub fn ring_size(&self) -> usize {
        self.n_total - 1
    }

    fn ring_point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * j as f64 / self.ring_size() as f64)
    }
}

/// The defining sum `−Σ_{j=1}^{N−2} (1−ζ^j)/|1−ζ^j|^{α+1}` evaluated in
/// complex arithmetic. Its imaginary part cancels in exact arithmetic.
pub fn center_intensity_complex(spec: &CrystalSpec) -> Complex64 {
    let alpha = spec.model.alpha();
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 1..spec.ring_size() {
        let d = Complex64::new(1.0, 0.0) - spec.ring_point(j);
        sum += d / d.norm().powf(alpha + 1.0);
    }
    -sum
}

/// Intensity a_N of the central vortex that makes the crystal stationary.
pub fn center_intensity(spec: &CrystalSpec) -> f64 {
    center_intensity_complex(spec).re
}

pub fn build_crystal(spec: &CrystalSpec) -> Configuration {
    let mut positions: Vec<Vec2> = (1..=spec.ring_size())
        .map(|j| Vec2::from(spec.ring_point(j)))
        .collect();
    // Snap the roots of unity that are exactly representable.
    for p in &mut positions {
        for v in [&mut p.x, &mut p.y] {
            if v.abs() < 1e-15 {
                *v = 0.0;
            }
        }
    }
    positions.push(Vec2::ZERO);
    let mut intensities = vec![1.0; spec.ring_size()];
    intensities.push(center_intensity(spec));
    Configuration::from_parts(&positions, &intensities)
        .expect("roots of unity and the origin are distinct")
}

/// ‖f(Z)‖_∞ = max_i |velocity of vortex i|.
pub fn stationarity_residual(model: &AlphaModel, z: &Configuration) -> Result<f64> {
    Ok(velocity_field(model, z)?
        .into_iter()
        .map(Vec2::norm)
        .fold(0.0, f64::max))
}
