//! Jacobian of the point-vortex field at an equilibrium, its spectrum, the
//! instability rate λ₀ and the confinement constants κ₁, κ₂.
//!
//! Coordinates are ordered `(p_1, q_1, …, p_N, q_N)` with `z_i = p_i + i q_i`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen;
use crate::geom::Vec2;
use crate::model::{velocity_into, AlphaModel, Configuration};
use crate::{Result, VortexError};

/// Largest configuration handed to the dense eigensolver.
pub const MAX_SPECTRUM_VORTICES: usize = 16;

/// Dense 2N×2N Jacobian of the point-vortex field.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    entries: DMatrix<f64>,
}

impl JacobianMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() % 2 != 0 {
            return Err(VortexError::Domain(format!(
                "Jacobian must be 2N x 2N, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(JacobianMatrix { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn n_vortices(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Largest entrywise difference relative to the largest entry of `self`.
    pub fn relative_difference(&self, other: &JacobianMatrix) -> f64 {
        let scale = self.entries.amax().max(f64::MIN_POSITIVE);
        (&self.entries - &other.entries).amax() / scale
    }
}

/// Df(Z) from the closed-form entries.
///
/// For i ≠ j, with d = z_i − z_j and r = |d|, the block divided by a_j C_α is
///
/// ```text
/// ∂p_j f_{p_i} = −(α+1) d_q d_p / r^{α+3}
/// ∂p_j f_{q_i} =  (α+1) d_p d_p / r^{α+3} − 1/r^{α+1}
/// ∂q_j f_{p_i} = −(α+1) d_q d_q / r^{α+3} + 1/r^{α+1}
/// ∂q_j f_{q_i} =  (α+1) d_p d_q / r^{α+3}
/// ```
///
/// and the diagonal block (i, i) is minus the sum of the weighted
/// off-diagonal blocks of row i, since f_i only depends on z_i − z_j.
pub fn jacobian_analytic(model: &AlphaModel, z: &Configuration) -> Result<JacobianMatrix> {
    let n = z.len();
    let positions = z.positions();
    let intensities = z.intensities();
    let alpha = model.alpha();
    let c = model.c_alpha();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let mut diag = [0.0f64; 4];
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = positions[i] - positions[j];
            let r2 = d.norm_sq();
            if r2 == 0.0 {
                return Err(VortexError::Coincident {
                    i: i.min(j),
                    j: i.max(j),
                    distance: 0.0,
                });
            }
            let inv = model.inv_pow(r2);
            let k = (alpha + 1.0) * inv / r2;
            let w = intensities[j] * c;
            let block = [
                -d.y * d.x * k * w,
                (-d.y * d.y * k + inv) * w,
                (d.x * d.x * k - inv) * w,
                d.x * d.y * k * w,
            ];
            m[(2 * i, 2 * j)] = block[0];
            m[(2 * i, 2 * j + 1)] = block[1];
            m[(2 * i + 1, 2 * j)] = block[2];
            m[(2 * i + 1, 2 * j + 1)] = block[3];
            for (acc, b) in diag.iter_mut().zip(block) {
                *acc -= b;
            }
        }
        m[(2 * i, 2 * i)] = diag[0];
        m[(2 * i, 2 * i + 1)] = diag[1];
        m[(2 * i + 1, 2 * i)] = diag[2];
        m[(2 * i + 1, 2 * i + 1)] = diag[3];
    }
    Ok(JacobianMatrix { entries: m })
}

/// Central finite differences of the velocity field in each coordinate.
pub fn jacobian_fd(model: &AlphaModel, z: &Configuration, step: f64) -> Result<JacobianMatrix> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(VortexError::Domain(format!("step must be positive, got {step}")));
    }
    let n = z.len();
    let intensities = z.intensities();
    let base = z.positions();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut plus = vec![Vec2::ZERO; n];
    let mut minus = vec![Vec2::ZERO; n];
    for col in 0..2 * n {
        let (i, along_q) = (col / 2, col % 2 == 1);
        let delta = if along_q { Vec2::new(0.0, step) } else { Vec2::new(step, 0.0) };
        let mut p = base.clone();
        p[i] = base[i] + delta;
        velocity_into(model, &p, &intensities, &mut plus)?;
        p[i] = base[i] - delta;
        velocity_into(model, &p, &intensities, &mut minus)?;
        for row in 0..n {
            let d = (plus[row] - minus[row]) * (0.5 / step);
            m[(2 * row, col)] = d.x;
            m[(2 * row + 1, col)] = d.y;
        }
    }
    Ok(JacobianMatrix { entries: m })
}

/// Spectral data of Df(Z*) at an equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// All 2N eigenvalues, sorted by decreasing real part.
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part, clamped to 0 when within round-off of zero.
    pub lambda0: f64,
    /// Imaginary part of the eigenvalue reported as λ₀.
    pub lambda0_imag: f64,
    /// Real eigenvector for λ₀ (unit max-norm, first nonzero entry
    /// positive); absent when λ₀ = 0 or only a complex pair attains it.
    pub unstable_eigenvector: Option<Vec<f64>>,
    /// C_α max_i Σ_{j≠i} |a_j| / |z_i − z_j|^{α+1} (leading order).
    pub kappa1: f64,
    /// Largest singular value of Df(Z*) (leading order).
    pub kappa2: f64,
    /// Largest singular value of Df(Z*)/C_α, the bracketed matrix as it is
    /// usually printed with the coupling constant factored out.
    pub kappa2_over_c_alpha: f64,
    /// max_λ dist(−λ, spectrum): zero for a Hamiltonian spectrum.
    pub pairing_defect: f64,
    /// Tolerance used to decide ties, zero real parts and real eigenvalues.
    pub tolerance: f64,
}

impl SpectralReport {
    pub fn dominant_is_real(&self) -> bool {
        self.lambda0_imag == 0.0
    }
}

/// C_α max_i Σ_{j≠i} |a_j| / |z_i − z_j|^{α+1}.
pub fn kappa1(model: &AlphaModel, z: &Configuration) -> f64 {
    let positions = z.positions();
    let intensities = z.intensities();
    let mut best: f64 = 0.0;
    for (i, &zi) in positions.iter().enumerate() {
        let s: f64 = positions
            .iter()
            .zip(&intensities)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (&zj, &aj))| aj.abs() * model.inv_pow((zi - zj).norm_sq()))
            .sum();
        best = best.max(s);
    }
    model.c_alpha() * best
}

pub fn spectrum(
    jac: &JacobianMatrix,
    model: &AlphaModel,
    z: &Configuration,
) -> Result<SpectralReport> {
    if jac.n_vortices() != z.len() {
        return Err(VortexError::Domain(format!(
            "Jacobian is for {} vortices, configuration has {}",
            jac.n_vortices(),
            z.len()
        )));
    }
    if z.len() > MAX_SPECTRUM_VORTICES {
        return Err(VortexError::Domain(format!(
            "dense spectrum limited to N <= {MAX_SPECTRUM_VORTICES}, got {}",
            z.len()
        )));
    }
    let m = jac.entries();
    let eigenvalues = eigen::eigenvalues(m)?;
    let tolerance = 1e-9 * m.amax().max(f64::MIN_POSITIVE);

    let max_re = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let (lambda0, lambda0_imag, unstable_eigenvector) = if max_re <= tolerance {
        (0.0, 0.0, None)
    } else {
        let candidates: Vec<&Complex64> =
            eigenvalues.iter().filter(|l| l.re >= max_re - tolerance).collect();
        match candidates.iter().find(|l| l.im.abs() <= tolerance) {
            Some(real) => {
                let v = eigen::real_eigenvector(m, real.re)?;
                (real.re, 0.0, Some(v.iter().cloned().collect()))
            }
            None => {
                let c = candidates
                    .iter()
                    .max_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
                    .expect("nonempty");
                (c.re, c.im.abs(), None)
            }
        }
    };

    let pairing_defect = eigenvalues
        .iter()
        .map(|l| {
            eigenvalues
                .iter()
                .map(|m| (m + l).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let kappa2 = eigen::spectral_norm(m);
    Ok(SpectralReport {
        eigenvalues,
        lambda0,
        lambda0_imag,
        unstable_eigenvector,
        kappa1: kappa1(model, z),
        kappa2,
        kappa2_over_c_alpha: kappa2 / model.c_alpha(),
        pairing_defect,
        tolerance,
    })
}

/// Analytic Jacobian plus its spectral report.
pub fn linearize(model: &AlphaModel, z: &Configuration) -> Result<(JacobianMatrix, SpectralReport)> {
    let jac = jacobian_analytic(model, z)?;
    let report = spectrum(&jac, model, z)?;
    Ok((jac, report))
}
