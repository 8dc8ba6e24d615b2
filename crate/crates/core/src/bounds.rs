//! Closed-form thresholds: the concentration exponent ν, the exit-time
//! coefficient ξ₁, the exponent β₀, and the bounded-domain criteria.

use std::f64::consts::PI;

use crate::crystal::{build_crystal, CrystalSpec};
use crate::linearization::linearize;
use crate::model::{coupling_constant, AlphaModel};
use crate::{Result, VortexError};

/// (15 + 9√65)/28: the value of |T'''|/|T'|³ at which the bounded-domain
/// ν threshold equals 4.
pub fn c0() -> f64 {
    (15.0 + 9.0 * 65f64.sqrt()) / 28.0
}

/// φ(β) = 2 r (1 − β) + 2β with r = (κ₁ + κ₂)/λ₀.
pub fn phi(beta: f64, ratio: f64) -> f64 {
    2.0 * ratio * (1.0 - beta) + 2.0 * beta
}

/// The exponent (4 − 2α)/(5 − α) at which φ is evaluated for ν.
pub fn critical_beta(alpha: f64) -> f64 {
    (4.0 - 2.0 * alpha) / (5.0 - alpha)
}

fn check_inputs(alpha: f64, kappa1: f64, kappa2: f64, lambda0: f64) -> Result<f64> {
    coupling_constant(alpha)?;
    if !(lambda0 > 0.0) {
        return Err(VortexError::NoInstability(format!("lambda0 = {lambda0} is not positive")));
    }
    if !(kappa1 >= 0.0) || !kappa2.is_finite() || kappa2 < lambda0 * (1.0 - 1e-12) {
        return Err(VortexError::Domain(format!(
            "need kappa1 >= 0 and kappa2 >= lambda0, got kappa1 = {kappa1}, kappa2 = {kappa2}, lambda0 = {lambda0}"
        )));
    }
    Ok((kappa1 + kappa2) / lambda0)
}

/// ν_min = φ((4−2α)/(5−α)) = (2/(5−α))((1+α)(κ₁+κ₂)/λ₀ + 4 − 2α).
pub fn nu_threshold(alpha: f64, kappa1: f64, kappa2: f64, lambda0: f64) -> Result<f64> {
    let ratio = check_inputs(alpha, kappa1, kappa2, lambda0)?;
    Ok(2.0 / (5.0 - alpha) * ((1.0 + alpha) * ratio + 4.0 - 2.0 * alpha))
}

/// Coefficient (1 − β)/λ₀ of |ln ε| in the exit-time bound.
pub fn xi1_threshold(beta: f64, lambda0: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(VortexError::Domain(format!("beta must lie in (0,1), got {beta}")));
    }
    if !(lambda0 > 0.0) {
        return Err(VortexError::NoInstability(format!("lambda0 = {lambda0} is not positive")));
    }
    Ok((1.0 - beta) / lambda0)
}

/// Solution β₀ ∈ [0, 1] of φ(β) = ν, by bisection to 1e−12.
///
/// Returns `None` when ν ≤ ν_min, i.e. when no β below the critical
/// exponent satisfies the condition. ν ≥ φ(0) gives β₀ = 0.
pub fn beta0(alpha: f64, kappa1: f64, kappa2: f64, lambda0: f64, nu: f64) -> Result<Option<f64>> {
    let ratio = check_inputs(alpha, kappa1, kappa2, lambda0)?;
    let beta_c = critical_beta(alpha);
    if !(nu > phi(beta_c, ratio)) {
        return Ok(None);
    }
    if nu >= phi(0.0, ratio) {
        return Ok(Some(0.0));
    }
    // φ is decreasing, φ(0) > ν > φ(β_c).
    let (mut lo, mut hi) = (0.0, beta_c);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if phi(mid, ratio) > nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// All point-vortex thresholds for one set of spectral inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub alpha: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub lambda0: f64,
    pub nu_min: f64,
    /// 1/λ₀, the coefficient of (1 − β).
    pub xi1_factor: f64,
    /// The concentration exponent β₀ was solved for, if any.
    pub nu: Option<f64>,
    pub beta0: Option<f64>,
}

pub fn threshold_report(
    alpha: f64,
    kappa1: f64,
    kappa2: f64,
    lambda0: f64,
    nu: Option<f64>,
) -> Result<ThresholdReport> {
    let nu_min = nu_threshold(alpha, kappa1, kappa2, lambda0)?;
    let beta0 = match nu {
        Some(v) => beta0(alpha, kappa1, kappa2, lambda0, v)?,
        None => None,
    };
    Ok(ThresholdReport {
        alpha,
        kappa1,
        kappa2,
        lambda0,
        nu_min,
        xi1_factor: 1.0 / lambda0,
        nu,
        beta0,
    })
}

/// Closed-form ν threshold g(α) of the three-vortex crystal.
pub fn g_three_vortex(alpha: f64) -> Result<f64> {
    coupling_constant(alpha)?;
    let p = 2f64.powf(-alpha);
    let num = 2.0 + p * alpha * (3.0 * (1.0 + 2f64.powf(1.0 + 2.0 * alpha))).sqrt();
    let den = (2.0 - p) * alpha.sqrt();
    Ok(2.0 / (5.0 - alpha) * ((1.0 + alpha) * num / den + 4.0 - 2.0 * alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuCurvePoint {
    pub alpha: f64,
    pub nu_min: f64,
    pub lambda0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// False when λ₀ is attained only by a complex pair.
    pub dominant_is_real: bool,
}

/// ν threshold of the N-vortex crystal along a grid of α values.
pub fn nu_curve(n: usize, alphas: &[f64]) -> Result<Vec<NuCurvePoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            let model = AlphaModel::new(alpha)?;
            let z = build_crystal(&CrystalSpec::new(n, model)?);
            let (_, rep) = linearize(&model, &z)?;
            Ok(NuCurvePoint {
                alpha,
                nu_min: nu_threshold(alpha, rep.kappa1, rep.kappa2, rep.lambda0)?,
                lambda0: rep.lambda0,
                kappa1: rep.kappa1,
                kappa2: rep.kappa2,
                dominant_is_real: rep.dominant_is_real(),
            })
        })
        .collect()
}

/// Criteria for a single vortex at a critical point of the Robin function
/// of a bounded domain, in terms of t1 = |T'(z*)| and t3 = |T'''(z*)|.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainThresholds {
    pub t1: f64,
    pub t3: f64,
    pub intensity: f64,
    /// t3 > 2 t1³.
    pub saddle: bool,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Zero unless `saddle`.
    pub lambda0: f64,
    /// |a| t3 / (6π t1).
    pub kappa1: f64,
    /// |a| (2 t1² + t3/t1) / (4π).
    pub kappa2: f64,
    /// Present only for a saddle.
    pub nu_min: Option<f64>,
}

pub fn domain_thresholds(t1: f64, t3: f64, a: f64) -> Result<DomainThresholds> {
    if !(t1 > 0.0) || !t1.is_finite() {
        return Err(VortexError::DegenerateMap(format!("|T'(z*)| = {t1} must be positive")));
    }
    if !(t3 >= 0.0) || !t3.is_finite() {
        return Err(VortexError::Domain(format!("|T'''(z*)| = {t3} must be finite and >= 0")));
    }
    let t1c = t1 * t1 * t1;
    let saddle = t3 > 2.0 * t1c;
    let disc = t3 * t3 - 4.0 * t1c * t1c;
    let (lambda0, nu_min) = if saddle {
        let root = disc.sqrt();
        (
            a.abs() / (4.0 * PI * t1) * root,
            Some((5.0 / 3.0 * t3 + 2.0 * t1c) / root + 1.0),
        )
    } else {
        (0.0, None)
    };
    Ok(DomainThresholds {
        t1,
        t3,
        intensity: a,
        saddle,
        lambda_plus: (2.0 * t1 * t1 + t3 / t1) / (2.0 * PI),
        lambda_minus: (2.0 * t1 * t1 - t3 / t1) / (2.0 * PI),
        lambda0,
        kappa1: a.abs() * t3 / (6.0 * PI * t1),
        kappa2: a.abs() * (2.0 * t1 * t1 + t3 / t1) / (4.0 * PI),
        nu_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alpha_grid() -> Vec<f64> {
        (0..20).map(|k| 1.0 + 0.05 * k as f64).collect()
    }

    #[test]
    fn three_vortex_closed_form_and_pipeline_agree() {
        let g1 = g_three_vortex(1.0).unwrap();
        assert!(g1 > 4.0 && (g1 - 4.07).abs() < 0.01, "{g1}");
        let curve = nu_curve(3, &alpha_grid()).unwrap();
        for p in curve {
            let g = g_three_vortex(p.alpha).unwrap();
            assert!((p.nu_min - g).abs() < 1e-9 * g, "alpha {}: {} vs {g}", p.alpha, p.nu_min);
        }
    }

    #[test]
    fn seven_vortex_value() {
        let p = &nu_curve(7, &[1.0]).unwrap()[0];
        let expected = (12.0 + 5.0 * 7f64.sqrt()) / 9.0 + 1.0;
        assert!((p.nu_min - expected).abs() < 1e-9);
        assert!(p.nu_min < 4.0);
    }

    #[test]
    fn nine_vortex_curve_below_four() {
        for p in nu_curve(9, &alpha_grid()).unwrap() {
            assert!(p.nu_min < 4.0, "alpha {}: {}", p.alpha, p.nu_min);
        }
    }

    #[test]
    fn nu_exceeds_two_on_crystal_grids() {
        for n in [3, 7, 9] {
            for p in nu_curve(n, &alpha_grid()).unwrap() {
                assert!(p.nu_min > 2.0);
            }
        }
    }

    #[test]
    fn input_validation() {
        assert!(matches!(nu_threshold(1.0, 1.0, 1.0, 0.0), Err(VortexError::NoInstability(_))));
        assert!(matches!(nu_threshold(2.0, 1.0, 1.0, 0.5), Err(VortexError::Domain(_))));
        assert!(matches!(nu_threshold(1.0, 1.0, 0.1, 0.5), Err(VortexError::Domain(_))));
        assert!(xi1_threshold(0.0, 1.0).is_err());
        assert!(xi1_threshold(1.0, 1.0).is_err());
        assert!(matches!(xi1_threshold(0.5, 0.0), Err(VortexError::NoInstability(_))));
    }

    #[test]
    fn xi1_examples() {
        let l3 = 3.0 / (4.0 * PI);
        assert!((xi1_threshold(0.5, l3).unwrap() - 0.5 * 4.0 * PI / 3.0).abs() < 1e-14);
        let l7 = 9.0 / (4.0 * PI);
        assert!((xi1_threshold(0.25, l7).unwrap() - 0.75 * 4.0 * PI / 9.0).abs() < 1e-14);
        assert!(xi1_threshold(1.0 - 1e-12, l3).unwrap() < 1e-10);
    }

    #[test]
    fn beta0_solves_phi() {
        let (k1, k2, l0) = (0.5, 0.6, 0.3);
        let ratio = (k1 + k2) / l0;
        let nu_min = nu_threshold(1.2, k1, k2, l0).unwrap();
        let nu = nu_min + 0.5;
        let b = beta0(1.2, k1, k2, l0, nu).unwrap().unwrap();
        assert!((phi(b, ratio) - nu).abs() < 1e-10);
        assert!(b < critical_beta(1.2));
        assert_eq!(beta0(1.2, k1, k2, l0, nu_min).unwrap(), None);
        assert_eq!(beta0(1.2, k1, k2, l0, 100.0).unwrap(), Some(0.0));
        let rep = threshold_report(1.2, k1, k2, l0, Some(nu)).unwrap();
        assert_eq!(rep.beta0, Some(b));
        assert!((rep.xi1_factor - 1.0 / l0).abs() < 1e-15);
    }

    #[test]
    fn domain_examples() {
        let d = domain_thresholds(1.0, 6.0 * 0.9 - 2.0, 1.0).unwrap();
        assert!(d.saddle);
        assert!((d.lambda0 - (12.0f64 * 0.9 * 0.7).sqrt() / (4.0 * PI)).abs() < 1e-15);
        assert!((d.lambda0 - 0.21879).abs() < 5e-5);

        let edge = domain_thresholds(1.0, c0(), 1.0).unwrap();
        assert!((edge.nu_min.unwrap() - 4.0).abs() < 1e-12);

        let flat = domain_thresholds(1.5, 2.0 * 1.5f64.powi(3), 1.0).unwrap();
        assert!(!flat.saddle);
        assert_eq!(flat.lambda0, 0.0);
        assert_eq!(flat.nu_min, None);

        assert!(matches!(domain_thresholds(0.0, 1.0, 1.0), Err(VortexError::DegenerateMap(_))));
        assert!((c0() - 3.127).abs() < 1e-3);
    }

    #[test]
    fn domain_limit_and_delta_window() {
        let l = domain_thresholds(1.0, 6.0 * 0.999 - 2.0, 1.0).unwrap().lambda0;
        assert!((l - 3f64.sqrt() / (2.0 * PI)).abs() < 5e-3);
        let cut = (c0() + 2.0) / 6.0;
        for k in 1..200 {
            let delta = 2.0 / 3.0 + k as f64 * (1.0 / 3.0) / 200.0;
            let d = domain_thresholds(1.0, 6.0 * delta - 2.0, 1.0).unwrap();
            if (delta - cut).abs() < 1e-9 {
                continue;
            }
            assert_eq!(d.nu_min.unwrap() < 4.0, delta > cut, "delta {delta}");
        }
    }

    #[test]
    fn domain_nu_matches_generic_formula() {
        for &(t1, t3, a) in &[(1.0, 3.4, 1.0), (0.7, 2.0, -2.0), (1.3, 9.0, 0.5)] {
            let d = domain_thresholds(t1, t3, a).unwrap();
            let generic = nu_threshold(1.0, d.kappa1, d.kappa2, d.lambda0).unwrap();
            assert!((generic - d.nu_min.unwrap()).abs() < 1e-12 * generic);
            assert!(d.saddle && d.lambda_minus < 0.0);
        }
    }

    proptest! {
        #[test]
        fn phi_is_decreasing(ratio in 1.0f64..50.0, b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
            prop_assume!(b1 < b2 && ratio > 1.0);
            prop_assert!(phi(b1, ratio) > phi(b2, ratio));
        }

        #[test]
        fn nu_is_above_two(alpha in 1.0f64..1.999, k1 in 0.0f64..5.0, l0 in 0.01f64..3.0, extra in 0.0f64..5.0) {
            let nu = nu_threshold(alpha, k1, l0 + extra, l0).unwrap();
            prop_assert!(nu >= 2.0);
        }
    }
}
