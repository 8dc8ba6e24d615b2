use std::f64::consts::PI;

use num_complex::Complex64;
use vortexlab::bounds::{domain_thresholds, nu_curve, threshold_report};
use vortexlab::crystal::{build_crystal, stationarity_residual, CrystalSpec};
use vortexlab::domain::robin::{domain_lambda0, saddle_data};
use vortexlab::domain::HexDomain;
use vortexlab::linearization::linearize;
use vortexlab::ode::escape::{escape_experiment, EscapeOptions};
use vortexlab::ode::IntegratorSettings;
use vortexlab::AlphaModel;

#[test]
fn crystal_to_thresholds() {
    for &alpha in &[1.0, 1.5] {
        let model = AlphaModel::new(alpha).unwrap();
        let spec = CrystalSpec::new(7, model).unwrap();
        let z = build_crystal(&spec);
        assert!(stationarity_residual(&model, &z).unwrap() < 1e-12);
        let (_, rep) = linearize(&model, &z).unwrap();
        let t = threshold_report(alpha, rep.kappa1, rep.kappa2, rep.lambda0, Some(4.0)).unwrap();
        assert!(t.nu_min > 2.0 && t.nu_min.is_finite());
        let curve = nu_curve(7, &[alpha]).unwrap();
        assert!((curve[0].nu_min - t.nu_min).abs() < 1e-12);
    }
}

#[test]
fn escape_time_tracks_linear_rate() {
    let spec = CrystalSpec::new(3, AlphaModel::euler()).unwrap();
    let r = escape_experiment(&spec, 1e-3, 0.75, &IntegratorSettings::default(), &EscapeOptions::default()).unwrap();
    let l0 = 3.0 / (4.0 * PI);
    assert!((r.lambda0 - l0).abs() < 1e-10);
    // The ε/2 start and 2ε^β stop add ln 4/λ₀ to the linear prediction.
    let linear = r.prediction + 4f64.ln() / l0;
    assert!((r.tau_z - linear).abs() < 0.1 * linear, "{} vs {}", r.tau_z, linear);
}

#[test]
fn conformal_taylor_data_feeds_domain_thresholds() {
    for &delta in &[0.75, 0.9] {
        let d = HexDomain::new(delta).unwrap();
        let t = d.taylor();
        let th = domain_thresholds(t.t1.norm(), t.t3.norm(), 1.0).unwrap();
        assert!(th.saddle);
        assert!((th.lambda0 - domain_lambda0(delta, 1.0)).abs() < 1e-8);
        let s = saddle_data(&d, 1.0).unwrap();
        assert!((s.lambda0 - th.lambda0).abs() < 1e-6);
    }
    let stable = HexDomain::new(0.5).unwrap();
    let t = stable.taylor();
    assert!(!domain_thresholds(t.t1.norm(), t.t3.norm(), 1.0).unwrap().saddle);
}

#[test]
fn domain_map_and_inverse_agree_near_corners() {
    let d = HexDomain::new(0.9).unwrap();
    for k in 0..6 {
        let w = Complex64::from_polar(0.95, PI * k as f64 / 3.0 + 0.01);
        let z = d.sc_map(w).unwrap();
        let back = d.inverse_map(z).unwrap();
        assert!((back - w).norm() < 1e-9, "{w} -> {z} -> {back}");
    }
}
