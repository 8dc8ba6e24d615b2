//! Dormand–Prince 5(4) with PI step-size control and 4th-order dense output,
//! following the classical DOPRI5 formulation.

use super::{Control, DenseSegment, IntegrationStats, IntegratorSettings, Outcome, StepView, VectorField};
use crate::{Result, VortexError};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step-size controller.
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn rms_norm(v: &[f64], y0: &[f64], y1: &[f64], s: &IntegratorSettings) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = s.abs_tol + s.rel_tol * a.abs().max(b.abs());
            (e / sk) * (e / sk)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(
    field: &dyn VectorField,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    s: &IntegratorSettings,
    stats: &mut IntegrationStats,
) -> Result<f64> {
    let dnf = rms_norm(f0, y0, y0, s);
    let dny = rms_norm(y0, y0, y0, s);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * dny / dnf };
    h = h.min(s.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    field.eval(t0 + dir * h, &y1, &mut f1)?;
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let der2 = rms_norm(&diff, y0, y0, s) / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(s.max_step))
}

/// Integrate `y' = f(t, y)` from `t0` toward `t_end` (either direction),
/// handing every accepted step to `observer`.
pub fn integrate_with(
    field: &dyn VectorField,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    settings: &IntegratorSettings,
    observer: &mut dyn FnMut(&StepView<'_>) -> Result<Control>,
) -> Result<Outcome> {
    settings.validate()?;
    let n = field.dim();
    if y0.len() != n {
        return Err(VortexError::Domain(format!(
            "state has length {}, field expects {n}",
            y0.len()
        )));
    }
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(VortexError::Domain("integration bounds must be finite".into()));
    }
    let mut stats = IntegrationStats::default();
    if t_end == t0 {
        return Ok(Outcome { t: t0, y: y0.to_vec(), stopped: false, stats });
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ys = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];

    field.eval(t, &y, &mut k[0])?;
    stats.evaluations += 1;
    let mut h = match settings.initial_step {
        Some(h) => h.min(settings.max_step),
        None => initial_step(field, t, &y, &k[0], dir, settings, &mut stats)?,
    };
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= settings.max_steps {
            return Err(VortexError::StepBudget { max_steps: settings.max_steps, t });
        }
        let remaining = (t_end - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 1e-14 * t.abs().max(1.0) && !last {
            return Err(VortexError::StepUnderflow { t, h });
        }
        let hs = h * dir;

        for i in 0..n {
            ys[i] = y[i] + hs * A21 * k[0][i];
        }
        field.eval(t + C2 * hs, &ys, &mut k[1])?;
        for i in 0..n {
            ys[i] = y[i] + hs * (A31 * k[0][i] + A32 * k[1][i]);
        }
        field.eval(t + C3 * hs, &ys, &mut k[2])?;
        for i in 0..n {
            ys[i] = y[i] + hs * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        field.eval(t + C4 * hs, &ys, &mut k[3])?;
        for i in 0..n {
            ys[i] = y[i] + hs * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        field.eval(t + C5 * hs, &ys, &mut k[4])?;
        for i in 0..n {
            ys[i] = y[i]
                + hs * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        let t_new = if last { t_end } else { t + hs };
        field.eval(t_new, &ys, &mut k[5])?;
        for i in 0..n {
            y_new[i] = y[i]
                + hs * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        field.eval(t_new, &y_new, &mut k[6])?;
        stats.evaluations += 6;

        for i in 0..n {
            err_vec[i] = hs
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        }
        let err = rms_norm(&err_vec, &y, &y_new, settings);
        if !err.is_finite() {
            return Err(VortexError::StepUnderflow { t, h });
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = err.max(1e-4);
            stats.accepted += 1;

            let mut coeffs = vec![0.0; 5 * n];
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = hs * k[0][i] - dy;
                coeffs[i] = y[i];
                coeffs[n + i] = dy;
                coeffs[2 * n + i] = bspl;
                coeffs[3 * n + i] = dy - hs * k[6][i] - bspl;
                coeffs[4 * n + i] = hs
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let segment = DenseSegment { t0: t, h: t_new - t, coeffs };
            let view = StepView { t0: t, t1: t_new, y0: &y, y1: &y_new, segment: &segment };
            match observer(&view)? {
                Control::Continue => {}
                Control::StopAt(te) => {
                    let ye = segment.eval(te);
                    return Ok(Outcome { t: te, y: ye, stopped: true, stats });
                }
            }

            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            t = t_new;
            if last {
                return Ok(Outcome { t, y, stopped: false, stats });
            }
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            h = h_new.min(settings.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}
