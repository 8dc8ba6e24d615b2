//! Hexagonal domains Ω_δ given by the Schwarz–Christoffel map S: D → Ω_δ
//! with S(0) = 0, S'(0) = 1 and
//!
//! ```text
//! S'(w) = (1 − w²)^{3δ−1} (1 − w⁶)^{−δ}
//!       = Π_k (1 − w/p_k)^{−β_k},
//! ```
//!
//! prevertices p_k = e^{ikπ/3}, β = 1 − 2δ at ±1 and β = δ at the other
//! four. Each factor uses the principal logarithm of (1 − w/p_k), whose
//! cut runs radially outward from p_k, so S' is continuous on the closed
//! disk minus the prevertices. Interior angles are 2δπ at S(±1) and
//! (1 − δ)π at the other vertices.

pub mod quadrature;
pub mod robin;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::export::{write_csv_header, write_csv_row};
use crate::{Result, VortexError};
use quadrature::GaussLegendre;

const QUAD_TOL: f64 = 1e-14;
const QUAD_DEPTH: usize = 48;
const BOUNDARY_POINTS: usize = 720;
const SEED_RADII: usize = 20;
const SEED_ANGLES: usize = 72;

/// Derivatives of S and of T = S⁻¹ at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorData {
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub t3: Complex64,
}

impl TaylorData {
    /// T', T'', T''' at S(w) from S', S'', S''' at w.
    pub fn from_forward(s1: Complex64, s2: Complex64, s3: Complex64) -> Result<Self> {
        if s1.norm() == 0.0 {
            return Err(VortexError::DegenerateMap("S'(0) = 0".into()));
        }
        let t1 = s1.inv();
        let t2 = -s2 / s1.powi(3);
        let t3 = -s3 / s1.powi(4) + 3.0 * s2 * s2 / s1.powi(5);
        Ok(TaylorData { s1, s2, s3, t1, t2, t3 })
    }
}

#[derive(Debug, Clone)]
pub struct HexDomain {
    delta: f64,
    prevertices: [Complex64; 6],
    exponents: [f64; 6],
    rule: GaussLegendre,
    /// Grading exponent for integrals that end near a prevertex.
    grading: i32,
    taylor: TaylorData,
    boundary: Vec<Complex64>,
    seeds: Vec<(Complex64, Complex64)>,
}

impl HexDomain {
    /// Ω_δ with order-16 Gauss–Legendre panels.
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_order(delta, 16)
    }

    pub fn with_order(delta: f64, order: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(VortexError::Domain(format!("delta must lie in (0,1), got {delta}")));
        }
        if order < 2 {
            return Err(VortexError::Domain(format!("quadrature order {order} is too low")));
        }
        let prevertices: [Complex64; 6] = std::array::from_fn(|k| Complex64::from_polar(1.0, k as f64 * PI / 3.0));
        let exponents: [f64; 6] = std::array::from_fn(|k| if k % 3 == 0 { 1.0 - 2.0 * delta } else { delta });
        let beta_max = exponents.iter().cloned().fold(0.0, f64::max);
        let grading = (2.0 / (1.0 - beta_max)).ceil() as i32;
        let mut dom = HexDomain {
            delta,
            prevertices,
            exponents,
            rule: GaussLegendre::new(order),
            grading,
            taylor: TaylorData::from_forward(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?,
            boundary: Vec::new(),
            seeds: Vec::new(),
        };
        let zero = Complex64::new(0.0, 0.0);
        let s1 = dom.sc_derivative(zero)?;
        let l = dom.log_derivative(zero);
        let lp = dom.log_derivative_prime(zero);
        dom.taylor = TaylorData::from_forward(s1, s1 * l, s1 * (lp + l * l))?;
        dom.boundary = (0..BOUNDARY_POINTS)
            .map(|k| dom.sc_map(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / BOUNDARY_POINTS as f64)))
            .collect::<Result<_>>()?;
        dom.seeds = dom.build_seeds()?;
        Ok(dom)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order()
    }

    pub fn prevertices(&self) -> &[Complex64; 6] {
        &self.prevertices
    }

    /// β_k, the exponent of (1 − w/p_k)^{−β_k}.
    pub fn exponents(&self) -> &[f64; 6] {
        &self.exponents
    }

    pub fn taylor(&self) -> &TaylorData {
        &self.taylor
    }

    /// Interior angle at S(p_k), in units of π.
    pub fn interior_angle(&self, k: usize) -> f64 {
        1.0 - self.exponents[k]
    }

    /// Images of e^{2πik/720}, k = 0..720.
    pub fn boundary(&self) -> &[Complex64] {
        &self.boundary
    }

    pub fn vertices(&self) -> Result<Vec<Complex64>> {
        self.prevertices.iter().map(|&p| self.sc_map(p)).collect()
    }

    fn check_point(&self, w: Complex64) -> Result<()> {
        if !(w.re.is_finite() && w.im.is_finite()) || w.norm() > 1.0 + 1e-12 {
            return Err(VortexError::Domain(format!("w = {w} lies outside the closed unit disk")));
        }
        Ok(())
    }

    /// S'(w).
    pub fn sc_derivative(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.log_sc_derivative(w)?.exp())
    }

    /// log S'(w), normalised so that log S'(0) = 0. Each factor uses
    /// `ln_1p`, which keeps the real part accurate for small |w|.
    pub fn log_sc_derivative(&self, w: Complex64) -> Result<Complex64> {
        self.check_point(w)?;
        let mut log = Complex64::new(0.0, 0.0);
        for (&p, &b) in self.prevertices.iter().zip(&self.exponents) {
            let u = w / p;
            let f = Complex64::new(1.0, 0.0) - u;
            if f.norm() == 0.0 {
                if b == 0.0 {
                    continue;
                }
                return Err(VortexError::Singular { x: w.re, y: w.im });
            }
            let re = 0.5 * (u.norm_sqr() - 2.0 * u.re).ln_1p();
            log -= b * Complex64::new(re, f.arg());
        }
        Ok(log)
    }

    /// S''/S' = Σ β_k / (p_k − w).
    pub fn log_derivative(&self, w: Complex64) -> Complex64 {
        self.prevertices
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &b)| b / (p - w))
            .sum()
    }

    /// d/dw of [`Self::log_derivative`].
    pub fn log_derivative_prime(&self, w: Complex64) -> Complex64 {
        self.prevertices
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &b)| b / ((p - w) * (p - w)))
            .sum()
    }

    /// S' at b − d·r, with every factor formed as (p_k − b + d·r)/p_k so
    /// that it keeps full relative precision as r → 0 when b is a
    /// prevertex.
    fn sc_derivative_near(&self, b: Complex64, d: Complex64, r: f64, ln_scale: f64) -> Result<Complex64> {
        let mut log = Complex64::new(ln_scale, 0.0);
        for (&p, &beta) in self.prevertices.iter().zip(&self.exponents) {
            let f = (p - b + d * r) / p;
            if f.norm() == 0.0 {
                if beta == 0.0 {
                    continue;
                }
                let w = b - d * r;
                return Err(VortexError::Singular { x: w.re, y: w.im });
            }
            log -= beta * f.ln();
        }
        Ok(log.exp())
    }

    /// ∫ S' along the straight segment from `a` to `b`. Segments ending
    /// near the circle use t = 1 − (1 − s)^m to absorb the endpoint
    /// singularity of a prevertex.
    pub fn segment_integral(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        let d = b - a;
        if d.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.check_point(a)?;
        self.check_point(b)?;
        let mut failed = None;
        let graded = b.norm() > 0.9;
        let m = self.grading;
        let mut f = |s: f64| -> Complex64 {
            let u = 1.0 - s;
            let (r, ln_jac) = if graded {
                (u.powi(m), (m as f64).ln() + (m - 1) as f64 * u.ln())
            } else {
                (u, 0.0)
            };
            if r == 0.0 {
                // The graded integrand vanishes at the endpoint.
                return Complex64::new(0.0, 0.0);
            }
            match self.sc_derivative_near(b, d, r, ln_jac) {
                Ok(v) => v,
                Err(e) => {
                    failed = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let v = self.rule.adaptive(0.0, 1.0, QUAD_TOL, QUAD_DEPTH, &mut f)?;
        if let Some(e) = failed {
            return Err(e);
        }
        Ok(v * d)
    }

    /// S(w) = ∫₀^w S'.
    pub fn sc_map(&self, w: Complex64) -> Result<Complex64> {
        self.segment_integral(Complex64::new(0.0, 0.0), w)
    }

    fn build_seeds(&self) -> Result<Vec<(Complex64, Complex64)>> {
        let zero = Complex64::new(0.0, 0.0);
        let mut seeds = vec![(zero, zero)];
        for k in 0..SEED_ANGLES {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / SEED_ANGLES as f64);
            let mut prev = (zero, zero);
            for j in 1..=SEED_RADII {
                let w = dir * (0.98 * j as f64 / SEED_RADII as f64);
                let z = prev.1 + self.segment_integral(prev.0, w)?;
                seeds.push((w, z));
                prev = (w, z);
            }
        }
        Ok(seeds)
    }

    /// T(z) = S⁻¹(z) by damped Newton iteration from the nearest cached
    /// seed, with residual |S(w) − z| < 1e−12 on success.
    pub fn inverse_map(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(VortexError::Domain(format!("z = {z} is not finite")));
        }
        let &(mut w, mut s) = self
            .seeds
            .iter()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .expect("seed grid is nonempty");
        let fail = |s: Complex64| VortexError::Inversion { re: z.re, im: z.im, residual: (s - z).norm() };
        for _ in 0..50 {
            let r = s - z;
            let mut step = -r / self.sc_derivative(w).map_err(|_| fail(s))?;
            let mut next = w + step;
            let mut halvings = 0;
            while next.norm() >= 1.0 {
                step *= 0.5;
                next = w + step;
                halvings += 1;
                if halvings > 60 {
                    return Err(fail(s));
                }
            }
            let s_next = s + self.segment_integral(w, next).map_err(|_| fail(s))?;
            let converged = step.norm() <= 1e-15 * next.norm().max(1e-300) || (s_next - z).norm() == 0.0;
            if (s_next - z).norm() > r.norm() && r.norm() < 1e-12 {
                // Rounding floor reached.
                return Ok(w);
            }
            w = next;
            s = s_next;
            if converged {
                break;
            }
        }
        if (s - z).norm() < 1e-12 {
            Ok(w)
        } else {
            Err(fail(s))
        }
    }

    /// CSV `k, u, v, x, y` of the boundary polyline.
    pub fn write_boundary_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        write_csv_header(w, &["k", "u", "v", "x", "y"])?;
        let n = self.boundary.len();
        for (k, z) in self.boundary.iter().enumerate() {
            let p = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            write_csv_row(w, &[k as f64, p.re, p.im, z.re, z.im])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(HexDomain::new(0.0).is_err());
        assert!(HexDomain::new(1.0).is_err());
        assert!(HexDomain::with_order(0.7, 1).is_err());
    }

    #[test]
    fn derivative_matches_compact_form() {
        let d = HexDomain::new(0.75).unwrap();
        for &w in &[c(0.3, 0.2), c(-0.5, 0.4), c(0.1, -0.8), c(0.0, 0.0)] {
            let compact = (1.0 - w * w).powf(3.0 * 0.75 - 1.0) * (1.0 - w.powi(6)).powf(-0.75);
            assert!((d.sc_derivative(w).unwrap() - compact).norm() < 1e-13, "{w}");
        }
        assert!((d.sc_derivative(c(0.0, 0.0)).unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(d.sc_derivative(d.prevertices()[1]), Err(VortexError::Singular { .. })));
        assert!(d.sc_derivative(c(1.1, 0.0)).is_err());
    }

    #[test]
    fn derivative_symmetries() {
        let d = HexDomain::new(0.9).unwrap();
        for &w in &[c(0.3, 0.2), c(-0.5, 0.4), c(0.6, -0.7)] {
            let s = d.sc_derivative(w).unwrap();
            assert!((d.sc_derivative(w.conj()).unwrap() - s.conj()).norm() < 1e-14);
            assert!((d.sc_derivative(-w).unwrap() - s).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_data() {
        for &delta in &[0.5, 2.0 / 3.0, 0.75, 0.9] {
            let d = HexDomain::new(delta).unwrap();
            let t = d.taylor();
            assert!((t.s1.norm() - 1.0).abs() < 1e-8);
            assert!(t.s2.norm() < 1e-8);
            assert!((t.s3.norm() - (6.0 * delta - 2.0)).abs() < 1e-8);
            assert!((t.t3.norm() - t.s3.norm()).abs() < 1e-12);
            // Finite-difference oracle at radius 1e−2 on S'(w) = 1 + S'''(0)w²/2 + O(w⁴).
            let h = 1e-2;
            let sp = |w: Complex64| d.sc_derivative(w).unwrap();
            let second = (sp(c(h, 0.0)) - 2.0 * sp(c(0.0, 0.0)) + sp(c(-h, 0.0))) / (h * h);
            assert!((second - t.s3).norm() < 1e-3, "delta {delta}");
            let bounded = (sp(c(h, 0.0)) - (1.0 + 0.5 * t.s3 * h * h)) / h.powi(4);
            assert!(bounded.norm() < 100.0);
        }
    }

    #[test]
    fn map_basics_and_symmetry() {
        let d = HexDomain::new(0.75).unwrap();
        assert_eq!(d.sc_map(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        for &w in &[c(0.3, 0.2), c(-0.5, 0.4), c(0.6, -0.7), c(0.05, 0.9)] {
            let s = d.sc_map(w).unwrap();
            assert!((d.sc_map(w.conj()).unwrap() - s.conj()).norm() < 1e-10);
            assert!((d.sc_map(-w).unwrap() + s).norm() < 1e-10);
        }
    }

    #[test]
    fn path_independence_and_cauchy_riemann() {
        let d = HexDomain::new(0.9).unwrap();
        for k in 0..12 {
            let w = Complex64::from_polar(0.9 * (k as f64 + 1.0) / 12.0, 0.7 * k as f64);
            let straight = d.sc_map(w).unwrap();
            let corner = c(w.re, 0.0);
            let two_leg = d.sc_map(corner).unwrap() + d.segment_integral(corner, w).unwrap();
            assert!((straight - two_leg).norm() < 1e-10, "{w}");

            let h = 1e-5;
            let sx = (d.sc_map(w + h).unwrap() - d.sc_map(w - h).unwrap()) / (2.0 * h);
            let sy = (d.sc_map(w + c(0.0, h)).unwrap() - d.sc_map(w - c(0.0, h)).unwrap()) / (2.0 * h);
            let dbar = 0.5 * (sx + c(0.0, 1.0) * sy);
            assert!(dbar.norm() < 1e-9, "{w}: {}", dbar.norm());
        }
    }

    #[test]
    fn inverse_round_trip() {
        let d = HexDomain::new(0.75).unwrap();
        assert_eq!(d.inverse_map(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..100 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let r = 0.95 * ((state >> 11) as f64 / (1u64 << 53) as f64).sqrt();
            let th = (state % 10_000) as f64 * 2.0 * PI / 10_000.0;
            let w = Complex64::from_polar(r, th);
            let z = d.sc_map(w).unwrap();
            let back = d.inverse_map(z).unwrap();
            assert!((back - w).norm() < 1e-10, "{w} -> {back}");
            assert!((d.sc_map(back).unwrap() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_second_derivative_vanishes() {
        let d = HexDomain::new(0.9).unwrap();
        let h = 1e-3;
        let t = |x: f64| d.inverse_map(c(x, 0.0)).unwrap();
        let t2 = (t(h) - 2.0 * t(0.0) + t(-h)) / (h * h);
        assert!(t2.norm() < 1e-6, "{}", t2.norm());
    }

    #[test]
    fn inverse_fails_outside() {
        let d = HexDomain::new(0.75).unwrap();
        assert!(matches!(d.inverse_map(c(50.0, 50.0)), Err(VortexError::Inversion { .. })));
    }

    #[test]
    fn boundary_is_a_closed_symmetric_polygon() {
        for &delta in &[0.4, 0.75, 0.9] {
            let d = HexDomain::new(delta).unwrap();
            let b = d.boundary();
            let n = b.len();
            for k in 0..n {
                // Reflection in both axes: w → conj w and w → −w.
                assert!((b[(n - k) % n] - b[k].conj()).norm() < 1e-9);
                assert!((b[(k + n / 2) % n] + b[k]).norm() < 1e-9);
            }
            let v = d.vertices().unwrap();
            for k in 0..6 {
                let i = k * n / 6;
                assert!((b[i] - v[k]).norm() < 1e-9);
                // Edges are straight: midpoint of the arc lies on the chord.
                let (p, q) = (v[k], v[(k + 1) % 6]);
                let mid = b[i + n / 12];
                let cross = ((mid - p) * (q - p).conj()).im / (q - p).norm();
                assert!(cross.abs() < 1e-8, "delta {delta} edge {k}: {cross:e}");
                // Interior angle at vertex k.
                let (prev, next) = (v[(k + 5) % 6], v[(k + 1) % 6]);
                let turn = ((prev - v[k]) / (next - v[k])).arg().rem_euclid(2.0 * PI);
                assert!((turn / PI - d.interior_angle(k)).abs() < 1e-8, "delta {delta} vertex {k}");
            }
        }
    }
}
