//! Gauss–Legendre rules and an adaptive composite integrator for complex
//! integrands on real intervals.

use num_complex::Complex64;

use crate::{Result, VortexError};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// One panel on [a, b].
    pub fn panel(&self, a: f64, b: f64, f: &mut dyn FnMut(f64) -> Complex64) -> Complex64 {
        self.panel_with_abs(a, b, f).0
    }

    /// Panel value together with the same rule applied to |f|, which sets
    /// the rounding floor of the panel.
    fn panel_with_abs(&self, a: f64, b: f64, f: &mut dyn FnMut(f64) -> Complex64) -> (Complex64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut v, mut m) = (Complex64::new(0.0, 0.0), 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let fx = f(mid + half * x);
            v += fx * w;
            m += fx.norm() * w;
        }
        (v * half, m * half.abs())
    }

    /// Adaptive bisection: accept a panel when it agrees with the sum of its
    /// halves to `tol · |first estimate|`, or to rounding level.
    pub fn adaptive(
        &self,
        a: f64,
        b: f64,
        tol: f64,
        max_depth: usize,
        f: &mut dyn FnMut(f64) -> Complex64,
    ) -> Result<Complex64> {
        let whole = self.panel(a, b, f);
        let mut panels = 0usize;
        let scale = whole.norm().max(1e-300);
        let r = self.refine(a, b, whole, tol * scale, 0, max_depth, &mut panels, f)?;
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(VortexError::Quadrature(format!(
                "non-finite integral on [{a}, {b}] after {panels} panels"
            )));
        }
        Ok(r)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: usize,
        max_depth: usize,
        panels: &mut usize,
        f: &mut dyn FnMut(f64) -> Complex64,
    ) -> Result<Complex64> {
        let m = 0.5 * (a + b);
        let (left, left_abs) = self.panel_with_abs(a, m, f);
        let (right, right_abs) = self.panel_with_abs(m, b, f);
        *panels += 2;
        let both = left + right;
        let floor = 64.0 * f64::EPSILON * (left_abs + right_abs);
        if (both - whole).norm() <= tol.max(floor) {
            return Ok(both);
        }
        if depth >= max_depth {
            return Err(VortexError::Quadrature(format!(
                "no convergence on [{a:e}, {b:e}] at depth {depth} ({panels} panels, last change {:e})",
                (both - whole).norm()
            )));
        }
        Ok(self.refine(a, m, left, tol, depth + 1, max_depth, panels, f)?
            + self.refine(m, b, right, tol, depth + 1, max_depth, panels, f)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules() {
        let g2 = GaussLegendre::new(2);
        assert!((g2.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g2.weights[0] - 1.0).abs() < 1e-15);
        let g3 = GaussLegendre::new(3);
        assert!((g3.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((g3.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        let g1 = GaussLegendre::new(1);
        assert_eq!(g1.nodes, vec![0.0]);
        assert!((g1.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(16);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..32 {
            let v = g.panel(0.0, 1.0, &mut |x| Complex64::new(x.powi(k), 0.0));
            assert!((v.re - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let g = GaussLegendre::new(16);
        // ∫₀¹ x^{−1/2} dx = 2.
        let v = g.adaptive(0.0, 1.0, 1e-9, 60, &mut |x| Complex64::new(x.powf(-0.5), 0.0)).unwrap();
        assert!((v.re - 2.0).abs() < 1e-8, "{}", v.re);
        let bad = g.adaptive(0.0, 1.0, 1e-13, 2, &mut |x| Complex64::new(x.powf(-0.9), 0.0));
        assert!(matches!(bad, Err(VortexError::Quadrature(_))));
    }
}
