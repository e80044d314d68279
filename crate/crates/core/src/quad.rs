//! Gauss–Legendre rules and an adaptive bisection integrator.
//!
//! The adaptive routine is generic over [`QuadValue`] so the same code
//! integrates real and complex integrands (the latter is needed for the
//! Lévy exponent on a Laplace-inversion contour).

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types the integrators can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre recurrence, seeded with the
    /// Chebyshev-like asymptotic guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Applies the rule on [a, b].
    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Nodes and weights mapped onto [a, b] split into `panels` equal pieces.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let half = 0.5 * width;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * x);
                ws.push(w * half);
            }
        }
        (xs, ws)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 10-point rule used by the adaptive integrator.
pub fn rule10() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(10))
}

/// Shared 20-point rule for fixed composite quadrature.
pub fn rule20() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(20))
}

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-300, max_depth: 20 }
    }
}

/// Adaptive Gauss–Legendre by recursive bisection.
///
/// Each interval is accepted when the 10-point estimate and the sum of
/// the two half-interval estimates agree within the local share of the
/// tolerance. Fails with a numerical error if `max_depth` is exhausted.
pub fn adaptive<T: QuadValue>(
    op: &'static str,
    a: f64,
    b: f64,
    tol: Tolerance,
    mut f: impl FnMut(f64) -> T,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let rule = rule10();
    let whole = rule.integrate(a, b, &mut f);
    // Global scale for the relative test; refined as pieces are accepted.
    let scale = whole.magnitude();
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = T::zero();
    let width = b - a;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let refined = left + right;
        let err = (refined - est).magnitude();
        let share = (hi - lo) / width;
        let allowed = (tol.rel * scale).max(tol.abs) * share.max(1e-3);
        if err <= allowed || (err <= tol.abs) {
            total = total + refined;
        } else if depth >= tol.max_depth {
            return Err(Error::numerical(
                op,
                format!(
                    "adaptive quadrature did not converge on [{lo:.6e}, {hi:.6e}] after {depth} levels (error estimate {err:.3e})"
                ),
            ));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussRule::new(10);
        // degree 19 is the highest exact degree
        let v = rule.integrate(-1.0, 1.0, |x: f64| x.powi(18));
        assert_relative_eq!(v, 2.0 / 19.0, max_relative = 1e-14);
        let s: f64 = rule.weights.iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn odd_rule_has_center_node() {
        let rule = GaussRule::new(5);
        assert!(rule.nodes[2].abs() < 1e-15);
        assert_relative_eq!(rule.weights[2], 128.0 / 225.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 √x dx = 2/3, derivative singular at 0
        let v = adaptive("test", 0.0, 1.0, Tolerance::default(), |x: f64| x.sqrt()).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_complex() {
        // ∫_0^1 e^{i x} dx = (e^{i} - 1)/i
        let v = adaptive("test", 0.0, 1.0, Tolerance::default(), |x: f64| Complex64::new(0.0, x).exp()).unwrap();
        let exact = (Complex64::new(0.0, 1.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn adaptive_reports_failure() {
        let tol = Tolerance { rel: 1e-14, abs: 1e-300, max_depth: 2 };
        let r = adaptive("test", 0.0, 1.0, tol, |x: f64| (1.0 / (x + 1e-9)).sin());
        assert!(matches!(r, Err(Error::Numerical { .. })));
    }
}
