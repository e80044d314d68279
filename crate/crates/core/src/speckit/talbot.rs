//! Fixed-Talbot numerical inversion of Laplace transforms.
//!
//! The Bromwich line is deformed onto s(θ) = rθ(cot θ + i), θ ∈ (−π, π),
//! with r = 2M/(5t). The contour wraps the negative real axis, so
//! transforms with a branch cut there (any s^β) are admissible.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of contour nodes.
pub const DEFAULT_NODES: usize = 32;

/// Inverts `transform` at time `t > 0` using `nodes` contour points.
pub fn invert(t: f64, nodes: usize, mut transform: impl FnMut(Complex64) -> Result<Complex64>) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("talbot", format!("t = {t} must be positive")));
    }
    if !(8..=96).contains(&nodes) {
        return Err(Error::domain("talbot", format!("node count {nodes} outside [8, 96]")));
    }
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let f0 = transform(Complex64::new(r, 0.0))?;
    let mut acc = 0.5 * f0.re * (r * t).exp();
    for k in 1..nodes {
        let theta = k as f64 * std::f64::consts::PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        if s.im <= 0.0 && s.re <= 0.0 {
            return Err(Error::numerical("talbot", format!("contour node {k} reached the branch cut at {s}")));
        }
        let sigma = theta + (theta * cot - 1.0) * cot;
        let fs = transform(s)?;
        let term = (s * t).exp() * fs * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    let v = r / m * acc;
    if !v.is_finite() {
        return Err(Error::numerical("talbot", format!("non-finite inversion at t = {t}")));
    }
    Ok(v)
}
