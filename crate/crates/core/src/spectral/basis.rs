//! Dirichlet eigenpairs of the (restricted fractional) Laplacian on an interval.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::speckit::gamma::gamma;

/// Bounded open interval (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDomain {
    a: f64,
    b: f64,
}

impl IntervalDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain("IntervalDomain", format!("need finite a < b, got ({a}, {b})")));
        }
        Ok(IntervalDomain { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn dimension(&self) -> usize {
        1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// x ∈ (a, b).
    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// x ∈ [a, b].
    pub fn closure_contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

/// How an [`EigenBasis`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Closed-form sine modes of the classical Laplacian (α = 2).
    ExactAlpha2,
    /// Eigenvectors of the discretized restricted fractional Laplacian.
    MatrixDiscretized,
}

/// Eigenpairs (λ_n, φ_n), n = 1..N, sampled on the uniform interior grid
/// x_i = a + i·h, i = 1..M, h = L/(M+1), with trapezoid weights h (the
/// endpoint values vanish).
#[derive(Debug, Clone)]
pub struct EigenBasis {
    alpha: f64,
    domain: IntervalDomain,
    kind: BasisKind,
    lambdas: Vec<f64>,
    grid: Vec<f64>,
    step: f64,
    phi: Vec<Vec<f64>>,
    sup: Vec<f64>,
}

/// Grid size used by [`eigen_exact_laplace`].
pub const EXACT_GRID: usize = 2047;

/// Classical Dirichlet eigenpairs λ_n = (nπ/L)², φ_n = √(2/L) sin(nπ(x−a)/L).
pub fn eigen_exact_laplace(domain: IntervalDomain, n: usize) -> Result<EigenBasis> {
    eigen_exact_laplace_on_grid(domain, n, EXACT_GRID.max(8 * n))
}

pub fn eigen_exact_laplace_on_grid(domain: IntervalDomain, n: usize, m: usize) -> Result<EigenBasis> {
    if n == 0 {
        return Err(Error::domain("eigen_exact_laplace", "N must be at least 1"));
    }
    if m < n {
        return Err(Error::domain("eigen_exact_laplace", format!("grid size {m} below N = {n}")));
    }
    let l = domain.length();
    let step = l / (m + 1) as f64;
    let grid: Vec<f64> = (1..=m).map(|i| domain.a + i as f64 * step).collect();
    let norm = (2.0 / l).sqrt();
    let lambdas = (1..=n).map(|k| (k as f64 * PI / l).powi(2)).collect();
    let phi =
        (1..=n).map(|k| grid.iter().map(|&x| norm * (k as f64 * PI * (x - domain.a) / l).sin()).collect()).collect();
    Ok(EigenBasis { alpha: 2.0, domain, kind: BasisKind::ExactAlpha2, lambdas, grid, step, phi, sup: vec![norm; n] })
}

/// Normalizing constant of the 1-D fractional Laplacian with symbol |ξ|^α.
pub fn fractional_constant(alpha: f64) -> Result<f64> {
    Ok(alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (1.0 + alpha))? / (PI.sqrt() * gamma(1.0 - 0.5 * alpha)?))
}

/// Far-field weights w_k, k = 1..m, of the piecewise-linear singular-integral
/// quadrature, scaled by h^α (i.e. for unit spacing).
fn far_weights(alpha: f64, m: usize) -> Vec<f64> {
    // a_k = ∫_k^{k+1} s^{-1-α}(k+1−s) ds, b_k = ∫_k^{k+1} s^{-1-α}(s−k) ds
    let seg = |k: f64| -> (f64, f64) {
        let r = (1.0 / k).ln_1p();
        let i0 = -k.powf(-alpha) * (-alpha * r).exp_m1() / alpha;
        let i1 = if (alpha - 1.0).abs() < 1e-12 {
            r
        } else {
            k.powf(1.0 - alpha) * ((1.0 - alpha) * r).exp_m1() / (1.0 - alpha)
        };
        ((k + 1.0) * i0 - i1, i1 - k * i0)
    };
    let mut w = vec![0.0; m + 1];
    let mut prev_b = 0.0;
    for (k, wk) in w.iter_mut().enumerate().skip(1) {
        let (a, b) = seg(k as f64);
        *wk = a + prev_b;
        prev_b = b;
    }
    w
}

/// Assembles the M×M matrix of the restricted fractional Laplacian
/// (−Δ)^{α/2} on the interior grid with zero exterior values.
///
/// Near field |y| < h: second difference times h^{2−α}/(2−α). Far field:
/// piecewise-linear interpolation of 2u(x) − u(x+y) − u(x−y) against
/// |y|^{-1-α}; nodes outside D contribute through the exact tail
/// ∫_h^∞ y^{-1-α} dy = h^{-α}/α.
pub fn fractional_matrix(domain: IntervalDomain, alpha: f64, m: usize) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain("eigen_fractional", format!("alpha = {alpha} must lie in (0, 2)")));
    }
    let h = domain.length() / (m + 1) as f64;
    let c = fractional_constant(alpha)?;
    let ha = h.powf(-alpha);
    let w = far_weights(alpha, m);
    let near = ha / (2.0 - alpha);
    let diag = c * (2.0 * near + 2.0 * ha / alpha);
    let mut off = vec![0.0; m];
    for (k, o) in off.iter_mut().enumerate().skip(1) {
        *o = -c * ha * w[k];
    }
    if m > 1 {
        off[1] -= c * near;
    }
    Ok(DMatrix::from_fn(m, m, |i, j| if i == j { diag } else { off[i.abs_diff(j)] }))
}

/// Eigenpairs of the discretized restricted fractional Laplacian.
pub fn eigen_fractional(domain: IntervalDomain, alpha: f64, m: usize, n: usize) -> Result<EigenBasis> {
    if m < 64 {
        return Err(Error::domain("eigen_fractional", format!("grid size {m} below 64")));
    }
    if n == 0 || n > m {
        return Err(Error::domain("eigen_fractional", format!("N = {n} must lie in [1, {m}]")));
    }
    let mat = fractional_matrix(domain, alpha, m)?;
    let sym = (&mat + mat.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, 1e-14, 0).ok_or_else(|| {
        Error::numerical("eigen_fractional", format!("symmetric eigen-solve failed (M = {m}, alpha = {alpha})"))
    })?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let h = domain.length() / (m + 1) as f64;
    let grid: Vec<f64> = (1..=m).map(|i| domain.a + i as f64 * h).collect();
    let scale = 1.0 / h.sqrt();
    let mut lambdas = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    for (k, &idx) in order.iter().take(n).enumerate() {
        let lam = eig.eigenvalues[idx];
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::numerical("eigen_fractional", format!("eigenvalue {lam} is not positive")));
        }
        let col = eig.eigenvectors.column(idx);
        // orient like sin(kπ(x−a)/L)
        let freq = (k + 1) as f64 * PI / domain.length();
        let proj: f64 = col.iter().zip(&grid).map(|(v, &x)| v * (freq * (x - domain.a)).sin()).sum();
        let sign = if proj < 0.0 { -scale } else { scale };
        let v: Vec<f64> = col.iter().map(|x| sign * x).collect();
        sup.push(v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
        lambdas.push(lam);
        phi.push(v);
    }
    Ok(EigenBasis { alpha, domain, kind: BasisKind::MatrixDiscretized, lambdas, grid, step: h, phi, sup })
}

impl EigenBasis {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn domain(&self) -> IntervalDomain {
        self.domain
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Number of eigenpairs N.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// λ_n for 1-based n.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambdas[n - 1]
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_step(&self) -> f64 {
        self.step
    }

    /// Trapezoid weight of every interior node.
    pub fn weight(&self) -> f64 {
        self.step
    }

    /// Samples of φ_n (1-based) on the grid.
    pub fn samples(&self, n: usize) -> &[f64] {
        &self.phi[n - 1]
    }

    /// max_x |φ_n(x)| over the grid.
    pub fn sup(&self, n: usize) -> f64 {
        self.sup[n - 1]
    }

    /// φ_n(x), extended by zero outside D. Exact modes are evaluated in
    /// closed form; discretized modes are interpolated linearly between
    /// grid nodes (with zero at both endpoints).
    pub fn phi(&self, n: usize, x: f64) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match self.kind {
            BasisKind::ExactAlpha2 => {
                let l = self.domain.length();
                (2.0 / l).sqrt() * (n as f64 * PI * (x - self.domain.a) / l).sin()
            }
            BasisKind::MatrixDiscretized => {
                let v = &self.phi[n - 1];
                let s = (x - self.domain.a) / self.step;
                let i = s.floor() as usize;
                let frac = s - i as f64;
                let at = |j: usize| if j == 0 || j > v.len() { 0.0 } else { v[j - 1] };
                at(i) * (1.0 - frac) + at(i + 1) * frac
            }
        }
    }

    /// Discrete inner product Σ_i h f_i g_i.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.step * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Samples a function on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.grid.iter().map(|&x| f(x)).collect()
    }

    /// max_{m,n} |∫φ_mφ_n − δ_mn|.
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.len() {
            for n in m..self.len() {
                let g = self.inner(&self.phi[m], &self.phi[n]);
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Orthonormality tolerance appropriate to the construction.
    pub fn gram_tolerance(&self) -> f64 {
        match self.kind {
            BasisKind::ExactAlpha2 => 1e-8,
            BasisKind::MatrixDiscretized => 1e-6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_eigenvalues_on_unit_pi() {
        let d = IntervalDomain::new(0.0, PI).unwrap();
        let b = eigen_exact_laplace(d, 3).unwrap();
        for (l, e) in b.lambdas().iter().zip([1.0, 4.0, 9.0]) {
            assert!((l - e).abs() < 1e-12);
        }
        let x = 0.7;
        assert!((b.phi(2, x) - (2.0 / PI).sqrt() * (2.0 * x).sin()).abs() < 1e-14);
        let d2 = IntervalDomain::new(0.0, 2.0 * PI).unwrap();
        assert!((eigen_exact_laplace(d2, 1).unwrap().lambda(1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn exact_basis_is_orthonormal() {
        let d = IntervalDomain::new(-1.0, 2.5).unwrap();
        let b = eigen_exact_laplace(d, 20).unwrap();
        assert!(b.gram_defect() < 1e-8);
        let one = b.inner(b.samples(1), b.samples(1));
        assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exterior_is_zero() {
        let d = IntervalDomain::new(0.0, 1.0).unwrap();
        let b = eigen_exact_laplace(d, 2).unwrap();
        assert_eq!(b.phi(1, -0.1), 0.0);
        assert_eq!(b.phi(1, 1.5), 0.0);
        assert_eq!(b.phi(1, 1.0), 0.0);
    }

    #[test]
    fn far_weights_sum_to_tail() {
        for alpha in [0.5, 1.0, 1.5, 1.9] {
            let w = far_weights(alpha, 200_000);
            let s: f64 = w.iter().sum();
            // remaining tail beyond k is ≈ k^{-α}/α
            let rest = 200_000f64.powf(-alpha) / alpha;
            assert!((s + rest - 1.0 / alpha).abs() < 1e-6, "alpha {alpha}: {}", s + rest);
        }
    }

    #[test]
    fn matrix_is_symmetric_toeplitz() {
        let d = IntervalDomain::new(0.0, 1.0).unwrap();
        let a = fractional_matrix(d, 1.3, 64).unwrap();
        assert_eq!(a.clone(), a.transpose());
        assert!(a[(0, 0)] > 0.0 && a[(0, 1)] < 0.0 && a[(0, 5)] < 0.0);
    }

    #[test]
    fn constant_reduces_to_one_at_two() {
        assert!((fractional_constant(1.0).unwrap() - 1.0 / PI).abs() < 1e-14);
        let near_two = fractional_constant(1.999).unwrap() / (2.0 - 1.999);
        assert!((near_two - 1.0).abs() < 2e-2);
    }

    #[test]
    fn fractional_basis_orthonormal_and_positive() {
        let d = IntervalDomain::new(0.0, PI).unwrap();
        let b = eigen_fractional(d, 1.2, 128, 16).unwrap();
        assert!(b.gram_defect() < 1e-6);
        assert!(b.lambdas().windows(2).all(|w| w[0] <= w[1]));
        assert!(b.lambdas()[0] > 0.0);
        // ground state has one sign
        assert!(b.samples(1).iter().all(|&v| v > 0.0));
        // interpolation hits nodes
        let x = b.grid()[10];
        assert!((b.phi(3, x) - b.samples(3)[10]).abs() < 1e-12);
    }

    #[test]
    fn near_two_matches_classical() {
        let d = IntervalDomain::new(0.0, PI).unwrap();
        let b = eigen_fractional(d, 1.999, 256, 2).unwrap();
        assert!((b.lambda(1) - 1.0).abs() < 0.02, "{}", b.lambda(1));
    }

    #[test]
    fn rejects_bad_sizes() {
        let d = IntervalDomain::new(0.0, 1.0).unwrap();
        assert!(eigen_fractional(d, 1.0, 32, 4).is_err());
        assert!(eigen_fractional(d, 1.0, 64, 65).is_err());
        assert!(eigen_fractional(d, 2.0, 64, 4).is_err());
        assert!(eigen_exact_laplace(d, 0).is_err());
        assert!(IntervalDomain::new(1.0, 1.0).is_err());
    }
}
