//! Coefficient-decay, L² decay and initial-datum diagnostics of series solutions.

use crate::error::{Error, Result};
use crate::spectral::basis::EigenBasis;
use crate::spectral::series::SpectralSolution;
use crate::stats::linear_fit;

/// Coefficients below this fraction of the largest one are treated as
/// quadrature noise and left out of the fit.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Slope of log|f̄(n)| against log λ_n over the upper half n ∈ [N/2, N].
    pub fitted_exponent: Option<f64>,
    /// The same slope over all n.
    pub full_range_exponent: Option<f64>,
    pub points_used: usize,
    pub k: f64,
    /// fitted_exponent ≤ −k (true for degenerate fits).
    pub satisfies: bool,
    /// Fewer than three coefficients above the noise floor.
    pub degenerate: bool,
    /// Slope of log sup|φ_n| against log λ_n.
    pub phi_sup_exponent: Option<f64>,
    /// d/(2α), the reference growth exponent of sup|φ_n|.
    pub phi_reference_exponent: f64,
    /// Smoothness and compact support of f are the caller's responsibility.
    pub note: &'static str,
}

pub fn coefficient_decay_check(coeffs: &[f64], basis: &EigenBasis, k: f64) -> Result<DecayReport> {
    if coeffs.len() != basis.len() {
        return Err(Error::Shape { op: "coefficient_decay_check", expected: basis.len(), got: coeffs.len() });
    }
    let peak = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if peak == 0.0 {
        return Err(Error::numerical("coefficient_decay_check", "all coefficients vanish; fit is degenerate"));
    }
    let half = coeffs.len() / 2;
    let points = |from: usize| -> (Vec<f64>, Vec<f64>) {
        coeffs
            .iter()
            .enumerate()
            .skip(from)
            .filter(|(_, c)| c.abs() > NOISE_FLOOR * peak)
            .map(|(i, c)| (basis.lambda(i + 1).ln(), c.abs().ln()))
            .unzip()
    };
    let (xs, ys) = points(half.saturating_sub(1));
    let (xa, ya) = points(0);
    let degenerate = xs.len() < 3;
    let fitted = if degenerate { None } else { linear_fit(&xs, &ys).map(|f| f.slope) };
    let full = if xa.len() < 3 { None } else { linear_fit(&xa, &ya).map(|f| f.slope) };
    let (lx, ly): (Vec<f64>, Vec<f64>) = (1..=basis.len()).map(|n| (basis.lambda(n).ln(), basis.sup(n).ln())).unzip();
    let phi_fit = linear_fit(&lx, &ly).map(|f| f.slope);
    Ok(DecayReport {
        fitted_exponent: fitted,
        full_range_exponent: full,
        points_used: xs.len(),
        k,
        satisfies: fitted.is_none_or(|e| e <= -k),
        degenerate,
        phi_sup_exponent: phi_fit,
        phi_reference_exponent: basis.domain().dimension() as f64 / (2.0 * basis.alpha()),
        note: "f assumed smooth with compact support in D",
    })
}

/// Slope of log λ_n against log n over n ∈ [N/2, N]; compares with α/d.
pub fn eigenvalue_growth(basis: &EigenBasis) -> Option<f64> {
    let n = basis.len();
    if n < 4 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = (n / 2..=n).map(|k| ((k as f64).ln(), basis.lambda(k).ln())).unzip();
    linear_fit(&x, &y).map(|f| f.slope)
}

/// One sampled time of the L² decay estimate ‖u(t)‖ ≤ h(t, λ₁)‖f‖.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimatePoint {
    pub t: f64,
    pub norm: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn decay_estimate(
    solution: &SpectralSolution,
    f: &[f64],
    times: &[f64],
    allowance: f64,
) -> Result<Vec<DecayEstimatePoint>> {
    let basis = solution.basis();
    let f_norm = basis.inner(f, f).sqrt();
    times
        .iter()
        .map(|&t| {
            let norm = solution.l2_norm(t)?;
            let bound = solution.evaluator().eval(t, basis.lambda(1))? * f_norm + allowance;
            Ok(DecayEstimatePoint { t, norm, bound, holds: norm <= bound })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDatumPoint {
    pub t: f64,
    /// ‖u(t) − f‖₂.
    pub distance: f64,
    /// (1 − h(t, λ_{n₀}))‖f‖₂ + √ε.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatumReport {
    pub n0: usize,
    /// ε = ‖f‖² − Σ_{n≤n₀} f̄(n)².
    pub epsilon: f64,
    pub points: Vec<InitialDatumPoint>,
    pub decreasing: bool,
    pub bounded: bool,
}

/// ‖u(t) − f‖ along decreasing times, against the bound from splitting the
/// spectrum at n₀, the first index whose Parseval tail is ≤ eps_rel·‖f‖².
pub fn initial_datum_check(
    solution: &SpectralSolution,
    f: &[f64],
    times: &[f64],
    eps_rel: f64,
) -> Result<InitialDatumReport> {
    let basis = solution.basis();
    if f.len() != basis.grid().len() {
        return Err(Error::Shape { op: "initial_datum_check", expected: basis.grid().len(), got: f.len() });
    }
    let norm2 = basis.inner(f, f);
    let mut acc = 0.0;
    let mut n0 = basis.len();
    let mut eps = (norm2 - solution.coefficients().iter().map(|c| c * c).sum::<f64>()).max(0.0);
    for (i, c) in solution.coefficients().iter().enumerate() {
        acc += c * c;
        if norm2 - acc <= eps_rel * norm2 {
            n0 = i + 1;
            eps = (norm2 - acc).max(0.0);
            break;
        }
    }
    let f_norm = norm2.sqrt();
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        let u = solution.grid_values(t)?;
        let diff: Vec<f64> = u.iter().zip(f).map(|(a, b)| a - b).collect();
        let distance = basis.inner(&diff, &diff).sqrt();
        let h0 = solution.evaluator().eval(t, basis.lambda(n0))?;
        points.push(InitialDatumPoint { t, distance, bound: (1.0 - h0) * f_norm + eps.sqrt() });
    }
    let decreasing = points.windows(2).all(|w| w[1].distance < w[0].distance);
    let bounded = points.iter().all(|p| p.distance <= p.bound);
    Ok(InitialDatumReport { n0, epsilon: eps, points, decreasing, bounded })
}
