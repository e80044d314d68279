//! The decay estimate and initial-datum checks as comparison reports.

use crate::error::Result;
use crate::spectral::decay::{decay_estimate, initial_datum_check};
use crate::spectral::SpectralSolution;
use crate::validation::report::{ComparisonPoint, ComparisonReport, Status};

pub use crate::spectral::decay::{DecayEstimatePoint, DecayReport, InitialDatumPoint, InitialDatumReport};

/// Truncation allowance added to the decay bound.
pub const DECAY_ALLOWANCE: f64 = 1e-6;

/// ‖u(t)‖₂ against h(t, λ₁)‖f‖₂ + allowance at each t.
pub fn decay_report(solution: &SpectralSolution, f: &[f64], times: &[f64], label: &str) -> Result<ComparisonReport> {
    let pts = decay_estimate(solution, f, times, DECAY_ALLOWANCE)?;
    let points = pts
        .iter()
        .map(|p| ComparisonPoint::new(vec![p.t], p.bound, p.norm, 0.0).with_tolerance_above(p.bound, 0.0))
        .collect();
    Ok(ComparisonReport::assemble(
        label,
        &["t"],
        points,
        format!("||u(t)|| <= h(t, lambda_1)||f|| + {DECAY_ALLOWANCE:e}"),
    ))
}

/// ‖u(t) − f‖₂ along decreasing t against (1 − h(t, λ_{n₀}))‖f‖₂ + √ε;
/// fails as well when the distances do not decrease.
pub fn initial_datum_report(
    solution: &SpectralSolution,
    f: &[f64],
    times: &[f64],
    eps_rel: f64,
    label: &str,
) -> Result<(ComparisonReport, InitialDatumReport)> {
    let r = initial_datum_check(solution, f, times, eps_rel)?;
    let points = r
        .points
        .iter()
        .map(|p| ComparisonPoint::new(vec![p.t], p.bound, p.distance, 0.0).with_tolerance_above(p.bound, 0.0))
        .collect();
    let mut report = ComparisonReport::assemble(
        label,
        &["t"],
        points,
        "||u(t) - f|| <= (1 - h(t, lambda_n0))||f|| + sqrt(eps), decreasing in t",
    )
    .note(format!("n0 = {}, eps = {:.3e}, decreasing = {}", r.n0, r.epsilon, r.decreasing));
    if !r.decreasing {
        report.status = Status::Fail;
    }
    Ok((report, r))
}
