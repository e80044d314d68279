//! Eigenrelation and PDE residuals of the discrete distributed-order
//! derivative, with self-convergence studies under step halving.

use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;
use crate::speckit::{distributed_order_derivative, HEvaluator, TimeGrid};
use crate::spectral::SpectralSolution;
use crate::stats::linear_fit;
use crate::validation::report::{ComparisonPoint, ComparisonReport, Status};

/// Start of the evaluation window; the L1 error near the weak singularity
/// at t = 0 is not certified.
pub const WINDOW_START: f64 = 0.05;

/// Allowed deviation of an observed order from 2 − β_max.
pub const ORDER_BAND: f64 = 0.15;

fn check_window(grid: &TimeGrid, window: f64) -> Result<usize> {
    let first = (window / grid.step()).ceil() as usize;
    if first >= grid.len() {
        return Err(Error::domain("residual", format!("window start {window} lies beyond the grid")));
    }
    Ok(first)
}

/// Residual D^(ν)h + λh at every grid time ≥ window. Report-only: the
/// tolerance column is infinite and the fitted constant C of
/// max|residual| = C·Δt^{2−β_max} is recorded as a note.
pub fn residual_eigen(h: &HEvaluator, lambda: f64, grid: &TimeGrid, window: f64) -> Result<ComparisonReport> {
    let first = check_window(grid, window)?;
    let times = grid.times();
    let values = h.sample(&times, lambda)?;
    let d = distributed_order_derivative(&values, grid, &h.measure())?;
    let points: Vec<ComparisonPoint> = (first..grid.len())
        .map(|k| ComparisonPoint::new(vec![times[k]], -lambda * values[k], d[k], f64::INFINITY))
        .collect();
    let order = 2.0 - h.beta_max();
    let r = ComparisonReport::assemble(
        format!("eigenrelation lambda={lambda} ({})", h.method()),
        &["t"],
        points,
        "report-only",
    );
    let c = r.max_discrepancy / grid.step().powf(order);
    Ok(r.note(format!("dt = {:e}, fitted C = {c:.6e} for order {order:.3}", grid.step())))
}

/// Residual D^(ν)u − (−(−Δ)^{α/2}u) of a series solution at the space
/// points `xs`, with the right side applied term by term.
pub fn residual_pde(
    solution: &SpectralSolution,
    measure: &MixingMeasure,
    grid: &TimeGrid,
    xs: &[f64],
    window: f64,
) -> Result<ComparisonReport> {
    let first = check_window(grid, window)?;
    let times = grid.times();
    let basis = solution.basis();
    let hv: Vec<_> =
        times.iter().map(|&t| solution.h_values_weighted(t, |k| basis.lambda(k))).collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(xs.len() * (grid.len() - first));
    for &x in xs {
        let u: Vec<f64> = hv.iter().map(|v| solution.eval_with(v, x)).collect();
        let d = distributed_order_derivative(&u, grid, measure)?;
        for k in first..grid.len() {
            let rhs = solution.generator_with(&hv[k], x);
            points.push(ComparisonPoint::new(vec![times[k], x], rhs, d[k], f64::INFINITY));
        }
    }
    let order = 2.0 - measure.beta_max();
    let r = ComparisonReport::assemble("pde residual", &["t", "x"], points, "report-only");
    let c = r.max_discrepancy / grid.step().powf(order);
    Ok(r.note(format!("dt = {:e}, fitted C = {c:.6e} for order {order:.3}", grid.step())))
}

/// Residual maxima at Δt, Δt/2, … and the observed orders log₂(r_i/r_{i+1}).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
    pub expected_order: f64,
    /// Slope of log r against log Δt over all steps.
    pub fitted_order: Option<f64>,
    pub report: ComparisonReport,
}

fn study(label: String, steps: Vec<f64>, residuals: Vec<f64>, expected: f64, band: f64) -> ConvergenceStudy {
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = steps.iter().zip(&residuals).map(|(s, r)| (s.ln(), r.ln())).unzip();
    let fitted = linear_fit(&lx, &ly).map(|f| f.slope);
    let points =
        orders.iter().zip(&steps[1..]).map(|(&o, &s)| ComparisonPoint::new(vec![s], expected, o, band)).collect();
    let mut report = ComparisonReport::assemble(label, &["dt"], points, format!("|order - {expected:.3}| <= {band}"));
    if residuals.iter().all(|&r| r == 0.0) {
        report.status = Status::Pass;
        report = report.note("residual identically zero");
    }
    for (s, r) in steps.iter().zip(&residuals) {
        report = report.note(format!("dt = {s:e}: max residual {r:.6e}"));
    }
    ConvergenceStudy { steps, residuals, orders, expected_order: expected, fitted_order: fitted, report }
}

fn halving_steps(dt: f64, halvings: usize) -> Result<Vec<f64>> {
    if halvings < 1 {
        return Err(Error::domain("convergence", "need at least one halving"));
    }
    Ok((0..=halvings).map(|i| dt / f64::from(1u32 << i)).collect())
}

pub fn eigen_convergence(
    h: &HEvaluator,
    lambda: f64,
    dt: f64,
    horizon: f64,
    window: f64,
    halvings: usize,
) -> Result<ConvergenceStudy> {
    let steps = halving_steps(dt, halvings)?;
    let residuals = steps
        .iter()
        .map(|&s| {
            let grid = TimeGrid::covering(horizon, s)?;
            Ok(residual_eigen(h, lambda, &grid, window)?.max_discrepancy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(study(
        format!("eigenrelation order lambda={lambda} ({})", h.method()),
        steps,
        residuals,
        2.0 - h.beta_max(),
        ORDER_BAND,
    ))
}

pub fn pde_convergence(
    solution: &SpectralSolution,
    measure: &MixingMeasure,
    xs: &[f64],
    dt: f64,
    horizon: f64,
    window: f64,
    halvings: usize,
) -> Result<ConvergenceStudy> {
    let steps = halving_steps(dt, halvings)?;
    let residuals = steps
        .iter()
        .map(|&s| {
            let grid = TimeGrid::covering(horizon, s)?;
            Ok(residual_pde(solution, measure, &grid, xs, window)?.max_discrepancy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(study("pde residual order".to_string(), steps, residuals, 2.0 - measure.beta_max(), ORDER_BAND))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::FiniteAtoms;
    use crate::spectral::{eigen_exact_laplace, InitialDatum, IntervalDomain};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn zero_lambda_has_zero_residual() {
        let h = HEvaluator::single(0.5).unwrap();
        let g = TimeGrid::covering(1.0, 1e-2).unwrap();
        let r = residual_eigen(&h, 0.0, &g, WINDOW_START).unwrap();
        assert_eq!(r.max_discrepancy, 0.0);
        let s = eigen_convergence(&h, 0.0, 1e-2, 1.0, WINDOW_START, 1).unwrap();
        assert!(s.report.passed());
    }

    #[test]
    fn single_atom_order() {
        let h = HEvaluator::single(0.5).unwrap();
        let s = eigen_convergence(&h, 1.0, 1e-3, 2.0, 0.1, 2).unwrap();
        for o in &s.orders {
            assert!((o - 1.5).abs() <= ORDER_BAND, "{:?}", s.orders);
        }
    }

    #[test]
    fn pde_single_mode_matches_eigen_residual() {
        let basis = Arc::new(eigen_exact_laplace(IntervalDomain::new(0.0, PI).unwrap(), 1).unwrap());
        let h = HEvaluator::single(0.5).unwrap();
        let sol = SpectralSolution::from_datum(basis.clone(), InitialDatum::Eigenmode(1), h.clone()).unwrap();
        let g = TimeGrid::covering(1.0, 1e-2).unwrap();
        let x = 1.0;
        let pde = residual_pde(&sol, &h.measure(), &g, &[x], WINDOW_START).unwrap();
        let eig = residual_eigen(&h, basis.lambda(1), &g, WINDOW_START).unwrap();
        let scale = sol.coefficients()[0] * basis.phi(1, x);
        for (p, e) in pde.points.iter().zip(&eig.points) {
            let d = (p.value - p.reference) - scale * (e.value - e.reference);
            assert!(d.abs() <= 1e-13, "{d}");
        }
    }

    #[test]
    fn zero_datum_zero_residual() {
        let basis = Arc::new(eigen_exact_laplace(IntervalDomain::new(0.0, PI).unwrap(), 8).unwrap());
        let m: MixingMeasure = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap().into();
        let sol = SpectralSolution::new(basis, vec![0.0; 8], HEvaluator::for_measure(&m).unwrap()).unwrap();
        let g = TimeGrid::covering(0.5, 1e-2).unwrap();
        let r = residual_pde(&sol, &m, &g, &[0.5, 1.5], WINDOW_START).unwrap();
        assert_eq!(r.max_discrepancy, 0.0);
    }
}
