//! Series solution against the Monte Carlo estimator at chosen (t, x).

use crate::error::{Error, Result};
use crate::spectral::series::TAIL_TOL;
use crate::spectral::SpectralSolution;
use crate::stochastic::{mc_solution_grid, Datum, McConfig, McEstimate, McProblem};
use crate::validation::report::{ComparisonPoint, ComparisonReport, Status};

/// Number of standard errors allowed on top of the bias allowances.
pub const Z_LIMIT: f64 = 3.0;

/// Required SE as a fraction of max |u| over the comparison points.
pub const SE_FRACTION: f64 = 0.1;

/// Relative agreement required between the t = 0 estimate and f(x₀).
pub const START_TOL: f64 = 1e-12;

/// Bound on the shift of u(t, x) caused by overestimating E_t by at most Δ:
/// Σ |f̄(n)φ_n(x)|(1 − e^{−λ_nΔ}) h(t, λ_n), plus the series tail bound.
pub fn time_change_bias_bound(solution: &SpectralSolution, t: f64, x: f64, dt: f64) -> Result<f64> {
    let basis = solution.basis();
    if !basis.domain().contains(x) || t == 0.0 {
        return Ok(0.0);
    }
    let hv = solution.h_values_weighted(t, |k| 1.0 - (-basis.lambda(k) * dt).exp())?;
    let s: f64 = (0..hv.terms)
        .map(|k| {
            let lam = basis.lambda(k + 1);
            (solution.coefficients()[k] * basis.phi(k + 1, x)).abs() * (1.0 - (-lam * dt).exp()) * hv.values[k]
        })
        .sum();
    Ok(s + hv.tail_bound)
}

#[derive(Clone)]
pub struct CrossSpec<'a> {
    pub problem: McProblem<'a>,
    pub datum: Datum<'a>,
    pub cfg: McConfig,
    /// M is doubled until the SE rule holds or this cap is passed.
    pub max_paths: usize,
    /// Additional per-point bias allowance (same order as the points), e.g.
    /// a basis-refinement delta; empty means none.
    pub extra_bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub report: ComparisonReport,
    /// MC estimates per point; `None` where x lies outside the closure of D.
    pub estimates: Vec<Option<McEstimate>>,
    pub series: Vec<f64>,
    /// Total bias allowance per point (time change + killing + extra + tail).
    pub allowances: Vec<f64>,
}

/// Pass when |series − mc| ≤ 3·SE + allowance at every point. If the SE
/// rule cannot be met within `max_paths` the status is Inconclusive. At
/// t = 0 the allowance also carries the truncation defect |f − S_N f|(x)
/// and the estimate must equal f(x₀).
pub fn compare_analytic_mc(
    solution: &SpectralSolution,
    spec: &CrossSpec<'_>,
    points: &[(f64, f64)],
    label: &str,
) -> Result<CrossValidation> {
    if points.is_empty() {
        return Err(Error::domain("compare_analytic_mc", "no comparison points"));
    }
    if !spec.extra_bias.is_empty() && spec.extra_bias.len() != points.len() {
        return Err(Error::Shape { op: "compare_analytic_mc", expected: points.len(), got: spec.extra_bias.len() });
    }
    let domain = spec.problem.domain;
    let series: Vec<f64> = points.iter().map(|&(t, x)| solution.eval(t, x)).collect::<Result<_>>()?;
    let scale = series.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut times: Vec<f64> = Vec::new();
    let mut starts: Vec<f64> = Vec::new();
    for &(t, x) in points {
        if domain.closure_contains(x) {
            if !times.contains(&t) {
                times.push(t);
            }
            if !starts.contains(&x) {
                starts.push(x);
            }
        }
    }

    let mut cfg = spec.cfg.clone();
    let mut inconclusive = false;
    let grid = if starts.is_empty() {
        None
    } else {
        loop {
            let g = mc_solution_grid(&[spec.datum], &starts, &times, &spec.problem, &cfg)?;
            let worst = (0..starts.len())
                .flat_map(|i| (0..times.len()).map(move |j| (i, j)))
                .map(|(i, j)| g.get(0, i, j).std_error)
                .fold(0.0f64, f64::max);
            if worst <= SE_FRACTION * scale || scale == 0.0 && worst == 0.0 {
                break Some(g);
            }
            if cfg.paths * 2 > spec.max_paths {
                inconclusive = true;
                break Some(g);
            }
            cfg.paths *= 2;
        }
    };

    let mut pts = Vec::with_capacity(points.len());
    let mut estimates = Vec::with_capacity(points.len());
    let mut allowances = Vec::with_capacity(points.len());
    for (k, &(t, x)) in points.iter().enumerate() {
        let extra = spec.extra_bias.get(k).copied().unwrap_or(0.0);
        let Some(g) = grid.as_ref().filter(|_| domain.closure_contains(x)) else {
            // u vanishes on the complement of D
            pts.push(ComparisonPoint::new(vec![t, x], series[k], 0.0, TAIL_TOL + extra).with_se(0.0));
            estimates.push(None);
            allowances.push(TAIL_TOL + extra);
            continue;
        };
        let i = starts.iter().position(|&s| s == x).unwrap_or(0);
        let j = times.iter().position(|&s| s == t).unwrap_or(0);
        let e = *g.get(0, i, j);
        let mut allowance = time_change_bias_bound(solution, t, x, cfg.dt)? + e.killing_bias + extra + TAIL_TOL;
        let mut exact_start = true;
        if t == 0.0 {
            // the series is the N-term reconstruction of f, the estimate is f(x₀)
            let f0 = (spec.datum)(x);
            allowance += (f0 - series[k]).abs();
            exact_start = (e.mean - f0).abs() <= START_TOL * f0.abs().max(1.0);
        }
        let mut p =
            ComparisonPoint::new(vec![t, x], series[k], e.mean, Z_LIMIT * e.std_error + allowance).with_se(e.std_error);
        p.within &= exact_start;
        pts.push(p);
        estimates.push(Some(e));
        allowances.push(allowance);
    }
    let mut report = ComparisonReport::assemble(
        label,
        &["t", "x"],
        pts,
        format!("|series - mc| <= {Z_LIMIT} SE + bias allowance (time change, killing, extra, tail)"),
    )
    .note(format!("paths = {}, dt = {:e}, delta = {:e}", cfg.paths, cfg.dt, cfg.delta));
    if inconclusive {
        report.status = Status::Inconclusive;
        report = report.note(format!("SE above {SE_FRACTION} of max|u| at the path cap {}", spec.max_paths));
    }
    Ok(CrossValidation { report, estimates, series, allowances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{FiniteAtoms, MixingMeasure};
    use crate::speckit::HEvaluator;
    use crate::spectral::{eigen_exact_laplace, InitialDatum, IntervalDomain};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup() -> (SpectralSolution, MixingMeasure, IntervalDomain) {
        let d = IntervalDomain::new(0.0, PI).unwrap();
        let basis = Arc::new(eigen_exact_laplace(d, 16).unwrap());
        let sol =
            SpectralSolution::from_datum(basis, InitialDatum::Eigenmode(1), HEvaluator::single(0.5).unwrap()).unwrap();
        (sol, FiniteAtoms::single(0.5, 1.0).unwrap().into(), d)
    }

    #[test]
    fn time_zero_and_exterior_points() {
        let (sol, m, d) = setup();
        let b = sol.basis_arc();
        let f = move |x: f64| b.phi(1, x);
        let spec = CrossSpec {
            problem: McProblem { alpha: 2.0, domain: d, measure: &m },
            datum: &f,
            cfg: McConfig::new(256, 1e-2, 1e-2, 1),
            max_paths: 256,
            extra_bias: vec![],
        };
        let r = compare_analytic_mc(&sol, &spec, &[(0.0, 1.0), (0.5, 4.0)], "edge").unwrap();
        assert!(r.report.passed(), "{}", r.report.summary());
        assert!(r.report.points[0].discrepancy < 1e-12);
        assert_eq!(r.report.points[1].value, 0.0);
        assert!(r.estimates[1].is_none());
    }

    #[test]
    fn cap_gives_inconclusive() {
        let (sol, m, d) = setup();
        let b = sol.basis_arc();
        let f = move |x: f64| b.phi(1, x);
        let spec = CrossSpec {
            problem: McProblem { alpha: 2.0, domain: d, measure: &m },
            datum: &f,
            cfg: McConfig::new(8, 1e-2, 1e-2, 2),
            max_paths: 16,
            extra_bias: vec![],
        };
        let r = compare_analytic_mc(&sol, &spec, &[(0.5, PI / 2.0)], "cap").unwrap();
        assert_eq!(r.report.status, Status::Inconclusive);
    }

    #[test]
    fn bias_bound_scales_with_step() {
        let (sol, _, _) = setup();
        let a = time_change_bias_bound(&sol, 0.5, 1.0, 1e-3).unwrap();
        let b = time_change_bias_bound(&sol, 0.5, 1.0, 2e-3).unwrap();
        assert!(a > 0.0 && (b / a - 2.0).abs() < 0.01);
    }
}
