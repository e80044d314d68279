//! Discrete Caputo and distributed-order derivatives on a uniform grid.

use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;
use crate::quad::GaussRule;
use crate::speckit::gamma::gamma_unchecked;

/// Uniform time grid t_k = kΔt, k = 0..count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    count: usize,
}

impl TimeGrid {
    pub fn new(step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::domain("TimeGrid", format!("step {step} must be positive")));
        }
        if count < 2 {
            return Err(Error::domain("TimeGrid", format!("count {count} must be at least 2")));
        }
        Ok(TimeGrid { step, count })
    }

    /// Grid on [0, horizon] with the given step; the horizon is rounded to
    /// the nearest multiple of the step.
    pub fn covering(horizon: f64, step: f64) -> Result<Self> {
        let n = (horizon / step).round() as usize + 1;
        TimeGrid::new(step, n)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.time(k)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.count).map(|k| f(self.time(k))).collect()
    }
}

/// L1 discretization of the Caputo derivative of order β ∈ (0, 1):
///
/// (∂^β u)(t_k) ≈ Δt^{−β}/Γ(2−β) Σ_{i<k} w_i (u_{k−i} − u_{k−i−1}),
/// w_i = (i+1)^{1−β} − i^{1−β}.
///
/// The value at t_0 is 0.
pub fn caputo_derivative(u: &[f64], grid: &TimeGrid, beta: f64) -> Result<Vec<f64>> {
    check_samples("caputo_derivative", u, grid)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain("caputo_derivative", format!("beta = {beta} must lie in (0, 1)")));
    }
    let n = u.len();
    let a = 1.0 - beta;
    let w: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(a) - (i as f64).powf(a)).collect();
    let du: Vec<f64> = std::iter::once(0.0).chain(u.windows(2).map(|p| p[1] - p[0])).collect();
    let scale = grid.step.powf(-beta) / gamma_unchecked(2.0 - beta);
    let mut out = vec![0.0; n];
    for k in 1..n {
        // du[k - i] for i = 0..k pairs with w[i]
        let s: f64 = du[1..=k].iter().rev().zip(&w[..k]).map(|(d, wi)| d * wi).sum();
        out[k] = scale * s;
    }
    Ok(out)
}

/// Distributed-order derivative ∫ ∂^β u ν(dβ), ν = Γ(1−β)μ.
///
/// Atomic measures give Σ c_j^{β_j} ∂^{β_j}u; densities use Gauss–Legendre
/// nodes in β (`nodes` points on the support, default 32).
pub fn distributed_order_derivative(u: &[f64], grid: &TimeGrid, measure: &MixingMeasure) -> Result<Vec<f64>> {
    distributed_order_derivative_with(u, grid, measure, 32)
}

pub fn distributed_order_derivative_with(
    u: &[f64],
    grid: &TimeGrid,
    measure: &MixingMeasure,
    nodes: usize,
) -> Result<Vec<f64>> {
    check_samples("distributed_order_derivative", u, grid)?;
    let terms: Vec<(f64, f64)> = match measure {
        MixingMeasure::Atoms(a) => a.atoms().iter().map(|at| (at.beta, at.coefficient())).collect(),
        MixingMeasure::Density(d) => {
            let raw = if d.touches_one() {
                d.nodes(2)
            } else {
                let (xs, ws) = GaussRule::new(nodes).composite_nodes(d.lower(), d.upper(), 1);
                xs.into_iter().zip(ws).map(|(b, w)| (b, w * d.density(b))).collect()
            };
            raw.into_iter().map(|(b, w)| (b, w * gamma_unchecked(1.0 - b))).collect()
        }
    };
    let mut out = vec![0.0; u.len()];
    for (b, w) in terms {
        if w == 0.0 {
            continue;
        }
        let d = caputo_derivative(u, grid, b)?;
        for (o, v) in out.iter_mut().zip(d) {
            *o += w * v;
        }
    }
    Ok(out)
}

fn check_samples(op: &'static str, u: &[f64], grid: &TimeGrid) -> Result<()> {
    if u.len() != grid.len() {
        return Err(Error::Shape { op, expected: grid.len(), got: u.len() });
    }
    Ok(())
}
