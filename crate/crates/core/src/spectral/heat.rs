//! Killed heat kernel p_D(t,x,y) = Σ e^{−λ_n t} φ_n(x) φ_n(y).

use crate::error::{Error, Result};
use crate::spectral::basis::EigenBasis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelValue {
    pub value: f64,
    /// Estimate of Σ_{n>N} e^{−λ_n t}(sup|φ|)², extrapolating the last gap.
    pub tail_bound: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("heat_kernel", format!("t = {t} must be positive")));
    }
    Ok(())
}

fn tail_estimate(basis: &EigenBasis, t: f64) -> f64 {
    let n = basis.len();
    let sup = (1..=n).map(|k| basis.sup(k)).fold(0.0f64, f64::max);
    let last = basis.lambda(n);
    let gap = if n > 1 { last - basis.lambda(n - 1) } else { last };
    let q = (-gap * t).exp();
    if q >= 1.0 {
        return f64::INFINITY;
    }
    (-last * t).exp() * sup * sup * q / (1.0 - q)
}

pub fn heat_kernel(basis: &EigenBasis, t: f64, x: f64, y: f64) -> Result<HeatKernelValue> {
    check_time(t)?;
    let value = (1..=basis.len()).map(|n| (-basis.lambda(n) * t).exp() * (basis.phi(n, x) * basis.phi(n, y))).sum();
    Ok(HeatKernelValue { value, tail_bound: tail_estimate(basis, t) })
}

/// Applies P_t^D to grid samples of f by quadrature against the kernel.
pub fn heat_apply(basis: &EigenBasis, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_time(t)?;
    let m = basis.grid().len();
    if f.len() != m {
        return Err(Error::Shape { op: "heat_apply", expected: m, got: f.len() });
    }
    let decay: Vec<f64> = basis.lambdas().iter().map(|l| (-l * t).exp()).collect();
    let w = basis.weight();
    let mut out = vec![0.0; m];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, fj) in f.iter().enumerate() {
            if *fj == 0.0 {
                continue;
            }
            let mut k = 0.0;
            for (n, d) in decay.iter().enumerate() {
                let p = basis.samples(n + 1);
                k += d * (p[i] * p[j]);
            }
            acc += k * fj;
        }
        *o = w * acc;
    }
    Ok(out)
}
