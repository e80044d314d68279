use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::speckit::gamma::ln_gamma;

/// Largest |z| evaluated by the power series. Beyond this the alternating
/// terms grow large enough that cancellation threatens the 1e-10 target.
pub const SERIES_RADIUS: f64 = 1.0;

/// One-parameter Mittag-Leffler function E_β(z) for 0 < β ≤ 1 and real z ≤ 0.
///
/// Uses the power series Σ z^k/Γ(βk+1) with compensated summation for
/// |z| ≤ [`SERIES_RADIUS`] and, beyond it, the completely monotone
/// representation
///
/// E_β(−x) = ∫₀^∞ e^{−r x^{1/β}} K_β(r) dr,
/// K_β(r) = sin(βπ)/π · r^{β−1} / (r^{2β} + 2 r^β cos(βπ) + 1).
pub fn mittag_leffler(beta: f64, z: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain("mittag_leffler", format!("beta = {beta} must lie in (0, 1]")));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::domain("mittag_leffler", format!("z = {z} must be finite and <= 0")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if beta == 1.0 {
        return Ok(z.exp());
    }
    if -z <= SERIES_RADIUS {
        series(beta, z)
    } else {
        monotone_integral(beta, -z)
    }
}

/// Power series with Neumaier summation.
pub(crate) fn series(beta: f64, z: f64) -> Result<f64> {
    let lz = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut small = 0;
    for k in 1..200_000usize {
        let kf = k as f64;
        let mag = (kf * lz - ln_gamma(beta * kf + 1.0)?).exp();
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if mag < 1e-18 {
            small += 1;
            if small > 3 {
                return Ok(sum + comp);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::numerical("mittag_leffler", "power series did not converge"))
}

fn monotone_integral(beta: f64, x: f64) -> Result<f64> {
    let y = x.powf(1.0 / beta);
    let (sb, cb) = (beta * PI).sin_cos();
    // integrand in v = ln r
    let f = |v: f64| {
        let rb = (beta * v).exp();
        let r = v.exp();
        (-y * r).exp() * sb / PI * rb / (rb * rb + 2.0 * rb * cb + 1.0)
    };
    let v_lo = (1e-18f64).ln() / beta;
    let v_hi = (45.0 / y).ln().max(v_lo + 1.0);
    // Breakpoints around the peak of the kernel, which sharpens as β → 1.
    let mut breaks = vec![v_lo, v_hi];
    let v_peak = if cb < 0.0 { (-cb).ln() / beta } else { 0.0 };
    let w = sb.max(1e-8) / beta;
    for m in [0.0, 1.0, 4.0, 16.0, 64.0] {
        for sign in [-1.0, 1.0] {
            let v = v_peak + sign * m * w;
            if v > v_lo && v < v_hi {
                breaks.push(v);
            }
        }
    }
    let mut v = v_lo.ceil();
    while v < v_hi {
        breaks.push(v);
        v += 1.0;
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let tol = Tolerance { rel: 1e-13, abs: 1e-15, max_depth: 30 };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += quad::adaptive("mittag_leffler", w[0], w[1], tol, f)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_argument() {
        for b in [0.1, 0.5, 0.9, 1.0] {
            assert_eq!(mittag_leffler(b, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn exponential_case() {
        assert_relative_eq!(mittag_leffler(1.0, -1.0).unwrap(), (-1f64).exp(), max_relative = 1e-15);
        assert!((mittag_leffler(1.0, -1.0).unwrap() - 0.3678794412).abs() < 1e-10);
    }

    #[test]
    fn half_order_against_erfc() {
        // E_{1/2}(−x) = e^{x²} erfc(x)
        for x in [0.1f64, 0.5, 0.99, 1.0, 1.01, 2.0, 4.0, 7.0, 10.0] {
            let oracle = (x * x).exp() * statrs::function::erf::erfc(x);
            let v = mittag_leffler(0.5, -x).unwrap();
            assert!((v - oracle).abs() < 1e-10, "x = {x}: {v} vs {oracle}");
        }
        assert!((mittag_leffler(0.5, -1.0).unwrap() - 0.4275836).abs() < 1e-7);
    }

    #[test]
    fn series_and_integral_agree_at_crossover() {
        for b in [0.05, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for x in [0.5, SERIES_RADIUS, 1.5] {
                if b < 0.2 && x > SERIES_RADIUS {
                    continue;
                }
                let s = series(b, -x).unwrap();
                let i = monotone_integral(b, x).unwrap();
                assert!((s - i).abs() < 1e-10, "beta {b} x {x}: {s} vs {i}");
            }
        }
    }

    #[test]
    fn completely_monotone_on_grid() {
        for b in [0.3, 0.7, 0.95] {
            let mut prev = 1.0;
            for k in 1..200 {
                let v = mittag_leffler(b, -(k as f64) * 0.25).unwrap();
                assert!(v > 0.0 && v <= prev + 1e-14);
                prev = v;
            }
        }
    }

    #[test]
    fn asymptotic_tail() {
        // E_β(−x) ~ x^{-1}/Γ(1−β) for large x
        let b = 0.6;
        let x = 1e6;
        let v = mittag_leffler(b, -x).unwrap();
        let lead = 1.0 / (x * statrs::function::gamma::gamma(1.0 - b));
        assert_relative_eq!(v, lead, max_relative = 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(mittag_leffler(0.0, -1.0).is_err());
        assert!(mittag_leffler(1.2, -1.0).is_err());
        assert!(mittag_leffler(0.5, 1.0).is_err());
    }
}
