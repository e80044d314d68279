//! Stable variates: one-sided (subordinator increments) and symmetric
//! (spatial motion), both by the Kanter / Chambers–Mallows–Stuck map of a
//! uniform angle and a unit exponential.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};

use crate::error::{Error, Result};

/// Standard positive β-stable variate, E[e^{−sS}] = e^{−s^β}:
///
/// S = sin(βU)/sin(U)^{1/β} · (sin((1−β)U)/E)^{(1−β)/β}, U ~ U(0, π), E ~ Exp(1).
#[inline]
pub fn positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    let inv = 1.0 / beta;
    let ln_s = (beta * u).sin().ln() - inv * u.sin().ln() + (1.0 - beta) * inv * ((1.0 - beta) * u).sin().ln()
        - (1.0 - beta) * inv * e.ln();
    ln_s.exp()
}

/// Increment of a standard β-stable subordinator over operational time Δ.
pub fn sample_stable_increment<R: Rng + ?Sized>(beta: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain("sample_stable_increment", format!("beta = {beta} must lie in (0, 1)")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain("sample_stable_increment", format!("step {dt} must be positive")));
    }
    Ok(dt.powf(1.0 / beta) * positive_stable(beta, rng))
}

/// Symmetric α-stable variate with E[e^{iξX}] = e^{−|ξ|^α}, α ∈ (0, 2].
#[inline]
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return std::f64::consts::SQRT_2 * z;
    }
    let v = PI * rng.sample::<f64, _>(Open01) - FRAC_PI_2;
    if alpha == 1.0 {
        return v.tan();
    }
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / e).powf((1.0 - alpha) / alpha);
    a * b
}

/// Increment of the symmetric α-stable motion over operational time δ:
/// Gaussian with variance 2δ at α = 2, δ^{1/α}·X otherwise.
#[inline]
pub fn symmetric_increment<R: Rng + ?Sized>(alpha: f64, delta: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return (2.0 * delta).sqrt() * z;
    }
    delta.powf(1.0 / alpha) * symmetric_stable(alpha, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_one_sample, ks_p_value, ks_p_value_one, ks_two_sample, mean_se};
    use crate::stochastic::rng::RngStream;

    #[test]
    fn positive_and_finite() {
        let mut rng = RngStream::new(1, 0).rng();
        for beta in [0.1, 0.3, 0.5, 0.9] {
            for _ in 0..20_000 {
                let v = sample_stable_increment(beta, 1e-3, &mut rng).unwrap();
                assert!(v > 0.0 && v.is_finite());
            }
        }
        assert!(sample_stable_increment(1.0, 1.0, &mut rng).is_err());
        assert!(sample_stable_increment(0.5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn half_order_is_levy_distribution() {
        // β = 1/2: S = 1/(4G²) with G standard normal, CDF erfc(1/(2√x))
        let mut rng = RngStream::new(2, 0).rng();
        let xs: Vec<f64> = (0..50_000).map(|_| positive_stable(0.5, &mut rng)).collect();
        let d = ks_one_sample(&xs, |x| statrs::function::erf::erfc(1.0 / (2.0 * x.sqrt())));
        assert!(ks_p_value_one(d, xs.len()) > 0.01, "D = {d}");
    }

    #[test]
    fn laplace_transform_of_increment() {
        let mut rng = RngStream::new(3, 0).rng();
        for &(beta, s) in &[(0.3, 1.0), (0.7, 2.0)] {
            let v: Vec<f64> =
                (0..200_000).map(|_| (-s * sample_stable_increment(beta, 0.5, &mut rng).unwrap()).exp()).collect();
            let (m, se) = mean_se(&v);
            let expect = (-0.5 * f64::powf(s, beta)).exp();
            assert!((m - expect).abs() < 4.0 * se, "beta {beta}: {m} vs {expect} (se {se})");
        }
    }

    #[test]
    fn self_similarity() {
        let beta = 0.6;
        let mut r1 = RngStream::new(4, 0).rng();
        let mut r2 = RngStream::new(4, 1).rng();
        let a: Vec<f64> = (0..20_000).map(|_| sample_stable_increment(beta, 2.0, &mut r1).unwrap()).collect();
        let b: Vec<f64> =
            (0..20_000).map(|_| 2f64.powf(1.0 / beta) * sample_stable_increment(beta, 1.0, &mut r2).unwrap()).collect();
        assert!(ks_p_value(ks_two_sample(&a, &b), a.len(), b.len()) > 0.01);
    }

    #[test]
    fn symmetric_characteristic_function() {
        let mut rng = RngStream::new(5, 0).rng();
        for alpha in [0.8, 1.0, 1.5, 2.0] {
            let xi = 0.7;
            let v: Vec<f64> = (0..100_000).map(|_| (xi * symmetric_increment(alpha, 0.5, &mut rng)).cos()).collect();
            let (m, se) = mean_se(&v);
            let expect = (-0.5 * f64::powf(xi, alpha)).exp();
            assert!((m - expect).abs() < 4.0 * se, "alpha {alpha}: {m} vs {expect}");
        }
    }
}
