//! Symmetric α-stable motion killed on leaving an interval, monitored on an
//! operational-time grid of step δ.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::IntervalDomain;
use crate::stochastic::stable::symmetric_stable;

/// Increment sampler for X over one operational step δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableStep {
    alpha: f64,
    delta: f64,
    scale: f64,
}

impl StableStep {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain("StableStep", format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::domain("StableStep", format!("step {delta} must be positive")));
        }
        let scale = if alpha == 2.0 { (2.0 * delta).sqrt() } else { delta.powf(1.0 / alpha) };
        Ok(StableStep { alpha, delta, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw_scaled(self.scale, rng)
    }

    /// Increment over a partial step of operational length `tau` < δ.
    pub fn draw_partial<R: Rng + ?Sized>(&self, tau: f64, rng: &mut R) -> f64 {
        let scale = if self.alpha == 2.0 { (2.0 * tau).sqrt() } else { tau.powf(1.0 / self.alpha) };
        self.draw_scaled(scale, rng)
    }

    #[inline]
    fn draw_scaled<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> f64 {
        if self.alpha == 2.0 {
            let z: f64 = rng.sample(StandardNormal);
            scale * z
        } else {
            scale * symmetric_stable(self.alpha, rng)
        }
    }

    /// Splits operational time τ into whole steps and a remainder.
    pub fn split(&self, tau: f64) -> (usize, f64) {
        let k = (tau / self.delta * (1.0 + 1e-12)).floor();
        let rest = tau - k * self.delta;
        if rest <= 1e-12 * self.delta.max(tau) {
            (k as usize, 0.0)
        } else {
            (k as usize, rest)
        }
    }
}

/// Runs X from x₀ for operational time τ_op and reports (X(τ_op), alive).
/// The path is killed at the first grid time it sits outside the open
/// interval; excursions inside a step are not seen.
pub fn sample_killed_stable_position<R: Rng + ?Sized>(
    alpha: f64,
    domain: &IntervalDomain,
    tau_op: f64,
    x0: f64,
    delta: f64,
    rng: &mut R,
) -> Result<(f64, bool)> {
    if !domain.contains(x0) {
        return Err(Error::domain(
            "sample_killed_stable_position",
            format!("x0 = {x0} outside ({}, {})", domain.a(), domain.b()),
        ));
    }
    if !(tau_op >= 0.0) || !tau_op.is_finite() {
        return Err(Error::domain("sample_killed_stable_position", format!("tau = {tau_op} must be nonnegative")));
    }
    let step = StableStep::new(alpha, delta)?;
    let (k, rest) = step.split(tau_op);
    let mut x = x0;
    for _ in 0..k {
        x += step.draw(rng);
        if !domain.contains(x) {
            return Ok((x, false));
        }
    }
    if rest > 0.0 {
        x += step.draw_partial(rest, rng);
        if !domain.contains(x) {
            return Ok((x, false));
        }
    }
    Ok((x, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_p_value, ks_two_sample, mean_se};
    use crate::stochastic::rng::RngStream;
    use std::f64::consts::PI;

    fn unit() -> IntervalDomain {
        IntervalDomain::new(0.0, PI).unwrap()
    }

    #[test]
    fn zero_time_stays_put() {
        let mut rng = RngStream::new(20, 0).rng();
        let r = sample_killed_stable_position(1.5, &unit(), 0.0, 1.0, 1e-3, &mut rng).unwrap();
        assert_eq!(r, (1.0, true));
        assert!(sample_killed_stable_position(2.0, &unit(), 1.0, 4.0, 1e-3, &mut rng).is_err());
        assert!(sample_killed_stable_position(2.0, &unit(), 1.0, 0.0, 1e-3, &mut rng).is_err());
        assert!(sample_killed_stable_position(2.5, &unit(), 1.0, 1.0, 1e-3, &mut rng).is_err());
    }

    #[test]
    fn split_handles_remainders() {
        let s = StableStep::new(2.0, 1e-3).unwrap();
        assert_eq!(s.split(1.0), (1000, 0.0));
        assert_eq!(s.split(0.0), (0, 0.0));
        let (k, r) = s.split(0.0125);
        assert_eq!(k, 12);
        assert!((r - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn brownian_survival_matches_series() {
        // P(τ_D > 1) from π/2 = Σ_n odd e^{-n²}(4/(nπ)) sin(nπ/2)
        let oracle: f64 = (0..20)
            .map(|j| {
                let n = (2 * j + 1) as f64;
                (-n * n).exp() * 4.0 / (n * PI) * (n * PI / 2.0).sin()
            })
            .sum();
        let s = RngStream::new(21, 0);
        let run = |delta: f64| -> (f64, f64) {
            let v: Vec<f64> = (0..20_000u64)
                .map(|m| {
                    let mut rng = s.substream(m).rng();
                    let (_, alive) =
                        sample_killed_stable_position(2.0, &unit(), 1.0, PI / 2.0, delta, &mut rng).unwrap();
                    if alive {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            mean_se(&v)
        };
        let (m, se) = run(1e-4);
        // discrete monitoring overestimates survival by about 0.5826·√(2δ)·|∂_n u|
        let bias = 0.5826 * (2e-4f64).sqrt() * 2.0 * (-1.0f64).exp() * 4.0 / PI;
        assert!(m >= oracle - 3.0 * se, "{m} vs {oracle}");
        assert!(m - oracle <= 3.0 * se + 2.0 * bias, "{m} vs {oracle} ({se}, {bias})");
    }

    #[test]
    fn symmetric_about_centre() {
        let s = RngStream::new(22, 0);
        let mut pos = Vec::new();
        for m in 0..20_000u64 {
            let mut rng = s.substream(m).rng();
            let (x, alive) = sample_killed_stable_position(1.5, &unit(), 0.5, PI / 2.0, 1e-3, &mut rng).unwrap();
            if alive {
                pos.push(x);
            }
        }
        let refl: Vec<f64> = pos.iter().map(|x| PI - x).collect();
        let half = pos.len() / 2;
        let p = ks_p_value(ks_two_sample(&pos[..half], &refl[half..]), half, pos.len() - half);
        assert!(p > 0.01, "p = {p}");
    }
}
