//! Multi-term stable subordinators W = Σ c_j W^{β_j} and their inverses.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mixture::FiniteAtoms;
use crate::stochastic::stable::positive_stable;

/// W sampled at kΔ, k = 0..K, with W(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    step: f64,
    values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::domain("SubordinatorPath", format!("step {step} must be positive")));
        }
        if values.first() != Some(&0.0) {
            return Err(Error::domain("SubordinatorPath", "W(0) must be 0"));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("SubordinatorPath", "values must be finite and nondecreasing"));
        }
        Ok(SubordinatorPath { step, values })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Operational-time horizon KΔ.
    pub fn horizon(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }
}

/// One step of W over operational time Δ: Σ_j c_j Δ^{1/β_j} S_j with
/// independent standard positive β_j-stable S_j.
#[derive(Debug, Clone)]
pub struct MultitermStep {
    step: f64,
    terms: Vec<(f64, f64)>,
}

impl MultitermStep {
    pub fn new(atoms: &FiniteAtoms, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::domain("sample_multiterm_path", format!("step {step} must be positive")));
        }
        let terms = atoms.atoms().iter().map(|a| (a.beta, a.c * step.powf(1.0 / a.beta))).collect();
        Ok(MultitermStep { step, terms })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.terms.iter().map(|&(b, scale)| scale * positive_stable(b, rng)).sum()
    }
}

pub fn sample_multiterm_path<R: Rng + ?Sized>(
    atoms: &FiniteAtoms,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::domain("sample_multiterm_path", format!("horizon {horizon} must be positive")));
    }
    let step = MultitermStep::new(atoms, dt)?;
    let k = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut values = Vec::with_capacity(k + 1);
    let mut w = 0.0;
    values.push(w);
    for _ in 0..k {
        w += step.draw(rng);
        values.push(w);
    }
    SubordinatorPath::new(dt, values)
}

/// E_t = Δ·min{k : W(kΔ) > t}, the right-endpoint discretization of
/// inf{τ : W_τ > t}. E_0 = 0.
pub fn sample_inverse_subordinator(path: &SubordinatorPath, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("sample_inverse_subordinator", format!("level {t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let k = path.values.partition_point(|&w| w <= t);
    if k == path.values.len() {
        return Err(Error::InsufficientHorizon { level: t, horizon: path.horizon() });
    }
    Ok(k as f64 * path.step)
}

/// Streams W until it exceeds every level in `levels` (ascending) and
/// returns the discretized hitting times for all of them.
pub fn first_passage_times<R: Rng + ?Sized>(
    step: &MultitermStep,
    levels: &[f64],
    max_steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; levels.len()];
    let mut w = 0.0;
    let mut k = 0usize;
    for (i, &t) in levels.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        while w <= t {
            if k == max_steps {
                return Err(Error::InsufficientHorizon { level: t, horizon: k as f64 * step.step });
            }
            w += step.draw(rng);
            k += 1;
        }
        out[i] = k as f64 * step.step;
    }
    Ok(out)
}

/// Exact E_t for a single atom: W_τ has the law of cτ^{1/β}S, so
/// E_t = (t/(cS))^β.
pub fn sample_inverse_single_exact<R: Rng + ?Sized>(beta: f64, c: f64, t: f64, rng: &mut R) -> f64 {
    (t / (c * positive_stable(beta, rng))).powf(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;
    use crate::stochastic::rng::RngStream;

    #[test]
    fn linear_path_hits_ceiling() {
        let dt = 0.01;
        let values: Vec<f64> = (0..=300).map(|k| k as f64 * dt).collect();
        let path = SubordinatorPath::new(dt, values).unwrap();
        for t in [0.5, 1.234, 2.0] {
            let e = sample_inverse_subordinator(&path, t).unwrap();
            // first k with kΔ > t
            let expect = ((t / dt).floor() + 1.0) * dt;
            assert!((e - expect).abs() < 1e-12, "{t}: {e} vs {expect}");
            assert!(e > t && e <= t + dt + 1e-12);
        }
        assert_eq!(sample_inverse_subordinator(&path, 0.0).unwrap(), 0.0);
        assert!(matches!(sample_inverse_subordinator(&path, 5.0), Err(Error::InsufficientHorizon { .. })));
    }

    #[test]
    fn paths_are_monotone_and_rooted() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let mut rng = RngStream::new(9, 0).rng();
        for _ in 0..50 {
            let p = sample_multiterm_path(&atoms, 1.0, 0.01, &mut rng).unwrap();
            assert_eq!(p.values()[0], 0.0);
            assert!(p.values().windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(p.values().len(), 101);
        }
    }

    #[test]
    fn single_atom_scales_by_c() {
        let c = 2.5;
        let atoms = FiniteAtoms::single(0.4, c).unwrap();
        let unit = FiniteAtoms::single(0.4, 1.0).unwrap();
        let s = RngStream::new(10, 0);
        let a = sample_multiterm_path(&atoms, 0.5, 0.1, &mut s.rng()).unwrap();
        let b = sample_multiterm_path(&unit, 0.5, 0.1, &mut s.rng()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - c * y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn laplace_functional_of_path() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        let v: Vec<f64> = (0..100_000)
            .map(|_| (-sample_multiterm_path(&atoms, 1.0, 0.25, &mut rng).unwrap().values()[4]).exp())
            .collect();
        let (m, se) = mean_se(&v);
        let expect = (-2f64).exp();
        assert!((m - expect).abs() < 3.0 * se, "{m} vs {expect} ({se})");
    }

    #[test]
    fn exact_single_atom_mean() {
        // E[E_t] = t^β/(c^β Γ(1+β))
        let mut rng = RngStream::new(13, 0).rng();
        let v: Vec<f64> = (0..100_000).map(|_| sample_inverse_single_exact(0.5, 1.0, 1.0, &mut rng)).collect();
        let (m, se) = mean_se(&v);
        let expect = 1.0 / statrs::function::gamma::gamma(1.5);
        assert!((m - expect).abs() < 3.0 * se, "{m} vs {expect}");
    }

    #[test]
    fn streaming_matches_path() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let step = MultitermStep::new(&atoms, 0.01).unwrap();
        let s = RngStream::new(12, 0);
        let path = sample_multiterm_path(&atoms, 20.0, 0.01, &mut s.rng()).unwrap();
        let levels = [0.0, 0.5, 1.0];
        let e = first_passage_times(&step, &levels, 1_000_000, &mut s.rng()).unwrap();
        for (l, v) in levels.iter().zip(e) {
            assert!((sample_inverse_subordinator(&path, *l).unwrap() - v).abs() < 1e-12);
        }
    }
}
