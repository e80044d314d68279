//! φ_n-transforms and the series solution u(t,x) = Σ f̄(n) φ_n(x) h(t, λ_n).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::speckit::relax::HEvaluator;
use crate::spectral::basis::EigenBasis;
use crate::spectral::datum::InitialDatum;

/// Absolute tail tolerance of the partial sums.
pub const TAIL_TOL: f64 = 1e-8;

/// f̄(n) = ∫ φ_n f, n = 1..N, by the trapezoid rule on the basis grid.
pub fn phi_transform(f: &[f64], basis: &EigenBasis) -> Result<Vec<f64>> {
    if f.len() != basis.grid().len() {
        return Err(Error::Shape { op: "phi_transform", expected: basis.grid().len(), got: f.len() });
    }
    Ok((1..=basis.len()).map(|n| basis.inner(basis.samples(n), f)).collect())
}

/// ‖f‖² − Σ_{n≤k} f̄(n)² for k = 1..N.
pub fn parseval_defects(f: &[f64], coeffs: &[f64], basis: &EigenBasis) -> Vec<f64> {
    let norm2 = basis.inner(f, f);
    let mut acc = 0.0;
    coeffs
        .iter()
        .map(|c| {
            acc += c * c;
            norm2 - acc
        })
        .collect()
}

/// h(t, λ_n) for the terms that matter at a given time.
#[derive(Debug, Clone)]
pub struct HValues {
    /// h(t, λ_n); zero for terms skipped by the tail rule.
    pub values: Vec<f64>,
    /// Number of leading terms evaluated.
    pub terms: usize,
    /// Upper bound of the omitted part of the weighted sum.
    pub tail_bound: f64,
}

/// Series solution on a fixed basis with a fixed temporal evaluator.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    basis: Arc<EigenBasis>,
    coeffs: Vec<f64>,
    h: HEvaluator,
    datum_norm2: Option<f64>,
}

impl SpectralSolution {
    pub fn new(basis: Arc<EigenBasis>, coeffs: Vec<f64>, h: HEvaluator) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape { op: "SpectralSolution", expected: basis.len(), got: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::numerical("SpectralSolution", "non-finite coefficient"));
        }
        Ok(SpectralSolution { basis, coeffs, h, datum_norm2: None })
    }

    /// Projects a built-in datum onto the basis.
    pub fn from_datum(basis: Arc<EigenBasis>, datum: InitialDatum, h: HEvaluator) -> Result<Self> {
        datum.validate(&basis)?;
        let f = datum.sample(&basis);
        let coeffs = phi_transform(&f, &basis)?;
        let norm2 = basis.inner(&f, &f);
        let mut s = SpectralSolution::new(basis, coeffs, h)?;
        s.datum_norm2 = Some(norm2);
        Ok(s)
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<EigenBasis> {
        Arc::clone(&self.basis)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn evaluator(&self) -> &HEvaluator {
        &self.h
    }

    /// ‖f‖² − Σ f̄(n)² when the solution was built from sampled data.
    pub fn parseval_defect(&self) -> Option<f64> {
        self.datum_norm2.map(|n2| n2 - self.coeffs.iter().map(|c| c * c).sum::<f64>())
    }

    /// h(t, λ_n) with the tail rule applied to weights |f̄(n)|·sup|φ_n|·g_n.
    pub fn h_values_weighted(&self, t: f64, g: impl Fn(usize) -> f64) -> Result<HValues> {
        let n = self.coeffs.len();
        let a: Vec<f64> = (1..=n).map(|k| self.coeffs[k - 1].abs() * self.basis.sup(k) * g(k)).collect();
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + a[k];
        }
        let mut values = vec![0.0; n];
        if t == 0.0 {
            values.iter_mut().for_each(|v| *v = 1.0);
            return Ok(HValues { values, terms: n, tail_bound: 0.0 });
        }
        let mut bound = 1.0;
        for k in 0..n {
            if suffix[k] * bound <= TAIL_TOL {
                return Ok(HValues { values, terms: k, tail_bound: suffix[k] * bound });
            }
            if a[k] == 0.0 {
                continue;
            }
            let v = self.h.eval(t, self.basis.lambda(k + 1))?;
            values[k] = v;
            bound = v.max(0.0);
        }
        Ok(HValues { values, terms: n, tail_bound: 0.0 })
    }

    pub fn h_values(&self, t: f64) -> Result<HValues> {
        self.h_values_weighted(t, |_| 1.0)
    }

    /// u(t, x); zero outside D. At t = 0 this is the N-term reconstruction of f.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let hv = self.h_values(t)?;
        Ok(self.eval_with(&hv, x))
    }

    pub fn eval_with(&self, hv: &HValues, x: f64) -> f64 {
        if !self.basis.domain().contains(x) {
            return 0.0;
        }
        (0..hv.terms)
            .filter(|&k| hv.values[k] != 0.0)
            .map(|k| self.coeffs[k] * self.basis.phi(k + 1, x) * hv.values[k])
            .sum()
    }

    /// u(t, ·) on the basis grid.
    pub fn grid_values(&self, t: f64) -> Result<Vec<f64>> {
        let hv = self.h_values(t)?;
        let mut out = vec![0.0; self.basis.grid().len()];
        for k in 0..hv.terms {
            let w = self.coeffs[k] * hv.values[k];
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.basis.samples(k + 1)) {
                *o += w * p;
            }
        }
        Ok(out)
    }

    /// ‖u(t, ·)‖₂ by grid quadrature.
    pub fn l2_norm(&self, t: f64) -> Result<f64> {
        let u = self.grid_values(t)?;
        Ok(self.basis.inner(&u, &u).sqrt())
    }

    /// −(−Δ)^{α/2}u(t, x) applied term by term: Σ f̄(n) φ_n(x) (−λ_n) h(t, λ_n).
    pub fn generator(&self, t: f64, x: f64) -> Result<f64> {
        let hv = self.h_values_weighted(t, |k| self.basis.lambda(k))?;
        Ok(self.generator_with(&hv, x))
    }

    pub fn generator_with(&self, hv: &HValues, x: f64) -> f64 {
        if !self.basis.domain().contains(x) {
            return 0.0;
        }
        (0..hv.terms)
            .filter(|&k| hv.values[k] != 0.0)
            .map(|k| -self.basis.lambda(k + 1) * self.coeffs[k] * self.basis.phi(k + 1, x) * hv.values[k])
            .sum()
    }
}

/// Convenience wrapper over [`SpectralSolution::eval`].
pub fn solve_series(solution: &SpectralSolution, t: f64, x: f64) -> Result<f64> {
    solution.eval(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::FiniteAtoms;
    use crate::spectral::basis::{eigen_exact_laplace, IntervalDomain};
    use std::f64::consts::PI;

    fn basis(n: usize) -> Arc<EigenBasis> {
        Arc::new(eigen_exact_laplace(IntervalDomain::new(0.0, PI).unwrap(), n).unwrap())
    }

    #[test]
    fn transform_of_eigenmode_is_unit_vector() {
        let b = basis(8);
        let c = phi_transform(b.samples(2), &b).unwrap();
        for (k, v) in c.iter().enumerate() {
            let e = if k == 1 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-8);
        }
        let z = phi_transform(&vec![0.0; b.grid().len()], &b).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        assert!(phi_transform(&[1.0, 2.0], &b).is_err());
    }

    #[test]
    fn quadratic_coefficients_closed_form() {
        // ∫₀^π x(π−x) sin(nx) dx = 2(1 − (−1)^n)/n³
        let b = basis(16);
        let f = InitialDatum::Quadratic.sample(&b);
        let c = phi_transform(&f, &b).unwrap();
        for n in 1..=16 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let exact = (2.0 / PI).sqrt() * 2.0 * (1.0 - sign) / (n as f64).powi(3);
            assert!((c[n - 1] - exact).abs() < 1e-9, "n={n}: {} vs {exact}", c[n - 1]);
        }
        let d = parseval_defects(&f, &c, &b);
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(*d.last().unwrap() > -1e-10);
    }

    #[test]
    fn single_mode_solution() {
        let b = basis(4);
        let h = HEvaluator::single(0.5).unwrap();
        let s = SpectralSolution::from_datum(b.clone(), InitialDatum::Eigenmode(1), h.clone()).unwrap();
        let x = PI / 2.0;
        assert!((s.eval(0.0, x).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-8);
        let u = s.eval(0.7, x).unwrap();
        let expect = b.phi(1, x) * h.eval(0.7, 1.0).unwrap();
        assert!((u - expect).abs() < 1e-8);
        assert_eq!(s.eval(0.7, -1.0).unwrap(), 0.0);
        assert_eq!(s.eval(0.7, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn generator_matches_eigen_action() {
        let b = basis(6);
        let h = HEvaluator::multi(FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap());
        let s = SpectralSolution::new(b.clone(), vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.0], h).unwrap();
        let x = 1.1;
        let u = s.eval(0.4, x).unwrap();
        let g = s.generator(0.4, x).unwrap();
        assert!((g + 4.0 * u).abs() < 1e-14);
    }

    #[test]
    fn zero_datum_is_zero() {
        let b = basis(6);
        let s = SpectralSolution::from_datum(b, InitialDatum::Zero, HEvaluator::single(0.4).unwrap()).unwrap();
        assert_eq!(s.eval(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(s.h_values(0.5).unwrap().terms, 0);
    }
}
