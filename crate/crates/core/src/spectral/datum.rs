use crate::error::{Error, Result};
use crate::spectral::basis::{EigenBasis, IntervalDomain};

/// Built-in initial data f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDatum {
    /// f = φ_k of the basis in use.
    Eigenmode(usize),
    /// f(x) = exp(−1/(1 − ((x−c)/r)²)) for |x − c| < r, zero elsewhere.
    Bump { center: f64, radius: f64 },
    /// f(x) = (x − a)(b − x); on (0, π) this is x(π − x).
    Quadratic,
    /// f ≡ 0.
    Zero,
}

impl InitialDatum {
    pub fn validate(&self, basis: &EigenBasis) -> Result<()> {
        match *self {
            InitialDatum::Eigenmode(k) if k == 0 || k > basis.len() => {
                Err(Error::Index { op: "InitialDatum", index: k, len: basis.len() })
            }
            InitialDatum::Bump { center, radius } => {
                let d = basis.domain();
                if !(radius > 0.0) || center - radius < d.a() || center + radius > d.b() {
                    return Err(Error::domain(
                        "InitialDatum",
                        format!("bump ({center}, {radius}) must have support inside the domain"),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// f(x); zero outside the domain.
    pub fn eval(&self, basis: &EigenBasis, x: f64) -> f64 {
        let d: IntervalDomain = basis.domain();
        if !d.contains(x) {
            return 0.0;
        }
        match *self {
            InitialDatum::Eigenmode(k) => basis.phi(k, x),
            InitialDatum::Bump { center, radius } => bump(center, radius, x),
            InitialDatum::Quadratic => (x - d.a()) * (d.b() - x),
            InitialDatum::Zero => 0.0,
        }
    }

    pub fn sample(&self, basis: &EigenBasis) -> Vec<f64> {
        basis.sample(|x| self.eval(basis, x))
    }

    pub fn label(&self) -> String {
        match *self {
            InitialDatum::Eigenmode(k) => format!("eigenmode {k}"),
            InitialDatum::Bump { center, radius } => format!("bump({center}, {radius})"),
            InitialDatum::Quadratic => "poly-x(pi-x)".to_string(),
            InitialDatum::Zero => "zero".to_string(),
        }
    }
}

/// Smooth compactly supported bump.
pub fn bump(center: f64, radius: f64, x: f64) -> f64 {
    let z = (x - center) / radius;
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}
