use crate::error::{Error, Result};

/// Euler's Gamma function.
///
/// Backed by the Lanczos approximation in `statrs` (reflection below 1/2).
/// Nonpositive integers are poles and are rejected.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("gamma", format!("non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::domain("gamma", format!("pole at {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("ln_gamma", format!("argument {x} must be positive")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Γ(x) for arguments already known to be valid (internal hot paths).
#[inline]
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
