//! Gamma-function helpers used to form Mittag-Leffler series coefficients.

use crate::error::{FracError, Result};

/// Above this argument Γ(x) overflows an `f64`, so coefficients switch to the log route.
const GAMMA_DIRECT_LIMIT: f64 = 170.0;

/// Natural logarithm of Γ(x) for x > 0.
pub fn gamma_ln(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FracError::domain(format!(
            "gamma_ln requires a finite positive argument, got {x}"
        )));
    }
    Ok(libm::lgamma(x))
}

/// 1/Γ(x) for x > 0.
///
/// Uses Γ directly while it is representable, which keeps integer and
/// half-integer arguments accurate to a few ulp, and falls back to
/// exp(−ln Γ(x)) once Γ would overflow.
pub fn recip_gamma(x: f64) -> Result<f64> {
    if x < GAMMA_DIRECT_LIMIT {
        gamma_ln(x)?;
        Ok(1.0 / libm::tgamma(x))
    } else {
        Ok((-gamma_ln(x)?).exp())
    }
}

/// Γ(x) for x > 0 (returns +inf past the representable range).
pub fn gamma(x: f64) -> Result<f64> {
    gamma_ln(x)?;
    Ok(libm::tgamma(x))
}
