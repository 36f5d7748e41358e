//! Two-parameter Mittag-Leffler functions E_{α,α'} of scalars and matrices,
//! evaluated by their defining power series.
//!
//! E_{α,α'}(z) = Σ_{l≥0} z^l / Γ(lα + α')
//!
//! The series is only used on moderate arguments (‖M‖ up to about 10);
//! there is no asymptotic or contour-integral branch.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::matrix::SquareMatrix;
use crate::special::recip_gamma;

/// When to stop summing a Mittag-Leffler series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// A term is "small" when its norm is below `rel_tol` times the partial-sum norm.
    pub rel_tol: f64,
    /// Number of successive small terms required before stopping.
    pub consecutive_small_terms: usize,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: 1e-14,
            consecutive_small_terms: 3,
            max_terms: 500,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(FracError::validation("rel_tol", "must be positive"));
        }
        if self.consecutive_small_terms < 2 {
            return Err(FracError::validation(
                "consecutive_small_terms",
                "must be at least 2",
            ));
        }
        if self.max_terms < 10 {
            return Err(FracError::validation("max_terms", "must be at least 10"));
        }
        Ok(())
    }

    /// Early terms of E_{α,α'} can grow before they decay, so never stop
    /// before ⌈1/α⌉ + 2 terms.
    fn min_terms(&self, alpha: f64) -> usize {
        (1.0 / alpha).ceil() as usize + 2
    }
}

fn check_params(alpha: f64, alpha_prime: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FracError::domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(alpha_prime > 0.0) || !alpha_prime.is_finite() {
        return Err(FracError::domain(format!(
            "alpha' must be positive, got {alpha_prime}"
        )));
    }
    Ok(())
}

/// Tracks the stopping rule shared by the scalar and matrix series.
struct Stopper {
    needed: usize,
    min_terms: usize,
    rel_tol: f64,
    run: usize,
}

impl Stopper {
    fn new(policy: &TruncationPolicy, alpha: f64) -> Self {
        Stopper {
            needed: policy.consecutive_small_terms,
            min_terms: policy.min_terms(alpha),
            rel_tol: policy.rel_tol,
            run: 0,
        }
    }

    /// Returns true once enough consecutive small terms have been added.
    fn update(&mut self, terms_summed: usize, term_norm: f64, sum_norm: f64) -> bool {
        if term_norm == 0.0 || term_norm < self.rel_tol * sum_norm {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= self.needed && terms_summed >= self.min_terms
    }
}

/// E_{α,α'}(z) for real z.
pub fn mittag_leffler_scalar(
    alpha: f64,
    alpha_prime: f64,
    z: f64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    check_params(alpha, alpha_prime)?;
    policy.validate()?;
    if !z.is_finite() {
        return Err(FracError::domain("Mittag-Leffler argument is not finite"));
    }

    let mut stopper = Stopper::new(policy, alpha);
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut last = f64::INFINITY;
    for l in 0..policy.max_terms {
        let term = power * recip_gamma(l as f64 * alpha + alpha_prime)?;
        sum += term;
        last = term.abs();
        if stopper.update(l + 1, last, sum.abs()) {
            return Ok(sum);
        }
        power *= z;
        if !power.is_finite() {
            break;
        }
    }
    Err(FracError::Convergence {
        terms: policy.max_terms,
        partial_sum: vec![sum],
        partial_sum_norm: sum.abs(),
        last_term_norm: last,
    })
}

/// One-parameter E_α(z) = E_{α,1}(z).
pub fn mittag_leffler_one(alpha: f64, z: f64, policy: &TruncationPolicy) -> Result<f64> {
    mittag_leffler_scalar(alpha, 1.0, z, policy)
}

/// E_{α,α'}(M) = Σ M^l / Γ(lα + α'), powers accumulated by repeated multiplication.
pub fn mittag_leffler_matrix(
    alpha: f64,
    alpha_prime: f64,
    m: &SquareMatrix,
    policy: &TruncationPolicy,
) -> Result<SquareMatrix> {
    check_params(alpha, alpha_prime)?;
    policy.validate()?;
    m.check_finite()?;

    let n = m.dim();
    let mut stopper = Stopper::new(policy, alpha);
    let mut sum = SquareMatrix::zeros(n);
    let mut power = SquareMatrix::identity(n);
    let mut last = f64::INFINITY;
    for l in 0..policy.max_terms {
        let c = recip_gamma(l as f64 * alpha + alpha_prime)?;
        sum.add_scaled(&power, c);
        last = power.norm_inf() * c;
        if stopper.update(l + 1, last, sum.norm_inf()) {
            return Ok(sum);
        }
        power = power.matmul(m);
        if !power.as_slice().iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(FracError::Convergence {
        terms: policy.max_terms,
        partial_sum_norm: sum.norm_inf(),
        partial_sum: sum.as_slice().to_vec(),
        last_term_norm: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn exponential_cases() {
        let e = mittag_leffler_scalar(1.0, 1.0, 1.0, &policy()).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-15);
        let e12 = mittag_leffler_scalar(1.0, 2.0, 1.0, &policy()).unwrap();
        assert!((e12 - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn cosh_case_matches_long_series() {
        // E_2(z^2) = cosh z; reference: 200 raw terms.
        let mut reference = 0.0;
        let mut p = 1.0;
        for l in 0..200 {
            reference += p * recip_gamma(2.0 * l as f64 + 1.0).unwrap();
            p *= 4.0;
        }
        let v = mittag_leffler_scalar(2.0, 1.0, 4.0, &policy()).unwrap();
        assert!((v - reference).abs() < 1e-14 * reference);
        assert!((v - 2f64.cosh()).abs() < 1e-9);
    }

    #[test]
    fn zero_argument_is_exact() {
        for alpha in [0.3, 0.5, 0.85, 1.0, 1.7] {
            assert_eq!(mittag_leffler_one(alpha, 0.0, &policy()).unwrap(), 1.0);
            let m = mittag_leffler_matrix(alpha, 1.0, &SquareMatrix::zeros(4), &policy()).unwrap();
            assert_eq!(m, SquareMatrix::identity(4));
        }
    }

    #[test]
    fn diagonal_matrix_reduces_to_scalar() {
        let m = mittag_leffler_matrix(1.0, 1.0, &SquareMatrix::diagonal(&[1.0, 2.0]), &policy())
            .unwrap();
        assert!((m[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((m[(1, 1)] - 2f64.exp()).abs() < 1e-13);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(1, 0)], 0.0);
    }

    #[test]
    fn half_order_at_minus_one() {
        // E_{1/2}(-1) = e * erfc(1)
        let v = mittag_leffler_one(0.5, -1.0, &policy()).unwrap();
        let expected = std::f64::consts::E * libm::erfc(1.0);
        assert!((v - expected).abs() < 1e-13, "{v} vs {expected}");
    }

    #[test]
    fn reports_non_convergence() {
        let tight = TruncationPolicy {
            max_terms: 10,
            ..TruncationPolicy::default()
        };
        match mittag_leffler_scalar(0.5, 1.0, 8.0, &tight) {
            Err(FracError::Convergence {
                terms, partial_sum, ..
            }) => {
                assert_eq!(terms, 10);
                assert_eq!(partial_sum.len(), 1);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(mittag_leffler_scalar(0.0, 1.0, 1.0, &policy()).is_err());
        assert!(mittag_leffler_scalar(1.0, -1.0, 1.0, &policy()).is_err());
        let bad = TruncationPolicy {
            consecutive_small_terms: 1,
            ..TruncationPolicy::default()
        };
        assert!(mittag_leffler_scalar(1.0, 1.0, 1.0, &bad).is_err());
    }
}
