use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FracError, Result};
use crate::matrix::SquareMatrix;
use crate::mittag_leffler::TruncationPolicy;
use crate::psi::{PsiFunction, TimeScale};

/// Fractional order α ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(FractionalOrder(alpha))
        } else {
            Err(FracError::validation(
                "alpha",
                format!("fractional order must lie in (0, 1], got {alpha}"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = FracError;

    fn try_from(v: f64) -> Result<Self> {
        FractionalOrder::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

impl fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// ᶜD_a^{α,ψ} y = A y + B u(t), y(a) = y0.
#[derive(Debug, Clone)]
pub struct LinearFracSystem {
    pub a: SquareMatrix,
    pub b: Vec<f64>,
    pub alpha: FractionalOrder,
    pub psi: PsiFunction,
    pub start: f64,
    pub y0: Vec<f64>,
    pub policy: TruncationPolicy,
}

impl LinearFracSystem {
    pub fn new(
        a: SquareMatrix,
        b: Vec<f64>,
        alpha: FractionalOrder,
        psi: PsiFunction,
        start: f64,
        y0: Vec<f64>,
    ) -> Result<Self> {
        let n = a.dim();
        if b.len() != n {
            return Err(FracError::Dimension(format!(
                "input column has {} rows, A is {n}x{n}",
                b.len()
            )));
        }
        if y0.len() != n {
            return Err(FracError::Dimension(format!(
                "initial state has {} entries, A is {n}x{n}",
                y0.len()
            )));
        }
        a.check_finite()?;
        if !b.iter().chain(&y0).all(|v| v.is_finite()) || !start.is_finite() {
            return Err(FracError::domain("system data must be finite"));
        }
        if start < psi.domain_start() {
            return Err(FracError::validation(
                "psi",
                format!("{psi} is not defined at the start time {start}"),
            ));
        }
        Ok(LinearFracSystem {
            a,
            b,
            alpha,
            psi,
            start,
            y0,
            policy: TruncationPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_psi(mut self, psi: PsiFunction) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_alpha(mut self, alpha: FractionalOrder) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// ψ(t) − ψ(a)
    pub fn elapsed(&self, t: f64) -> f64 {
        self.psi.increment(self.start, t)
    }
}

/// Piecewise-constant scalar infusion rate on right-open segments
/// [t_{k−1}, t_k); the last segment also covers its end point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfusionSchedule {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
}

impl InfusionSchedule {
    pub fn new(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(FracError::validation(
                "schedule.breakpoints",
                "need at least a start and an end time",
            ));
        }
        if rates.len() + 1 != breakpoints.len() {
            return Err(FracError::validation(
                "schedule.rates",
                format!(
                    "{} breakpoints need {} rates, got {}",
                    breakpoints.len(),
                    breakpoints.len() - 1,
                    rates.len()
                ),
            ));
        }
        if breakpoints.iter().any(|t| !t.is_finite())
            || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(FracError::validation(
                "schedule.breakpoints",
                "must be finite and strictly increasing",
            ));
        }
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(FracError::validation(
                "schedule.rates",
                "must be finite and nonnegative",
            ));
        }
        Ok(InfusionSchedule { breakpoints, rates })
    }

    /// A single constant rate on [start, end].
    pub fn constant(start: f64, end: f64, rate: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![rate])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Interior switch times (excluding the first and last breakpoint).
    pub fn switch_times(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    /// Segments as (start, end, rate).
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.rates)
            .map(|(w, &r)| (w[0], w[1], r))
    }

    /// Rate in effect at `t`; the value at a switch belongs to the next segment.
    pub fn rate_at(&self, t: f64) -> Option<f64> {
        if t < self.start() || t > self.end() {
            return None;
        }
        if t == self.end() {
            return self.rates.last().copied();
        }
        let k = self.breakpoints.partition_point(|&b| b <= t);
        Some(self.rates[k - 1])
    }

    /// Same breakpoints, every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.rates.iter().map(|r| r * factor).collect(),
        )
    }

    /// Stable short hash of the schedule contents.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for v in self.breakpoints.iter().chain(&self.rates) {
            h.update(v.to_le_bytes());
        }
        h.update((self.breakpoints.len() as u64).to_le_bytes());
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `points` uniformly spaced times on [start, end], both ends included.
pub fn uniform_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs at least two points");
    let h = (end - start) / (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k + 1 == points {
                end
            } else {
                start + h * k as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_bounds() {
        assert!(FractionalOrder::new(1.0).is_ok());
        assert!(FractionalOrder::new(0.01).is_ok());
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.2).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn schedule_right_open_convention() {
        let s = InfusionSchedule::new(vec![0.0, 0.5467, 1.8397], vec![106.0907, 0.0]).unwrap();
        assert_eq!(s.rate_at(0.0), Some(106.0907));
        assert_eq!(s.rate_at(0.5466), Some(106.0907));
        assert_eq!(s.rate_at(0.5467), Some(0.0));
        assert_eq!(s.rate_at(1.8397), Some(0.0));
        assert_eq!(s.rate_at(1.9), None);
        assert_eq!(s.rate_at(-0.1), None);
        assert_eq!(s.switch_times(), &[0.5467]);
    }

    #[test]
    fn schedule_validation() {
        assert!(InfusionSchedule::new(vec![0.0], vec![]).is_err());
        assert!(InfusionSchedule::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(InfusionSchedule::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(InfusionSchedule::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(InfusionSchedule::new(vec![0.0, 1.0], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let s1 = InfusionSchedule::constant(0.0, 1.0, 2.0).unwrap();
        let s2 = InfusionSchedule::constant(0.0, 1.0, 2.0).unwrap();
        let s3 = InfusionSchedule::constant(0.0, 1.0, 2.5).unwrap();
        assert_eq!(s1.hash_hex(), s2.hash_hex());
        assert_ne!(s1.hash_hex(), s3.hash_hex());
        assert_eq!(s1.hash_hex().len(), 16);
    }

    #[test]
    fn grid_hits_both_ends() {
        let g = uniform_grid(0.0, 1.8397, 400);
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[399], 1.8397);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn system_dimension_checks() {
        let a = SquareMatrix::identity(2);
        let alpha = FractionalOrder::new(0.9).unwrap();
        assert!(LinearFracSystem::new(
            a.clone(),
            vec![1.0],
            alpha,
            PsiFunction::Identity,
            0.0,
            vec![0.0; 2]
        )
        .is_err());
        assert!(LinearFracSystem::new(
            a.clone(),
            vec![1.0, 0.0],
            alpha,
            PsiFunction::Identity,
            0.0,
            vec![0.0]
        )
        .is_err());
        assert!(LinearFracSystem::new(
            a,
            vec![1.0, 0.0],
            alpha,
            PsiFunction::Sqrt,
            -1.0,
            vec![0.0; 2]
        )
        .is_err());
    }
}
