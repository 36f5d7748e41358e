//! Time-rescaling functions ψ for ψ-fractional operators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

/// A strictly increasing time rescaling with a known inverse.
pub trait TimeScale {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn inverse(&self, x: f64) -> f64;

    /// Short human-readable tag, used in trajectory metadata.
    fn descriptor(&self) -> String;

    /// ψ(t) − ψ(s), the only way the solver sees ψ.
    fn increment(&self, s: f64, t: f64) -> f64 {
        self.value(t) - self.value(s)
    }
}

/// The built-in family of rescalings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PsiFunction {
    /// ψ(t) = t
    Identity,
    /// ψ(t) = t + c
    Shift(f64),
    /// ψ(t) = t^p, t ≥ 0
    Power(f64),
    /// ψ(t) = √t, t ≥ 0; ψ′ is unbounded at 0
    Sqrt,
}

impl PsiFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(FracError::validation(
                "psi",
                format!("power exponent must be positive, got {p}"),
            ));
        }
        Ok(PsiFunction::Power(p))
    }

    pub fn shift(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(FracError::validation("psi", "shift must be finite"));
        }
        Ok(PsiFunction::Shift(c))
    }

    /// Lower end of the domain of ψ.
    pub fn domain_start(&self) -> f64 {
        match self {
            PsiFunction::Identity | PsiFunction::Shift(_) => f64::NEG_INFINITY,
            PsiFunction::Power(_) | PsiFunction::Sqrt => 0.0,
        }
    }

    /// Checks that ψ is defined on [a, b] and ψ′ > 0 on the open interval
    /// (sampled on 257 interior points).
    pub fn validate_on(&self, a: f64, b: f64) -> Result<()> {
        if let PsiFunction::Power(p) = self {
            if !(*p > 0.0) {
                return Err(FracError::validation(
                    "psi",
                    "power exponent must be positive",
                ));
            }
        }
        if !(a < b) {
            return Err(FracError::validation(
                "horizon",
                format!("need a < b, got [{a}, {b}]"),
            ));
        }
        if a < self.domain_start() {
            return Err(FracError::validation(
                "psi",
                format!("{self} is not defined at t = {a}"),
            ));
        }
        let samples = 257;
        for k in 1..=samples {
            let t = a + (b - a) * k as f64 / (samples + 1) as f64;
            let d = self.derivative(t);
            if !(d > 0.0) || !d.is_finite() {
                return Err(FracError::validation(
                    "psi",
                    format!("{self} has non-positive derivative at t = {t}"),
                ));
            }
        }
        Ok(())
    }
}

impl TimeScale for PsiFunction {
    fn value(&self, t: f64) -> f64 {
        match *self {
            PsiFunction::Identity => t,
            PsiFunction::Shift(c) => t + c,
            PsiFunction::Power(p) => t.powf(p),
            PsiFunction::Sqrt => t.sqrt(),
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match *self {
            PsiFunction::Identity | PsiFunction::Shift(_) => 1.0,
            PsiFunction::Power(p) => p * t.powf(p - 1.0),
            PsiFunction::Sqrt => 0.5 / t.sqrt(),
        }
    }

    fn inverse(&self, x: f64) -> f64 {
        match *self {
            PsiFunction::Identity => x,
            PsiFunction::Shift(c) => x - c,
            PsiFunction::Power(p) => x.powf(1.0 / p),
            PsiFunction::Sqrt => x * x,
        }
    }

    fn descriptor(&self) -> String {
        self.to_string()
    }

    fn increment(&self, s: f64, t: f64) -> f64 {
        match *self {
            // Exact for translations: the constant never enters the arithmetic.
            PsiFunction::Identity | PsiFunction::Shift(_) => t - s,
            _ => self.value(t) - self.value(s),
        }
    }
}

impl fmt::Display for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::Identity => write!(f, "identity"),
            PsiFunction::Shift(c) => write!(f, "shift:{c}"),
            PsiFunction::Power(p) => write!(f, "power:{p}"),
            PsiFunction::Sqrt => write!(f, "sqrt"),
        }
    }
}

impl FromStr for PsiFunction {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let parse_arg = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| {
                FracError::validation("psi", format!("'{kind}' needs a numeric argument"))
            })?;
            a.parse::<f64>()
                .map_err(|_| FracError::validation("psi", format!("bad number '{a}' in '{s}'")))
        };
        match (kind, arg) {
            ("identity", None) => Ok(PsiFunction::Identity),
            ("sqrt", None) => Ok(PsiFunction::Sqrt),
            ("shift", a) => PsiFunction::shift(parse_arg(a)?),
            ("power", a) => PsiFunction::power(parse_arg(a)?),
            _ => Err(FracError::validation(
                "psi",
                format!("unknown psi spec '{s}'"),
            )),
        }
    }
}

impl TryFrom<String> for PsiFunction {
    type Error = FracError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PsiFunction> for String {
    fn from(p: PsiFunction) -> String {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [PsiFunction; 5] = [
        PsiFunction::Identity,
        PsiFunction::Shift(0.2),
        PsiFunction::Power(2.0),
        PsiFunction::Power(0.7),
        PsiFunction::Sqrt,
    ];

    #[test]
    fn inverse_round_trip() {
        for psi in ALL {
            for k in 0..=200 {
                let t = 1.8397 * k as f64 / 200.0;
                let back = psi.inverse(psi.value(t));
                assert!((back - t).abs() < 1e-12, "{psi}: {t} -> {back}");
            }
        }
    }

    #[test]
    fn strictly_increasing_on_open_horizon() {
        for psi in ALL {
            psi.validate_on(0.0, 1.8397).unwrap();
        }
    }

    #[test]
    fn parses_descriptors() {
        assert_eq!(
            "identity".parse::<PsiFunction>().unwrap(),
            PsiFunction::Identity
        );
        assert_eq!(
            "shift:0.2".parse::<PsiFunction>().unwrap(),
            PsiFunction::Shift(0.2)
        );
        assert_eq!(
            "power:2".parse::<PsiFunction>().unwrap(),
            PsiFunction::Power(2.0)
        );
        assert_eq!("sqrt".parse::<PsiFunction>().unwrap(), PsiFunction::Sqrt);
        for psi in ALL {
            assert_eq!(psi.to_string().parse::<PsiFunction>().unwrap(), psi);
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!("power:-1".parse::<PsiFunction>().is_err());
        assert!("power:0".parse::<PsiFunction>().is_err());
        assert!("power".parse::<PsiFunction>().is_err());
        assert!("shift:abc".parse::<PsiFunction>().is_err());
        assert!("log".parse::<PsiFunction>().is_err());
        assert!(PsiFunction::Sqrt.validate_on(-1.0, 1.0).is_err());
    }
}
