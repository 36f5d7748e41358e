//! Propofol PK/PD layer: Schnider rate constants with James lean body mass,
//! the four-compartment system (blood, muscle, fat, effect site), equilibrium
//! infusion and the BIS Hill curve.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::matrix::SquareMatrix;
use crate::solver::{InfusionSchedule, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

impl FromStr for Sex {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Sex::Male),
            "female" | "f" => Ok(Sex::Female),
            other => Err(FracError::validation(
                "sex",
                format!("unknown value '{other}'"),
            )),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Male => "male",
            Sex::Female => "female",
        })
    }
}

/// Age in years, weight in kg, height in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatientProfile {
    pub age: f64,
    pub weight: f64,
    pub height: f64,
    pub sex: Sex,
}

/// Ranges the model has been exercised on; outside them a warning is logged.
pub const AGE_RANGE: (f64, f64) = (20.0, 80.0);
pub const WEIGHT_RANGE: (f64, f64) = (50.0, 120.0);
pub const HEIGHT_RANGE: (f64, f64) = (150.0, 200.0);

impl PatientProfile {
    pub fn new(age: f64, weight: f64, height: f64, sex: Sex) -> Result<Self> {
        let p = PatientProfile {
            age,
            weight,
            height,
            sex,
        };
        p.validate()?;
        Ok(p)
    }

    /// 53-year-old man, 77 kg, 177 cm.
    pub fn reference() -> Self {
        PatientProfile {
            age: 53.0,
            weight: 77.0,
            height: 177.0,
            sex: Sex::Male,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("age", self.age),
            ("weight", self.weight),
            ("height", self.height),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FracError::validation(
                    name,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Names of fields outside the tested ranges.
    pub fn out_of_range_fields(&self) -> Vec<&'static str> {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        let mut out = Vec::new();
        if !inside(self.age, AGE_RANGE) {
            out.push("age");
        }
        if !inside(self.weight, WEIGHT_RANGE) {
            out.push("weight");
        }
        if !inside(self.height, HEIGHT_RANGE) {
            out.push("height");
        }
        out
    }
}

/// James formula, kg.
pub fn lean_body_mass(p: &PatientProfile) -> Result<f64> {
    p.validate()?;
    let ratio = p.weight / p.height;
    let lbm = match p.sex {
        Sex::Male => 1.1 * p.weight - 128.0 * ratio * ratio,
        Sex::Female => 1.07 * p.weight - 148.0 * ratio * ratio,
    };
    if !(lbm > 0.0) {
        return Err(FracError::validation(
            "weight",
            format!("James lean body mass is non-positive ({lbm:.3} kg) for this profile"),
        ));
    }
    Ok(lbm)
}

/// Rate constants in 1/min, central volume in litres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkpdParams {
    pub a10: f64,
    pub a12: f64,
    pub a13: f64,
    pub a21: f64,
    pub a31: f64,
    pub ae0: f64,
    pub v1: f64,
    pub lbm: f64,
}

/// Schnider population model.
pub fn schnider_params(p: &PatientProfile) -> Result<PkpdParams> {
    let lbm = lean_body_mass(p)?;
    let out = p.out_of_range_fields();
    if !out.is_empty() {
        warn!(
            "patient {} outside the tested ranges: {}",
            fmt_profile(p),
            out.join(", ")
        );
    }
    let da = p.age - 53.0;
    let a21_den = 18.9 - 0.391 * da;
    if !(a21_den > 1e-9) {
        return Err(FracError::validation(
            "age",
            format!("a21 denominator 18.9 - 0.391 (age - 53) = {a21_den:.4} is not positive"),
        ));
    }
    let params = PkpdParams {
        a10: 0.443 + 0.0107 * (p.weight - 77.0) - 0.0159 * (lbm - 59.0)
            + 0.0062 * (p.height - 177.0),
        a12: 0.302 - 0.0056 * da,
        a13: 0.196,
        a21: (1.29 - 0.024 * da) / a21_den,
        a31: 0.0035,
        ae0: 0.456,
        v1: 4.27,
        lbm,
    };
    params.validate()?;
    Ok(params)
}

fn fmt_profile(p: &PatientProfile) -> String {
    format!("({} y, {} kg, {} cm, {})", p.age, p.weight, p.height, p.sex)
}

impl PkpdParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a10", self.a10),
            ("a12", self.a12),
            ("a13", self.a13),
            ("a21", self.a21),
            ("a31", self.a31),
            ("ae0", self.ae0),
            ("v1", self.v1),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FracError::validation(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Compartment matrix A and input column B for states (blood, muscle, fat, effect site).
pub fn assemble_system(params: &PkpdParams) -> Result<(SquareMatrix, Vec<f64>)> {
    params.validate()?;
    let PkpdParams {
        a10,
        a12,
        a13,
        a21,
        a31,
        ae0,
        v1,
        ..
    } = *params;
    let a = SquareMatrix::from_row_major(vec![
        -(a10 + a12 + a13),
        a21,
        a31,
        0.0,
        a12,
        -a21,
        0.0,
        0.0,
        a13,
        0.0,
        -a31,
        0.0,
        ae0 / v1,
        0.0,
        0.0,
        -ae0,
    ])?;
    Ok((a, vec![1.0, 0.0, 0.0, 0.0]))
}

/// The compartment matrix for the reference patient, rounded to four decimals
/// as used for the induction example.
#[rustfmt::skip]
pub fn reference_matrix() -> SquareMatrix {
    SquareMatrix::from_row_major(vec![
        -0.9175, 0.0683, 0.0035, 0.0,
        0.3020, -0.0683, 0.0, 0.0,
        0.1960, 0.0, -0.0035, 0.0,
        0.1068, 0.0, 0.0, -0.4560,
    ])
    .expect("constant matrix is valid")
}

/// Time-optimal induction: 106.0907 mg/min until 0.5467 min, then nothing until 1.8397 min.
pub fn reference_schedule() -> InfusionSchedule {
    InfusionSchedule::new(vec![0.0, 0.5467, 1.8397], vec![106.0907, 0.0])
        .expect("constant schedule is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisParams {
    pub bis0: f64,
    /// mg/l
    pub ec50: f64,
    pub gamma: f64,
}

impl Default for BisParams {
    fn default() -> Self {
        BisParams {
            bis0: 100.0,
            ec50: 3.4,
            gamma: 3.0,
        }
    }
}

impl BisParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bis0", self.bis0),
            ("ec50", self.ec50),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FracError::validation(
                    name,
                    format!("must be positive, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// BIS0 (1 − y4^γ / (y4^γ + EC50^γ)).
pub fn bis(y4: f64, params: &BisParams) -> Result<f64> {
    if y4 < 0.0 || y4.is_nan() {
        return Err(FracError::domain(format!(
            "effect-site concentration is negative ({y4})"
        )));
    }
    if y4 == f64::INFINITY {
        return Ok(0.0);
    }
    // Written as a ratio of EC50 to keep large y4 from overflowing.
    let r = (params.ec50 / y4).powf(params.gamma);
    if y4 == 0.0 {
        return Ok(params.bis0);
    }
    Ok(params.bis0 * r / (1.0 + r))
}

/// BIS along a trajectory. Tiny negative effect-site values from round-off
/// (down to −1e-9) are read as zero.
pub fn bis_curve(traj: &Trajectory, params: &BisParams) -> Result<Vec<f64>> {
    traj.states
        .iter()
        .map(|s| {
            let y4 = s[3];
            bis(if (-1e-9..0.0).contains(&y4) { 0.0 } else { y4 }, params)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub y_e: [f64; 4],
    /// mg/min
    pub u_e: f64,
}

/// Steady state with the effect site held at EC50, and the infusion that keeps it there.
pub fn equilibrium(params: &PkpdParams, bis_params: &BisParams) -> Result<EquilibriumPoint> {
    params.validate()?;
    bis_params.validate()?;
    let ec50 = bis_params.ec50;
    let y1 = params.v1 * ec50;
    Ok(EquilibriumPoint {
        y_e: [
            y1,
            params.a12 * y1 / params.a21,
            params.a13 * y1 / params.a31,
            ec50,
        ],
        u_e: params.a10 * y1,
    })
}

/// (y1, y4) along the trajectory.
pub fn fast_state(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.states.iter().map(|s| (s[0], s[3])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn james_formula() {
        let male = PatientProfile::reference();
        assert!((lean_body_mass(&male).unwrap() - 60.476).abs() < 1e-3);
        let female = PatientProfile {
            sex: Sex::Female,
            ..male
        };
        let expected = 1.07 * 77.0 - 148.0 * (77.0f64 / 177.0).powi(2);
        assert!((lean_body_mass(&female).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 54.39).abs() < 0.01);
        let degenerate = PatientProfile {
            weight: 0.0,
            ..male
        };
        assert!(lean_body_mass(&degenerate).is_err());
        // Extreme obesity drives the James formula negative.
        let obese = PatientProfile {
            weight: 250.0,
            height: 150.0,
            ..male
        };
        assert!(lean_body_mass(&obese).is_err());
    }

    #[test]
    fn schnider_reference_values() {
        let p = schnider_params(&PatientProfile::reference()).unwrap();
        assert!((p.a10 + p.a12 + p.a13 - 0.9175).abs() < 5e-5);
        assert!((p.a21 - 0.0683).abs() < 5e-5);
        assert!((p.ae0 / p.v1 - 0.1068).abs() < 5e-5);
        assert!((p.a12 - 0.3020).abs() < 1e-12);
        assert_eq!(p.a13, 0.196);
    }

    #[test]
    fn a21_pole_is_rejected() {
        let age = 53.0 + 18.9 / 0.391;
        let p = PatientProfile {
            age,
            ..PatientProfile::reference()
        };
        assert!(schnider_params(&p).is_err());
        let older = PatientProfile {
            age: 110.0,
            ..PatientProfile::reference()
        };
        assert!(schnider_params(&older).is_err());
    }

    #[test]
    fn bis_curve_points() {
        let b = BisParams::default();
        assert_eq!(bis(0.0, &b).unwrap(), 100.0);
        assert!((bis(3.4, &b).unwrap() - 50.0).abs() < 1e-12);
        assert!(bis(1e9, &b).unwrap() < 1e-20);
        assert_eq!(bis(f64::INFINITY, &b).unwrap(), 0.0);
        assert!(bis(-0.1, &b).is_err());
    }

    #[test]
    fn equilibrium_reference() {
        let p = schnider_params(&PatientProfile::reference()).unwrap();
        let eq = equilibrium(&p, &BisParams::default()).unwrap();
        assert!((eq.y_e[0] - 14.518).abs() < 1e-12);
        assert!((eq.u_e - 6.090).abs() < 1e-3);
        let (a, b) = assemble_system(&p).unwrap();
        let r = a.matvec(&eq.y_e);
        for i in 0..4 {
            assert!((r[i] + b[i] * eq.u_e).abs() <= 1e-12);
        }
    }

    #[test]
    fn reference_matrix_rows() {
        let a = reference_matrix();
        assert_eq!(a.row(0), &[-0.9175, 0.0683, 0.0035, 0.0]);
        assert_eq!(a.row(3), &[0.1068, 0.0, 0.0, -0.4560]);
        let s = reference_schedule();
        assert_eq!(s.rates(), &[106.0907, 0.0]);
    }
}
