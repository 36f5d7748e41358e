use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub alpha: f64,
    pub psi: String,
    pub schedule_hash: String,
}

/// States sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Linear interpolation of the state at `t`.
    pub fn sample_at(&self, t: f64) -> Result<Vec<f64>> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(FracError::domain("empty trajectory")),
        };
        if t < first || t > last {
            return Err(FracError::domain(format!(
                "t = {t} outside trajectory range [{first}, {last}]"
            )));
        }
        let k = self.times.partition_point(|&s| s < t);
        if self.times[k] == t {
            return Ok(self.states[k].clone());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.states[k - 1]
            .iter()
            .zip(&self.states[k])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().flatten().all(|v| v.is_finite())
    }
}
