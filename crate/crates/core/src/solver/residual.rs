//! Residual of the fractional equation along a computed trajectory, using the
//! grid-based ψ-Caputo derivative.

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::operators::psi_caputo_derivative_grid;

use super::system::{InfusionSchedule, LinearFracSystem};
use super::trajectory::Trajectory;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    /// ‖D^{α,ψ}y − A y − B u‖_∞ per node; `None` where excluded.
    pub residuals: Vec<Option<f64>>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0, |m, v| m.max(*v))
    }

    pub fn evaluated(&self) -> usize {
        self.residuals.iter().flatten().count()
    }

    /// Largest residual over nodes whose time lies in [from, to].
    pub fn max_between(&self, from: f64, to: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.residuals)
            .filter(|(t, _)| **t >= from && **t <= to)
            .filter_map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }

    /// Residual at the node closest to `t` (if that node was evaluated).
    pub fn at(&self, t: f64) -> Option<f64> {
        let k = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        self.residuals[k]
    }
}

/// Node n is excluded when the derivative needs more history than it has, or
/// when a switch time lies in (t_{n−1}, t_{n+1}]: there the kernel singularity
/// meets the input jump and the L1 formula is not meaningful.
pub fn residual_check(
    traj: &Trajectory,
    sys: &LinearFracSystem,
    sched: &InfusionSchedule,
) -> Result<ResidualReport> {
    if traj.dim() != sys.dim() {
        return Err(FracError::Dimension("trajectory and system differ".into()));
    }
    if traj.times.first() != Some(&sys.start) {
        return Err(FracError::domain(
            "trajectory must start at the initial time",
        ));
    }
    let n = sys.dim();
    let alpha = sys.alpha.value();
    let derivatives = (0..n)
        .map(|i| psi_caputo_derivative_grid(&traj.times, &traj.component(i), alpha, &sys.psi))
        .collect::<Result<Vec<_>>>()?;

    let switches = sched.switch_times();
    let times = &traj.times;
    let residuals = (0..traj.len())
        .map(|k| {
            let prev = if k == 0 {
                f64::NEG_INFINITY
            } else {
                times[k - 1]
            };
            let next = times.get(k + 1).copied().unwrap_or(f64::INFINITY);
            if switches.iter().any(|&s| s > prev && s <= next) {
                return None;
            }
            let u = sched.rate_at(times[k])?;
            let rhs = sys.a.matvec(&traj.states[k]);
            let mut worst = 0.0f64;
            for i in 0..n {
                let d = derivatives[i][k]?;
                worst = worst.max((d - rhs[i] - sys.b[i] * u).abs());
            }
            Some(worst)
        })
        .collect();
    Ok(ResidualReport {
        times: times.clone(),
        residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub grid_points: Vec<usize>,
    /// Largest residual per level, over the coarse-grid nodes only.
    pub max_residual: Vec<f64>,
    /// log2 of successive ratios of `max_residual`.
    pub rates: Vec<f64>,
}

impl RefinementReport {
    pub fn decreasing(&self) -> bool {
        self.max_residual.windows(2).all(|w| w[1] < w[0])
    }
}

/// Residuals of the closed-form trajectory on `levels` uniform grids over
/// [start, end], each with twice the intervals of the previous one. The
/// comparison uses the nodes of the coarsest grid (with its exclusions), so
/// every level is measured at the same times.
pub fn residual_refinement(
    sys: &LinearFracSystem,
    sched: &InfusionSchedule,
    end: f64,
    coarse_points: usize,
    levels: usize,
) -> Result<RefinementReport> {
    if coarse_points < 8 || levels < 2 {
        return Err(FracError::domain(
            "need at least 8 coarse points and 2 levels",
        ));
    }
    let intervals = coarse_points - 1;
    let mut grid_points = Vec::with_capacity(levels);
    let mut max_residual = Vec::with_capacity(levels);
    let mut keep: Vec<bool> = Vec::new();
    for level in 0..levels {
        let stride = 1usize << level;
        let points = intervals * stride + 1;
        let grid = super::system::uniform_grid(sys.start, end, points);
        let traj = super::closed_form::solve_piecewise(sys, sched, &grid)?;
        let report = residual_check(&traj, sys, sched)?;
        if level == 0 {
            keep = report.residuals.iter().map(Option::is_some).collect();
        }
        let mut worst = 0.0f64;
        for (k, _) in keep.iter().enumerate().filter(|(_, &on)| on) {
            if let Some(r) = report.residuals[k * stride] {
                worst = worst.max(r);
            }
        }
        grid_points.push(points);
        max_residual.push(worst);
    }
    let rates = max_residual
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    Ok(RefinementReport {
        grid_points,
        max_residual,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::psi::PsiFunction;
    use crate::solver::{solve_piecewise, uniform_grid, FractionalOrder};

    fn system(alpha: f64) -> LinearFracSystem {
        LinearFracSystem::new(
            SquareMatrix::from_row_major(vec![-1.0]).unwrap(),
            vec![1.0],
            FractionalOrder::new(alpha).unwrap(),
            PsiFunction::Identity,
            0.0,
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn exclusions_near_start_and_switch() {
        let sys = system(0.9);
        let sched = InfusionSchedule::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.0]).unwrap();
        let grid = uniform_grid(0.0, 1.0, 41);
        let traj = solve_piecewise(&sys, &sched, &grid).unwrap();
        let report = residual_check(&traj, &sys, &sched).unwrap();
        assert!(report.residuals[..4].iter().all(Option::is_none));
        // 0.5 is node 20: excluded at nodes 19 and 20
        assert!(report.residuals[19..=20].iter().all(Option::is_none));
        assert!(report.residuals[18].is_some() && report.residuals[21].is_some());
        assert!(report.at(0.5).is_none());
        // y0 = 1 is the equilibrium of the first segment
        assert!(report.max_between(0.0, 0.45) < 1e-12);
        assert!(report.at(0.6).unwrap() > report.at(0.9).unwrap());
        assert_eq!(report.evaluated(), 41 - 4 - 2);
    }

    #[test]
    fn residual_shrinks_with_refinement() {
        let sys = system(0.7);
        let sched = InfusionSchedule::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        let r = residual_refinement(&sys, &sched, 1.0, 41, 3).unwrap();
        assert_eq!(r.grid_points, vec![41, 81, 161]);
        assert!(r.decreasing(), "{:?}", r.max_residual);
        assert!(r.rates.iter().all(|&p| p > 0.8), "{:?}", r.rates);
    }

    #[test]
    fn dimension_mismatch() {
        let sys = system(0.9);
        let sched = InfusionSchedule::constant(0.0, 1.0, 1.0).unwrap();
        let mut traj = solve_piecewise(&sys, &sched, &uniform_grid(0.0, 1.0, 11)).unwrap();
        traj.states.iter_mut().for_each(|y| y.push(0.0));
        assert!(residual_check(&traj, &sys, &sched).is_err());
    }
}
