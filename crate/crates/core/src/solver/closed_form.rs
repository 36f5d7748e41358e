//! Exact evaluation of the Mittag-Leffler solution for piecewise-constant inputs.
//!
//! For a constant input c on [s₁, s₂] the convolution term at time t is
//!
//!   ∫_{s₁}^{s₂} ψ′(s) w^{α−1} E_{α,α}(A w^α) c ds,  w = ψ(t) − ψ(s)
//!     = [F(ψ(t) − ψ(s₁)) − F(ψ(t) − ψ(s₂))] c,  F(w) = w^α E_{α,α+1}(A w^α),
//!
//! obtained term by term from ∫_0^x τ^{lα+α−1}/Γ(lα+α) dτ = x^{lα+α}/Γ(lα+α+1).
//! Contributions are always anchored at the initial time: a fractional system
//! remembers its whole history, so the state is never restarted at a switch.

use crate::error::{FracError, Result};
use crate::matrix::SquareMatrix;
use crate::mittag_leffler::mittag_leffler_matrix;
use crate::psi::TimeScale;

use super::system::{InfusionSchedule, LinearFracSystem};
use super::trajectory::{Trajectory, TrajectoryMeta};

/// Slack used when checking that grid points lie inside the schedule.
const COVERAGE_SLACK: f64 = 1e-12;

/// E_α(A (ψ(t) − ψ(a))^α).
pub fn homogeneous_propagator(sys: &LinearFracSystem, t: f64) -> Result<SquareMatrix> {
    if t < sys.start {
        return Err(FracError::domain(format!(
            "propagator needs t >= a (t = {t}, a = {})",
            sys.start
        )));
    }
    let alpha = sys.alpha.value();
    let scale = sys.elapsed(t).powf(alpha);
    mittag_leffler_matrix(alpha, 1.0, &sys.a.scaled(scale), &sys.policy)
}

/// F(w) = w^α E_{α,α+1}(A w^α); zero at w = 0.
fn forced_kernel(sys: &LinearFracSystem, w: f64) -> Result<SquareMatrix> {
    let n = sys.dim();
    if w <= 0.0 {
        return Ok(SquareMatrix::zeros(n));
    }
    let alpha = sys.alpha.value();
    let wa = w.powf(alpha);
    Ok(mittag_leffler_matrix(alpha, alpha + 1.0, &sys.a.scaled(wa), &sys.policy)?.scaled(wa))
}

/// State at `t_end` starting from `y_start` at `t_start` under a constant input vector:
///
/// E_α(A Δ^α) y_start + Δ^α E_{α,α+1}(A Δ^α) u,  Δ = ψ(t_end) − ψ(t_start).
///
/// Exact when `t_start` is the system's initial time. For α < 1 and a later
/// `t_start`, the history before `t_start` is ignored; use [`solve_piecewise`]
/// for multi-segment inputs.
pub fn constant_input_step(
    sys: &LinearFracSystem,
    y_start: &[f64],
    u_const: &[f64],
    t_start: f64,
    t_end: f64,
) -> Result<Vec<f64>> {
    let n = sys.dim();
    if y_start.len() != n || u_const.len() != n {
        return Err(FracError::Dimension(format!(
            "state and input must have {n} entries"
        )));
    }
    if !(t_end > t_start) {
        return Err(FracError::domain(format!(
            "step needs t_end > t_start ({t_start} -> {t_end})"
        )));
    }
    let alpha = sys.alpha.value();
    let delta = sys.psi.increment(t_start, t_end);
    let da = delta.powf(alpha);
    let scaled = sys.a.scaled(da);
    let free = mittag_leffler_matrix(alpha, 1.0, &scaled, &sys.policy)?.matvec(y_start);
    let forced = mittag_leffler_matrix(alpha, alpha + 1.0, &scaled, &sys.policy)?.matvec(u_const);
    Ok(free.iter().zip(forced).map(|(f, g)| f + da * g).collect())
}

/// State at a single time `t` under a piecewise-constant schedule.
pub fn state_at(sys: &LinearFracSystem, sched: &InfusionSchedule, t: f64) -> Result<Vec<f64>> {
    if t < sys.start - COVERAGE_SLACK || t > sched.end() + COVERAGE_SLACK {
        return Err(FracError::domain(format!(
            "t = {t} outside the covered horizon [{}, {}]",
            sys.start,
            sched.end()
        )));
    }
    let n = sys.dim();
    if t <= sys.start {
        return Ok(sys.y0.clone());
    }
    let mut y = homogeneous_propagator(sys, t)?.matvec(&sys.y0);
    let mut kernel = SquareMatrix::zeros(n);
    for (s0, s1, rate) in sched.segments() {
        let s0 = s0.max(sys.start);
        if rate == 0.0 || s0 >= t || s1 <= s0 {
            continue;
        }
        let upper = forced_kernel(sys, sys.psi.increment(s0, t))?;
        let lower = forced_kernel(sys, sys.psi.increment(s1.min(t), t))?;
        kernel.add_scaled(&upper.sub(&lower), rate);
    }
    for (yi, ki) in y.iter_mut().zip(kernel.matvec(&sys.b)) {
        *yi += ki;
    }
    Ok(y)
}

/// Closed-form trajectory on `grid` for a piecewise-constant scalar input
/// entering through `sys.b`.
pub fn solve_piecewise(
    sys: &LinearFracSystem,
    sched: &InfusionSchedule,
    grid: &[f64],
) -> Result<Trajectory> {
    if grid.is_empty() {
        return Err(FracError::domain("empty output grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FracError::domain("output grid must be strictly increasing"));
    }
    if sched.start() > sys.start + COVERAGE_SLACK {
        return Err(FracError::domain(format!(
            "schedule starts at {} after the initial time {}",
            sched.start(),
            sys.start
        )));
    }
    if grid[0] < sys.start - COVERAGE_SLACK || *grid.last().unwrap() > sched.end() + COVERAGE_SLACK
    {
        return Err(FracError::domain(format!(
            "grid [{}, {}] not covered by [{}, {}]",
            grid[0],
            grid.last().unwrap(),
            sys.start,
            sched.end()
        )));
    }
    let states = grid
        .iter()
        .map(|&t| state_at(sys, sched, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: grid.to_vec(),
        states,
        meta: TrajectoryMeta {
            alpha: sys.alpha.value(),
            psi: sys.psi.descriptor(),
            schedule_hash: sched.hash_hex(),
        },
    })
}
