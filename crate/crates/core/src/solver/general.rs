//! Solution for an arbitrary input u(t) by quadrature of the convolution term.

use crate::error::{FracError, Result};
use crate::mittag_leffler::mittag_leffler_matrix;
use crate::psi::TimeScale;
use crate::quadrature::{integrate_vec, QuadratureOptions};

use super::closed_form::homogeneous_propagator;
use super::system::LinearFracSystem;
use super::trajectory::{Trajectory, TrajectoryMeta};

/// y(t) = E_α(A(ψ(t)−ψ(a))^α) y0 + ∫_a^t ψ′(s) w^{α−1} E_{α,α}(A w^α) u(s) ds,
/// w = ψ(t) − ψ(s).
///
/// The integral is taken in v = w^α, where it reads
/// (1/α) ∫_0^V E_{α,α}(A v) u(ψ⁻¹(ψ(t) − v^{1/α})) dv with a bounded integrand.
/// `u` returns the full input vector (it does not pass through `sys.b`).
/// The adaptive rule assumes u is smooth; a jump can slip past its error
/// estimate, so piecewise-constant inputs belong in [`super::solve_piecewise`].
pub fn solve_general_u<U>(sys: &LinearFracSystem, u: U, grid: &[f64]) -> Result<Trajectory>
where
    U: Fn(f64) -> Vec<f64>,
{
    solve_general_u_with(sys, u, grid, &QuadratureOptions::default())
}

pub fn solve_general_u_with<U>(
    sys: &LinearFracSystem,
    u: U,
    grid: &[f64],
    opts: &QuadratureOptions,
) -> Result<Trajectory>
where
    U: Fn(f64) -> Vec<f64>,
{
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FracError::domain("output grid must be strictly increasing"));
    }
    if grid.first().is_some_and(|&t| t < sys.start) {
        return Err(FracError::domain("grid starts before the initial time"));
    }
    let n = sys.dim();
    let alpha = sys.alpha.value();
    let inv_alpha = 1.0 / alpha;
    let psi_a = sys.psi.value(sys.start);

    let mut states = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut y = homogeneous_propagator(sys, t)?.matvec(&sys.y0);
        let span = sys.elapsed(t);
        if span > 0.0 {
            let mut failure = None;
            let result = integrate_vec(
                |v| {
                    let from_start = (span - v.powf(inv_alpha)).max(0.0);
                    let s = sys.psi.inverse(psi_a + from_start);
                    let input = u(s);
                    if input.len() != n {
                        failure.get_or_insert_with(|| {
                            FracError::Dimension(format!(
                                "input function returned {} entries, expected {n}",
                                input.len()
                            ))
                        });
                        return vec![0.0; n];
                    }
                    match mittag_leffler_matrix(alpha, alpha, &sys.a.scaled(v), &sys.policy) {
                        Ok(m) => m.matvec(&input),
                        Err(e) => {
                            failure.get_or_insert(e);
                            vec![0.0; n]
                        }
                    }
                },
                0.0,
                span.powf(alpha),
                n,
                opts,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let integral = result?;
            for (yi, vi) in y.iter_mut().zip(integral.value) {
                *yi += vi * inv_alpha;
            }
        }
        states.push(y);
    }
    Ok(Trajectory {
        times: grid.to_vec(),
        states,
        meta: TrajectoryMeta {
            alpha,
            psi: sys.psi.descriptor(),
            schedule_hash: "general".into(),
        },
    })
}
