//! Linear nonhomogeneous ψ-Caputo systems ᶜD_a^{α,ψ} y = A y + B u, y(a) = y0.

mod closed_form;
mod general;
mod oracle;
mod residual;
mod system;
mod trajectory;

pub use closed_form::{constant_input_step, homogeneous_propagator, solve_piecewise, state_at};
pub use general::{solve_general_u, solve_general_u_with};
pub use oracle::{oracle_self_check, oracle_substitution_solve, DEFAULT_ORACLE_STEPS};
pub use residual::{residual_check, residual_refinement, RefinementReport, ResidualReport};
pub use system::{uniform_grid, FractionalOrder, InfusionSchedule, LinearFracSystem};
pub use trajectory::{Trajectory, TrajectoryMeta};

/// Default number of output points on the simulated horizon.
pub const DEFAULT_GRID_POINTS: usize = 400;
