//! Linear ψ-Caputo fractional systems solved through matrix Mittag-Leffler
//! functions, and a fractional four-compartment propofol PK/PD model built on
//! top of them.
//!
//! Layers, bottom up:
//! - [`special`], [`mittag_leffler`], [`psi`], [`quadrature`], [`operators`]:
//!   special functions and ψ-fractional operators.
//! - [`solver`]: closed-form solution for piecewise-constant inputs, a
//!   quadrature path for general inputs, an Adams-Bashforth-Moulton reference
//!   solver and residual checks.
//! - [`pkpd`]: Schnider parameters, system assembly, equilibrium and BIS.
//! - [`scenario`]: configuration files, parameter sweeps, CSV and plot output
//!   behind the `simulate` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod matrix;
pub mod mittag_leffler;
pub mod operators;
pub mod pkpd;
pub mod psi;
pub mod quadrature;
pub mod scenario;
pub mod solver;
pub mod special;

pub use error::{FracError, Result};
pub use matrix::SquareMatrix;
pub use mittag_leffler::{mittag_leffler_matrix, mittag_leffler_scalar, TruncationPolicy};
pub use psi::{PsiFunction, TimeScale};
pub use solver::{FractionalOrder, InfusionSchedule, LinearFracSystem, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
