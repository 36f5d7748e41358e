//! Batch front end: scenario files, (ψ, α) sweeps, CSV output and plots.

mod config;
mod plot;
mod sweep;

pub use config::{
    load_config, parse_config, ConfigError, FigureGroup, OutputFormat, ScenarioConfig,
    MIN_GRID_POINTS,
};
pub use plot::{emit_plots, PlotError};
pub use sweep::{
    format_sig12, run_sweep, BisBand, FigureRecord, OracleRecord, RunManifest, RunRecord,
    RunStatus, SweepError, SweepOptions, BIS_BAND, MANIFEST_FILE,
};

use crate::psi::PsiFunction;
use crate::solver::FractionalOrder;

/// File-name friendly form of a ψ descriptor: `shift:0.2` becomes `shift_0.2`.
pub fn slug_psi(psi: &PsiFunction) -> String {
    psi.to_string().replace(':', "_")
}

pub fn run_stem(psi: &PsiFunction, alpha: FractionalOrder) -> String {
    format!("run_psi-{}_alpha-{}", slug_psi(psi), alpha)
}
