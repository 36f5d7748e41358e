//! `simulate <config> [--out DIR] [--no-plots] [--oracle-check]`
//!
//! Exit status: 0 on success, 1 for configuration or output errors,
//! 2 when at least one run of the sweep failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};

use fracpk::scenario::{emit_plots, load_config, run_sweep, OutputFormat, SweepOptions};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "Fractional PK/PD sweep over psi and alpha"
)]
struct Args {
    /// Scenario file (TOML).
    config: PathBuf,

    /// Output directory; overrides `[output] dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Write CSVs and the manifest only.
    #[arg(long)]
    no_plots: bool,

    /// Cross-check each run against the predictor-corrector solver.
    #[arg(long)]
    oracle_check: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    if args.no_plots {
        cfg.formats.retain(|f| *f == OutputFormat::Csv);
    }
    let out = args.out.unwrap_or_else(|| cfg.output_dir.clone());
    let mut opts = SweepOptions::new(&out);
    opts.oracle_check = args.oracle_check;

    let manifest = match run_sweep(&cfg, &opts) {
        Ok(m) => m,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit_plots(&manifest, &out) {
        error!("{e}");
        return ExitCode::from(1);
    }
    let failed = manifest.failed_runs();
    info!(
        "{} runs, {} failed; manifest in {}",
        manifest.runs.len(),
        failed,
        out.display()
    );
    if failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
