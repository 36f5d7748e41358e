use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::{FracError, Result as FracResult};
use crate::matrix::SquareMatrix;
use crate::mittag_leffler::TruncationPolicy;
use crate::pkpd::{
    assemble_system, bis_curve, equilibrium, schnider_params, BisParams, EquilibriumPoint,
    PatientProfile, PkpdParams,
};
use crate::psi::PsiFunction;
use crate::solver::{
    oracle_substitution_solve, solve_piecewise, uniform_grid, FractionalOrder, LinearFracSystem,
    Trajectory, DEFAULT_ORACLE_STEPS,
};

use super::config::{OutputFormat, ScenarioConfig};
use super::run_stem;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Clinical BIS target band for general anesthesia.
pub const BIS_BAND: (f64, f64) = (40.0, 60.0);

pub const CSV_HEADER: &str = "t,y1,y2,y3,y4,BIS";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot build the compartment system: {0}")]
    System(#[from] FracError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub out_dir: PathBuf,
    pub oracle_check: bool,
    pub oracle_steps: usize,
}

impl SweepOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        SweepOptions {
            out_dir: out_dir.into(),
            oracle_check: false,
            oracle_steps: DEFAULT_ORACLE_STEPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BisBand {
    Below,
    Within,
    Above,
}

impl BisBand {
    pub fn classify(bis: f64) -> Self {
        if bis < BIS_BAND.0 {
            BisBand::Below
        } else if bis > BIS_BAND.1 {
            BisBand::Above
        } else {
            BisBand::Within
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub steps: usize,
    /// max over grid points of ‖y − y_oracle‖∞ / ‖y‖∞
    pub max_rel_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub psi: String,
    pub alpha: f64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bis_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bis_min: Option<f64>,
    /// Position of BIS at the horizon relative to the 40-60 band.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bis_end_band: Option<BisBand>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviates_from_band: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_state: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
}

impl RunRecord {
    fn failed(psi: &PsiFunction, alpha: FractionalOrder, err: String) -> Self {
        RunRecord {
            psi: psi.to_string(),
            alpha: alpha.value(),
            status: RunStatus::Failed,
            error: Some(err),
            csv: None,
            sha256: None,
            bis_end: None,
            bis_min: None,
            bis_end_band: None,
            deviates_from_band: None,
            min_state: None,
            oracle: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureMember {
    pub psi: String,
    pub alpha: f64,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRecord {
    pub name: String,
    pub members: Vec<FigureMember>,
    pub states_csv: Option<String>,
    pub bis_csv: Option<String>,
    pub sha256: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEcho {
    pub breakpoints: Vec<f64>,
    pub rates: Vec<f64>,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub patient: PatientProfile,
    pub schnider: Option<PkpdParams>,
    pub bis: BisParams,
    pub matrix_source: String,
    pub matrix: Vec<Vec<f64>>,
    pub input_column: Vec<f64>,
    pub schedule: ScheduleEcho,
    pub horizon: f64,
    pub grid_points: usize,
    pub psi: Vec<String>,
    pub alpha: Vec<f64>,
    pub formats: Vec<OutputFormat>,
    pub truncation: TruncationPolicy,
    pub oracle_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub library_version: String,
    pub config: ResolvedConfig,
    pub equilibrium: Option<EquilibriumPoint>,
    pub runs: Vec<RunRecord>,
    pub figures: Vec<FigureRecord>,
}

impl RunManifest {
    pub fn failed_runs(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.status == RunStatus::Failed)
            .count()
    }

    pub fn run(&self, psi: &str, alpha: f64) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.psi == psi && r.alpha == alpha)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SweepError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| SweepError::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::InvalidData, e),
        })
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (11 - exp) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn trajectory_csv(traj: &Trajectory, bis: &[f64]) -> String {
    let mut out = String::with_capacity(traj.len() * 80);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (k, t) in traj.times.iter().enumerate() {
        out.push_str(&format_sig12(*t));
        for v in &traj.states[k] {
            out.push(',');
            out.push_str(&format_sig12(*v));
        }
        out.push(',');
        out.push_str(&format_sig12(bis[k]));
        out.push('\n');
    }
    out
}

struct Solved {
    record: RunRecord,
    traj: Trajectory,
    bis: Vec<f64>,
}

fn max_rel_discrepancy(reference: &Trajectory, oracle: &Trajectory) -> FracResult<f64> {
    let mut worst = 0.0f64;
    for (t, y) in reference.times.iter().zip(&reference.states) {
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let yo = oracle.sample_at(*t)?;
        let diff = y
            .iter()
            .zip(&yo)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

fn solve_run(
    cfg: &ScenarioConfig,
    a: &SquareMatrix,
    b: &[f64],
    psi: PsiFunction,
    alpha: FractionalOrder,
    opts: &SweepOptions,
) -> FracResult<Solved> {
    let start = cfg.schedule.start();
    let sys = LinearFracSystem::new(a.clone(), b.to_vec(), alpha, psi, start, vec![0.0; 4])?
        .with_policy(cfg.truncation);
    let grid = uniform_grid(start, cfg.horizon, cfg.grid_points);
    let traj = solve_piecewise(&sys, &cfg.schedule, &grid)?;
    if !traj.is_finite() {
        return Err(FracError::domain("trajectory has non-finite states"));
    }
    let bis = bis_curve(&traj, &cfg.bis)?;
    let oracle = if opts.oracle_check {
        let o = oracle_substitution_solve(&sys, &cfg.schedule, opts.oracle_steps)?;
        Some(OracleRecord {
            steps: opts.oracle_steps,
            max_rel_discrepancy: max_rel_discrepancy(&traj, &o)?,
        })
    } else {
        None
    };
    let bis_end = *bis.last().unwrap();
    let band = BisBand::classify(bis_end);
    let min_state = traj
        .states
        .iter()
        .flatten()
        .fold(f64::INFINITY, |m, v| m.min(*v));
    if min_state < -1e-9 {
        warn!("run psi={psi} alpha={alpha}: state went negative ({min_state:e})");
    }
    Ok(Solved {
        record: RunRecord {
            psi: psi.to_string(),
            alpha: alpha.value(),
            status: RunStatus::Ok,
            error: None,
            csv: None,
            sha256: None,
            bis_end: Some(bis_end),
            bis_min: Some(bis.iter().copied().fold(f64::INFINITY, f64::min)),
            bis_end_band: Some(band),
            deviates_from_band: Some(band != BisBand::Within),
            min_state: Some(min_state),
            oracle,
        },
        traj,
        bis,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<String, SweepError> {
    fs::write(path, contents).map_err(io_err(path))?;
    Ok(sha256_hex(contents))
}

/// Solves every (ψ, α) pair, writes one CSV per run, combined CSVs per figure
/// and `manifest.json`. Failed runs are recorded and do not stop the sweep.
pub fn run_sweep(cfg: &ScenarioConfig, opts: &SweepOptions) -> Result<RunManifest, SweepError> {
    let out = &opts.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let schnider = schnider_params(&cfg.patient).ok();
    let (a, b, matrix_source) = match &cfg.matrix {
        Some(m) => (m.clone(), vec![1.0, 0.0, 0.0, 0.0], "config".to_string()),
        None => {
            let params = schnider_params(&cfg.patient)?;
            let (a, b) = assemble_system(&params)?;
            (a, b, "schnider".to_string())
        }
    };
    let eq = schnider
        .as_ref()
        .and_then(|p| equilibrium(p, &cfg.bis).ok());

    let mut pairs: Vec<(PsiFunction, FractionalOrder)> = cfg
        .psi_list
        .iter()
        .flat_map(|p| cfg.alpha_list.iter().map(move |a| (*p, *a)))
        .collect();
    pairs.sort_by(|x, y| {
        x.0.to_string()
            .cmp(&y.0.to_string())
            .then(x.1.value().total_cmp(&y.1.value()))
    });
    pairs.dedup();

    let mut runs = Vec::with_capacity(pairs.len());
    let mut solved: Vec<Option<(Trajectory, Vec<f64>)>> = Vec::with_capacity(pairs.len());
    for &(psi, alpha) in &pairs {
        match solve_run(cfg, &a, &b, psi, alpha, opts) {
            Ok(s) => {
                let mut record = s.record;
                let name = format!("{}.csv", run_stem(&psi, alpha));
                let body = trajectory_csv(&s.traj, &s.bis);
                record.sha256 = Some(write_file(&out.join(&name), body.as_bytes())?);
                record.csv = Some(name);
                info!(
                    "psi={psi} alpha={alpha}: BIS at horizon {:.3}",
                    record.bis_end.unwrap_or(f64::NAN)
                );
                runs.push(record);
                solved.push(Some((s.traj, s.bis)));
            }
            Err(e) => {
                warn!("psi={psi} alpha={alpha} failed: {e}");
                runs.push(RunRecord::failed(&psi, alpha, e.to_string()));
                solved.push(None);
            }
        }
    }

    let mut figures = Vec::with_capacity(cfg.figures.len());
    for fig in &cfg.figures {
        let mut members = Vec::new();
        let mut series: Vec<(String, &Trajectory, &Vec<f64>)> = Vec::new();
        for psi in &fig.psi {
            for alpha in &fig.alpha {
                let idx = pairs.iter().position(|(p, a)| p == psi && a == alpha);
                if let Some((k, Some((traj, bis)))) = idx.map(|k| (k, &solved[k])) {
                    members.push(FigureMember {
                        psi: psi.to_string(),
                        alpha: alpha.value(),
                        csv: runs[k].csv.clone().unwrap_or_default(),
                    });
                    series.push((format!("{psi}|{alpha}"), traj, bis));
                }
            }
        }
        let mut record = FigureRecord {
            name: fig.name.clone(),
            members,
            states_csv: None,
            bis_csv: None,
            sha256: Vec::new(),
        };
        if !series.is_empty() {
            let (states, bis) = combined_csvs(&series);
            let sname = format!("{}_states.csv", fig.name);
            let bname = format!("{}_bis.csv", fig.name);
            record
                .sha256
                .push(write_file(&out.join(&sname), states.as_bytes())?);
            record
                .sha256
                .push(write_file(&out.join(&bname), bis.as_bytes())?);
            record.states_csv = Some(sname);
            record.bis_csv = Some(bname);
        }
        figures.push(record);
    }

    let manifest = RunManifest {
        library_version: crate::VERSION.to_string(),
        config: ResolvedConfig {
            patient: cfg.patient,
            schnider,
            bis: cfg.bis,
            matrix_source,
            matrix: (0..a.dim()).map(|i| a.row(i).to_vec()).collect(),
            input_column: b,
            schedule: ScheduleEcho {
                breakpoints: cfg.schedule.breakpoints().to_vec(),
                rates: cfg.schedule.rates().to_vec(),
                hash: cfg.schedule.hash_hex(),
            },
            horizon: cfg.horizon,
            grid_points: cfg.grid_points,
            psi: cfg.psi_list.iter().map(|p| p.to_string()).collect(),
            alpha: cfg.alpha_list.iter().map(|a| a.value()).collect(),
            formats: cfg.formats.clone(),
            truncation: cfg.truncation,
            oracle_check: opts.oracle_check,
        },
        equilibrium: eq,
        runs,
        figures,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_file(&out.join(MANIFEST_FILE), format!("{json}\n").as_bytes())?;
    Ok(manifest)
}

/// Columns `t` then one block per run; all runs share the same grid.
fn combined_csvs(series: &[(String, &Trajectory, &Vec<f64>)]) -> (String, String) {
    let times = &series[0].1.times;
    let mut states = String::from("t");
    let mut bis = String::from("t");
    for (label, _, _) in series {
        for c in ["y1", "y2", "y3", "y4"] {
            states.push_str(&format!(",{c}|{label}"));
        }
        bis.push_str(&format!(",BIS|{label}"));
    }
    states.push('\n');
    bis.push('\n');
    for (k, t) in times.iter().enumerate() {
        let ts = format_sig12(*t);
        states.push_str(&ts);
        bis.push_str(&ts);
        for (_, traj, b) in series {
            for v in &traj.states[k] {
                states.push(',');
                states.push_str(&format_sig12(*v));
            }
            bis.push(',');
            bis.push_str(&format_sig12(b[k]));
        }
        states.push('\n');
        bis.push('\n');
    }
    (states, bis)
}
