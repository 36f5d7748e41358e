//! Scenario files: TOML with `[patient]`, `[bis]`, `[schedule]`, `[sweep]`,
//! `[output]` and optional `[system]`, `[truncation]` and `[[figure]]` tables.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FracError;
use crate::matrix::SquareMatrix;
use crate::mittag_leffler::TruncationPolicy;
use crate::pkpd::{BisParams, PatientProfile, Sex};
use crate::psi::PsiFunction;
use crate::solver::{FractionalOrder, InfusionSchedule, DEFAULT_GRID_POINTS};

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Re-labels a library validation error with the config field it came from.
    fn from_frac(field: &str, err: FracError) -> Self {
        match err {
            FracError::Validation {
                field: inner,
                message,
            } => ConfigError::invalid(format!("{field}.{inner}"), message),
            other => ConfigError::invalid(field, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
    Gnuplot,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            "gnuplot" | "gnuplot-script" => Ok(OutputFormat::Gnuplot),
            other => Err(format!("unknown output format '{other}'")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
            OutputFormat::Gnuplot => "gnuplot",
        })
    }
}

/// A set of runs drawn together in one comparison figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureGroup {
    pub name: String,
    pub psi: Vec<PsiFunction>,
    pub alpha: Vec<FractionalOrder>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub patient: PatientProfile,
    pub bis: BisParams,
    /// Explicit compartment matrix; when absent the Schnider matrix of `patient` is used.
    pub matrix: Option<SquareMatrix>,
    pub psi_list: Vec<PsiFunction>,
    pub alpha_list: Vec<FractionalOrder>,
    pub schedule: InfusionSchedule,
    pub horizon: f64,
    pub grid_points: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub figures: Vec<FigureGroup>,
    pub truncation: TruncationPolicy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    patient: RawPatient,
    #[serde(default)]
    bis: RawBis,
    #[serde(default)]
    system: RawSystem,
    schedule: RawSchedule,
    sweep: RawSweep,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    truncation: Option<RawTruncation>,
    #[serde(default)]
    figure: Vec<RawFigure>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPatient {
    age: f64,
    weight: f64,
    height: f64,
    sex: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBis {
    bis0: Option<f64>,
    ec50: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    psi: Vec<String>,
    alpha: Vec<f64>,
    horizon: Option<f64>,
    grid_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncation {
    rel_tol: Option<f64>,
    consecutive_small_terms: Option<usize>,
    max_terms: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFigure {
    name: String,
    psi: Vec<String>,
    alpha: Vec<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Reads and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    raw.validate()
}

fn parse_psi_list(field: &str, items: &[String]) -> Result<Vec<PsiFunction>, ConfigError> {
    items
        .iter()
        .map(|s| {
            s.parse::<PsiFunction>()
                .map_err(|e| ConfigError::from_frac(field, e))
        })
        .collect()
}

fn parse_alpha_list(field: &str, items: &[f64]) -> Result<Vec<FractionalOrder>, ConfigError> {
    items
        .iter()
        .map(|&a| FractionalOrder::new(a).map_err(|e| ConfigError::from_frac(field, e)))
        .collect()
}

impl RawConfig {
    fn validate(self) -> Result<ScenarioConfig, ConfigError> {
        let sex: Sex = self
            .patient
            .sex
            .parse()
            .map_err(|e| ConfigError::from_frac("patient", e))?;
        let patient = PatientProfile::new(
            self.patient.age,
            self.patient.weight,
            self.patient.height,
            sex,
        )
        .map_err(|e| ConfigError::from_frac("patient", e))?;

        let defaults = BisParams::default();
        let bis = BisParams {
            bis0: self.bis.bis0.unwrap_or(defaults.bis0),
            ec50: self.bis.ec50.unwrap_or(defaults.ec50),
            gamma: self.bis.gamma.unwrap_or(defaults.gamma),
        };
        bis.validate()
            .map_err(|e| ConfigError::from_frac("bis", e))?;

        let matrix = match self.system.matrix {
            Some(rows) => {
                let m = SquareMatrix::from_rows(&rows)
                    .map_err(|e| ConfigError::invalid("system.matrix", e.to_string()))?;
                if m.dim() != 4 {
                    return Err(ConfigError::invalid("system.matrix", "must be 4x4"));
                }
                Some(m)
            }
            None => None,
        };

        let schedule = InfusionSchedule::new(self.schedule.breakpoints, self.schedule.rates)
            .map_err(|e| match e {
                FracError::Validation { field, message } => ConfigError::invalid(field, message),
                other => ConfigError::invalid("schedule", other.to_string()),
            })?;

        if self.sweep.psi.is_empty() {
            return Err(ConfigError::invalid("sweep.psi", "list is empty"));
        }
        if self.sweep.alpha.is_empty() {
            return Err(ConfigError::invalid("sweep.alpha", "list is empty"));
        }
        let psi_list = parse_psi_list("sweep.psi", &self.sweep.psi)?;
        let alpha_list = parse_alpha_list("sweep.alpha", &self.sweep.alpha)?;

        let start = schedule.start();
        let horizon = self.sweep.horizon.unwrap_or(schedule.end());
        if !(horizon > start) || !horizon.is_finite() {
            return Err(ConfigError::invalid(
                "sweep.horizon",
                format!("must exceed the schedule start {start}, got {horizon}"),
            ));
        }
        if horizon > schedule.end() {
            return Err(ConfigError::invalid(
                "sweep.horizon",
                format!(
                    "{horizon} extends past the last schedule breakpoint {}",
                    schedule.end()
                ),
            ));
        }
        for psi in &psi_list {
            psi.validate_on(start, horizon)
                .map_err(|e| ConfigError::from_frac("sweep", e))?;
        }
        let grid_points = self.sweep.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < MIN_GRID_POINTS {
            return Err(ConfigError::invalid(
                "sweep.grid_points",
                format!("must be at least {MIN_GRID_POINTS}, got {grid_points}"),
            ));
        }

        let formats = match self.output.formats {
            Some(list) => {
                let mut f = list
                    .iter()
                    .map(|s| s.parse::<OutputFormat>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| ConfigError::invalid("output.formats", m))?;
                if !f.contains(&OutputFormat::Csv) {
                    // plots are drawn from the CSVs
                    f.push(OutputFormat::Csv);
                }
                f.sort();
                f.dedup();
                f
            }
            None => vec![OutputFormat::Csv, OutputFormat::Svg, OutputFormat::Gnuplot],
        };

        let truncation = match self.truncation {
            Some(t) => {
                let d = TruncationPolicy::default();
                let p = TruncationPolicy {
                    rel_tol: t.rel_tol.unwrap_or(d.rel_tol),
                    consecutive_small_terms: t
                        .consecutive_small_terms
                        .unwrap_or(d.consecutive_small_terms),
                    max_terms: t.max_terms.unwrap_or(d.max_terms),
                };
                p.validate()
                    .map_err(|e| ConfigError::from_frac("truncation", e))?;
                p
            }
            None => TruncationPolicy::default(),
        };

        let figures = if self.figure.is_empty() {
            default_figures(&psi_list, &alpha_list)
        } else {
            let mut seen = std::collections::BTreeSet::new();
            self.figure
                .iter()
                .map(|f| {
                    let field = format!("figure.{}", f.name);
                    if f.name.is_empty()
                        || !f
                            .name
                            .chars()
                            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                    {
                        return Err(ConfigError::invalid(
                            "figure.name",
                            format!("'{}' must be non-empty and use only [A-Za-z0-9_-]", f.name),
                        ));
                    }
                    if !seen.insert(f.name.clone()) {
                        return Err(ConfigError::invalid(
                            "figure.name",
                            format!("duplicate '{}'", f.name),
                        ));
                    }
                    let psi = parse_psi_list(&field, &f.psi)?;
                    let alpha = parse_alpha_list(&field, &f.alpha)?;
                    if psi.is_empty() || alpha.is_empty() {
                        return Err(ConfigError::invalid(
                            field,
                            "needs at least one psi and one alpha",
                        ));
                    }
                    if let Some(p) = psi.iter().find(|p| !psi_list.contains(p)) {
                        return Err(ConfigError::invalid(
                            field,
                            format!("psi '{p}' is not in sweep.psi"),
                        ));
                    }
                    if let Some(a) = alpha.iter().find(|a| !alpha_list.contains(a)) {
                        return Err(ConfigError::invalid(
                            field,
                            format!("alpha {a} is not in sweep.alpha"),
                        ));
                    }
                    Ok(FigureGroup {
                        name: f.name.clone(),
                        psi,
                        alpha,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        };

        Ok(ScenarioConfig {
            patient,
            bis,
            matrix,
            psi_list,
            alpha_list,
            schedule,
            horizon,
            grid_points,
            output_dir: self.output.dir.unwrap_or_else(|| PathBuf::from("out")),
            formats,
            figures,
            truncation,
        })
    }
}

/// One figure per ψ (all orders) and, with several ψ, one per order (all ψ).
fn default_figures(psi_list: &[PsiFunction], alpha_list: &[FractionalOrder]) -> Vec<FigureGroup> {
    let mut figures: Vec<FigureGroup> = psi_list
        .iter()
        .map(|p| FigureGroup {
            name: format!("psi-{}", super::slug_psi(p)),
            psi: vec![*p],
            alpha: alpha_list.to_vec(),
        })
        .collect();
    if psi_list.len() > 1 {
        figures.extend(alpha_list.iter().map(|a| FigureGroup {
            name: format!("alpha-{}", a),
            psi: psi_list.to_vec(),
            alpha: vec![*a],
        }));
    }
    figures
}
