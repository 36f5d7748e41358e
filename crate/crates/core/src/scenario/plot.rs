//! Static figure output: one SVG and one gnuplot script per figure group,
//! drawn from the per-run CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use thiserror::Error;

use super::config::OutputFormat;
use super::sweep::{FigureRecord, RunManifest, BIS_BAND};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("missing CSV for run psi={psi} alpha={alpha}: {path}")]
    MissingCsv {
        psi: String,
        alpha: f64,
        path: PathBuf,
    },
    #[error("malformed CSV {path}: {message}")]
    BadCsv { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const PANEL_TITLES: [&str; 5] = [
    "y1 blood (mg)",
    "y2 muscle (mg)",
    "y3 fat (mg)",
    "y4 effect site (mg/l)",
    "BIS",
];

struct Series {
    label: String,
    csv: String,
    /// t, y1..y4, BIS
    columns: [Vec<f64>; 6],
}

fn read_series(dir: &Path, psi: &str, alpha: f64, csv: &str) -> Result<Series, PlotError> {
    let path = dir.join(csv);
    let text = fs::read_to_string(&path).map_err(|_| PlotError::MissingCsv {
        psi: psi.to_string(),
        alpha,
        path: path.clone(),
    })?;
    let bad = |message: String| PlotError::BadCsv {
        path: path.clone(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == super::sweep::CSV_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut columns: [Vec<f64>; 6] = Default::default();
    for (n, line) in lines.enumerate() {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
        if values.len() != 6 {
            return Err(bad(format!("line {} has {} columns", n + 2, values.len())));
        }
        for (c, v) in columns.iter_mut().zip(values) {
            c.push(v);
        }
    }
    Ok(Series {
        label: format!("ψ={psi}, α={alpha}"),
        csv: csv.to_string(),
        columns,
    })
}

struct Panel {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn draw_panel(
    svg: &mut String,
    panel: &Panel,
    title: &str,
    series: &[Series],
    col: usize,
    y_range: (f64, f64),
    guides: &[f64],
) {
    let (t0, t1) = range(series.iter().flat_map(|s| s.columns[0].iter().copied()));
    let (y0, y1) = y_range;
    let px = |t: f64| panel.x + (t - t0) / (t1 - t0) * panel.w;
    let py = |v: f64| panel.y + panel.h - (v - y0) / (y1 - y0) * panel.h;

    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        panel.x, panel.y, panel.w, panel.h
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        panel.x + panel.w / 2.0,
        panel.y - 8.0,
        title
    );
    for (label, anchor_y) in [(y0, panel.y + panel.h), (y1, panel.y + 10.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            panel.x - 4.0,
            anchor_y,
            tick(label)
        );
    }
    for (t, anchor) in [(t0, "start"), (t1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="{anchor}">{}</text>"#,
            px(t),
            panel.y + panel.h + 14.0,
            tick(t)
        );
    }
    for g in guides {
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6,4"/>"##,
            panel.x,
            py(*g),
            panel.x + panel.w,
            py(*g)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#666">{}</text>"##,
            panel.x + 4.0,
            py(*g) - 3.0,
            tick(*g)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut points = String::new();
        for (t, v) in s.columns[0].iter().zip(&s.columns[col]) {
            let _ = write!(points, "{:.2},{:.2} ", px(*t), py(*v));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            points.trim_end()
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn svg_figure(fig: &FigureRecord, series: &[Series]) -> String {
    let mut svg = String::new();
    let width = 960.0;
    let height = 760.0;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        width / 2.0,
        fig.name
    );
    for col in 1..=4 {
        let panel = Panel {
            x: 60.0 + (col - 1) as f64 * 225.0,
            y: 60.0,
            w: 180.0,
            h: 200.0,
        };
        let yr = range(series.iter().flat_map(|s| s.columns[col].iter().copied()));
        draw_panel(
            &mut svg,
            &panel,
            PANEL_TITLES[col - 1],
            series,
            col,
            yr,
            &[],
        );
    }
    let bis_panel = Panel {
        x: 60.0,
        y: 330.0,
        w: 630.0,
        h: 360.0,
    };
    draw_panel(
        &mut svg,
        &bis_panel,
        PANEL_TITLES[4],
        series,
        5,
        (0.0, 100.0),
        &[BIS_BAND.0, BIS_BAND.1],
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">t (min)</text>"#,
        bis_panel.x + bis_panel.w / 2.0,
        bis_panel.y + bis_panel.h + 32.0
    );
    for (k, s) in series.iter().enumerate() {
        let y = 350.0 + k as f64 * 20.0;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="715" y1="{y:.2}" x2="745" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="752" y="{:.2}" font-size="12">{}</text>"#,
            y + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn gnuplot_script(fig: &FigureRecord, series: &[Series]) -> String {
    let mut gp = String::new();
    let _ = writeln!(gp, "# {}: state trajectories and BIS", fig.name);
    let _ = writeln!(gp, "set terminal svg size 960,760 dynamic");
    let _ = writeln!(gp, "set output '{}_gnuplot.svg'", fig.name);
    let _ = writeln!(gp, "set datafile separator ','");
    let _ = writeln!(gp, "set key autotitle columnhead");
    let _ = writeln!(gp, "set multiplot title '{}'", fig.name);
    for col in 1..=4 {
        let _ = writeln!(gp, "set origin {:.4},0.5", (col - 1) as f64 * 0.25);
        let _ = writeln!(gp, "set size 0.25,0.5");
        let _ = writeln!(gp, "set title '{}'", PANEL_TITLES[col - 1]);
        let _ = writeln!(gp, "unset key");
        let plots: Vec<String> = series
            .iter()
            .map(|s| format!("'{}' using 1:{} with lines", s.csv, col + 1))
            .collect();
        let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));
    }
    let _ = writeln!(gp, "set origin 0,0");
    let _ = writeln!(gp, "set size 1,0.5");
    let _ = writeln!(gp, "set title 'BIS'");
    let _ = writeln!(gp, "set key outside right");
    let _ = writeln!(gp, "set xlabel 't (min)'");
    let _ = writeln!(gp, "set yrange [0:100]");
    let mut plots: Vec<String> = series
        .iter()
        .map(|s| format!("'{}' using 1:6 with lines title '{}'", s.csv, s.label))
        .collect();
    plots.push(format!(
        "{} dashtype 2 lc rgb '#888888' notitle",
        BIS_BAND.0
    ));
    plots.push(format!(
        "{} dashtype 2 lc rgb '#888888' notitle",
        BIS_BAND.1
    ));
    let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));
    let _ = writeln!(gp, "unset multiplot");
    gp
}

/// Writes `<figure>.svg` and `<figure>.gp` per figure group (as enabled in
/// the manifest's formats) next to the CSVs in `dir`.
pub fn emit_plots(manifest: &RunManifest, dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let formats = &manifest.config.formats;
    let want_svg = formats.contains(&OutputFormat::Svg);
    let want_gp = formats.contains(&OutputFormat::Gnuplot);
    if manifest.runs.is_empty() || manifest.figures.iter().all(|f| f.members.is_empty()) {
        warn!("nothing to plot: the manifest has no successful runs in any figure");
        return Ok(Vec::new());
    }
    let mut written = Vec::new();
    for fig in &manifest.figures {
        if fig.members.is_empty() {
            warn!("figure {} has no successful runs; skipped", fig.name);
            continue;
        }
        let series = fig
            .members
            .iter()
            .map(|m| read_series(dir, &m.psi, m.alpha, &m.csv))
            .collect::<Result<Vec<_>, _>>()?;
        let mut outputs = Vec::new();
        if want_svg {
            outputs.push((
                dir.join(format!("{}.svg", fig.name)),
                svg_figure(fig, &series),
            ));
        }
        if want_gp {
            outputs.push((
                dir.join(format!("{}.gp", fig.name)),
                gnuplot_script(fig, &series),
            ));
        }
        for (path, body) in outputs {
            fs::write(&path, body).map_err(|source| PlotError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
    }
    Ok(written)
}
