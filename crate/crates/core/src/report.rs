//! Sweep artifacts: record CSVs, the run manifest and an SVG scatter plot.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coa::CoaConfig;
use crate::epsilon::SweepRecord;
use crate::pareto::FrontPoint;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scatter plots need exactly 2 objectives, got {0}")]
    UnsupportedPlot(usize),
    #[error("malformed CSV at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot serialize manifest: {0}")]
    Json(#[from] serde_json::Error),
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_header(epsilons: usize, variables: usize, objectives: usize) -> String {
    let mut cols: Vec<String> = Vec::new();
    if epsilons == 1 {
        cols.push("epsilon".into());
    } else {
        cols.extend((1..=epsilons).map(|i| format!("epsilon{i}")));
    }
    cols.extend((1..=variables).map(|i| format!("x{i}")));
    cols.extend((1..=objectives).map(|i| format!("f{i}")));
    cols.push("feasible".into());
    cols.push("total_violation".into());
    cols.join(",")
}

/// Renders records as CSV in grid order. `shape` is
/// `(epsilons, variables, objectives)` and only matters for the header of an
/// empty file.
pub fn records_csv(records: &[SweepRecord], shape: (usize, usize, usize)) -> String {
    let mut ordered: Vec<&SweepRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.index);
    let mut out = csv_header(shape.0, shape.1, shape.2);
    out.push('\n');
    for r in ordered {
        let fields = r
            .epsilon
            .iter()
            .chain(&r.point.x)
            .chain(&r.point.objective_values)
            .map(|v| format_float(*v))
            .chain([r.feasible.to_string(), format_float(r.point.total_violation)]);
        let line: Vec<String> = fields.collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(
    records: &[SweepRecord],
    shape: (usize, usize, usize),
    path: &Path,
) -> Result<(), ReportError> {
    write_file(path, &records_csv(records, shape))
}

/// A parsed records file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    /// Numeric columns of each row; `feasible` is split out.
    pub rows: Vec<CsvRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub values: Vec<f64>,
    pub feasible: bool,
    pub total_violation: f64,
}

pub fn parse_csv(text: &str) -> Result<CsvTable, ReportError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or(ReportError::Parse {
            line: 1,
            reason: "missing header".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header[header.len() - 2] != "feasible" {
        return Err(ReportError::Parse {
            line: 1,
            reason: "header must end with feasible,total_violation".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = |reason: String| ReportError::Parse { line: i + 2, reason };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(bad(format!("{} fields, expected {}", fields.len(), header.len())));
        }
        let number = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let values = fields[..fields.len() - 2]
            .iter()
            .map(|s| number(s))
            .collect::<Result<Vec<_>, _>>()?;
        let feasible = match fields[fields.len() - 2] {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("feasible flag `{other}`"))),
        };
        let total_violation = number(fields[fields.len() - 1])?;
        rows.push(CsvRow {
            values,
            feasible,
            total_violation,
        });
    }
    Ok(CsvTable { header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProblem {
    pub id: u8,
    pub variant: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestGrid {
    /// `preset`, `override` or `estimated`.
    pub source: String,
    pub low: f64,
    pub high: f64,
    pub pace: f64,
    pub count: usize,
    pub reported_steps: usize,
    /// Set when `count` is more than one away from `reported_steps`.
    pub count_discrepancy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub records: usize,
    pub feasible_records: usize,
    pub front: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMetrics {
    pub spacing: Option<f64>,
    pub generational_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub problem: ManifestProblem,
    pub keep_index: usize,
    pub grid: ManifestGrid,
    pub config: CoaConfig,
    pub seed: u64,
    pub workers: usize,
    pub filter: bool,
    pub duration_ms: u64,
    pub counts: ManifestCounts,
    pub metrics: ManifestMetrics,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<(), ReportError> {
        write_file(path, &self.to_json()?)
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick(v: f64) -> String {
    format!("{v:.4}")
}

/// Standalone SVG of a two-objective front, with an optional reference
/// front drawn as a polyline underneath.
pub fn render_svg_scatter(
    front: &[FrontPoint],
    reference: Option<&[FrontPoint]>,
) -> Result<String, ReportError> {
    for p in front.iter().chain(reference.unwrap_or(&[])) {
        if p.objective_values.len() != 2 {
            return Err(ReportError::UnsupportedPlot(p.objective_values.len()));
        }
    }
    let everything = || front.iter().chain(reference.unwrap_or(&[]));
    let (x_lo, x_hi) = extent(everything().map(|p| p.objective_values[0]));
    let (y_lo, y_hi) = extent(everything().map(|p| p.objective_values[1]));
    let sx = |v: f64| MARGIN + (v - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>"#
    );
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="12" fill="black">"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">f1</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">f2</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="{}" text-anchor="start">{}</text>"#, bottom + 18.0, tick(x_lo));
    let _ = writeln!(svg, r#"<text x="{right}" y="{}" text-anchor="end">{}</text>"#, bottom + 18.0, tick(x_hi));
    let _ = writeln!(svg, r#"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"#, left - 6.0, tick(y_lo));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 6.0, top + 4.0, tick(y_hi));
    let _ = writeln!(svg, "</g>");

    if let Some(reference) = reference {
        let mut sorted: Vec<&FrontPoint> = reference.iter().collect();
        sorted.sort_by(|a, b| a.objective_values[0].total_cmp(&b.objective_values[0]));
        let points: Vec<String> = sorted
            .iter()
            .map(|p| format!("{:.3},{:.3}", sx(p.objective_values[0]), sy(p.objective_values[1])))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="#d62728" stroke-width="0.8" points="{}"/>"##,
            points.join(" ")
        );
    }
    for p in front {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="#1f77b4"/>"##,
            sx(p.objective_values[0]),
            sy(p.objective_values[1])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg_scatter(
    front: &[FrontPoint],
    reference: Option<&[FrontPoint]>,
    path: &Path,
) -> Result<(), ReportError> {
    write_file(path, &render_svg_scatter(front, reference)?)
}
