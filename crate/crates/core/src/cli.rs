//! The `sweep` pipeline behind the command-line tool.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::benchmarks::{self, BenchmarkError, Variant, REPORTED_SWEEP_STEPS};
use crate::coa::CoaConfig;
use crate::epsilon::{
    self, epsilon_grid, estimate_epsilon_range, extract_front, held_objectives, round_outward,
    EpsilonError,
};
use crate::pareto::{generational_distance, spacing, FrontPoint};
use crate::report::{
    self, ManifestCounts, ManifestGrid, ManifestMetrics, ManifestProblem, ReportError, RunManifest,
};

/// Samples along closed-form fronts used for the manifest metrics.
pub const METRIC_REFERENCE_SAMPLES: usize = 10_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY_FRONT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Epsilon(#[from] EpsilonError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot create {path}: {source}")]
    CreateDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Report(ReportError::Io { .. }) | CliError::CreateDir { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub problem: u8,
    pub variant: Variant,
    pub keep_index: usize,
    pub eps_low: Option<f64>,
    pub eps_high: Option<f64>,
    pub pace: Option<f64>,
    /// Derive the range from single-objective runs instead of the presets.
    pub estimate: bool,
    pub out: PathBuf,
    pub filter: bool,
    pub workers: usize,
    /// Carries the seed.
    pub config: CoaConfig,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub manifest: RunManifest,
    pub front_empty: bool,
}

impl SweepOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.front_empty {
            EXIT_EMPTY_FRONT
        } else {
            EXIT_OK
        }
    }
}

/// Runs one sweep and writes `records.csv`, `front.csv`, `manifest.json`
/// and, for two objectives, `front.svg` into `req.out`.
pub fn execute_sweep(req: &SweepRequest) -> Result<SweepOutcome, CliError> {
    let started = Instant::now();
    req.config.validate().map_err(EpsilonError::from)?;
    if req.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let entry = benchmarks::get_problem(req.problem, req.variant)?;
    let problem = &entry.problem;
    let k = problem.num_objectives();
    if req.keep_index >= k {
        return Err(EpsilonError::BadIndex {
            index: req.keep_index,
            count: k,
        }
        .into());
    }

    let mut warnings = Vec::new();
    let held: Vec<usize> = held_objectives(k, req.keep_index).collect();
    let mut grids = Vec::with_capacity(held.len());
    let mut source = if req.eps_low.is_some() || req.eps_high.is_some() || req.pace.is_some() {
        "override"
    } else {
        "preset"
    };
    for &j in &held {
        let (low, high, pace) = if req.estimate {
            source = "estimated";
            let (lo, hi) = estimate_epsilon_range(problem, j, &req.config)?;
            let (lo, hi) = round_outward(lo, hi);
            let lo = req.eps_low.unwrap_or(lo);
            let hi = req.eps_high.unwrap_or(hi);
            let pace = req
                .pace
                .unwrap_or(((hi - lo) / REPORTED_SWEEP_STEPS as f64).max(f64::MIN_POSITIVE));
            (lo, hi, pace)
        } else {
            (
                req.eps_low.unwrap_or(entry.preset_epsilon_low),
                req.eps_high.unwrap_or(entry.preset_epsilon_high),
                req.pace.unwrap_or(entry.preset_pace),
            )
        };
        grids.push(epsilon_grid(low, high, pace)?);
    }

    let sweep = epsilon::run_sweep_grids(problem, req.keep_index, &grids, &req.config, req.workers)?;
    let front = extract_front(&sweep, req.filter);
    if front.empty {
        warnings.push("no feasible sub-problem; front is empty".to_string());
    }
    for r in &sweep.records {
        for w in &r.run.warnings {
            let text = format!("{w:?}");
            if !warnings.contains(&text) {
                warnings.push(text);
            }
        }
    }

    fs::create_dir_all(&req.out).map_err(|source| CliError::CreateDir {
        path: req.out.clone(),
        source,
    })?;
    let shape = (held.len(), problem.num_variables(), k);
    report::write_csv(&sweep.records, shape, &req.out.join("records.csv"))?;
    report::write_csv(&front.records, shape, &req.out.join("front.csv"))?;

    let front_points = front.front_points();
    let reference: Option<Vec<FrontPoint>> = entry
        .reference_front
        .as_ref()
        .map(|_| benchmarks::reference_front(req.problem, req.variant, METRIC_REFERENCE_SAMPLES))
        .transpose()?;
    if k == 2 {
        report::write_svg_scatter(&front_points, reference.as_deref(), &req.out.join("front.svg"))?;
    }
    let metrics = ManifestMetrics {
        spacing: (k == 2).then(|| spacing(&front_points).ok()).flatten(),
        generational_distance: reference
            .as_ref()
            .and_then(|r| generational_distance(&front_points, r).ok()),
    };

    let first = &grids[0];
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        problem: ManifestProblem {
            id: req.problem,
            variant: req.variant.to_string(),
            name: problem.name().to_string(),
        },
        keep_index: req.keep_index,
        grid: ManifestGrid {
            source: source.to_string(),
            low: first.lower,
            high: first.upper,
            pace: first.pace,
            count: first.len(),
            reported_steps: REPORTED_SWEEP_STEPS,
            count_discrepancy: first.len().abs_diff(REPORTED_SWEEP_STEPS) > 1,
        },
        config: req.config.clone(),
        seed: req.config.seed,
        workers: req.workers,
        filter: req.filter,
        duration_ms: started.elapsed().as_millis() as u64,
        counts: ManifestCounts {
            records: sweep.records.len(),
            feasible_records: sweep.records.iter().filter(|r| r.feasible).count(),
            front: front.len(),
        },
        metrics,
        warnings,
    };
    manifest.write(&req.out.join("manifest.json"))?;
    Ok(SweepOutcome {
        manifest,
        front_empty: front.empty,
    })
}
