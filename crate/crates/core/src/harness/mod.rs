//! Experiment runner behind the `pcs` binary.
//!
//! Every experiment is described by one JSON [`ExperimentConfig`]. Trials
//! run in parallel, each on its own stream seeded from
//! `(master_seed, experiment, m, trial)`, and rows are sorted before they are
//! written, so identical configs give byte-identical files.

mod config;
mod experiments;
mod output;
mod seed;
mod twoball;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::{PcsError, Result};

pub use config::{ExperimentConfig, ExperimentKind, ExperimentParams, Method};
pub use experiments::{estimate, setup_trial, TrialData};
pub use output::{
    emit_bounds_csv, emit_cover_csv, emit_csv, emit_svg_lines, parse_aux, read_csv, write_json, CoverRow, ResultRow,
    Series, CSV_HEADER,
};
pub use seed::{label_hash, trial_seed};
pub use twoball::{noise_lemma_tv, LemmaSetup};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "PCS_THREADS";

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub experiment: ExperimentKind,
    pub rows: Vec<ResultRow>,
    pub reports: Vec<BoundReport>,
    pub cover: Vec<CoverRow>,
    pub series: Vec<Series>,
    pub summary: BTreeMap<String, f64>,
}

impl ExperimentOutput {
    fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            reports: Vec::new(),
            cover: Vec::new(),
            series: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    /// Reports whose comparison ran and failed.
    pub fn failed_reports(&self) -> Vec<&BoundReport> {
        self.reports.iter().filter(|r| r.failed()).collect()
    }
}

/// Runs the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::RecoveryCurve => experiments::run_recovery_curve(cfg),
        ExperimentKind::Twoball => twoball::run_twoball(cfg),
        ExperimentKind::ZipfCover => experiments::run_zipf_cover(cfg),
        ExperimentKind::Mismatch => experiments::run_mismatch(cfg),
        ExperimentKind::BoundsReport => experiments::run_bounds_report(cfg),
        ExperimentKind::InpaintDemo => experiments::run_inpaint_demo(cfg),
    }
}

/// Writes `<name>.csv` plus whichever of the cover CSV, SVG, bounds table,
/// reports JSON and summary JSON apply; returns the paths written.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let name = out.experiment.name();
    let mut written = Vec::new();
    let path = dir.join(format!("{name}.csv"));
    emit_csv(&out.rows, &path)?;
    written.push(path);
    if !out.cover.is_empty() {
        let path = dir.join(format!("{name}_cover.csv"));
        emit_cover_csv(&out.cover, &path)?;
        written.push(path);
    }
    if !out.series.is_empty() {
        let path = dir.join(format!("{name}.svg"));
        emit_svg_lines(&out.series, name, &path)?;
        written.push(path);
    }
    if !out.reports.is_empty() {
        let path = dir.join(format!("{name}_bounds.csv"));
        emit_bounds_csv(&out.reports, &path)?;
        written.push(path);
        let path = dir.join(format!("{name}_reports.json"));
        write_json(&out.reports, &path)?;
        written.push(path);
    }
    let path = dir.join(format!("{name}_summary.json"));
    write_json(&out.summary, &path)?;
    written.push(path);
    Ok(written)
}

/// Builds the global worker pool, honoring `PCS_THREADS` when set.
///
/// Returns the number of threads in use.
pub fn init_thread_pool() -> Result<usize> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
                PcsError::Configuration(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))
            })?;
            Some(n)
        }
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested {
        builder = builder.num_threads(n);
    }
    // A pool built earlier in the process stays in place.
    let _ = builder.build_global();
    Ok(rayon::current_num_threads())
}
