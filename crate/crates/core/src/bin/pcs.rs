use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pcs_core::harness::{init_thread_pool, run_experiment, write_outputs, ExperimentConfig, ExperimentKind};
use pcs_core::PcsError;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BOUND_FAILED: u8 = 3;

/// Run a posterior-sampling compressed-sensing experiment.
#[derive(Debug, Parser)]
#[command(name = "pcs", version)]
struct Cli {
    /// recovery_curve, twoball, zipf_cover, mismatch, bounds_report or inpaint_demo.
    experiment: String,
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<usize>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, PcsError> {
    let kind = ExperimentKind::parse(&cli.experiment)?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| PcsError::Configuration(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| PcsError::Configuration(format!("{}: {e}", cli.config.display())))?;
    if cfg.experiment != kind {
        return Err(PcsError::Configuration(format!(
            "config describes {} but {} was requested",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match init_thread_pool().and_then(|_| load(&cli)) {
        Ok(cfg) => cfg,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let output = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e @ PcsError::Configuration(_)) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    match write_outputs(&output, &out_dir) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    let failed = output.failed_reports();
    for r in &failed {
        log::warn!("bound {} failed: {} > {}", r.name, r.lhs, r.rhs);
    }
    if cfg.experiment == ExperimentKind::BoundsReport && !failed.is_empty() {
        return ExitCode::from(EXIT_BOUND_FAILED);
    }
    ExitCode::SUCCESS
}
