use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PcsError, Result};
use crate::priors::PriorSpec;
use crate::samplers::{AnnealSchedule, MapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    RecoveryCurve,
    Twoball,
    ZipfCover,
    Mismatch,
    BoundsReport,
    InpaintDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::RecoveryCurve,
        Self::Twoball,
        Self::ZipfCover,
        Self::Mismatch,
        Self::BoundsReport,
        Self::InpaintDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::RecoveryCurve => "recovery_curve",
            Self::Twoball => "twoball",
            Self::ZipfCover => "zipf_cover",
            Self::Mismatch => "mismatch",
            Self::BoundsReport => "bounds_report",
            Self::InpaintDemo => "inpaint_demo",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| PcsError::Configuration(format!("unknown experiment '{name}'")))
    }
}

/// Recovery algorithm run by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactPosterior,
    Langevin,
    Map,
    ModifiedMap,
    Sir,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExactPosterior => "exact_posterior",
            Self::Langevin => "langevin",
            Self::Map => "map",
            Self::ModifiedMap => "modified_map",
            Self::Sir => "sir",
        }
    }

    /// Fixed stream index, independent of the order methods are listed in.
    pub(crate) fn stream(self) -> u64 {
        100 + self as u64
    }
}

/// Experiment-specific knobs; each experiment reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    /// Trials per `m` whose matrix also gets a TV estimate (two-ball).
    #[serde(default = "default_tv_matrices")]
    pub tv_matrices: usize,
    /// Monte-Carlo draws per TV estimate.
    #[serde(default = "default_tv_samples")]
    pub tv_samples: usize,
    /// Separation constant for the noise-lemma TV check.
    #[serde(default)]
    pub lemma_c: Option<f64>,
    /// Prior samples for covering estimates.
    #[serde(default = "default_cover_samples")]
    pub cover_samples: usize,
    /// Cover radii; empty picks a `√2` ladder from the typical sample distance.
    #[serde(default)]
    pub etas: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Mismatch shifts as multiples of `σ`.
    #[serde(default = "default_eps_factors")]
    pub eps_factors: Vec<f64>,
    /// Direction of the mismatch shift (normalized); defaults to `e₁`.
    #[serde(default)]
    pub shift_direction: Option<Vec<f64>>,
    /// Fano / lower-bound recovery radius; defaults to a quarter of the atom spacing.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Fano failure probability; defaults to the empirical failure rate.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    /// Holdout trials used to pick the modified-MAP weight.
    #[serde(default = "default_holdout")]
    pub holdout_trials: usize,
    /// Candidate modified-MAP weights as multiples of `2σ²/m`.
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
}

fn default_tv_matrices() -> usize {
    100
}
fn default_tv_samples() -> usize {
    400
}
fn default_cover_samples() -> usize {
    10_000
}
fn default_deltas() -> Vec<f64> {
    vec![0.01]
}
fn default_eps_factors() -> Vec<f64> {
    vec![0.0, 0.25, 1.0, 4.0]
}
fn default_holdout() -> usize {
    20
}
fn default_gamma_grid() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0]
}

impl Default for ExperimentParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all parameters have defaults")
    }
}

fn default_trials() -> usize {
    1
}
fn default_particles() -> usize {
    2000
}
fn default_methods() -> Vec<Method> {
    vec![Method::ExactPosterior]
}

/// A single JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    #[serde(default)]
    pub m_list: Vec<usize>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub prior: PriorSpec,
    #[serde(default)]
    pub mismatch_prior: Option<PriorSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub schedule: Option<AnnealSchedule>,
    #[serde(default)]
    pub map: MapConfig,
    /// Fixed modified-MAP weight; `None` selects one on holdout trials.
    #[serde(default)]
    pub modified_map_gamma: Option<f64>,
    #[serde(default = "default_particles")]
    pub sir_particles: usize,
    /// Observed coordinates for mask measurements.
    #[serde(default)]
    pub mask: Option<Vec<usize>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Record wall-clock runtimes; off by default so outputs are reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub params: ExperimentParams,
}

fn config_error(msg: impl Into<String>) -> PcsError {
    PcsError::Configuration(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PcsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Annealing schedule in effect: the configured one or `4σ → σ`.
    pub fn schedule(&self) -> Result<AnnealSchedule> {
        match &self.schedule {
            Some(s) => Ok(s.clone()),
            None if self.sigma > 0.0 => Ok(AnnealSchedule::desk_default(self.sigma)),
            None => Err(config_error("Langevin with sigma = 0 needs an explicit schedule")),
        }
    }

    /// Checks everything that can be checked before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_error("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(config_error("n must be positive"));
        }
        if self.prior.dim() != self.n {
            return Err(config_error(format!(
                "prior has dimension {} but n = {}",
                self.prior.dim(),
                self.n
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(config_error("sigma must be finite and non-negative"));
        }
        if !matches!(self.experiment, ExperimentKind::ZipfCover | ExperimentKind::InpaintDemo) {
            if self.m_list.is_empty() {
                return Err(config_error("m_list must not be empty"));
            }
            if self.m_list.contains(&0) {
                return Err(config_error("every m must be at least 1"));
            }
        }
        if self.methods.is_empty() {
            return Err(config_error("at least one method is required"));
        }
        if let Some(p) = &self.mismatch_prior {
            if p.dim() != self.n {
                return Err(config_error("mismatch prior dimension differs from n"));
            }
        }
        self.map.validate().map_err(|e| config_error(e.to_string()))?;
        // Cover estimates run no recovery method.
        if self.experiment != ExperimentKind::ZipfCover {
            for &method in &self.methods {
                self.check_method(method, &self.prior)?;
            }
        }
        match self.experiment {
            ExperimentKind::RecoveryCurve => {}
            ExperimentKind::Twoball => {
                let PriorSpec::BallMixture(b) = &self.prior else {
                    return Err(config_error("twoball needs a ball_mixture prior"));
                };
                if b.components() != 2 {
                    return Err(config_error("twoball needs exactly two balls"));
                }
                if self.sigma == 0.0 && self.m_list.iter().any(|&m| m >= self.n) {
                    return Err(config_error("noiseless twoball needs every m < n"));
                }
            }
            ExperimentKind::ZipfCover => {
                if !matches!(self.prior, PriorSpec::LinearGenerative(_)) {
                    return Err(config_error("zipf_cover needs a linear_generative prior"));
                }
                if self.params.cover_samples == 0 {
                    return Err(config_error("cover_samples must be positive"));
                }
                for &d in &self.params.deltas {
                    if !(0.0..1.0).contains(&d) {
                        return Err(config_error("cover deltas must lie in [0, 1)"));
                    }
                }
                if self.params.etas.iter().any(|e| !(*e > 0.0)) {
                    return Err(config_error("cover radii must be positive"));
                }
            }
            ExperimentKind::Mismatch => {
                if self.mismatch_prior.is_none() && self.params.eps_factors.is_empty() {
                    return Err(config_error("mismatch needs mismatch_prior or eps_factors"));
                }
                if let Some(d) = &self.params.shift_direction {
                    if d.len() != self.n || d.iter().all(|v| *v == 0.0) {
                        return Err(config_error("shift_direction must be a nonzero vector of length n"));
                    }
                }
                if let Some(p) = &self.mismatch_prior {
                    for &method in &self.methods {
                        self.check_method(method, p)?;
                    }
                } else if matches!(self.prior, PriorSpec::LinearGenerative(_)) {
                    return Err(config_error("a linear_generative prior cannot be shifted"));
                }
            }
            ExperimentKind::BoundsReport => {
                if !matches!(self.prior, PriorSpec::DiscreteAtoms(_)) {
                    return Err(config_error("bounds_report needs a discrete_atoms prior"));
                }
                if self.sigma == 0.0 {
                    return Err(config_error("bounds_report needs sigma > 0"));
                }
            }
            ExperimentKind::InpaintDemo => {
                if !matches!(self.prior, PriorSpec::GaussianMixture(_)) {
                    return Err(config_error("inpaint_demo needs a gaussian_mixture prior"));
                }
                let Some(mask) = &self.mask else {
                    return Err(config_error("inpaint_demo needs a mask"));
                };
                let mut seen = vec![false; self.n];
                for &i in mask {
                    if i >= self.n || std::mem::replace(&mut seen[i], true) {
                        return Err(config_error(format!("mask index {i} is out of range or repeated")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_method(&self, method: Method, prior: &PriorSpec) -> Result<()> {
        let kind = prior.kind();
        let reject = |why: &str| {
            Err(config_error(format!(
                "method {} with a {kind} prior: {why}",
                method.name()
            )))
        };
        let noiseless = self.sigma == 0.0;
        // Inpainting conditions exactly on the mask, so noiseless runs are fine there.
        let mask_exact = self.experiment == ExperimentKind::InpaintDemo;
        match (method, prior) {
            (Method::Sir, _) if noiseless => reject("SIR needs sigma > 0"),
            (Method::Sir, _) => {
                if self.sir_particles == 0 {
                    reject("sir_particles must be positive")
                } else {
                    Ok(())
                }
            }
            (Method::ExactPosterior, PriorSpec::BallMixture(_)) if !noiseless => {
                reject("exact ball posteriors are only available for sigma = 0; use sir")
            }
            (Method::ExactPosterior, PriorSpec::GaussianMixture(_) | PriorSpec::LinearGenerative(_))
                if noiseless && !mask_exact =>
            {
                reject("the conjugate posterior needs sigma > 0")
            }
            (Method::ExactPosterior, _) => Ok(()),
            (Method::Langevin, PriorSpec::GaussianMixture(_) | PriorSpec::LinearGenerative(_)) => {
                self.schedule()?.validate().map_err(|e| config_error(e.to_string()))
            }
            (Method::Map | Method::ModifiedMap, PriorSpec::GaussianMixture(_) | PriorSpec::LinearGenerative(_)) => {
                if noiseless && method == Method::Map && !mask_exact {
                    reject("MAP with sigma = 0 ignores the prior")
                } else if noiseless && self.modified_map_gamma.is_none() && !mask_exact {
                    reject("modified MAP with sigma = 0 needs modified_map_gamma")
                } else {
                    Ok(())
                }
            }
            _ => reject("no density or score is available"),
        }
    }
}
