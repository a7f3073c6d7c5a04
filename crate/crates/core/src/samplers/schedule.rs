use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measurement::MeasurementRecord;
use crate::numeric::Matrix;

/// Geometric noise ladder for annealed Langevin dynamics.
///
/// Level `t` (1-based) uses `σ_t = σ_1 (σ_L/σ_1)^((t-1)/(L-1))` and step
/// `α_t = ε (σ_t/σ_L)²`. The prior is smoothed at scale
/// `κ √(σ_t² − σ_L²)`, which vanishes at the last level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sigma_first: f64,
    pub sigma_last: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_steps")]
    pub steps_per_level: usize,
    /// Step size at the last level; `None` picks one from the curvature of
    /// the target.
    #[serde(default)]
    pub base_step: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_levels() -> usize {
    10
}

fn default_steps() -> usize {
    200
}

fn default_kappa() -> f64 {
    1.0
}

/// Fraction of the inverse curvature used by the automatic step size.
pub const AUTO_STEP_FRACTION: f64 = 0.1;

impl AnnealSchedule {
    pub fn new(
        sigma_first: f64,
        sigma_last: f64,
        levels: usize,
        steps_per_level: usize,
        base_step: Option<f64>,
    ) -> Result<Self> {
        let s = Self {
            sigma_first,
            sigma_last,
            levels,
            steps_per_level,
            base_step,
            kappa: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Ten levels of 200 steps from `4σ` down to `σ`.
    pub fn desk_default(sigma: f64) -> Self {
        Self {
            sigma_first: 4.0 * sigma,
            sigma_last: sigma,
            levels: default_levels(),
            steps_per_level: default_steps(),
            base_step: None,
            kappa: 1.0,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_base_step(mut self, step: f64) -> Self {
        self.base_step = Some(step);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_last > 0.0) || !self.sigma_first.is_finite() {
            return Err(invalid("schedule needs 0 < sigma_last"));
        }
        if self.sigma_first < self.sigma_last {
            return Err(invalid("schedule needs sigma_first >= sigma_last"));
        }
        if self.levels == 0 || self.steps_per_level == 0 {
            return Err(invalid("schedule needs at least one level and one step"));
        }
        if self.levels == 1 && self.sigma_first != self.sigma_last {
            return Err(invalid("a single-level schedule needs sigma_first == sigma_last"));
        }
        if let Some(e) = self.base_step {
            if !(e > 0.0) || !e.is_finite() {
                return Err(invalid("base step must be positive"));
            }
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(invalid("kappa must be non-negative"));
        }
        Ok(())
    }

    /// `σ_1, …, σ_L`; the last entry is exactly `sigma_last`.
    pub fn sigmas(&self) -> Vec<f64> {
        let l = self.levels;
        (0..l)
            .map(|t| {
                if t + 1 == l {
                    self.sigma_last
                } else {
                    let frac = t as f64 / (l - 1) as f64;
                    self.sigma_first * (self.sigma_last / self.sigma_first).powf(frac)
                }
            })
            .collect()
    }

    /// `α_t = ε (σ_t/σ_L)²`.
    pub fn step_sizes(&self, base_step: f64) -> Vec<f64> {
        self.sigmas()
            .iter()
            .map(|s| base_step * (s / self.sigma_last).powi(2))
            .collect()
    }

    /// Prior smoothing scale per level, `κ √(σ_t² − σ_L²)`.
    pub fn smoothing_scales(&self) -> Vec<f64> {
        let last = self.sigma_last;
        self.sigmas()
            .iter()
            .map(|s| self.kappa * (s * s - last * last).max(0.0).sqrt())
            .collect()
    }
}

/// Largest eigenvalue of `AᵀA`.
pub(crate) fn spectral_norm_sq(a: &Matrix) -> f64 {
    let gram = if a.rows() <= a.cols() {
        a.gram_rows()
    } else {
        a.gram_cols()
    };
    gram.symmetric_eigenvalues()
        .ok()
        .and_then(|e| e.last().copied())
        .unwrap_or_else(|| a.frobenius_norm().powi(2))
}

/// Step size `0.1 / L` where `L` bounds the curvature of the last-level
/// log-posterior: `(m/σ_L²)‖A‖₂² + prior_curvature`.
pub fn auto_base_step(rec: &MeasurementRecord, sigma_last: f64, prior_curvature: f64) -> f64 {
    let lik = rec.m as f64 / (sigma_last * sigma_last) * spectral_norm_sq(&rec.a);
    AUTO_STEP_FRACTION / (lik + prior_curvature)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_geometric_and_decreasing() {
        let s = AnnealSchedule::new(16.0, 4.0, 10, 200, Some(1e-3)).unwrap();
        let sig = s.sigmas();
        assert_eq!(sig[0], 16.0);
        assert_eq!(sig[9], 4.0);
        for w in sig.windows(2) {
            assert!(w[1] < w[0]);
            assert!((w[1] / w[0] - 0.25f64.powf(1.0 / 9.0)).abs() < 1e-12);
        }
        let steps = s.step_sizes(1e-3);
        assert!((steps[0] - 16e-3).abs() < 1e-15);
        assert_eq!(steps[9], 1e-3);
        for w in steps.windows(2) {
            assert!(w[1] < w[0]);
        }
        let smooth = s.smoothing_scales();
        assert_eq!(smooth[9], 0.0);
    }

    #[test]
    fn single_level_schedule() {
        let s = AnnealSchedule::new(1.0, 1.0, 1, 10, None).unwrap();
        assert_eq!(s.sigmas(), vec![1.0]);
        assert!(AnnealSchedule::new(2.0, 1.0, 1, 10, None).is_err());
        assert!(AnnealSchedule::new(1.0, 2.0, 3, 10, None).is_err());
        assert!(AnnealSchedule::new(1.0, 0.0, 3, 10, None).is_err());
    }

    #[test]
    fn defaults_from_json() {
        let s: AnnealSchedule = serde_json::from_str(r#"{"sigma_first": 16.0, "sigma_last": 4.0}"#).unwrap();
        assert_eq!(s.levels, 10);
        assert_eq!(s.steps_per_level, 200);
        assert_eq!(s.kappa, 1.0);
        assert_eq!(s.base_step, None);
    }
}
