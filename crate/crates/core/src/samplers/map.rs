use serde::{Deserialize, Serialize};

use crate::error::{invalid, PcsError, Result};
use crate::measurement::MeasurementRecord;
use crate::numeric::{cholesky, dot, solve_spd, Matrix, RngStream, Vector};
use crate::priors::{GaussianMixture, LinearGenerative};

/// Cap on step halvings within one iteration.
pub const MAX_HALVINGS: usize = 30;

/// Step growth after an accepted step.
const STEP_GROWTH: f64 = 1.25;

/// Gradient-descent settings for MAP and modified-MAP.
///
/// The objective is `‖y − A x‖² − γ ln p(x)`; `γ = 2σ²/m` (the default when
/// `gamma` is `None`) makes it proportional to the negative log-posterior,
/// any other `γ` gives the modified-MAP estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_step")]
    pub step_size: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_true")]
    pub halve_on_increase: bool,
    /// Also start from each mixture component's own optimum.
    #[serde(default = "default_true")]
    pub seed_components: bool,
}

fn default_step() -> f64 {
    0.1
}

fn default_iterations() -> usize {
    500
}

fn default_restarts() -> usize {
    2
}

fn default_true() -> bool {
    true
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            step_size: default_step(),
            iterations: default_iterations(),
            restarts: default_restarts(),
            halve_on_increase: true,
            seed_components: true,
        }
    }
}

impl MapConfig {
    pub fn modified(gamma: f64) -> Self {
        Self {
            gamma: Some(gamma),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.gamma {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(invalid("gamma must be non-negative"));
            }
        }
        if self.iterations == 0 {
            return Err(invalid("MAP needs at least one iteration"));
        }
        if self.restarts == 0 {
            return Err(invalid("MAP needs at least one start"));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(invalid("step size must be positive"));
        }
        Ok(())
    }

    /// `γ` in effect for a record.
    pub fn effective_gamma(&self, rec: &MeasurementRecord) -> f64 {
        self.gamma.unwrap_or(2.0 * rec.sigma * rec.sigma / rec.m as f64)
    }
}

/// Prior handed to the MAP solver.
#[derive(Debug, Clone, Copy)]
pub enum MapPrior<'a> {
    /// Optimize over `x` against the mixture density.
    Mixture(&'a GaussianMixture),
    /// Optimize over the latent `z` with `q(z) = N(0, I)`.
    Linear(&'a LinearGenerative),
}

/// Result of a MAP solve.
#[derive(Debug, Clone)]
pub struct MapRun {
    /// Estimate in signal space.
    pub estimate: Vector,
    /// Latent optimum for generative priors.
    pub latent: Option<Vector>,
    pub objective: f64,
    /// Objective after each accepted iteration of the winning start.
    pub trace: Vec<f64>,
}

struct Problem<'a> {
    prior: MapPrior<'a>,
    /// `A` for mixtures, `A G` for generative priors; `None` drops the data term.
    operator: Option<Matrix>,
    y: &'a [f64],
    gamma: f64,
}

impl Problem<'_> {
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        match &self.operator {
            Some(op) => op.mul_slice(v).iter().zip(self.y).map(|(a, y)| a - y).collect(),
            None => Vec::new(),
        }
    }

    fn objective(&self, v: &[f64]) -> Result<f64> {
        let r: f64 = self.residual(v).iter().map(|d| d * d).sum();
        let prior_term = match self.prior {
            MapPrior::Mixture(g) => {
                if self.gamma == 0.0 {
                    0.0
                } else {
                    -self.gamma * g.log_density(v)?
                }
            }
            MapPrior::Linear(_) => 0.5 * self.gamma * dot(v, v),
        };
        Ok(r + prior_term)
    }

    fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut g: Vec<f64> = match &self.operator {
            Some(op) => op
                .mul_transpose_slice(&self.residual(v))
                .iter()
                .map(|d| 2.0 * d)
                .collect(),
            None => vec![0.0; v.len()],
        };
        match self.prior {
            MapPrior::Mixture(prior) => {
                if self.gamma != 0.0 {
                    let s = prior.score(v)?;
                    for (gi, si) in g.iter_mut().zip(s.iter()) {
                        *gi -= self.gamma * si;
                    }
                }
            }
            MapPrior::Linear(_) => {
                for (gi, vi) in g.iter_mut().zip(v) {
                    *gi += self.gamma * vi;
                }
            }
        }
        Ok(g)
    }

    fn initial(&self, rng: &mut RngStream) -> Vec<f64> {
        match self.prior {
            MapPrior::Mixture(g) => g.sample(rng).into_inner(),
            MapPrior::Linear(l) => rng.normal_vec(l.dim()),
        }
    }

    /// Minimizers of `‖y − Ax‖² + (γ/2)(x − μ_k)ᵀΣ_k⁻¹(x − μ_k)`, one per
    /// mixture component whose system is solvable.
    fn component_seeds(&self) -> Vec<Vec<f64>> {
        let MapPrior::Mixture(prior) = self.prior else {
            return Vec::new();
        };
        let half = 0.5 * self.gamma;
        (0..prior.components())
            .filter_map(|k| {
                let precision = prior.factor(k).inverse();
                let mu = &prior.means()[k];
                let pm = precision.mul_slice(mu);
                let (lhs, rhs) = match &self.operator {
                    Some(op) => {
                        let aty = op.mul_transpose_slice(self.y);
                        let lhs = op.gram_cols().add(&precision.scale(half)).ok()?;
                        let rhs: Vec<f64> = aty.iter().zip(&pm).map(|(a, b)| a + half * b).collect();
                        (lhs, rhs)
                    }
                    None => return Some(mu.as_slice().to_vec()),
                };
                let f = cholesky(&lhs.symmetrize()).ok()?;
                Some(solve_spd(&f, &rhs).ok()?.into_inner())
            })
            .collect()
    }
}

fn descend(problem: &Problem<'_>, start: Vec<f64>, cfg: &MapConfig) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let mut v = start;
    let mut f = problem.objective(&v)?;
    if !f.is_finite() {
        return Err(PcsError::Diverged("objective is not finite at the start".into()));
    }
    let mut step = cfg.step_size;
    let mut trace = vec![f];
    for _ in 0..cfg.iterations {
        let g = problem.gradient(&v)?;
        if g.iter().all(|x| *x == 0.0) {
            break;
        }
        if !cfg.halve_on_increase {
            let cand: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let fc = problem.objective(&cand)?;
            if !fc.is_finite() || cand.iter().any(|x| !x.is_finite()) {
                return Err(PcsError::Diverged("objective became non-finite".into()));
            }
            v = cand;
            f = fc;
            trace.push(f);
            continue;
        }
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let fc = problem.objective(&cand)?;
            if fc.is_finite() && fc <= f {
                v = cand;
                f = fc;
                accepted = true;
                step *= STEP_GROWTH;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No decrease within the halving budget: stationary to precision.
            break;
        }
        trace.push(f);
    }
    Ok((v, f, trace))
}

/// Full MAP solve with restarts, returning the objective trace as well.
pub fn map_run(prior: MapPrior<'_>, rec: &MeasurementRecord, cfg: &MapConfig, rng: &mut RngStream) -> Result<MapRun> {
    cfg.validate()?;
    let operator = match prior {
        MapPrior::Mixture(g) => {
            if g.dim() != rec.n {
                return Err(invalid("prior and measurement dimensions differ"));
            }
            rec.a.clone()
        }
        MapPrior::Linear(l) => {
            if l.dim() != rec.n {
                return Err(invalid("prior and measurement dimensions differ"));
            }
            rec.a.matmul(l.generator())?
        }
    };
    let problem = Problem {
        prior,
        operator: Some(operator),
        y: rec.y.as_slice(),
        gamma: cfg.effective_gamma(rec),
    };
    let (v, objective, trace) = solve(&problem, cfg, rng)?;
    let v = Vector::new(v).map_err(|_| PcsError::Diverged("estimate is not finite".into()))?;
    Ok(match prior {
        MapPrior::Mixture(_) => MapRun {
            estimate: v,
            latent: None,
            objective,
            trace,
        },
        MapPrior::Linear(l) => MapRun {
            estimate: l.apply(&v)?,
            latent: Some(v),
            objective,
            trace,
        },
    })
}

fn solve(problem: &Problem<'_>, cfg: &MapConfig, rng: &mut RngStream) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let mut starts: Vec<Vec<f64>> = (0..cfg.restarts).map(|_| problem.initial(rng)).collect();
    if cfg.seed_components {
        starts.extend(problem.component_seeds());
    }
    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    for start in starts {
        let run = descend(problem, start, cfg)?;
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Highest-density point of a mixture, found by the same descent as MAP.
pub fn mixture_mode(prior: &GaussianMixture, cfg: &MapConfig, rng: &mut RngStream) -> Result<MapRun> {
    cfg.validate()?;
    let problem = Problem {
        prior: MapPrior::Mixture(prior),
        operator: None,
        y: &[],
        gamma: 1.0,
    };
    let (v, objective, trace) = solve(&problem, cfg, rng)?;
    Ok(MapRun {
        estimate: Vector::new(v).map_err(|_| PcsError::Diverged("mode is not finite".into()))?,
        latent: None,
        objective,
        trace,
    })
}

/// MAP (or modified-MAP) point estimate in signal space.
pub fn map_estimate(
    prior: MapPrior<'_>,
    rec: &MeasurementRecord,
    cfg: &MapConfig,
    rng: &mut RngStream,
) -> Result<Vector> {
    Ok(map_run(prior, rec, cfg, rng)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::exact_posterior;

    #[test]
    fn gaussian_map_is_posterior_mean() {
        let prior = GaussianMixture::single(
            Vector::new(vec![0.5, -1.0]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.6]]).unwrap(),
        )
        .unwrap();
        let rec = MeasurementRecord::new(
            Matrix::from_rows(&[vec![1.0, 0.5]]).unwrap(),
            Vector::new(vec![1.7]).unwrap(),
            0.8,
        )
        .unwrap();
        let exact = exact_posterior(&prior, &rec).unwrap().mean();
        let est = map_estimate(
            MapPrior::Mixture(&prior),
            &rec,
            &MapConfig::default(),
            &mut RngStream::new(1),
        )
        .unwrap();
        assert!(est.distance(&exact) < 1e-4, "{est:?} vs {exact:?}");
    }

    #[test]
    fn zero_gamma_is_least_squares() {
        let gen = LinearGenerative::from_singular_values(vec![1.0, 0.7, 0.5]).unwrap();
        let a = Matrix::from_rows(&[
            vec![1.0, 0.2, 0.0],
            vec![0.1, 0.9, 0.3],
            vec![0.0, 0.4, 1.1],
            vec![0.5, 0.0, 0.2],
        ])
        .unwrap();
        let rec = MeasurementRecord::new(a.clone(), Vector::new(vec![0.3, -1.0, 0.7, 2.0]).unwrap(), 0.5).unwrap();
        let cfg = MapConfig {
            gamma: Some(0.0),
            iterations: 2000,
            ..MapConfig::default()
        };
        let run = map_run(MapPrior::Linear(&gen), &rec, &cfg, &mut RngStream::new(2)).unwrap();
        let z = run.latent.unwrap();
        let b = a.matmul(gen.generator()).unwrap();
        let resid: Vec<f64> = b.mul_slice(&z).iter().zip(rec.y.iter()).map(|(p, y)| p - y).collect();
        let grad = b.mul_transpose_slice(&resid);
        assert!(crate::numeric::norm(&grad) <= 1e-6);
    }

    #[test]
    fn objective_never_increases() {
        let prior = GaussianMixture::new(
            vec![0.3, 0.7],
            vec![
                Vector::new(vec![-2.0, 0.0]).unwrap(),
                Vector::new(vec![2.0, 1.0]).unwrap(),
            ],
            vec![Matrix::identity(2).scale(0.3), Matrix::identity(2)],
        )
        .unwrap();
        let rec = MeasurementRecord::new(
            Matrix::from_rows(&[vec![0.4, -0.2]]).unwrap(),
            Vector::new(vec![0.1]).unwrap(),
            1.0,
        )
        .unwrap();
        let cfg = MapConfig {
            step_size: 5.0,
            ..MapConfig::default()
        };
        let run = map_run(MapPrior::Mixture(&prior), &rec, &cfg, &mut RngStream::new(3)).unwrap();
        for w in run.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let gen = LinearGenerative::zipfian(3).unwrap();
        let rec = MeasurementRecord::new(
            Matrix::from_rows(&[vec![1.0, 0.0, 0.5]]).unwrap(),
            Vector::new(vec![0.4]).unwrap(),
            0.3,
        )
        .unwrap();
        let a = map_estimate(
            MapPrior::Linear(&gen),
            &rec,
            &MapConfig::default(),
            &mut RngStream::new(4),
        )
        .unwrap();
        let b = map_estimate(
            MapPrior::Linear(&gen),
            &rec,
            &MapConfig::default(),
            &mut RngStream::new(4),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spike_wins_over_slab() {
        let n = 6;
        let prior = GaussianMixture::new(
            vec![0.01, 0.99],
            vec![Vector::zeros(n), Vector::zeros(n)],
            vec![Matrix::identity(n).scale(1e-6), Matrix::identity(n)],
        )
        .unwrap();
        let mut rng = RngStream::new(9);
        let a = Matrix::new(3, n, rng.normal_vec(3 * n).iter().map(|v| v / 3f64.sqrt()).collect()).unwrap();
        let x = prior.means()[1].add(&rng.normal_vec(n));
        let rec = crate::measurement::measure(&a, &x, 1.0, &mut rng).unwrap();
        let est = map_estimate(MapPrior::Mixture(&prior), &rec, &MapConfig::default(), &mut rng).unwrap();
        assert!(est.norm() < 0.01, "{}", est.norm());
        let plain = MapConfig {
            seed_components: false,
            ..MapConfig::default()
        };
        let local = map_estimate(MapPrior::Mixture(&prior), &rec, &plain, &mut rng).unwrap();
        assert!(local.norm() > 0.01);
    }

    #[test]
    fn mode_of_mixture() {
        let prior = GaussianMixture::new(
            vec![0.3, 0.7],
            vec![Vector::new(vec![-3.0]).unwrap(), Vector::new(vec![3.0]).unwrap()],
            vec![Matrix::identity(1), Matrix::identity(1)],
        )
        .unwrap();
        let run = mixture_mode(&prior, &MapConfig::default(), &mut RngStream::new(1)).unwrap();
        assert!((run.estimate[0] - 3.0).abs() < 1e-3, "{:?}", run.estimate);
    }

    #[test]
    fn invalid_config() {
        let cfg = MapConfig {
            iterations: 0,
            ..MapConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(MapConfig::modified(-1.0).validate().is_err());
    }
}
