//! Exact posteriors `P(x | y)` for conjugate priors, plus a
//! sampling-importance-resampling fallback for anything that can be sampled.

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, PcsError, Result};
use crate::measurement::MeasurementRecord;
use crate::numeric::{
    cholesky, dot, log_sum_exp, logdet_spd, normalize_log_weights, Matrix, RngStream, SpdFactor, Vector, LN_2PI,
};
use crate::priors::{uniform_direction, BallMixture, DiscreteAtoms, GaussianMixture, PriorSpec};

/// Gaussian-mixture posterior obtained by a conjugate update.
#[derive(Debug, Clone)]
pub struct PosteriorMixture {
    weights: Vec<f64>,
    means: Vec<Vector>,
    covariances: Vec<Matrix>,
    factors: Vec<SpdFactor>,
    log_marginals: Vec<f64>,
}

impl PosteriorMixture {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vector] {
        &self.means
    }

    pub fn covariances(&self) -> &[Matrix] {
        &self.covariances
    }

    /// `ln N(y; Aμ_k, AΣ_kAᵀ + σ²/m I)` per component.
    pub fn log_marginals(&self) -> &[f64] {
        &self.log_marginals
    }

    /// `ln p(y)` of the measurement under the prior.
    pub fn log_evidence(&self, prior_weights: &[f64]) -> f64 {
        let terms: Vec<f64> = prior_weights
            .iter()
            .zip(&self.log_marginals)
            .map(|(w, l)| w.ln() + l)
            .collect();
        log_sum_exp(&terms)
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// Posterior as a plain mixture (for densities and scores).
    pub fn as_mixture(&self) -> Result<GaussianMixture> {
        GaussianMixture::new(
            renormalized(&self.weights),
            self.means.clone(),
            self.covariances.clone(),
        )
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(invalid("point dimension does not match posterior"));
        }
        let n = self.dim() as f64;
        let terms: Vec<f64> = (0..self.weights.len())
            .map(|k| {
                if self.weights[k] == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let d: Vec<f64> = x.iter().zip(self.means[k].iter()).map(|(a, b)| a - b).collect();
                self.weights[k].ln()
                    - 0.5 * (n * LN_2PI + logdet_spd(&self.factors[k]) + self.factors[k].mahalanobis_sq(&d))
            })
            .collect();
        Ok(log_sum_exp(&terms))
    }

    pub fn mean(&self) -> Vector {
        let mut out = vec![0.0; self.dim()];
        for (w, m) in self.weights.iter().zip(&self.means) {
            for (o, v) in out.iter_mut().zip(m.iter()) {
                *o += w * v;
            }
        }
        Vector::from_raw(out)
    }

    pub fn covariance(&self) -> Matrix {
        let n = self.dim();
        let mu = self.mean();
        let mut out = Matrix::zeros(n, n);
        for k in 0..self.weights.len() {
            let d = self.means[k].sub(&mu);
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + self.weights[k] * (self.covariances[k].get(i, j) + d[i] * d[j]);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Component index drawn by posterior weight.
    pub fn sample_component(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.weights)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let k = self.sample_component(rng);
        self.sample_from(k, rng)
    }

    pub fn sample_from(&self, k: usize, rng: &mut RngStream) -> Vector {
        let z = rng.normal_vec(self.dim());
        let lz = self.factors[k].lower_mul(&z);
        Vector::from_raw(self.means[k].iter().zip(lz).map(|(m, v)| m + v).collect())
    }
}

fn renormalized(w: &[f64]) -> Vec<f64> {
    let t: f64 = w.iter().sum();
    w.iter().map(|v| v / t).collect()
}

/// Conjugate update of a Gaussian-mixture prior.
///
/// Each component `N(μ, Σ)` becomes `N(μ + ΣAᵀS⁻¹(y − Aμ), Σ − ΣAᵀS⁻¹AΣ)`
/// with `S = AΣAᵀ + σ²/m I`, and its weight is rescaled by the marginal
/// likelihood `N(y; Aμ, S)`.
pub fn exact_posterior(prior: &GaussianMixture, rec: &MeasurementRecord) -> Result<PosteriorMixture> {
    if !(rec.sigma > 0.0) {
        return Err(PcsError::UnsupportedConfiguration(
            "exact Gaussian-mixture posterior requires noise level sigma > 0".into(),
        ));
    }
    if rec.n != prior.dim() {
        return Err(invalid(format!(
            "measurement acts on dimension {}, prior has dimension {}",
            rec.n,
            prior.dim()
        )));
    }
    let m = rec.m;
    let noise_var = rec.noise_variance();
    let at = rec.a.transpose();
    let k_count = prior.components();
    let mut log_terms = Vec::with_capacity(k_count);
    let mut log_marginals = Vec::with_capacity(k_count);
    let mut means = Vec::with_capacity(k_count);
    let mut covariances = Vec::with_capacity(k_count);
    let mut factors = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let sigma_k = &prior.covariances()[k];
        let mu_k = &prior.means()[k];
        // A Σ (m × n)
        let a_sigma = rec.a.matmul(sigma_k)?;
        let s = a_sigma.matmul(&at)?.symmetrize().add_diagonal(noise_var);
        let s_factor = cholesky(&s)
            .map_err(|e| PcsError::NumericalFailure(format!("innovation covariance of component {k}: {e}")))?;
        let resid: Vec<f64> = rec.y.iter().zip(rec.a.mul_slice(mu_k)).map(|(y, am)| y - am).collect();
        let mut whitened = resid.clone();
        s_factor.forward_in_place(&mut whitened);
        let log_marginal = -0.5 * (m as f64 * LN_2PI + logdet_spd(&s_factor) + dot(&whitened, &whitened));
        let mut s_inv_resid = whitened;
        s_factor.backward_in_place(&mut s_inv_resid);
        let gain = a_sigma.mul_transpose_slice(&s_inv_resid);
        let mean = Vector::from_raw(mu_k.iter().zip(gain).map(|(a, b)| a + b).collect());

        // W = L⁻¹ (AΣ), covariance Σ − WᵀW.
        let n = prior.dim();
        let mut w = Matrix::zeros(m, n);
        let mut col = vec![0.0; m];
        for j in 0..n {
            for i in 0..m {
                col[i] = a_sigma.get(i, j);
            }
            s_factor.forward_in_place(&mut col);
            for i in 0..m {
                w.set(i, j, col[i]);
            }
        }
        let cov = sigma_k.sub(&w.gram_cols())?.symmetrize();
        let factor = cholesky(&cov)
            .map_err(|e| PcsError::NumericalFailure(format!("posterior covariance of component {k}: {e}")))?;
        let wk = prior.weights()[k];
        log_terms.push(if wk > 0.0 {
            wk.ln() + log_marginal
        } else {
            f64::NEG_INFINITY
        });
        log_marginals.push(log_marginal);
        means.push(mean);
        covariances.push(cov);
        factors.push(factor);
    }
    if log_terms.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(PcsError::NumericalFailure("all component likelihoods vanish".into()));
    }
    Ok(PosteriorMixture {
        weights: normalize_log_weights(&log_terms),
        means,
        covariances,
        factors,
        log_marginals,
    })
}

/// Draw from an exact posterior.
pub fn posterior_sample(post: &PosteriorMixture, rng: &mut RngStream) -> Vector {
    post.sample(rng)
}

/// Posterior over the atoms of a discrete prior.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePosterior {
    pub atoms: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl DiscretePosterior {
    pub fn sample_index(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.weights)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        self.atoms[self.sample_index(rng)].clone()
    }
}

/// Tolerance on `‖y − A x_i‖` deciding ties in the noiseless case.
pub const NOISELESS_TIE_TOLERANCE: f64 = 1e-9;

/// Posterior over atoms: `w_i · exp(−m‖y − A x_i‖² / 2σ²)`, normalized.
///
/// With `σ = 0` the mass is spread over the atoms minimizing `‖y − A x_i‖`
/// (within [`NOISELESS_TIE_TOLERANCE`]) in proportion to their prior weights,
/// the limit of the noisy formula as `σ → 0`.
pub fn discrete_posterior(prior: &DiscreteAtoms, rec: &MeasurementRecord) -> Result<DiscretePosterior> {
    if rec.n != prior.dim() {
        return Err(invalid("measurement and prior dimensions differ"));
    }
    let resid: Vec<f64> = prior.points().iter().map(|p| rec.residual_sq(p)).collect();
    let weights = if rec.sigma > 0.0 {
        let scale = rec.m as f64 / (2.0 * rec.sigma * rec.sigma);
        let logw: Vec<f64> = prior
            .weights()
            .iter()
            .zip(&resid)
            .map(|(w, r)| {
                if *w > 0.0 {
                    w.ln() - scale * r
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        normalize_log_weights(&logw)
    } else {
        let dist: Vec<f64> = resid.iter().map(|r| r.sqrt()).collect();
        let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = dist
            .iter()
            .zip(prior.weights())
            .map(|(d, w)| if *d <= best + NOISELESS_TIE_TOLERANCE { *w } else { 0.0 })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter().map(|w| w / total).collect()
        } else {
            // Minimizers carry zero prior weight; fall back to uniform over them.
            let count = dist.iter().filter(|d| **d <= best + NOISELESS_TIE_TOLERANCE).count() as f64;
            dist.iter()
                .map(|d| {
                    if *d <= best + NOISELESS_TIE_TOLERANCE {
                        1.0 / count
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    Ok(DiscretePosterior {
        atoms: prior.points().to_vec(),
        weights,
    })
}

/// Sampling-importance-resampling: draw `particles` prior samples, weight
/// them by the Gaussian likelihood and return one resampled particle.
pub fn sir_posterior_sample(
    prior: &PriorSpec,
    rec: &MeasurementRecord,
    particles: usize,
    rng: &mut RngStream,
) -> Result<Vector> {
    if particles == 0 {
        return Err(invalid("SIR needs at least one particle"));
    }
    if !(rec.sigma > 0.0) {
        return Err(PcsError::UnsupportedConfiguration(
            "SIR weighting requires noise level sigma > 0".into(),
        ));
    }
    if rec.n != prior.dim() {
        return Err(invalid("measurement and prior dimensions differ"));
    }
    let scale = rec.m as f64 / (2.0 * rec.sigma * rec.sigma);
    let mut pool = Vec::with_capacity(particles);
    let mut logw = Vec::with_capacity(particles);
    for _ in 0..particles {
        let x = prior.sample(rng);
        logw.push(-scale * rec.residual_sq(&x));
        pool.push(x);
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Gaussian likelihood (without its normalizing constant) of the best
    // particle underflows: the particle cloud misses the measurement entirely.
    if !(max.exp() > 0.0) {
        return Err(PcsError::DegenerateWeights(format!(
            "largest log-likelihood {max:.1} underflows with {particles} particles; \
             raise the particle count or the noise level"
        )));
    }
    let weights: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let idx = rng.categorical(&weights);
    Ok(pool.swap_remove(idx))
}

// ---------------------------------------------------------------------------
// Noiseless ball mixtures
// ---------------------------------------------------------------------------

/// Geometry of `x ↦ A x` shared by projected-ball computations.
#[derive(Debug, Clone)]
pub struct ProjectionGeometry {
    a: Matrix,
    m: usize,
    n: usize,
    /// Factor of `AAᵀ` (wide case) or `AᵀA` (tall case).
    gram: SpdFactor,
}

impl ProjectionGeometry {
    pub fn new(a: &Matrix) -> Result<Self> {
        let (m, n) = a.shape();
        let gram_matrix = if m < n { a.gram_rows() } else { a.gram_cols() };
        let gram = cholesky(&gram_matrix)
            .map_err(|e| PcsError::NumericalFailure(format!("measurement matrix is rank deficient: {e}")))?;
        Ok(Self {
            a: a.clone(),
            m,
            n,
            gram,
        })
    }

    pub fn is_wide(&self) -> bool {
        self.m < self.n
    }

    /// Log-density at `y` of `A u` for `u` uniform on the ball `(center, radius)`.
    ///
    /// Only defined for `m < n`; for `m ≥ n` the image is a full-dimensional
    /// ellipsoid only when `m = n`, and degenerate otherwise.
    pub fn projected_ball_log_density(&self, center: &[f64], radius: f64, y: &[f64]) -> Result<f64> {
        if !self.is_wide() {
            return Err(PcsError::UnsupportedConfiguration(
                "projected-ball density needs fewer measurements than dimensions".into(),
            ));
        }
        let (n, m) = (self.n as f64, self.m as f64);
        let q = self.row_space_norm_sq(center, y);
        let slack = radius * radius - q;
        if !(slack > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let log_det_gram = logdet_spd(&self.gram);
        Ok(ln_gamma(n / 2.0 + 1.0)
            - ln_gamma((n - m) / 2.0 + 1.0)
            - 0.5 * m * std::f64::consts::PI.ln()
            - n * radius.ln()
            + 0.5 * (n - m) * slack.ln()
            - 0.5 * log_det_gram)
    }

    /// `(y − Ac)ᵀ (AAᵀ)⁻¹ (y − Ac)`: squared length of the row-space part of
    /// any `u` with `A(c + u) = y`.
    fn row_space_norm_sq(&self, center: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(self.a.mul_slice(center)).map(|(a, b)| a - b).collect();
        self.gram.mahalanobis_sq(&d)
    }

    /// Least-norm `u` with `A u = d` (wide case).
    fn min_norm_solution(&self, d: &[f64]) -> Vec<f64> {
        self.a.mul_transpose_slice(&self.gram.solve_slice(d))
    }

    /// Component of `g` in the null space of `A` (wide case).
    fn null_space_part(&self, g: &[f64]) -> Vec<f64> {
        let ag = self.a.mul_slice(g);
        let back = self.min_norm_solution(&ag);
        g.iter().zip(back).map(|(a, b)| a - b).collect()
    }
}

/// Exact posterior of a ball-mixture prior under noiseless measurements.
#[derive(Debug, Clone)]
pub struct NoiselessBallPosterior {
    prior: BallMixture,
    geometry: ProjectionGeometry,
    y: Vec<f64>,
    weights: Vec<f64>,
    /// Tall case: the unique preimage of `y`.
    preimage: Option<Vec<f64>>,
}

/// Conditions a uniform-ball mixture on `A x = y` exactly (`σ = 0`).
pub fn noiseless_ball_posterior(prior: &BallMixture, rec: &MeasurementRecord) -> Result<NoiselessBallPosterior> {
    if rec.sigma != 0.0 {
        return Err(PcsError::UnsupportedConfiguration(
            "noiseless ball posterior requires sigma = 0; use SIR for noisy measurements".into(),
        ));
    }
    if rec.n != prior.dim() {
        return Err(invalid("measurement and prior dimensions differ"));
    }
    let geometry = ProjectionGeometry::new(&rec.a)?;
    let y = rec.y.as_slice().to_vec();
    let n = rec.n as f64;
    let (log_weights, preimage) = if geometry.is_wide() {
        let logs = (0..prior.components())
            .map(|k| {
                let w = prior.weights()[k];
                if w == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(w.ln() + geometry.projected_ball_log_density(&prior.centers()[k], prior.radii()[k], &y)?)
            })
            .collect::<Result<Vec<_>>>()?;
        (logs, None)
    } else {
        let aty = rec.a.mul_transpose_slice(&y);
        let x = geometry.gram.solve_slice(&aty);
        let resid = rec.residual_sq(&x).sqrt();
        if resid > 1e-8 * (1.0 + rec.y.norm()) {
            return Err(PcsError::InvalidInput("y is not in the range of A".into()));
        }
        let logs = (0..prior.components())
            .map(|k| {
                let inside = crate::numeric::distance(&x, &prior.centers()[k]) <= prior.radii()[k];
                let w = prior.weights()[k];
                if inside && w > 0.0 {
                    w.ln() - n * prior.radii()[k].ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        (logs, Some(x))
    };
    if log_weights.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(PcsError::DegenerateWeights(
            "measurement is inconsistent with every ball".into(),
        ));
    }
    Ok(NoiselessBallPosterior {
        prior: prior.clone(),
        geometry,
        y,
        weights: normalize_log_weights(&log_weights),
        preimage,
    })
}

impl NoiselessBallPosterior {
    /// Posterior probability of each ball.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let k = rng.categorical(&self.weights);
        self.sample_from(k, rng)
    }

    /// Uniform draw from ball `k` intersected with `{x : A x = y}`.
    pub fn sample_from(&self, k: usize, rng: &mut RngStream) -> Vector {
        if let Some(x) = &self.preimage {
            return Vector::from_raw(x.clone());
        }
        let c = &self.prior.centers()[k];
        let r = self.prior.radii()[k];
        let g = &self.geometry;
        let d: Vec<f64> = self.y.iter().zip(g.a.mul_slice(c)).map(|(a, b)| a - b).collect();
        let par = g.min_norm_solution(&d);
        let q = dot(&par, &par);
        let free_dim = g.n - g.m;
        let slice_radius = (r * r - q).max(0.0).sqrt();
        let rho = slice_radius * rng.uniform().powf(1.0 / free_dim as f64);
        let dir = loop {
            let raw = g.null_space_part(&uniform_direction(g.n, rng));
            let len = crate::numeric::norm(&raw);
            if len > 1e-12 {
                break raw.into_iter().map(|v| v / len).collect::<Vec<_>>();
            }
        };
        Vector::from_raw((0..g.n).map(|i| c[i] + par[i] + rho * dir[i]).collect())
    }
}

// ---------------------------------------------------------------------------
// Exact conditioning on observed coordinates
// ---------------------------------------------------------------------------

/// Posterior of a Gaussian mixture given exact values of some coordinates.
#[derive(Debug, Clone)]
pub struct CoordinatePosterior {
    n: usize,
    observed: Vec<usize>,
    values: Vec<f64>,
    free: Vec<usize>,
    /// Mixture over the free coordinates; `None` when everything is observed.
    free_posterior: Option<GaussianMixture>,
}

/// Conditions `prior` on `x[observed[i]] = values[i]` with no noise, as in
/// noiseless inpainting.
pub fn condition_on_coordinates(
    prior: &GaussianMixture,
    observed: &[usize],
    values: &[f64],
) -> Result<CoordinatePosterior> {
    let n = prior.dim();
    if observed.len() != values.len() {
        return Err(invalid("observed indices and values differ in length"));
    }
    let mut is_obs = vec![false; n];
    for &i in observed {
        if i >= n || std::mem::replace(&mut is_obs[i], true) {
            return Err(invalid(format!("observed index {i} is out of range or repeated")));
        }
    }
    let free: Vec<usize> = (0..n).filter(|i| !is_obs[*i]).collect();
    let free_posterior = if free.is_empty() {
        None
    } else {
        let mut log_terms = Vec::new();
        let mut means = Vec::new();
        let mut covs = Vec::new();
        for k in 0..prior.components() {
            let cov = &prior.covariances()[k];
            let mu = &prior.means()[k];
            let sub = |rows: &[usize], cols: &[usize]| {
                let mut out = Matrix::zeros(rows.len(), cols.len());
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &c) in cols.iter().enumerate() {
                        out.set(i, j, cov.get(r, c));
                    }
                }
                out
            };
            let ff = sub(&free, &free);
            if observed.is_empty() {
                log_terms.push(prior.weights()[k].ln());
                means.push(Vector::from_raw(free.iter().map(|&i| mu[i]).collect()));
                covs.push(ff);
                continue;
            }
            let oo = cholesky(&sub(observed, observed))?;
            let fo = sub(&free, observed);
            let resid: Vec<f64> = observed.iter().zip(values).map(|(&i, v)| v - mu[i]).collect();
            let log_marg = -0.5 * (observed.len() as f64 * LN_2PI + logdet_spd(&oo) + oo.mahalanobis_sq(&resid));
            let solved = oo.solve_slice(&resid);
            let mean: Vec<f64> = free
                .iter()
                .enumerate()
                .map(|(a, &i)| mu[i] + dot(fo.row(a), &solved))
                .collect();
            let mut cov_f = ff.clone();
            for a in 0..free.len() {
                let sa = oo.solve_slice(fo.row(a));
                for b in 0..free.len() {
                    cov_f.set(a, b, ff.get(a, b) - dot(fo.row(b), &sa));
                }
            }
            let w = prior.weights()[k];
            log_terms.push(if w > 0.0 { w.ln() + log_marg } else { f64::NEG_INFINITY });
            means.push(Vector::from_raw(mean));
            covs.push(cov_f.symmetrize());
        }
        Some(GaussianMixture::new(
            renormalized(&normalize_log_weights(&log_terms)),
            means,
            covs,
        )?)
    };
    Ok(CoordinatePosterior {
        n,
        observed: observed.to_vec(),
        values: values.to_vec(),
        free,
        free_posterior,
    })
}

impl CoordinatePosterior {
    pub fn free_posterior(&self) -> Option<&GaussianMixture> {
        self.free_posterior.as_ref()
    }

    /// Full signal with the observed values and `free_values` on the rest.
    pub fn complete(&self, free_values: &[f64]) -> Result<Vector> {
        if free_values.len() != self.free.len() {
            return Err(invalid("wrong number of free coordinates"));
        }
        let mut x = vec![0.0; self.n];
        for (&i, v) in self.observed.iter().zip(&self.values) {
            x[i] = *v;
        }
        for (&i, v) in self.free.iter().zip(free_values) {
            x[i] = *v;
        }
        Vector::new(x)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let z = match &self.free_posterior {
            Some(post) => post.sample(rng).into_inner(),
            None => Vec::new(),
        };
        self.complete(&z).expect("free sample has the right length")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{draw_matrix, measure, MeasurementProcess};

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn scalar_record(a: f64, y: f64, sigma: f64) -> MeasurementRecord {
        MeasurementRecord::new(Matrix::from_rows(&[vec![a]]).unwrap(), v(&[y]), sigma).unwrap()
    }

    #[test]
    fn scalar_conjugate_update() {
        let prior = GaussianMixture::isotropic(Vector::zeros(1), 1.0).unwrap();
        let post = exact_posterior(&prior, &scalar_record(1.0, 2.0, 1.0)).unwrap();
        assert!((post.mean()[0] - 1.0).abs() < 1e-12);
        assert!((post.covariance().get(0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noiseless_gaussian_rejected() {
        let prior = GaussianMixture::isotropic(Vector::zeros(1), 1.0).unwrap();
        assert!(matches!(
            exact_posterior(&prior, &scalar_record(1.0, 2.0, 0.0)),
            Err(PcsError::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn symmetric_mixture_equal_weights() {
        let prior = GaussianMixture::new(
            vec![0.5, 0.5],
            vec![v(&[-3.0, 1.0]), v(&[3.0, 1.0])],
            vec![Matrix::identity(2), Matrix::identity(2)],
        )
        .unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let rec = MeasurementRecord::new(a, v(&[0.0]), 1.0).unwrap();
        let post = exact_posterior(&prior, &rec).unwrap();
        assert!((post.weights()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_at_component_mean_selects_it() {
        let prior = GaussianMixture::new(
            vec![0.5, 0.5],
            vec![v(&[-10.0]), v(&[10.0])],
            vec![Matrix::identity(1), Matrix::identity(1)],
        )
        .unwrap();
        let post = exact_posterior(&prior, &scalar_record(1.0, -10.0, 1.0)).unwrap();
        assert!(post.weights()[0] > 0.99);
    }

    #[test]
    fn posterior_mean_shrinks_with_noise() {
        let prior = GaussianMixture::isotropic(v(&[0.5, -0.5]), 1.0).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 0.3], vec![-0.2, 0.8]]).unwrap();
        let y = v(&[3.0, 2.0]);
        let dists: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|s| {
                let rec = MeasurementRecord::new(a.clone(), y.clone(), *s).unwrap();
                exact_posterior(&prior, &rec).unwrap().mean().distance(&prior.mean())
            })
            .collect();
        assert!(dists[0] > dists[1] && dists[1] > dists[2], "{dists:?}");
    }

    #[test]
    fn sample_moments_single_component() {
        let prior = GaussianMixture::single(
            v(&[1.0, -1.0]),
            Matrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 0.8]]).unwrap(),
        )
        .unwrap();
        let a = Matrix::from_rows(&[vec![0.7, 0.2]]).unwrap();
        let rec = MeasurementRecord::new(a, v(&[1.3]), 0.5).unwrap();
        let post = exact_posterior(&prior, &rec).unwrap();
        let mut rng = RngStream::new(77);
        let n = 10_000;
        let draws: Vec<Vector> = (0..n).map(|_| post.sample(&mut rng)).collect();
        let mean = post.mean();
        let cov = post.covariance();
        for i in 0..2 {
            let m = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
            let tol = 4.0 * (cov.get(i, i) / n as f64).sqrt();
            assert!((m - mean[i]).abs() < tol);
            let var = draws.iter().map(|d| (d[i] - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            assert!((var / cov.get(i, i) - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn degenerate_weights_pick_one_component() {
        let prior = GaussianMixture::new(
            vec![1.0, 0.0],
            vec![v(&[-10.0]), v(&[10.0])],
            vec![Matrix::identity(1), Matrix::identity(1)],
        )
        .unwrap();
        let post = exact_posterior(&prior, &scalar_record(1.0, 10.0, 1.0)).unwrap();
        assert_eq!(post.weights()[1], 0.0);
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(post.sample_component(&mut rng), 0);
        }
    }

    #[test]
    fn component_frequencies_follow_weights() {
        let prior = GaussianMixture::new(
            vec![0.5, 0.5],
            vec![v(&[-2.0]), v(&[2.0])],
            vec![Matrix::identity(1).scale(0.5), Matrix::identity(1).scale(0.5)],
        )
        .unwrap();
        let post = exact_posterior(&prior, &scalar_record(1.0, 0.4, 2.0)).unwrap();
        let w = post.weights()[1];
        let mut rng = RngStream::new(2);
        let n = 10_000;
        let hits = (0..n).filter(|_| post.sample_component(&mut rng) == 1).count() as f64 / n as f64;
        assert!((hits - w).abs() <= 4.0 * (w * (1.0 - w) / n as f64).sqrt());
    }

    #[test]
    fn discrete_posterior_cases() {
        let atoms = DiscreteAtoms::uniform(vec![v(&[-1.0]), v(&[1.0])]).unwrap();
        let post = discrete_posterior(&atoms, &scalar_record(1.0, 0.0, 1.0)).unwrap();
        assert!((post.weights[0] - 0.5).abs() < 1e-15);

        let atoms = DiscreteAtoms::uniform(vec![v(&[0.0]), v(&[1.0]), v(&[2.0])]).unwrap();
        let post = discrete_posterior(&atoms, &scalar_record(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(post.weights, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn discrete_posterior_matches_naive_normalization() {
        let mut rng = RngStream::new(5);
        let pts: Vec<Vector> = (0..5).map(|_| Vector::new(rng.normal_vec(3)).unwrap()).collect();
        let raw: Vec<f64> = (0..5).map(|_| 0.1 + rng.uniform()).collect();
        let t: f64 = raw.iter().sum();
        let atoms = DiscreteAtoms::new(pts.clone(), raw.iter().map(|w| w / t).collect()).unwrap();
        let proc = MeasurementProcess::gaussian(2, 3, 1.0).unwrap();
        let a = draw_matrix(&proc, &mut rng);
        let rec = measure(&a, &pts[2], 1.0, &mut rng).unwrap();
        let post = discrete_posterior(&atoms, &rec).unwrap();
        let naive: Vec<f64> = (0..5)
            .map(|i| atoms.weights()[i] * (-(2.0) * rec.residual_sq(&pts[i]) / 2.0).exp())
            .collect();
        let z: f64 = naive.iter().sum();
        for i in 0..5 {
            assert!((post.weights[i] - naive[i] / z).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_posterior_reorder_invariant() {
        let pts = vec![v(&[0.0, 1.0]), v(&[2.0, -1.0]), v(&[0.5, 0.5])];
        let a = DiscreteAtoms::new(pts.clone(), vec![0.2, 0.3, 0.5]).unwrap();
        let b = DiscreteAtoms::new(
            vec![pts[2].clone(), pts[0].clone(), pts[1].clone()],
            vec![0.5, 0.2, 0.3],
        )
        .unwrap();
        let rec = MeasurementRecord::new(Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(), v(&[0.8]), 0.7).unwrap();
        let pa = discrete_posterior(&a, &rec).unwrap();
        let pb = discrete_posterior(&b, &rec).unwrap();
        assert!((pa.weights[2] - pb.weights[0]).abs() < 1e-15);
        assert!((pa.weights[0] - pb.weights[1]).abs() < 1e-15);
    }

    #[test]
    fn sir_single_atom_returns_atom() {
        let prior = PriorSpec::DiscreteAtoms(DiscreteAtoms::new(vec![v(&[1.0, 2.0])], vec![1.0]).unwrap());
        let rec = MeasurementRecord::new(Matrix::identity(2), v(&[0.0, 0.0]), 1.0).unwrap();
        let x = sir_posterior_sample(&prior, &rec, 10, &mut RngStream::new(0)).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn sir_degenerate_and_invalid() {
        let prior = PriorSpec::DiscreteAtoms(DiscreteAtoms::new(vec![v(&[0.0])], vec![1.0]).unwrap());
        let far = scalar_record(1.0, 1e6, 1.0);
        assert!(matches!(
            sir_posterior_sample(&prior, &far, 10, &mut RngStream::new(0)),
            Err(PcsError::DegenerateWeights(_))
        ));
        let noiseless = scalar_record(1.0, 0.0, 0.0);
        assert!(sir_posterior_sample(&prior, &noiseless, 10, &mut RngStream::new(0)).is_err());
        assert!(sir_posterior_sample(&prior, &far, 0, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn noiseless_ball_posterior_respects_constraint() {
        let prior = BallMixture::two_balls(6, 1.0, 3.0).unwrap();
        let mut rng = RngStream::new(8);
        let proc = MeasurementProcess::gaussian(2, 6, 0.0).unwrap();
        let a = draw_matrix(&proc, &mut rng);
        let x = prior.sample(&mut rng);
        let rec = measure(&a, &x, 0.0, &mut rng).unwrap();
        let post = noiseless_ball_posterior(&prior, &rec).unwrap();
        for _ in 0..200 {
            let s = post.sample(&mut rng);
            assert!(rec.residual_sq(&s).sqrt() < 1e-9);
            assert!(prior.containing_ball(&s).is_some());
        }
    }

    #[test]
    fn noiseless_tall_case_recovers_signal() {
        let prior = BallMixture::two_balls(3, 1.0, 5.0).unwrap();
        let mut rng = RngStream::new(9);
        let a = draw_matrix(&MeasurementProcess::gaussian(5, 3, 0.0).unwrap(), &mut rng);
        let x = prior.sample(&mut rng);
        let rec = measure(&a, &x, 0.0, &mut rng).unwrap();
        let post = noiseless_ball_posterior(&prior, &rec).unwrap();
        assert!(post.sample(&mut rng).distance(&x) < 1e-9);
        assert!(post.weights().contains(&1.0));
    }

    #[test]
    fn coordinate_posterior_fully_observed() {
        let prior = GaussianMixture::isotropic(Vector::zeros(3), 1.0).unwrap();
        let post = condition_on_coordinates(&prior, &[0, 1, 2], &[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(post.sample(&mut RngStream::new(0)).as_slice(), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn coordinate_posterior_matches_conjugate_limit() {
        let prior = GaussianMixture::new(
            vec![0.4, 0.6],
            vec![v(&[1.0, 0.0, -1.0]), v(&[-1.0, 2.0, 0.0])],
            vec![
                Matrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.2], vec![0.0, 0.2, 0.5]]).unwrap(),
                Matrix::identity(3).scale(0.7),
            ],
        )
        .unwrap();
        let exact = condition_on_coordinates(&prior, &[1], &[0.8]).unwrap();
        let a = Matrix::from_rows(&[vec![0.0, 1.0, 0.0]]).unwrap();
        let rec = MeasurementRecord::new(a, v(&[0.8]), 1e-4).unwrap();
        let approx = exact_posterior(&prior, &rec).unwrap();
        let fp = exact.free_posterior().unwrap();
        for k in 0..2 {
            assert!((fp.weights()[k] - approx.weights()[k]).abs() < 1e-6);
            assert!((fp.means()[k][0] - approx.means()[k][0]).abs() < 1e-6);
            assert!((fp.means()[k][1] - approx.means()[k][2]).abs() < 1e-6);
        }
    }
}
