//! Signal distributions: sampling, densities, smoothed scores, support radii
//! and translations used by the mismatch experiments.
//!
//! Every prior serializes as a JSON object carrying a `"type"` tag:
//!
//! ```json
//! {"type": "gaussian_mixture", "weights": [0.5, 0.5],
//!  "means": [[-2.0], [2.0]], "covariances": [[[1.0]], [[1.0]]]}
//! {"type": "ball_mixture", "weights": [0.5, 0.5],
//!  "centers": [[0.0, 0.0], [10.0, 0.0]], "radii": [0.5, 0.5]}
//! {"type": "linear_generative", "singular_values": [1.0, 0.5, 0.333]}
//! {"type": "linear_generative", "matrix": [[1.0, 0.0], [0.5, 2.0]]}
//! {"type": "discrete_atoms", "points": [[0.0], [3.0]], "weights": [0.5, 0.5]}
//! ```

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, PcsError, Result};
use crate::numeric::{
    cholesky, distance_squared, log_sum_exp, logdet_spd, norm, Matrix, RngStream, SpdFactor, Vector, LN_2PI,
};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Mass left outside the approximate support radius of a Gaussian component.
pub const GAUSSIAN_TAIL_MASS: f64 = 1e-6;

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(invalid("a mixture needs at least one component"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(invalid("mixture weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(invalid(format!("mixture weights sum to {total}, expected 1")));
    }
    Ok(())
}

fn vectors_from_rows(rows: Vec<Vec<f64>>, what: &str) -> Result<Vec<Vector>> {
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| Vector::new(r).map_err(|_| invalid(format!("{what} {i} is not finite"))))
        .collect()
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn check_dims(vectors: &[Vector], what: &str) -> Result<usize> {
    let n = vectors.first().map_or(0, |v| v.len());
    if n == 0 {
        return Err(invalid(format!("{what} must be non-empty vectors")));
    }
    if vectors.iter().any(|v| v.len() != n) {
        return Err(invalid(format!("{what} have inconsistent dimensions")));
    }
    Ok(n)
}

fn check_len(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(invalid(format!(
            "point has dimension {}, distribution has dimension {n}",
            x.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gaussian mixture
// ---------------------------------------------------------------------------

/// Finite mixture of multivariate Gaussians with cached Cholesky factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianMixtureRepr", into = "GaussianMixtureRepr")]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vector>,
    covariances: Vec<Matrix>,
    factors: Vec<SpdFactor>,
}

#[derive(Serialize, Deserialize)]
struct GaussianMixtureRepr {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<GaussianMixtureRepr> for GaussianMixture {
    type Error = PcsError;

    fn try_from(r: GaussianMixtureRepr) -> Result<Self> {
        let means = vectors_from_rows(r.means, "mean")?;
        let covariances = r
            .covariances
            .iter()
            .map(|rows| Matrix::from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(r.weights, means, covariances)
    }
}

impl From<GaussianMixture> for GaussianMixtureRepr {
    fn from(g: GaussianMixture) -> Self {
        GaussianMixtureRepr {
            weights: g.weights,
            means: g.means.into_iter().map(Vector::into_inner).collect(),
            covariances: g.covariances.iter().map(matrix_to_rows).collect(),
        }
    }
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vector>, covariances: Vec<Matrix>) -> Result<Self> {
        check_weights(&weights)?;
        if means.len() != weights.len() || covariances.len() != weights.len() {
            return Err(invalid("weights, means and covariances must have equal counts"));
        }
        let n = check_dims(&means, "means")?;
        let factors = covariances
            .iter()
            .map(|c| {
                if c.shape() != (n, n) {
                    return Err(invalid(format!("covariance must be {n}x{n}")));
                }
                cholesky(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            means,
            covariances,
            factors,
        })
    }

    /// A single Gaussian `N(mean, covariance)`.
    pub fn single(mean: Vector, covariance: Matrix) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], vec![covariance])
    }

    /// Isotropic single Gaussian `N(mean, variance·I)`.
    pub fn isotropic(mean: Vector, variance: f64) -> Result<Self> {
        let n = mean.len();
        Self::single(mean, Matrix::identity(n).scale(variance))
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vector] {
        &self.means
    }

    pub fn covariances(&self) -> &[Matrix] {
        &self.covariances
    }

    pub(crate) fn factor(&self, k: usize) -> &SpdFactor {
        &self.factors[k]
    }

    /// `ln w_k + ln N(x; μ_k, Σ_k)` for every component.
    pub fn component_log_terms(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.dim())?;
        Ok(self.component_log_terms_unchecked(x))
    }

    pub(crate) fn component_log_terms_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim() as f64;
        (0..self.components())
            .map(|k| {
                if self.weights[k] == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let diff: Vec<f64> = x.iter().zip(self.means[k].iter()).map(|(a, b)| a - b).collect();
                let maha = self.factors[k].mahalanobis_sq(&diff);
                self.weights[k].ln() - 0.5 * (n * LN_2PI + logdet_spd(&self.factors[k]) + maha)
            })
            .collect()
    }

    /// `ln Σ_k w_k N(x; μ_k, Σ_k)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        Ok(log_sum_exp(&self.component_log_terms(x)?))
    }

    /// Posterior responsibilities of each component at `x`.
    pub fn responsibilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(crate::numeric::normalize_log_weights(&self.component_log_terms(x)?))
    }

    /// `∇ₓ ln p(x)`.
    pub fn score(&self, x: &[f64]) -> Result<Vector> {
        let resp = self.responsibilities(x)?;
        let mut grad = vec![0.0; self.dim()];
        for (k, r) in resp.iter().enumerate() {
            if *r == 0.0 {
                continue;
            }
            let diff: Vec<f64> = x.iter().zip(self.means[k].iter()).map(|(a, b)| a - b).collect();
            let p = self.factors[k].solve_slice(&diff);
            for (g, v) in grad.iter_mut().zip(p) {
                *g -= r * v;
            }
        }
        Ok(Vector::from_raw(grad))
    }

    /// The mixture convolved with `N(0, s²I)`: each covariance gains `s²I`.
    pub fn convolved(&self, s: f64) -> Result<GaussianMixture> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(invalid("smoothing scale must be finite and non-negative"));
        }
        if s == 0.0 {
            return Ok(self.clone());
        }
        let covs = self.covariances.iter().map(|c| c.add_diagonal(s * s)).collect();
        GaussianMixture::new(self.weights.clone(), self.means.clone(), covs)
    }

    /// `∇ₓ ln (p ⊛ N(0, s²I))(x)`.
    pub fn smoothed_score(&self, x: &[f64], s: f64) -> Result<Vector> {
        self.convolved(s)?.score(x)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let k = rng.categorical(&self.weights);
        self.sample_component(k, rng)
    }

    pub(crate) fn sample_component(&self, k: usize, rng: &mut RngStream) -> Vector {
        let z = rng.normal_vec(self.dim());
        let lz = self.factors[k].lower_mul(&z);
        Vector::from_raw(self.means[k].iter().zip(lz).map(|(m, v)| m + v).collect())
    }

    /// Mean of the mixture.
    pub fn mean(&self) -> Vector {
        let mut out = vec![0.0; self.dim()];
        for (w, m) in self.weights.iter().zip(&self.means) {
            for (o, v) in out.iter_mut().zip(m.iter()) {
                *o += w * v;
            }
        }
        Vector::from_raw(out)
    }

    /// Covariance of the mixture (law of total variance).
    pub fn covariance(&self) -> Matrix {
        let n = self.dim();
        let mu = self.mean();
        let mut out = Matrix::zeros(n, n);
        for k in 0..self.components() {
            let w = self.weights[k];
            let d = self.means[k].sub(&mu);
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + w * (self.covariances[k].get(i, j) + d[i] * d[j]);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn translate(&self, v: &[f64]) -> Result<GaussianMixture> {
        check_len(v, self.dim())?;
        let means = self.means.iter().map(|m| m.add(v)).collect();
        Ok(Self {
            weights: self.weights.clone(),
            means,
            covariances: self.covariances.clone(),
            factors: self.factors.clone(),
        })
    }

    fn support_radius(&self) -> f64 {
        let z = standard_normal_quantile(1.0 - GAUSSIAN_TAIL_MASS);
        (0..self.components())
            .map(|k| {
                let lmax = self.covariances[k]
                    .symmetric_eigenvalues()
                    .map(|e| e.last().copied().unwrap_or(0.0))
                    .unwrap_or_else(|_| self.covariances[k].max_abs() * self.dim() as f64);
                self.means[k].norm() + z * lmax.max(0.0).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Inverse CDF of the standard normal.
pub fn standard_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

// ---------------------------------------------------------------------------
// Uniform ball mixture
// ---------------------------------------------------------------------------

/// Mixture of uniform distributions on Euclidean balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BallMixtureRepr", into = "BallMixtureRepr")]
pub struct BallMixture {
    weights: Vec<f64>,
    centers: Vec<Vector>,
    radii: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BallMixtureRepr {
    weights: Vec<f64>,
    centers: Vec<Vec<f64>>,
    radii: Vec<f64>,
}

impl TryFrom<BallMixtureRepr> for BallMixture {
    type Error = PcsError;

    fn try_from(r: BallMixtureRepr) -> Result<Self> {
        BallMixture::new(r.weights, vectors_from_rows(r.centers, "center")?, r.radii)
    }
}

impl From<BallMixture> for BallMixtureRepr {
    fn from(b: BallMixture) -> Self {
        BallMixtureRepr {
            weights: b.weights,
            centers: b.centers.into_iter().map(Vector::into_inner).collect(),
            radii: b.radii,
        }
    }
}

impl BallMixture {
    pub fn new(weights: Vec<f64>, centers: Vec<Vector>, radii: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        if centers.len() != weights.len() || radii.len() != weights.len() {
            return Err(invalid("weights, centers and radii must have equal counts"));
        }
        check_dims(&centers, "centers")?;
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(invalid("ball radii must be positive"));
        }
        Ok(Self {
            weights,
            centers,
            radii,
        })
    }

    /// Two equally weighted balls of radius `radius` whose centers sit at
    /// `±separation/2` along the first axis.
    pub fn two_balls(n: usize, radius: f64, separation: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[0] = -separation / 2.0;
        b[0] = separation / 2.0;
        Self::new(
            vec![0.5, 0.5],
            vec![Vector::new(a)?, Vector::new(b)?],
            vec![radius, radius],
        )
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let k = rng.categorical(&self.weights);
        self.sample_component(k, rng)
    }

    /// Uniform draw from ball `k`: Gaussian direction, radius `r·U^(1/n)`.
    pub fn sample_component(&self, k: usize, rng: &mut RngStream) -> Vector {
        let n = self.dim();
        let dir = uniform_direction(n, rng);
        let radius = self.radii[k] * rng.uniform().powf(1.0 / n as f64);
        Vector::from_raw(self.centers[k].iter().zip(dir).map(|(c, d)| c + radius * d).collect())
    }

    /// Index of the ball containing `x`, if any (first match).
    pub fn containing_ball(&self, x: &[f64]) -> Option<usize> {
        (0..self.components()).find(|&k| distance_squared(x, &self.centers[k]) <= self.radii[k] * self.radii[k])
    }

    /// Index of the center nearest to `x`.
    pub fn nearest_center(&self, x: &[f64]) -> usize {
        nearest_index(x, &self.centers)
    }

    pub fn translate(&self, v: &[f64]) -> Result<BallMixture> {
        check_len(v, self.dim())?;
        Ok(Self {
            weights: self.weights.clone(),
            centers: self.centers.iter().map(|c| c.add(v)).collect(),
            radii: self.radii.clone(),
        })
    }
}

pub(crate) fn uniform_direction(n: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let g = rng.normal_vec(n);
        let len = norm(&g);
        if len > 0.0 {
            return g.into_iter().map(|v| v / len).collect();
        }
    }
}

pub(crate) fn nearest_index(x: &[f64], points: &[Vector]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = distance_squared(x, p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Linear generative model
// ---------------------------------------------------------------------------

/// `x = G z` with `z ~ N(0, I)` and a fixed square generator `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinearGenerativeRepr", into = "LinearGenerativeRepr")]
pub struct LinearGenerative {
    repr: LinearGenerativeRepr,
    generator: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum LinearGenerativeRepr {
    SingularValues { singular_values: Vec<f64> },
    Matrix { matrix: Vec<Vec<f64>> },
}

impl TryFrom<LinearGenerativeRepr> for LinearGenerative {
    type Error = PcsError;

    fn try_from(r: LinearGenerativeRepr) -> Result<Self> {
        match r {
            LinearGenerativeRepr::SingularValues { singular_values } => {
                LinearGenerative::from_singular_values(singular_values)
            }
            LinearGenerativeRepr::Matrix { matrix } => LinearGenerative::from_matrix(Matrix::from_rows(&matrix)?),
        }
    }
}

impl From<LinearGenerative> for LinearGenerativeRepr {
    fn from(g: LinearGenerative) -> Self {
        g.repr
    }
}

impl LinearGenerative {
    /// Diagonal generator with the given singular values.
    pub fn from_singular_values(singular_values: Vec<f64>) -> Result<Self> {
        if singular_values.is_empty() {
            return Err(invalid("at least one singular value is required"));
        }
        if singular_values.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(invalid("singular values must be positive"));
        }
        let generator = Matrix::diagonal(&singular_values);
        Ok(Self {
            repr: LinearGenerativeRepr::SingularValues { singular_values },
            generator,
        })
    }

    /// Zipfian spectrum `s_i = 1/i`, `i = 1..=n`.
    pub fn zipfian(n: usize) -> Result<Self> {
        Self::from_singular_values((1..=n).map(|i| 1.0 / i as f64).collect())
    }

    /// Arbitrary square generator matrix.
    pub fn from_matrix(generator: Matrix) -> Result<Self> {
        if !generator.is_square() || generator.rows() == 0 {
            return Err(invalid("generator must be a non-empty square matrix"));
        }
        Ok(Self {
            repr: LinearGenerativeRepr::Matrix {
                matrix: matrix_to_rows(&generator),
            },
            generator,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vector> {
        self.generator.mul_vec(z)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        let z = rng.normal_vec(self.dim());
        Vector::from_raw(self.generator.mul_slice(&z))
    }

    /// The induced distribution `N(0, G Gᵀ)` as a one-component mixture.
    pub fn to_gaussian(&self) -> Result<GaussianMixture> {
        GaussianMixture::single(Vector::zeros(self.dim()), self.generator.gram_rows())
    }

    fn support_radius(&self) -> f64 {
        let z = standard_normal_quantile(1.0 - GAUSSIAN_TAIL_MASS);
        let lmax = self
            .generator
            .gram_rows()
            .symmetric_eigenvalues()
            .map(|e| e.last().copied().unwrap_or(0.0))
            .unwrap_or(0.0);
        z * lmax.max(0.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Discrete atoms
// ---------------------------------------------------------------------------

/// Finitely supported distribution on distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscreteAtomsRepr", into = "DiscreteAtomsRepr")]
pub struct DiscreteAtoms {
    points: Vec<Vector>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DiscreteAtomsRepr {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<DiscreteAtomsRepr> for DiscreteAtoms {
    type Error = PcsError;

    fn try_from(r: DiscreteAtomsRepr) -> Result<Self> {
        DiscreteAtoms::new(vectors_from_rows(r.points, "atom")?, r.weights)
    }
}

impl From<DiscreteAtoms> for DiscreteAtomsRepr {
    fn from(a: DiscreteAtoms) -> Self {
        DiscreteAtomsRepr {
            points: a.points.into_iter().map(Vector::into_inner).collect(),
            weights: a.weights,
        }
    }
}

impl DiscreteAtoms {
    pub fn new(points: Vec<Vector>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        if points.len() != weights.len() {
            return Err(invalid("points and weights must have equal counts"));
        }
        check_dims(&points, "atoms")?;
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(invalid(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Equal weights on every point.
    pub fn uniform(points: Vec<Vector>) -> Result<Self> {
        let k = points.len();
        if k == 0 {
            return Err(invalid("at least one atom is required"));
        }
        Self::new(points, vec![1.0 / k as f64; k])
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample_index(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.weights)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        self.points[self.sample_index(rng)].clone()
    }

    /// Index of the atom nearest to `x` (lowest index on ties).
    pub fn nearest(&self, x: &[f64]) -> usize {
        nearest_index(x, &self.points)
    }

    /// Smallest distance between two distinct atoms (`inf` for one atom).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.min(distance_squared(&self.points[i], &self.points[j]).sqrt());
            }
        }
        best
    }

    pub fn translate(&self, v: &[f64]) -> Result<DiscreteAtoms> {
        check_len(v, self.dim())?;
        Ok(Self {
            points: self.points.iter().map(|p| p.add(v)).collect(),
            weights: self.weights.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Tagged union
// ---------------------------------------------------------------------------

/// Any supported prior, tagged by `"type"` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PriorSpec {
    GaussianMixture(GaussianMixture),
    BallMixture(BallMixture),
    LinearGenerative(LinearGenerative),
    DiscreteAtoms(DiscreteAtoms),
}

/// Radius of a centered ball containing (almost) all prior mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportRadius {
    pub radius: f64,
    /// True when the prior has unbounded support and `radius` only captures
    /// all but about `1e-6` of its mass.
    pub approximate: bool,
}

impl PriorSpec {
    pub fn dim(&self) -> usize {
        match self {
            PriorSpec::GaussianMixture(g) => g.dim(),
            PriorSpec::BallMixture(b) => b.dim(),
            PriorSpec::LinearGenerative(l) => l.dim(),
            PriorSpec::DiscreteAtoms(a) => a.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PriorSpec::GaussianMixture(_) => "gaussian_mixture",
            PriorSpec::BallMixture(_) => "ball_mixture",
            PriorSpec::LinearGenerative(_) => "linear_generative",
            PriorSpec::DiscreteAtoms(_) => "discrete_atoms",
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector {
        match self {
            PriorSpec::GaussianMixture(g) => g.sample(rng),
            PriorSpec::BallMixture(b) => b.sample(rng),
            PriorSpec::LinearGenerative(l) => l.sample(rng),
            PriorSpec::DiscreteAtoms(a) => a.sample(rng),
        }
    }

    pub fn support_radius(&self) -> SupportRadius {
        match self {
            PriorSpec::GaussianMixture(g) => SupportRadius {
                radius: g.support_radius(),
                approximate: true,
            },
            PriorSpec::LinearGenerative(l) => SupportRadius {
                radius: l.support_radius(),
                approximate: true,
            },
            PriorSpec::BallMixture(b) => SupportRadius {
                radius: b
                    .centers
                    .iter()
                    .zip(&b.radii)
                    .map(|(c, r)| c.norm() + r)
                    .fold(0.0, f64::max),
                approximate: false,
            },
            PriorSpec::DiscreteAtoms(a) => SupportRadius {
                radius: a.points.iter().map(|p| p.norm()).fold(0.0, f64::max),
                approximate: false,
            },
        }
    }

    /// Translates every component by `v`. The result is at `W_∞` distance
    /// `‖v‖` from `self`.
    pub fn shift(&self, v: &[f64]) -> Result<PriorSpec> {
        Ok(match self {
            PriorSpec::GaussianMixture(g) => PriorSpec::GaussianMixture(g.translate(v)?),
            PriorSpec::BallMixture(b) => PriorSpec::BallMixture(b.translate(v)?),
            PriorSpec::DiscreteAtoms(a) => PriorSpec::DiscreteAtoms(a.translate(v)?),
            PriorSpec::LinearGenerative(l) => {
                check_len(v, l.dim())?;
                if v.iter().any(|x| *x != 0.0) {
                    return Err(invalid(
                        "a linear generative prior is centered at the origin and cannot be translated; \
                         convert it to a gaussian_mixture first",
                    ));
                }
                self.clone()
            }
        })
    }

    pub fn as_gaussian_mixture(&self) -> Option<&GaussianMixture> {
        match self {
            PriorSpec::GaussianMixture(g) => Some(g),
            _ => None,
        }
    }
}

/// One draw from `prior`.
pub fn sample(prior: &PriorSpec, rng: &mut RngStream) -> Vector {
    prior.sample(rng)
}

/// `ln p(x)` for a Gaussian mixture.
pub fn log_density(prior: &GaussianMixture, x: &[f64]) -> Result<f64> {
    prior.log_density(x)
}

/// Score of the prior smoothed by `N(0, s²I)`.
pub fn smoothed_score(prior: &GaussianMixture, x: &[f64], s: f64) -> Result<Vector> {
    prior.smoothed_score(x, s)
}

pub fn support_radius(prior: &PriorSpec) -> SupportRadius {
    prior.support_radius()
}

pub fn shift_prior(prior: &PriorSpec, v: &[f64]) -> Result<PriorSpec> {
    prior.shift(v)
}
