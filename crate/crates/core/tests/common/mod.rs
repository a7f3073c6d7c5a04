//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use pcs_core::measurement::MeasurementRecord;
use pcs_core::priors::GaussianMixture;
use pcs_core::{Matrix, RngStream, Vector};

/// A Gaussian-mixture prior with one realized measurement.
pub struct ConjugateCase {
    pub label: String,
    pub prior: GaussianMixture,
    pub rec: MeasurementRecord,
}

pub fn vector(v: &[f64]) -> Vector {
    Vector::new(v.to_vec()).unwrap()
}

/// Prior `N(0, 1)`, `A = [1]`, `σ = 1`, `y = 2`.
pub fn scalar_case() -> ConjugateCase {
    ConjugateCase {
        label: "scalar".into(),
        prior: GaussianMixture::isotropic(vector(&[0.0]), 1.0).unwrap(),
        rec: MeasurementRecord::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), vector(&[2.0]), 1.0).unwrap(),
    }
}

/// Random 1-D or 2-D mixture with `1..=3` components, component variances
/// in `[0.2, 1] · max_var`, `m ∈ {1, 2}` and `σ ∈ [0.3, 1.2]`; `y` is drawn
/// from the model.
pub fn random_case(rng: &mut RngStream, n: usize, max_var: f64, mean_scale: f64, label: String) -> ConjugateCase {
    let k = 1 + rng.below(3);
    let raw: Vec<f64> = (0..k).map(|_| 0.2 + 0.8 * rng.uniform()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let means: Vec<Vector> = (0..k)
        .map(|_| Vector::new(rng.normal_vec(n).into_iter().map(|v| mean_scale * v).collect()).unwrap())
        .collect();
    let covs: Vec<Matrix> = (0..k)
        .map(|_| {
            if n == 1 {
                Matrix::from_rows(&[vec![max_var * (0.2 + 0.8 * rng.uniform())]]).unwrap()
            } else {
                // Eigenvalues in range, random rotation.
                let l1 = max_var * (0.2 + 0.8 * rng.uniform());
                let l2 = max_var * (0.2 + 0.8 * rng.uniform());
                let t = std::f64::consts::PI * rng.uniform();
                let (c, s) = (t.cos(), t.sin());
                Matrix::from_rows(&[
                    vec![l1 * c * c + l2 * s * s, (l1 - l2) * c * s],
                    vec![(l1 - l2) * c * s, l1 * s * s + l2 * c * c],
                ])
                .unwrap()
            }
        })
        .collect();
    let prior = GaussianMixture::new(weights, means, covs).unwrap();
    let m = 1 + rng.below(2);
    let sigma = 0.3 + 0.9 * rng.uniform();
    let scale = 1.0 / (m as f64).sqrt();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| rng.normal_vec(n).into_iter().map(|v| v * scale).collect())
        .collect();
    let a = Matrix::from_rows(&rows).unwrap();
    let x = prior.sample(rng);
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + sigma * scale * rng.standard_normal())
        .collect();
    ConjugateCase {
        label,
        prior,
        rec: MeasurementRecord::new(a, vector(&y), sigma).unwrap(),
    }
}

/// `ln N(x; μ, Σ)` for `n ≤ 2`, written out by hand.
fn log_gauss_small(x: &[f64], mu: &[f64], cov: &Matrix) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    match x.len() {
        1 => {
            let v = cov.get(0, 0);
            -0.5 * (two_pi * v).ln() - (x[0] - mu[0]).powi(2) / (2.0 * v)
        }
        2 => {
            let (a, b, d) = (cov.get(0, 0), cov.get(0, 1), cov.get(1, 1));
            let det = a * d - b * b;
            let (u, v) = (x[0] - mu[0], x[1] - mu[1]);
            let q = (d * u * u - 2.0 * b * u * v + a * v * v) / det;
            -(two_pi).ln() - 0.5 * det.ln() - 0.5 * q
        }
        _ => unreachable!("grid oracle handles n <= 2"),
    }
}

fn smallest_eigenvalue(cov: &Matrix) -> f64 {
    if cov.rows() == 1 {
        return cov.get(0, 0);
    }
    let (a, b, d) = (cov.get(0, 0), cov.get(0, 1), cov.get(1, 1));
    0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt()
}

/// `ln p(x) + ln p(y | x)` with both densities normalized, written without
/// the library's density code.
pub fn log_joint(case: &ConjugateCase, x: &[f64]) -> f64 {
    let prior = &case.prior;
    let rec = &case.rec;
    let n = x.len();
    let terms: Vec<f64> = (0..prior.components())
        .map(|k| prior.weights()[k].ln() + log_gauss_small(x, &prior.means()[k], &prior.covariances()[k]))
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lp = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
    let var = rec.sigma * rec.sigma / rec.m as f64;
    let mut resid = 0.0;
    for r in 0..rec.m {
        let ax: f64 = (0..n).map(|j| rec.a.get(r, j) * x[j]).sum();
        resid += (rec.y[r] - ax).powi(2);
    }
    lp - 0.5 * rec.m as f64 * (2.0 * std::f64::consts::PI * var).ln() - resid / (2.0 * var)
}

/// Integration grid for a case and the volume of one cell.
///
/// The grid spans ten prior standard deviations around every component and
/// its spacing is 0.4 of a lower bound on the posterior standard deviation,
/// where the Riemann sum of a Gaussian is accurate far below `1e-6`.
pub fn posterior_grid(case: &ConjugateCase) -> (Vec<Vec<f64>>, f64) {
    let prior = &case.prior;
    let rec = &case.rec;
    let n = prior.dim();
    let lik_prec = rec.m as f64 / (rec.sigma * rec.sigma) * rec.a.frobenius_norm().powi(2);
    let prior_prec = prior
        .covariances()
        .iter()
        .map(|c| 1.0 / smallest_eigenvalue(c))
        .fold(0.0, f64::max);
    let h = 0.4 / (lik_prec + prior_prec).sqrt();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (mu, cov) in prior.means().iter().zip(prior.covariances()) {
        for i in 0..n {
            let s = cov.get(i, i).sqrt();
            lo[i] = lo[i].min(mu[i] - 10.0 * s);
            hi[i] = hi[i].max(mu[i] + 10.0 * s);
        }
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let count = ((hi[i] - lo[i]) / h).ceil() as usize + 1;
            (0..count).map(|j| lo[i] + j as f64 * h).collect()
        })
        .collect();
    let points = if n == 1 {
        axes[0].iter().map(|&x| vec![x]).collect()
    } else {
        axes[0]
            .iter()
            .flat_map(|&x0| axes[1].iter().map(move |&x1| vec![x0, x1]))
            .collect()
    };
    (points, h.powi(n as i32))
}

/// `ln p(y)` by summing the joint density over the grid.
pub fn grid_log_evidence(case: &ConjugateCase) -> f64 {
    let (points, cell) = posterior_grid(case);
    let logs: Vec<f64> = points.iter().map(|p| log_joint(case, p)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + (logs.iter().map(|l| (l - max).exp()).sum::<f64>() * cell).ln()
}

/// Posterior mean and covariance by brute-force integration on the grid.
pub fn grid_posterior_moments(case: &ConjugateCase) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = case.prior.dim();
    let (points, _) = posterior_grid(case);
    let logs: Vec<f64> = points.iter().map(|p| log_joint(case, p)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean: Vec<f64> = (0..n)
        .map(|i| points.iter().zip(&w).map(|(p, w)| w * p[i]).sum::<f64>() / z)
        .collect();
    let cov: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    points
                        .iter()
                        .zip(&w)
                        .map(|(p, w)| w * (p[i] - mean[i]) * (p[j] - mean[j]))
                        .sum::<f64>()
                        / z
                })
                .collect()
        })
        .collect();
    (mean, cov)
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `min_π ((1/N) Σ ‖a_i − b_π(i)‖^p)^(1/p)` by enumeration.
pub fn brute_wasserstein_p(a: &[Vec<f64>], b: &[Vec<f64>], p: f64) -> f64 {
    let n = a.len();
    permutations(n)
        .iter()
        .map(|perm| (0..n).map(|i| euclid(&a[i], &b[perm[i]]).powf(p)).sum::<f64>() / n as f64)
        .fold(f64::INFINITY, f64::min)
        .powf(1.0 / p)
}

/// `min_π max_i ‖a_i − b_π(i)‖` by enumeration.
pub fn brute_wasserstein_inf(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a.len();
    permutations(n)
        .iter()
        .map(|perm| (0..n).map(|i| euclid(&a[i], &b[perm[i]])).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}
