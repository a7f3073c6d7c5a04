use log::warn;

use crate::error::{invalid, PcsError, Result};
use crate::measurement::MeasurementRecord;
use crate::numeric::{norm, RngStream, Vector};
use crate::priors::{GaussianMixture, LinearGenerative, PriorSpec};
use crate::samplers::schedule::{auto_base_step, AnnealSchedule};

/// Iterates beyond this multiple of the prior's support radius count as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

fn check_inputs(n: usize, rec: &MeasurementRecord, sched: &AnnealSchedule) -> Result<()> {
    sched.validate()?;
    if rec.n != n {
        return Err(invalid(format!(
            "measurement acts on dimension {}, prior has dimension {n}",
            rec.n
        )));
    }
    if sched.sigma_last < rec.sigma {
        warn!(
            "final annealing level {} is below the measurement noise {}",
            sched.sigma_last, rec.sigma
        );
    }
    Ok(())
}

fn smallest_variance(prior: &GaussianMixture) -> f64 {
    prior
        .covariances()
        .iter()
        .filter_map(|c| c.symmetric_eigenvalues().ok())
        .filter_map(|e| e.first().copied())
        .fold(f64::INFINITY, f64::min)
}

/// Annealed Langevin dynamics on `x` for a Gaussian-mixture prior.
///
/// At level `t` the chain follows
/// `x ← x + (α_t/2)[(m/σ_t²)Aᵀ(y − Ax) + ∇ ln(p ⊛ N(0, s_t²I))(x)] + √α_t ζ`
/// starting from a prior draw.
pub fn langevin_x(
    prior: &GaussianMixture,
    rec: &MeasurementRecord,
    sched: &AnnealSchedule,
    rng: &mut RngStream,
) -> Result<Vector> {
    check_inputs(prior.dim(), rec, sched)?;
    let n = prior.dim();
    let base = sched
        .base_step
        .unwrap_or_else(|| auto_base_step(rec, sched.sigma_last, 1.0 / smallest_variance(prior)));
    let limit = DIVERGENCE_FACTOR
        * PriorSpec::GaussianMixture(prior.clone())
            .support_radius()
            .radius
            .max(f64::MIN_POSITIVE);
    let ata = rec.a.gram_cols();
    let aty = rec.a.mul_transpose_slice(&rec.y);
    let m = rec.m as f64;

    let mut x = prior.sample(rng).into_inner();
    let levels = sched
        .sigmas()
        .into_iter()
        .zip(sched.step_sizes(base))
        .zip(sched.smoothing_scales());
    for ((sigma_t, alpha), smooth) in levels {
        let smoothed = prior.convolved(smooth)?;
        let lik_scale = m / (sigma_t * sigma_t);
        let noise = alpha.sqrt();
        for _ in 0..sched.steps_per_level {
            let ax = ata.mul_slice(&x);
            let score = smoothed.score(&x)?;
            for i in 0..n {
                let grad = lik_scale * (aty[i] - ax[i]) + score[i];
                x[i] += 0.5 * alpha * grad + noise * rng.standard_normal();
            }
            let r = norm(&x);
            if !r.is_finite() || r > limit {
                return Err(PcsError::Diverged(format!(
                    "x-space chain left radius {limit:.3e} at sigma_t = {sigma_t}"
                )));
            }
        }
    }
    Vector::new(x)
}

/// Annealed Langevin dynamics on the latent `z` of a linear generative model.
///
/// Targets `ln p_t(z|y) = −m‖y − AGz‖²/(2σ_t²) − ‖z‖²/2` from `z₀ ~ N(0, I)`
/// and returns `x̂ = G z`.
pub fn langevin_z(
    gen: &LinearGenerative,
    rec: &MeasurementRecord,
    sched: &AnnealSchedule,
    rng: &mut RngStream,
) -> Result<Vector> {
    check_inputs(gen.dim(), rec, sched)?;
    let n = gen.dim();
    let b = rec.a.matmul(gen.generator())?;
    let btb = b.gram_cols();
    let bty = b.mul_transpose_slice(&rec.y);
    let m = rec.m as f64;
    let base = match sched.base_step {
        Some(e) => e,
        None => {
            let latent = crate::measurement::MeasurementRecord::new(b.clone(), rec.y.clone(), rec.sigma)?;
            auto_base_step(&latent, sched.sigma_last, 1.0)
        }
    };
    let limit = DIVERGENCE_FACTOR
        * PriorSpec::LinearGenerative(gen.clone())
            .support_radius()
            .radius
            .max(f64::MIN_POSITIVE);

    let mut z = rng.normal_vec(n);
    for (sigma_t, alpha) in sched.sigmas().into_iter().zip(sched.step_sizes(base)) {
        let lik_scale = m / (sigma_t * sigma_t);
        let noise = alpha.sqrt();
        for _ in 0..sched.steps_per_level {
            let bz = btb.mul_slice(&z);
            for i in 0..n {
                let grad = lik_scale * (bty[i] - bz[i]) - z[i];
                z[i] += 0.5 * alpha * grad + noise * rng.standard_normal();
            }
        }
        let x = gen.generator().mul_slice(&z);
        let r = norm(&x);
        if !r.is_finite() || r > limit {
            return Err(PcsError::Diverged(format!(
                "z-space chain left radius {limit:.3e} at sigma_t = {sigma_t}"
            )));
        }
    }
    gen.apply(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Matrix;
    use crate::posterior::exact_posterior;

    fn scalar_case() -> (GaussianMixture, MeasurementRecord) {
        let prior = GaussianMixture::isotropic(Vector::zeros(1), 1.0).unwrap();
        let rec = MeasurementRecord::new(
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Vector::new(vec![2.0]).unwrap(),
            1.0,
        )
        .unwrap();
        (prior, rec)
    }

    #[test]
    fn deterministic_given_seed() {
        let (prior, rec) = scalar_case();
        let sched = AnnealSchedule::desk_default(1.0);
        let a = langevin_x(&prior, &rec, &sched, &mut RngStream::new(3)).unwrap();
        let b = langevin_x(&prior, &rec, &sched, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        let gen = LinearGenerative::zipfian(1).unwrap();
        let a = langevin_z(&gen, &rec, &sched, &mut RngStream::new(3)).unwrap();
        let b = langevin_z(&gen, &rec, &sched, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scalar_posterior_moments() {
        let (prior, rec) = scalar_case();
        let sched = AnnealSchedule::desk_default(1.0);
        let exact = exact_posterior(&prior, &rec).unwrap();
        let draws: Vec<f64> = (0..2000)
            .map(|i| langevin_x(&prior, &rec, &sched, &mut RngStream::new(i)).unwrap()[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / 2000.0;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 1999.0;
        assert!((mean - exact.mean()[0]).abs() < 0.05, "mean {mean}");
        assert!((var - 0.5).abs() < 0.1, "var {var}");
    }

    #[test]
    fn uninformative_measurement_recovers_prior() {
        let prior = GaussianMixture::single(
            Vector::new(vec![1.0, -1.0]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap(),
        )
        .unwrap();
        let rec = MeasurementRecord::new(
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            Vector::new(vec![0.0]).unwrap(),
            1e4,
        )
        .unwrap();
        let sched = AnnealSchedule::desk_default(1e4).with_base_step(0.02);
        let n = 2000;
        let draws: Vec<Vector> = (0..n)
            .map(|i| langevin_x(&prior, &rec, &sched, &mut RngStream::new(100 + i)).unwrap())
            .collect();
        for (i, (mu, var)) in [(1.0, 1.0), (-1.0, 0.5)].iter().enumerate() {
            let m = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
            assert!((m - mu).abs() < 4.0 * (var / n as f64).sqrt() + 0.02, "coord {i}: {m}");
        }
    }

    #[test]
    fn divergence_guard_trips() {
        let (prior, rec) = scalar_case();
        let sched = AnnealSchedule::desk_default(1.0).with_base_step(50.0);
        assert!(matches!(
            langevin_x(&prior, &rec, &sched, &mut RngStream::new(0)),
            Err(PcsError::Diverged(_))
        ));
    }
}
