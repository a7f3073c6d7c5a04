// Annealed Langevin dynamics against the exact posterior it targets.

use pcs_core::measurement::{draw_matrix, measure, MeasurementProcess};
use pcs_core::posterior::exact_posterior;
use pcs_core::priors::GaussianMixture;
use pcs_core::samplers::{langevin_x, AnnealSchedule};
use pcs_core::transport::{wasserstein_p, EmpiricalDist};
use pcs_core::{Matrix, RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    let n = 2;
    let sigma = 0.5;
    let prior = GaussianMixture::new(
        vec![0.4, 0.6],
        vec![Vector::new(vec![1.0, 0.0])?, Vector::new(vec![-1.0, 0.5])?],
        vec![Matrix::identity(n).scale(0.2), Matrix::identity(n).scale(0.1)],
    )?;
    let mut rng = RngStream::new(3);
    let a = draw_matrix(&MeasurementProcess::gaussian(2, n, sigma)?, &mut rng);
    let rec = measure(&a, &prior.sample(&mut rng), sigma, &mut rng)?;

    let sched = AnnealSchedule::desk_default(sigma);
    println!("noise ladder {:?}", sched.sigmas());
    let post = exact_posterior(&prior, &rec)?;
    let draws = 1000;
    let exact: Vec<Vector> = (0..draws).map(|_| post.sample(&mut rng)).collect();
    let chains = (0..draws)
        .map(|i| langevin_x(&prior, &rec, &sched, &mut RngStream::derive(11, i)))
        .collect::<pcs_core::Result<Vec<_>>>()?;
    let mean = |v: &[Vector], i: usize| v.iter().map(|x| x[i]).sum::<f64>() / v.len() as f64;
    println!("exact mean    ({:.3}, {:.3})", mean(&exact, 0), mean(&exact, 1));
    println!("langevin mean ({:.3}, {:.3})", mean(&chains, 0), mean(&chains, 1));
    // Most of the remaining gap is in the split of mass between the two
    // modes, which chains started from the prior settle only slowly.
    let w1 = wasserstein_p(&EmpiricalDist::new(chains)?, &EmpiricalDist::new(exact)?, 1.0)?;
    println!("W1(langevin, exact) = {w1:.4}");
    Ok(())
}
