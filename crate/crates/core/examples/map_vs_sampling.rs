// A spike-and-slab prior: MAP picks the spike, posterior sampling the slab.

use pcs_core::measurement::{draw_matrix, measure, MeasurementProcess};
use pcs_core::posterior::exact_posterior;
use pcs_core::priors::GaussianMixture;
use pcs_core::samplers::{map_estimate, MapConfig, MapPrior};
use pcs_core::{Matrix, RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    let (n, m, sigma) = (6, 3, 1.0);
    let prior = GaussianMixture::new(
        vec![0.01, 0.99],
        vec![Vector::zeros(n), Vector::zeros(n)],
        vec![Matrix::identity(n).scale(1e-6), Matrix::identity(n)],
    )?;
    let mut rng = RngStream::new(5);
    let a = draw_matrix(&MeasurementProcess::gaussian(m, n, sigma)?, &mut rng);
    let x = Vector::new(rng.normal_vec(n))?;
    let rec = measure(&a, &x, sigma, &mut rng)?;

    let map = map_estimate(MapPrior::Mixture(&prior), &rec, &MapConfig::default(), &mut rng)?;
    println!("‖x*‖ = {:.3}, ‖MAP‖ = {:.2e}", x.norm(), map.norm());

    let post = exact_posterior(&prior, &rec)?;
    let draws = 2000;
    let slab = (0..draws).filter(|_| post.sample_component(&mut rng) == 1).count();
    println!("posterior weight on the slab {:.4}", post.weights()[1]);
    println!("{slab}/{draws} posterior draws come from the slab");
    Ok(())
}
