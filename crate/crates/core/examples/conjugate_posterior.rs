// Exact posterior of a Gaussian-mixture prior under a Gaussian measurement.

use pcs_core::measurement::{draw_matrix, measure, MeasurementProcess, MeasurementRecord};
use pcs_core::posterior::exact_posterior;
use pcs_core::priors::GaussianMixture;
use pcs_core::{Matrix, RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    // Prior N(0, 1), A = [1], σ = 1, y = 2: the posterior is N(1, 1/2).
    let prior = GaussianMixture::isotropic(Vector::new(vec![0.0])?, 1.0)?;
    let rec = MeasurementRecord::new(Matrix::from_rows(&[vec![1.0]])?, Vector::new(vec![2.0])?, 1.0)?;
    let post = exact_posterior(&prior, &rec)?;
    println!(
        "scalar: mean {:.4}, variance {:.4}",
        post.mean()[0],
        post.covariance().get(0, 0)
    );

    // Two clusters in R^4 seen through two random measurements.
    let n = 4;
    let mut e1 = vec![0.0; n];
    e1[0] = 3.0;
    let far = Vector::new(e1.clone())?;
    let near = Vector::new(e1.iter().map(|v| -v).collect())?;
    let mixture = GaussianMixture::new(
        vec![0.5, 0.5],
        vec![far, near],
        vec![Matrix::identity(n).scale(0.2), Matrix::identity(n).scale(0.2)],
    )?;
    let mut rng = RngStream::new(7);
    let a = draw_matrix(&MeasurementProcess::gaussian(2, n, 0.1)?, &mut rng);
    let x = mixture.sample(&mut rng);
    let rec = measure(&a, &x, 0.1, &mut rng)?;
    let post = exact_posterior(&mixture, &rec)?;
    println!("x* = {:?}", x.as_slice());
    println!("posterior component weights {:?}", post.weights());
    for k in 0..3 {
        println!("draw {k}: {:?}", post.sample(&mut rng).as_slice());
    }
    Ok(())
}
