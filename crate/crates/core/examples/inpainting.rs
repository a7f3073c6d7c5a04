// Noiseless inpainting: posterior draws stay diverse, MAP does not.

use pcs_core::posterior::condition_on_coordinates;
use pcs_core::priors::GaussianMixture;
use pcs_core::samplers::{mixture_mode, MapConfig};
use pcs_core::{Matrix, RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    let n = 6;
    let up = Vector::new(vec![0.0, 0.0, 0.0, 3.0, 3.0, 3.0])?;
    let down = Vector::new(vec![0.0, 0.0, 0.0, -3.0, -3.0, -3.0])?;
    let prior = GaussianMixture::new(vec![0.6, 0.4], vec![up, down], vec![Matrix::identity(n); 2])?;
    // The first three coordinates say nothing about which cluster we are in.
    let observed = [0, 1, 2];
    let post = condition_on_coordinates(&prior, &observed, &[0.3, -0.2, 0.1])?;
    let mut rng = RngStream::new(8);
    for _ in 0..4 {
        println!("posterior draw {:?}", fmt(&post.sample(&mut rng)));
    }
    let free = post.free_posterior().expect("three coordinates are unobserved");
    let mode = mixture_mode(free, &MapConfig::default(), &mut rng)?;
    println!("MAP fill-in    {:?}", fmt(&post.complete(mode.estimate.as_slice())?));
    Ok(())
}

fn fmt(v: &Vector) -> Vec<String> {
    v.iter().map(|x| format!("{x:.2}")).collect()
}
