// Wasserstein distances between point clouds.

use pcs_core::transport::{wasserstein_inf, wasserstein_p, EmpiricalDist};
use pcs_core::{RngStream, Vector};

fn cloud(rng: &mut RngStream, n: usize, shift: f64) -> pcs_core::Result<EmpiricalDist> {
    let pts = (0..n)
        .map(|_| {
            let mut v = rng.normal_vec(2);
            v[0] += shift;
            Vector::new(v)
        })
        .collect::<pcs_core::Result<Vec<_>>>()?;
    EmpiricalDist::new(pts)
}

fn main() -> pcs_core::Result<()> {
    let mut rng = RngStream::new(1);
    let a = cloud(&mut rng, 300, 0.0)?;
    for shift in [0.0, 0.5, 2.0] {
        let b = cloud(&mut rng, 300, shift)?;
        println!(
            "shift {shift}: W1 {:.3}  W2 {:.3}  Winf {:.3}",
            wasserstein_p(&a, &b, 1.0)?,
            wasserstein_p(&a, &b, 2.0)?,
            wasserstein_inf(&a, &b)?
        );
    }
    // One-dimensional clouds: the optimal matching pairs sorted values.
    let x = EmpiricalDist::from_scalars(&[0.0, 1.0, 5.0])?;
    let y = EmpiricalDist::from_scalars(&[4.0, 0.5, 1.5])?;
    println!(
        "1-D W1 {:.3}, Winf {:.3}",
        wasserstein_p(&x, &y, 1.0)?,
        wasserstein_inf(&x, &y)?
    );
    Ok(())
}
