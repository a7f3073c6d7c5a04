// Approximate covering numbers: exhaustive versus greedy, and a Zipfian prior.

use pcs_core::cover::{brute_force_cover, greedy_cover, greedy_cover_curve, CoverSpec};
use pcs_core::priors::{DiscreteAtoms, LinearGenerative};
use pcs_core::transport::EmpiricalDist;
use pcs_core::{RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    let mut rng = RngStream::new(9);
    let points: Vec<Vector> = (0..8)
        .map(|_| Vector::new(rng.normal_vec(2)))
        .collect::<Result<_, _>>()?;
    let atoms = DiscreteAtoms::uniform(points.clone())?;
    let cloud = EmpiricalDist::new(points)?;
    for (eta, delta) in [(0.5, 0.0), (1.0, 0.0), (1.0, 0.25)] {
        let spec = CoverSpec::new(eta, delta)?;
        println!(
            "eta {eta}, delta {delta}: exhaustive {}, greedy {}",
            brute_force_cover(&atoms, spec)?,
            greedy_cover(&cloud, spec).count
        );
    }

    // Zipfian spectrum s_i = 1/i in R^30.
    let gen = LinearGenerative::zipfian(30)?;
    let samples = EmpiricalDist::new((0..3000).map(|_| gen.sample(&mut rng)).collect())?;
    let etas = [1.2, 0.85, 0.6, 0.42];
    for r in greedy_cover_curve(&samples, &etas, 0.01)? {
        println!(
            "eta {:.2}: {} balls, log2 {:.2}",
            r.eta,
            r.count,
            (r.count as f64).log2()
        );
    }
    Ok(())
}
