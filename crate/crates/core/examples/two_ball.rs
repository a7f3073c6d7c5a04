// Two disjoint balls: how often posterior sampling lands in the wrong one.

use pcs_core::bounds::twoball_tv_bound;
use pcs_core::harness::{noise_lemma_tv, LemmaSetup};
use pcs_core::measurement::{draw_matrix, measure, MeasurementProcess};
use pcs_core::posterior::noiseless_ball_posterior;
use pcs_core::priors::BallMixture;
use pcs_core::RngStream;

fn main() -> pcs_core::Result<()> {
    let (n, eta) = (20, 0.1);
    let balls = BallMixture::two_balls(n, eta, 20.0 * eta)?;
    let mut rng = RngStream::new(4);
    for m in [1, 2, 5, 10] {
        let proc = MeasurementProcess::gaussian(m, n, 0.0)?;
        let trials = 500;
        let mut wrong = 0;
        for _ in 0..trials {
            let k = rng.below(2);
            let x = balls.sample_component(k, &mut rng);
            let rec = measure(&draw_matrix(&proc, &mut rng), &x, 0.0, &mut rng)?;
            let xhat = noiseless_ball_posterior(&balls, &rec)?.sample(&mut rng);
            if balls
                .containing_ball(&xhat)
                .unwrap_or_else(|| balls.nearest_center(&xhat))
                != k
            {
                wrong += 1;
            }
        }
        println!("m = {m:>2}: wrong-ball rate {:.4}", wrong as f64 / trials as f64);
    }

    let c = 8.0 * std::f64::consts::E.powi(2);
    for m in [5, 10] {
        let setup = LemmaSetup {
            n: 30,
            m,
            eta: 0.1,
            sigma: 0.1,
            c,
            matrices: 20,
            samples: 200,
        };
        println!(
            "noisy TV at m = {m}: {:.4} (lemma bound {:.4})",
            noise_lemma_tv(&setup, 1)?,
            twoball_tv_bound(m, c)?
        );
    }
    Ok(())
}
