// Mutual-information, Fano and lower-bound calculators on a discrete prior.

use pcs_core::bounds::{awgn_mi_bound, fano_check, lower_bound_measurements, plug_in_mi, Channel, CoverCount};
use pcs_core::cover::brute_force_cover;
use pcs_core::measurement::{draw_matrix, measure, MeasurementProcess};
use pcs_core::posterior::discrete_posterior;
use pcs_core::priors::DiscreteAtoms;
use pcs_core::{RngStream, Vector};

fn main() -> pcs_core::Result<()> {
    let (n, m, sigma) = (3, 4, 0.2);
    let atoms = DiscreteAtoms::uniform(
        (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.5;
                Vector::new(v)
            })
            .collect::<pcs_core::Result<Vec<_>>>()?,
    )?;
    let r = 1.5;
    let mut rng = RngStream::new(21);
    let proc = MeasurementProcess::gaussian(m, n, sigma)?;
    let mut pairs = Vec::new();
    for _ in 0..1000 {
        let i = rng.below(n);
        let x = &atoms.points()[i];
        let a = draw_matrix(&proc, &mut rng);
        let rec = measure(&a, x, sigma, &mut rng)?;
        pairs.push((i, discrete_posterior(&atoms, &rec)?.sample(&mut rng)));
    }
    let quantized: Vec<(usize, usize)> = pairs.iter().map(|(i, e)| (*i, atoms.nearest(e))).collect();
    println!("plug-in I(x; x̂) = {:.3} bits", plug_in_mi(&quantized)?);
    println!(
        "channel bound    = {:.3} bits",
        awgn_mi_bound(m, r, sigma, Channel::Gaussian)?
    );

    let report = fano_check(&pairs, &atoms, 0.5, 0.05, 0.5, |spec| {
        Ok(CoverCount {
            count: brute_force_cover(&atoms, spec)?,
            exact: true,
        })
    })?;
    println!(
        "Fano variant: {:.3} <= {:.3} ({})",
        report.lhs, report.rhs, report.holds
    );

    let lb = lower_bound_measurements(100.0, 0.05, 1.0, 1.0, Channel::Gaussian, 1)?;
    println!("log2 cov = 100 at r = sigma needs m >= {lb:.2}");
    Ok(())
}
