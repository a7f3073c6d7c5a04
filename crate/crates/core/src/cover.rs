//! `(η, δ)`-approximate covering numbers.
//!
//! Centers are restricted to sample points, so a greedy count at radius `η`
//! upper-bounds the sample-centered covering number at `η`; by the doubling
//! argument it also upper-bounds the unrestricted covering number at `η` and
//! only lower-bounds it at `η/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PcsError, Result};
use crate::numeric::{distance_squared, Vector};
use crate::priors::DiscreteAtoms;
use crate::transport::EmpiricalDist;

/// Largest support accepted by [`brute_force_cover`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Slack used when comparing covered mass against `1 − δ`.
const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub eta: f64,
    pub delta: f64,
}

impl CoverSpec {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid("cover radius must be positive"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("uncovered mass must lie in [0, 1)"));
        }
        Ok(Self { eta, delta })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    pub eta: f64,
    pub delta: f64,
    pub centers: Vec<Vector>,
    /// Indices of the chosen centers among the input points.
    pub center_indices: Vec<usize>,
    pub count: usize,
    pub covered_mass: f64,
}

/// Number of equal-weight points that must be covered.
fn required_points(n: usize, delta: f64) -> usize {
    (((1.0 - delta) * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Symmetric neighbor lists at radius `eta`.
fn neighbor_lists(points: &[Vector], eta: f64) -> Vec<Vec<u32>> {
    let r2 = eta * eta;
    points
        .par_iter()
        .map(|p| {
            points
                .iter()
                .enumerate()
                .filter(|(_, q)| distance_squared(p, q) <= r2)
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect()
}

/// Greedy sample-centered cover of an empirical distribution.
///
/// Repeatedly picks the sample whose closed `η`-ball holds the most uncovered
/// samples (lowest index on ties) until at least `(1 − δ)N` are covered.
pub fn greedy_cover(samples: &EmpiricalDist, spec: CoverSpec) -> CoverResult {
    let points = samples.points();
    let lists = neighbor_lists(points, spec.eta);
    let n = points.len();
    let need = required_points(n, spec.delta);
    let mut gain: Vec<usize> = lists.iter().map(Vec::len).collect();
    let mut covered = vec![false; n];
    let mut n_covered = 0;
    let mut chosen = Vec::new();
    while n_covered < need {
        let (best, _) = gain
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
        chosen.push(best);
        for &p in &lists[best] {
            let p = p as usize;
            if std::mem::replace(&mut covered[p], true) {
                continue;
            }
            n_covered += 1;
            for &q in &lists[p] {
                gain[q as usize] -= 1;
            }
        }
    }
    CoverResult {
        eta: spec.eta,
        delta: spec.delta,
        centers: chosen.iter().map(|&i| points[i].clone()).collect(),
        count: chosen.len(),
        center_indices: chosen,
        covered_mass: n_covered as f64 / n as f64,
    }
}

/// Greedy covers at several radii with a shared `δ`.
pub fn greedy_cover_curve(samples: &EmpiricalDist, etas: &[f64], delta: f64) -> Result<Vec<CoverResult>> {
    etas.iter()
        .map(|&e| Ok(greedy_cover(samples, CoverSpec::new(e, delta)?)))
        .collect()
}

fn ball_masks(atoms: &DiscreteAtoms, eta: f64) -> Vec<u32> {
    let pts = atoms.points();
    let r2 = eta * eta;
    pts.iter()
        .map(|p| {
            pts.iter()
                .enumerate()
                .filter(|(_, q)| distance_squared(p, q) <= r2)
                .fold(0u32, |m, (j, _)| m | (1 << j))
        })
        .collect()
}

fn mask_weight(mask: u32, weights: &[f64]) -> f64 {
    weights
        .iter()
        .enumerate()
        .filter(|(j, _)| mask & (1 << j) != 0)
        .map(|(_, w)| w)
        .sum()
}

/// Weighted greedy cover over the atoms of a discrete prior.
pub fn greedy_cover_atoms(atoms: &DiscreteAtoms, spec: CoverSpec) -> CoverResult {
    let pts = atoms.points();
    let w = atoms.weights();
    let r2 = spec.eta * spec.eta;
    let target = 1.0 - spec.delta - MASS_TOLERANCE;
    let mut covered = vec![false; pts.len()];
    let mut mass = 0.0;
    let mut chosen = Vec::new();
    while mass < target {
        let gains: Vec<f64> = pts
            .iter()
            .map(|p| {
                pts.iter()
                    .enumerate()
                    .filter(|(j, q)| !covered[*j] && distance_squared(p, q) <= r2)
                    .map(|(j, _)| w[j])
                    .sum()
            })
            .collect();
        let top = gains.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 {
            break;
        }
        let best = gains
            .iter()
            .position(|g| *g >= top - MASS_TOLERANCE)
            .expect("maximum exists");
        chosen.push(best);
        for (j, q) in pts.iter().enumerate() {
            if !covered[j] && distance_squared(&pts[best], q) <= r2 {
                covered[j] = true;
            }
        }
        mass = covered.iter().zip(w).filter(|(c, _)| **c).map(|(_, w)| w).sum();
    }
    CoverResult {
        eta: spec.eta,
        delta: spec.delta,
        centers: chosen.iter().map(|&i| pts[i].clone()).collect(),
        count: chosen.len(),
        center_indices: chosen,
        covered_mass: mass,
    }
}

/// Exact minimum number of atom-centered `η`-balls carrying mass `≥ 1 − δ`.
pub fn brute_force_cover(atoms: &DiscreteAtoms, spec: CoverSpec) -> Result<usize> {
    let n = atoms.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(PcsError::SizeLimit(format!(
            "exhaustive cover supports at most {BRUTE_FORCE_LIMIT} atoms, got {n}"
        )));
    }
    let masks = ball_masks(atoms, spec.eta);
    let w = atoms.weights();
    let target = 1.0 - spec.delta - MASS_TOLERANCE;
    let mut best = n;
    for subset in 1u32..(1 << n) {
        let k = subset.count_ones() as usize;
        if k >= best {
            continue;
        }
        let union = (0..n)
            .filter(|i| subset & (1 << i) != 0)
            .fold(0u32, |m, i| m | masks[i]);
        if mask_weight(union, w) >= target {
            best = k;
        }
    }
    Ok(best)
}
