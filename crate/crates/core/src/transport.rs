//! Transport and total-variation distances between empirical distributions.
//!
//! `wasserstein_p` solves the dense assignment problem exactly with the
//! shortest-augmenting-path (Hungarian) method; one-dimensional inputs take
//! the sorted coupling, which is optimal for every `p ≥ 1` and for the
//! bottleneck cost. `wasserstein_inf` is a bottleneck matching: binary search
//! over the sorted pairwise distances with Hopcroft–Karp feasibility checks.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PcsError, Result};
use crate::numeric::{distance, RngStream, Vector};

/// Equal-weight point cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    points: Vec<Vector>,
}

impl EmpiricalDist {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| invalid("an empirical distribution needs at least one point"))?;
        let d = first.len();
        if points.iter().any(|p| p.len() != d) {
            return Err(invalid("points of an empirical distribution must share a dimension"));
        }
        Ok(Self { points })
    }

    /// One-dimensional distribution from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        let points = values
            .iter()
            .map(|v| Vector::new(vec![*v]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }
}

fn check_pair(a: &EmpiricalDist, b: &EmpiricalDist) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "transport needs equal sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.dim() != b.dim() {
        return Err(invalid("distributions live in different dimensions"));
    }
    Ok(())
}

fn sorted_scalars(d: &EmpiricalDist) -> Vec<f64> {
    let mut v: Vec<f64> = d.points.iter().map(|p| p[0]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Dense row-major `N × N` cost matrix `‖a_i − b_j‖^p`.
fn cost_matrix(a: &EmpiricalDist, b: &EmpiricalDist, p: f64) -> Vec<f64> {
    let n = a.len();
    let mut cost = vec![0.0; n * n];
    cost.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let ai = &a.points[i];
        for (c, bj) in row.iter_mut().zip(&b.points) {
            let d = distance(ai, bj);
            *c = if p == 1.0 { d } else { d.powf(p) };
        }
    });
    cost
}

/// Minimum-cost perfect assignment on a square cost matrix.
///
/// Returns `assignment[row] = column`.
pub fn solve_assignment(cost: &[f64], n: usize) -> Result<Vec<usize>> {
    if cost.len() != n * n {
        return Err(invalid("cost matrix must be n × n"));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(PcsError::InvalidInput("cost matrix has non-finite entries".into()));
    }
    // Potentials u (rows) and v (columns), 1-based with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_match = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        col_match[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = col_match[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - ui0 - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_match[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_match[j0] = col_match[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[col_match[j] - 1] = j - 1;
    }
    Ok(assignment)
}

/// Exact `W_p` between two equal-size empirical distributions.
pub fn wasserstein_p(a: &EmpiricalDist, b: &EmpiricalDist, p: f64) -> Result<f64> {
    check_pair(a, b)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("Wasserstein order must be finite and at least 1"));
    }
    let n = a.len();
    let total = if a.dim() == 1 {
        sorted_scalars(a)
            .iter()
            .zip(sorted_scalars(b))
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
    } else {
        let cost = cost_matrix(a, b, p);
        let assignment = solve_assignment(&cost, n)?;
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i * n + j])
            .sum::<f64>()
    };
    Ok((total / n as f64).max(0.0).powf(1.0 / p))
}

/// Whether a perfect matching exists using only edges with `cost ≤ limit`.
fn has_perfect_matching(dist: &[f64], n: usize, limit: f64) -> bool {
    const NIL: usize = usize::MAX;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist[i * n + j] <= limit).collect())
        .collect();
    if adj.iter().any(|a| a.is_empty()) {
        return false;
    }
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut layer = vec![0usize; n];
    let mut matched = 0;
    loop {
        // BFS from free left vertices builds the layered graph.
        let mut queue = VecDeque::new();
        for i in 0..n {
            if match_l[i] == NIL {
                layer[i] = 0;
                queue.push_back(i);
            } else {
                layer[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_r[j];
                if k == NIL {
                    found = true;
                } else if layer[k] == usize::MAX {
                    layer[k] = layer[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        let mut cursor = vec![0usize; n];
        for i in 0..n {
            if match_l[i] == NIL && augment(i, &adj, &mut match_l, &mut match_r, &mut layer, &mut cursor) {
                matched += 1;
            }
        }
    }
    matched == n
}

fn augment(
    root: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    layer: &mut [usize],
    cursor: &mut [usize],
) -> bool {
    const NIL: usize = usize::MAX;
    // Iterative DFS along layered edges.
    let mut stack = vec![root];
    while let Some(&i) = stack.last() {
        if cursor[i] >= adj[i].len() {
            layer[i] = usize::MAX;
            stack.pop();
            continue;
        }
        let j = adj[i][cursor[i]];
        cursor[i] += 1;
        let k = match_r[j];
        if k == NIL {
            // Flip the path recorded on the stack.
            let mut right = j;
            while let Some(l) = stack.pop() {
                let prev = match_l[l];
                match_l[l] = right;
                match_r[right] = l;
                right = prev;
            }
            return true;
        }
        if layer[k] == layer[i] + 1 {
            stack.push(k);
        }
    }
    false
}

/// Bottleneck distance `W_∞` between equal-size empirical distributions.
pub fn wasserstein_inf(a: &EmpiricalDist, b: &EmpiricalDist) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len();
    if a.dim() == 1 {
        return Ok(sorted_scalars(a)
            .iter()
            .zip(sorted_scalars(b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max));
    }
    let dist = cost_matrix(a, b, 1.0);
    let mut candidates = dist.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&dist, n, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

/// Monte-Carlo total variation `E_a[(1 − p_b/p_a)₊]` from draws of `a`.
pub fn tv_monte_carlo<LA, LB, S>(
    log_density_a: LA,
    log_density_b: LB,
    mut sampler_a: S,
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64>
where
    LA: Fn(&[f64]) -> f64,
    LB: Fn(&[f64]) -> f64,
    S: FnMut(&mut RngStream) -> Vector,
{
    if samples == 0 {
        return Err(invalid("TV estimate needs at least one sample"));
    }
    let mut total = 0.0;
    for _ in 0..samples {
        let x = sampler_a(rng);
        let la = log_density_a(&x);
        let lb = log_density_b(&x);
        if !la.is_finite() || lb.is_nan() || lb == f64::INFINITY {
            return Err(PcsError::InvalidInput(format!(
                "density not finite at a sample: log p_a = {la}, log p_b = {lb}"
            )));
        }
        total += (1.0 - (lb - la).exp()).max(0.0);
    }
    Ok(total / samples as f64)
}

/// Average of the two one-sided TV estimates.
pub fn tv_symmetric<LA, LB, SA, SB>(
    log_density_a: LA,
    log_density_b: LB,
    sampler_a: SA,
    sampler_b: SB,
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64>
where
    LA: Fn(&[f64]) -> f64,
    LB: Fn(&[f64]) -> f64,
    SA: FnMut(&mut RngStream) -> Vector,
    SB: FnMut(&mut RngStream) -> Vector,
{
    let ab = tv_monte_carlo(&log_density_a, &log_density_b, sampler_a, samples, rng)?;
    let ba = tv_monte_carlo(&log_density_b, &log_density_a, sampler_b, samples, rng)?;
    Ok(0.5 * (ab + ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::LN_2PI;
    use proptest::prelude::*;

    fn cloud(rows: &[Vec<f64>]) -> EmpiricalDist {
        EmpiricalDist::new(rows.iter().map(|r| Vector::new(r.clone()).unwrap()).collect()).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn random_cloud(rng: &mut RngStream, n: usize, d: usize) -> EmpiricalDist {
        EmpiricalDist::new((0..n).map(|_| Vector::new(rng.normal_vec(d)).unwrap()).collect()).unwrap()
    }

    #[test]
    fn identical_sets_are_at_zero() {
        let a = cloud(&[vec![0.0, 1.0], vec![2.0, -1.0], vec![3.0, 3.0]]);
        assert_eq!(wasserstein_p(&a, &a, 2.0).unwrap(), 0.0);
        assert_eq!(wasserstein_inf(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn small_examples() {
        let a = EmpiricalDist::from_scalars(&[0.0, 2.0]).unwrap();
        let b = EmpiricalDist::from_scalars(&[1.0, 3.0]).unwrap();
        assert!((wasserstein_p(&a, &b, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let a = EmpiricalDist::from_scalars(&[0.0]).unwrap();
        let b = EmpiricalDist::from_scalars(&[3.0]).unwrap();
        assert_eq!(wasserstein_inf(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn unequal_sizes_rejected() {
        let a = EmpiricalDist::from_scalars(&[0.0, 2.0]).unwrap();
        let b = EmpiricalDist::from_scalars(&[1.0]).unwrap();
        assert!(wasserstein_p(&a, &b, 1.0).is_err());
        assert!(wasserstein_inf(&a, &b).is_err());
        assert!(EmpiricalDist::new(vec![]).is_err());
    }

    #[test]
    fn matches_permutation_oracle() {
        let mut rng = RngStream::new(11);
        for case in 0..30 {
            let n = 1 + case % 6;
            let d = 1 + case % 3;
            let a = random_cloud(&mut rng, n, d);
            let b = random_cloud(&mut rng, n, d);
            let (mut best_p, mut best_inf) = (f64::INFINITY, f64::INFINITY);
            for perm in permutations(n) {
                let dists: Vec<f64> = perm
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| distance(&a.points()[i], &b.points()[j]))
                    .collect();
                best_p = best_p.min(dists.iter().map(|x| x * x).sum::<f64>());
                best_inf = best_inf.min(dists.iter().cloned().fold(0.0, f64::max));
            }
            let w2 = wasserstein_p(&a, &b, 2.0).unwrap();
            assert!((w2 - (best_p / n as f64).sqrt()).abs() < 1e-9);
            assert!((wasserstein_inf(&a, &b).unwrap() - best_inf).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_tv_against_closed_form() {
        let log_n = |mu: f64| move |x: &[f64]| -0.5 * (x[0] - mu).powi(2) - 0.5 * LN_2PI;
        let mut rng = RngStream::new(5);
        let same = tv_monte_carlo(
            log_n(0.0),
            log_n(0.0),
            |r| Vector::new(vec![r.standard_normal()]).unwrap(),
            1000,
            &mut rng,
        )
        .unwrap();
        assert!(same.abs() < 1e-12);
        let tv = tv_monte_carlo(
            log_n(0.0),
            log_n(2.0),
            |r| Vector::new(vec![r.standard_normal()]).unwrap(),
            100_000,
            &mut rng,
        )
        .unwrap();
        assert!((tv - 0.682_689_5).abs() < 0.01, "{tv}");
    }

    #[test]
    fn disjoint_gaussians_have_unit_tv() {
        let narrow = |mu: f64| move |x: &[f64]| -0.5 * ((x[0] - mu) / 0.01).powi(2);
        let mut rng = RngStream::new(6);
        let tv = tv_monte_carlo(
            narrow(0.0),
            narrow(10.0),
            |r| Vector::new(vec![0.01 * r.standard_normal()]).unwrap(),
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(tv >= 0.999);
    }

    #[test]
    fn tv_rejects_non_finite_density() {
        let mut rng = RngStream::new(7);
        let res = tv_monte_carlo(|_: &[f64]| f64::NAN, |_: &[f64]| 0.0, |_| Vector::zeros(1), 3, &mut rng);
        assert!(matches!(res, Err(PcsError::InvalidInput(_))));
    }

    #[test]
    fn sorted_path_agrees_with_assignment() {
        let mut rng = RngStream::new(8);
        for _ in 0..20 {
            let a = random_cloud(&mut rng, 40, 1);
            let b = random_cloud(&mut rng, 40, 1);
            for p in [1.0, 1.5, 2.0] {
                let cost = cost_matrix(&a, &b, p);
                let assign = solve_assignment(&cost, 40).unwrap();
                let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i * 40 + j]).sum();
                let hung = (total / 40.0).powf(1.0 / p);
                assert!((wasserstein_p(&a, &b, p).unwrap() - hung).abs() < 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn triangle_inequality(seed in any::<u64>(), n in 1usize..12, d in 1usize..4) {
            let mut rng = RngStream::new(seed);
            let a = random_cloud(&mut rng, n, d);
            let b = random_cloud(&mut rng, n, d);
            let c = random_cloud(&mut rng, n, d);
            for p in [1.0, 2.0] {
                let ab = wasserstein_p(&a, &b, p).unwrap();
                let bc = wasserstein_p(&b, &c, p).unwrap();
                let ac = wasserstein_p(&a, &c, p).unwrap();
                prop_assert!(ac <= ab + bc + 1e-9);
            }
        }

        #[test]
        fn bottleneck_dominates_p(seed in any::<u64>(), n in 1usize..12, d in 1usize..4) {
            let mut rng = RngStream::new(seed);
            let a = random_cloud(&mut rng, n, d);
            let b = random_cloud(&mut rng, n, d);
            let winf = wasserstein_inf(&a, &b).unwrap();
            for p in [1.0, 2.0, 3.0] {
                prop_assert!(wasserstein_p(&a, &b, p).unwrap() <= winf + 1e-9);
            }
        }
    }
}
