//! End-to-end behaviour of the experiment harness.

use pcs_core::harness::{estimate, run_experiment, setup_trial, ExperimentConfig, Method};
use pcs_core::numeric::distance;
use serde_json::{json, Value};

fn diag(n: usize, v: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { v } else { 0.0 }).collect())
        .collect()
}

fn e1(n: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = scale;
    v
}

fn two_component_prior(n: usize, sep: f64, var: f64) -> Value {
    json!({
        "type": "gaussian_mixture",
        "weights": [0.5, 0.5],
        "means": [e1(n, sep), e1(n, -sep)],
        "covariances": [diag(n, var), diag(n, var)],
    })
}

fn cfg(v: Value) -> ExperimentConfig {
    ExperimentConfig::from_json(&v.to_string()).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn errors(out: &pcs_core::harness::ExperimentOutput, method: &str, m: usize) -> Vec<f64> {
    out.rows
        .iter()
        .filter(|r| r.method == method && r.m == m)
        .map(|r| r.error_l2)
        .collect()
}

#[test]
fn exact_posterior_error_shrinks_with_m() {
    let c = cfg(json!({
        "experiment": "recovery_curve", "n": 6, "m_list": [1, 3, 6], "sigma": 0.3,
        "trials": 200, "master_seed": 11, "prior": two_component_prior(6, 2.0, 0.5),
    }));
    let out = run_experiment(&c).unwrap();
    let medians: Vec<f64> = [1, 3, 6]
        .iter()
        .map(|&m| median(errors(&out, "exact_posterior", m)))
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    let mean = |m| {
        let e = errors(&out, "exact_posterior", m);
        e.iter().sum::<f64>() / e.len() as f64
    };
    assert!(mean(6) <= mean(1));
}

#[test]
fn well_posed_limit_recovers_every_method() {
    let sigma = 0.01;
    let c = cfg(json!({
        "experiment": "recovery_curve", "n": 2, "m_list": [2], "sigma": sigma,
        "trials": 20, "master_seed": 12, "prior": two_component_prior(2, 1.0, 0.5),
        "methods": ["exact_posterior", "langevin", "map", "modified_map", "sir"],
        "sir_particles": 20000, "params": {"holdout_trials": 5},
    }));
    let out = run_experiment(&c).unwrap();
    for method in ["exact_posterior", "langevin", "map", "modified_map", "sir"] {
        let med = median(errors(&out, method, 2));
        assert!(med <= 5.0 * sigma, "{method}: median error {med}");
    }
}

#[test]
fn rows_replay_from_their_seed() {
    let c = cfg(json!({
        "experiment": "recovery_curve", "n": 5, "m_list": [2, 4], "sigma": 0.4,
        "trials": 6, "master_seed": 13, "prior": two_component_prior(5, 1.5, 0.3),
        "methods": ["exact_posterior", "map"],
    }));
    let out = run_experiment(&c).unwrap();
    for row in &out.rows {
        let data = setup_trial(&c, &c.prior, "recovery_curve", row.m, row.trial).unwrap();
        assert_eq!(data.seed, row.seed);
        let method = if row.method == "map" {
            Method::Map
        } else {
            Method::ExactPosterior
        };
        let xhat = estimate(&c, method, &c.prior, &data.rec, None, &mut data.method_rng(method)).unwrap();
        assert_eq!(distance(&data.x, &xhat), row.error_l2);
    }
}

#[test]
fn zero_shift_mismatch_matches_recovery_curve() {
    let base = json!({
        "n": 5, "m_list": [2, 5], "sigma": 0.3, "trials": 10, "master_seed": 14,
        "prior": two_component_prior(5, 1.5, 0.25),
    });
    let mut rec = base.clone();
    rec["experiment"] = "recovery_curve".into();
    let mut mis = base;
    mis["experiment"] = "mismatch".into();
    mis["params"] = json!({"eps_factors": [0.0]});
    let a = run_experiment(&cfg(rec)).unwrap();
    let b = run_experiment(&cfg(mis)).unwrap();
    let key = |r: &pcs_core::harness::ResultRow| (r.m, r.trial, r.seed, r.error_l2.to_bits());
    let ka: Vec<_> = a.rows.iter().map(key).collect();
    let kb: Vec<_> = b.rows.iter().map(key).collect();
    assert_eq!(ka, kb);
}

#[test]
fn large_shift_degrades_recovery() {
    let sigma = 0.3;
    let c = cfg(json!({
        "experiment": "mismatch", "n": 5, "m_list": [5], "sigma": sigma, "trials": 100,
        "master_seed": 15, "prior": two_component_prior(5, 1.5, 0.25),
        "params": {"eps_factors": [0.0, 10.0]},
    }));
    let out = run_experiment(&c).unwrap();
    let p90 = |f: &str| {
        out.summary
            .iter()
            .find(|(k, _)| k.contains(&format!("eps_factor={f}")) && k.contains("p90"))
            .map(|(_, v)| *v)
            .unwrap()
    };
    assert!(p90("10") > p90("0") + sigma, "{:?}", out.summary);
}

#[test]
fn overlapping_balls_are_flagged_without_comparisons() {
    let n = 5;
    let c = cfg(json!({
        "experiment": "twoball", "n": n, "m_list": [2], "sigma": 0.0, "trials": 20, "master_seed": 16,
        "prior": {"type": "ball_mixture", "weights": [0.5, 0.5],
                  "centers": [vec![0.0; n], e1(n, 0.1)], "radii": [0.1, 0.1]},
        "params": {"tv_matrices": 5, "tv_samples": 50},
    }));
    let out = run_experiment(&c).unwrap();
    assert_eq!(out.summary["overlap"], 1.0);
    assert!(out.reports.is_empty());
}

fn zipf(singular_values: Vec<f64>, deltas: Vec<f64>, etas: Vec<f64>) -> ExperimentConfig {
    cfg(json!({
        "experiment": "zipf_cover", "n": singular_values.len(), "master_seed": 17,
        "prior": {"type": "linear_generative", "singular_values": singular_values},
        "params": {"cover_samples": 1500, "deltas": deltas, "etas": etas},
    }))
}

#[test]
fn zipf_counts_grow_as_radius_halves_and_shrink_with_delta() {
    let s: Vec<f64> = (1..=30).map(|i| 1.0 / i as f64).collect();
    let etas = vec![1.6, 0.8, 0.4];
    let out = run_experiment(&zipf(s, vec![0.01, 0.5], etas.clone())).unwrap();
    let count = |delta: f64, eta: f64| {
        out.cover
            .iter()
            .find(|r| r.delta == delta && r.eta == eta)
            .map(|r| r.count)
            .unwrap()
    };
    for w in etas.windows(2) {
        assert!(count(0.01, w[1]) > count(0.01, w[0]));
    }
    for &eta in &etas {
        assert!(count(0.5, eta) <= count(0.01, eta));
    }
}

#[test]
fn one_dimensional_support_has_small_flat_counts() {
    let mut s = vec![1e-9; 10];
    s[0] = 0.2;
    let out = run_experiment(&zipf(s, vec![0.01], vec![4.0, 2.0, 1.0])).unwrap();
    assert!(out.cover.iter().all(|r| r.count <= 2), "{:?}", out.cover);
}

fn atoms_config(points: Vec<Vec<f64>>, m_list: Vec<usize>, params: Value) -> ExperimentConfig {
    let k = points.len();
    cfg(json!({
        "experiment": "bounds_report", "n": points[0].len(), "m_list": m_list, "sigma": 0.1,
        "trials": 400, "master_seed": 18,
        "prior": {"type": "discrete_atoms", "points": points, "weights": vec![1.0 / k as f64; k]},
        "params": params,
    }))
}

fn scaled_basis(n: usize, s: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect())
        .collect()
}

#[test]
fn separated_atoms_satisfy_every_bound() {
    let out = run_experiment(&atoms_config(scaled_basis(4, 2.0), vec![8], json!({}))).unwrap();
    assert!(out.reports.iter().any(|r| r.applicable));
    assert!(out.failed_reports().is_empty(), "{:?}", out.failed_reports());
}

#[test]
fn single_atom_gives_zero_information() {
    let out = run_experiment(&atoms_config(vec![vec![0.0, 0.0]], vec![2], json!({}))).unwrap();
    let find = |p: &str| out.reports.iter().find(|r| r.name.starts_with(p)).unwrap();
    assert_eq!(find("awgn_mi").inputs["awgn_bits"], 0.0);
    assert!(find("awgn_mi").lhs.abs() < 1e-12);
    assert_eq!(find("fano_variant").lhs, 0.0);
    assert!(out.failed_reports().is_empty());
}

#[test]
fn large_failure_probability_is_out_of_regime_for_the_lower_bound() {
    let out = run_experiment(&atoms_config(scaled_basis(3, 2.0), vec![2], json!({"delta": 0.2}))).unwrap();
    let lb = out
        .reports
        .iter()
        .find(|r| r.name.starts_with("lower_bound_m"))
        .unwrap();
    assert!(!lb.applicable);
    assert!(out
        .reports
        .iter()
        .any(|r| r.name.starts_with("awgn_mi") && r.applicable));
}

fn inpaint(mask: Vec<usize>) -> ExperimentConfig {
    let n = 6;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 3..n {
        a[i] = 3.0;
        b[i] = -3.0;
    }
    cfg(json!({
        "experiment": "inpaint_demo", "n": n, "sigma": 0.0, "trials": 12, "master_seed": 19,
        "mask": mask, "methods": ["exact_posterior", "map"],
        "prior": {"type": "gaussian_mixture", "weights": [0.6, 0.4], "means": [a, b],
                  "covariances": [diag(n, 1.0), diag(n, 1.0)]},
    }))
}

#[test]
fn posterior_samples_are_more_diverse_than_map() {
    let out = run_experiment(&inpaint(vec![0, 1, 2])).unwrap();
    let post = out.summary["exact_posterior/dispersion"];
    let map = out.summary["map/dispersion"];
    assert!(post > 10.0 * map, "posterior {post}, map {map}");
}

#[test]
fn fully_observed_inpainting_returns_the_signal() {
    let out = run_experiment(&inpaint((0..6).collect())).unwrap();
    assert!(!out.rows.is_empty());
    assert!(out.rows.iter().all(|r| r.error_l2 <= 1e-6), "{:?}", out.rows);
}

#[test]
fn identical_configs_give_identical_rows() {
    let c = cfg(json!({
        "experiment": "recovery_curve", "n": 4, "m_list": [2], "sigma": 0.5, "trials": 1,
        "master_seed": 20, "prior": two_component_prior(4, 1.0, 0.5), "methods": ["langevin", "sir"],
    }));
    assert_eq!(run_experiment(&c).unwrap().rows, run_experiment(&c).unwrap().rows);
}
