use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Method};
use super::output::{CoverRow, ResultRow, Series};
use super::seed::trial_seed;
use super::ExperimentOutput;
use crate::bounds::{
    awgn_mi_bound, fano_check, lower_bound_measurements, plug_in_mi, BoundReport, Channel, CoverCount,
};
use crate::cover::{brute_force_cover, greedy_cover, greedy_cover_atoms, CoverSpec, BRUTE_FORCE_LIMIT};
use crate::error::{PcsError, Result};
use crate::measurement::{draw_matrix, measure, MeasurementProcess, MeasurementRecord};
use crate::numeric::{distance, RngStream, Vector};
use crate::posterior::{
    condition_on_coordinates, discrete_posterior, exact_posterior, noiseless_ball_posterior, sir_posterior_sample,
    CoordinatePosterior,
};
use crate::priors::{DiscreteAtoms, GaussianMixture, PriorSpec};
use crate::samplers::{langevin_x, langevin_z, map_estimate, mixture_mode, MapConfig, MapPrior};
use crate::transport::EmpiricalDist;

/// Seed namespace shared by recovery curves and mismatch runs, so that a
/// zero shift replays the recovery trials exactly.
const RECOVERY_NAMESPACE: &str = "recovery_curve";
const HOLDOUT_NAMESPACE: &str = "holdout";

/// Slack on the MI checks, absorbing plug-in bias.
const AWGN_SLACK_BITS: f64 = 0.2;
const DPI_SLACK_BITS: f64 = 0.1;

/// Levels in the automatic cover-radius ladder.
const AUTO_ETA_LEVELS: usize = 7;

/// `τ` values scanned when none is configured, as fractions of `1 − 3δ`.
const TAU_SCAN: usize = 20;

/// Stream indices within a trial.
const SIGNAL_STREAM: u64 = 1;
const MATRIX_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;
pub(crate) const TV_STREAM: u64 = 4;

/// One drawn `(x*, A, y)` with the trial's random streams.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    pub x: Vector,
    /// Ball or atom index of `x*` for priors that have one.
    pub component: Option<usize>,
    pub rec: MeasurementRecord,
}

impl TrialData {
    /// Stream used by `method` in this trial; independent of the method list.
    pub fn method_rng(&self, method: Method) -> RngStream {
        self.stream(method.stream())
    }

    pub(crate) fn stream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed).substream(index)
    }
}

fn measurement_process(cfg: &ExperimentConfig, m: usize) -> Result<MeasurementProcess> {
    match &cfg.mask {
        Some(indices) => MeasurementProcess::mask(indices.clone(), cfg.n, cfg.sigma),
        None => MeasurementProcess::gaussian(m, cfg.n, cfg.sigma),
    }
}

/// Draws trial `trial` at `m` measurements in seed namespace `namespace`.
pub fn setup_trial(
    cfg: &ExperimentConfig,
    truth: &PriorSpec,
    namespace: &str,
    m: usize,
    trial: usize,
) -> Result<TrialData> {
    let seed = trial_seed(cfg.master_seed, namespace, m, trial);
    let root = RngStream::new(seed);
    let mut sig = root.substream(SIGNAL_STREAM);
    let (x, component) = match truth {
        PriorSpec::BallMixture(b) => {
            let k = sig.categorical(b.weights());
            (b.sample_component(k, &mut sig), Some(k))
        }
        PriorSpec::DiscreteAtoms(a) => {
            let i = a.sample_index(&mut sig);
            (a.points()[i].clone(), Some(i))
        }
        p => (p.sample(&mut sig), None),
    };
    let proc = measurement_process(cfg, m)?;
    let a = draw_matrix(&proc, &mut root.substream(MATRIX_STREAM));
    let rec = measure(&a, &x, cfg.sigma, &mut root.substream(NOISE_STREAM))?;
    Ok(TrialData {
        seed,
        x,
        component,
        rec,
    })
}

fn map_prior(prior: &PriorSpec) -> Result<MapPrior<'_>> {
    match prior {
        PriorSpec::GaussianMixture(g) => Ok(MapPrior::Mixture(g)),
        PriorSpec::LinearGenerative(l) => Ok(MapPrior::Linear(l)),
        p => Err(PcsError::Configuration(format!(
            "MAP needs a density, got a {} prior",
            p.kind()
        ))),
    }
}

fn masked_posterior(
    cfg: &ExperimentConfig,
    g: &GaussianMixture,
    rec: &MeasurementRecord,
) -> Result<CoordinatePosterior> {
    let mask = cfg
        .mask
        .as_ref()
        .ok_or_else(|| PcsError::Configuration("noiseless Gaussian-mixture runs need a mask".into()))?;
    condition_on_coordinates(g, mask, rec.y.as_slice())
}

/// Runs one recovery method on a measurement.
///
/// `gamma` is the modified-MAP weight; when `None` the configured one is used.
pub fn estimate(
    cfg: &ExperimentConfig,
    method: Method,
    prior: &PriorSpec,
    rec: &MeasurementRecord,
    gamma: Option<f64>,
    rng: &mut RngStream,
) -> Result<Vector> {
    let noiseless = rec.sigma == 0.0;
    match (method, prior) {
        (Method::Sir, p) => sir_posterior_sample(p, rec, cfg.sir_particles, rng),
        (Method::ExactPosterior, PriorSpec::GaussianMixture(g)) if noiseless => {
            Ok(masked_posterior(cfg, g, rec)?.sample(rng))
        }
        (Method::ExactPosterior, PriorSpec::GaussianMixture(g)) => Ok(exact_posterior(g, rec)?.sample(rng)),
        (Method::ExactPosterior, PriorSpec::LinearGenerative(l)) => {
            Ok(exact_posterior(&l.to_gaussian()?, rec)?.sample(rng))
        }
        (Method::ExactPosterior, PriorSpec::DiscreteAtoms(a)) => Ok(discrete_posterior(a, rec)?.sample(rng)),
        (Method::ExactPosterior, PriorSpec::BallMixture(b)) => Ok(noiseless_ball_posterior(b, rec)?.sample(rng)),
        (Method::Langevin, PriorSpec::GaussianMixture(g)) => langevin_x(g, rec, &cfg.schedule()?, rng),
        (Method::Langevin, PriorSpec::LinearGenerative(l)) => langevin_z(l, rec, &cfg.schedule()?, rng),
        (Method::Map | Method::ModifiedMap, PriorSpec::GaussianMixture(g)) if noiseless && cfg.mask.is_some() => {
            let post = masked_posterior(cfg, g, rec)?;
            match post.free_posterior() {
                Some(free) => post.complete(mixture_mode(free, &cfg.map, rng)?.estimate.as_slice()),
                None => post.complete(&[]),
            }
        }
        (Method::Map, p) => map_estimate(map_prior(p)?, rec, &cfg.map, rng),
        (Method::ModifiedMap, p) => {
            let g = gamma
                .or(cfg.modified_map_gamma)
                .ok_or_else(|| PcsError::Configuration("modified MAP needs a weight".into()))?;
            let mc = MapConfig {
                gamma: Some(g),
                ..cfg.map.clone()
            };
            map_estimate(map_prior(p)?, rec, &mc, rng)
        }
        (m, p) => Err(PcsError::Configuration(format!(
            "method {} is unavailable for a {} prior",
            m.name(),
            p.kind()
        ))),
    }
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    let ms = if enabled {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok((out, ms))
}

pub(crate) fn result_row(
    cfg: &ExperimentConfig,
    trial: &TrialData,
    index: usize,
    m: usize,
    method: &str,
    est: &Vector,
    runtime_ms: f64,
) -> ResultRow {
    let err = distance(&trial.x, est);
    let mut aux = BTreeMap::new();
    aux.insert("sq_err_per_dim".to_string(), err * err / cfg.n as f64);
    ResultRow {
        experiment: cfg.experiment.name().to_string(),
        trial: index,
        m,
        sigma: cfg.sigma,
        method: method.to_string(),
        error_l2: err,
        runtime_ms,
        seed: trial.seed,
        aux,
    }
}

pub(crate) fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (a.m, a.trial, &a.method)
            .cmp(&(b.m, b.trial, &b.method))
            .then_with(|| a.aux_string().cmp(&b.aux_string()))
    });
}

/// Picks the modified-MAP weight with the lowest mean error on holdout trials.
fn select_gamma(cfg: &ExperimentConfig, truth: &PriorSpec, model: &PriorSpec, m: usize) -> Result<f64> {
    if let Some(g) = cfg.modified_map_gamma {
        return Ok(g);
    }
    let base = 2.0 * cfg.sigma * cfg.sigma / m as f64;
    if base == 0.0 {
        return Err(PcsError::Configuration(
            "modified MAP with sigma = 0 needs modified_map_gamma".into(),
        ));
    }
    let mut best = (f64::INFINITY, base);
    for &mult in &cfg.params.gamma_grid {
        let gamma = mult * base;
        let errors = (0..cfg.params.holdout_trials.max(1))
            .into_par_iter()
            .map(|t| {
                let tr = setup_trial(cfg, truth, HOLDOUT_NAMESPACE, m, t)?;
                let est = estimate(
                    cfg,
                    Method::ModifiedMap,
                    model,
                    &tr.rec,
                    Some(gamma),
                    &mut tr.method_rng(Method::ModifiedMap),
                )?;
                Ok(distance(&tr.x, &est))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        if mean < best.0 {
            best = (mean, gamma);
        }
    }
    Ok(best.1)
}

/// Runs every configured method on every `(m, trial)` with `x* ~ truth`,
/// estimating under `model`.
fn recovery_rows(
    cfg: &ExperimentConfig,
    truth: &PriorSpec,
    model: &PriorSpec,
    extra_aux: &[(&str, f64)],
) -> Result<Vec<ResultRow>> {
    let mut gammas = BTreeMap::new();
    if cfg.methods.contains(&Method::ModifiedMap) {
        for &m in &cfg.m_list {
            gammas.insert(m, select_gamma(cfg, truth, model, m)?);
        }
    }
    let jobs: Vec<(usize, usize)> = cfg
        .m_list
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let nested = jobs
        .par_iter()
        .map(|&(m, t)| {
            let tr = setup_trial(cfg, truth, RECOVERY_NAMESPACE, m, t)?;
            let mut out = Vec::with_capacity(cfg.methods.len());
            for &method in &cfg.methods {
                let gamma = gammas.get(&m).copied();
                let mut rng = tr.method_rng(method);
                let (est, ms) = timed(cfg.timing, || estimate(cfg, method, model, &tr.rec, gamma, &mut rng))?;
                let mut row = result_row(cfg, &tr, t, m, method.name(), &est, ms);
                if let (Method::ModifiedMap, Some(g)) = (method, gamma) {
                    row.aux.insert("gamma".into(), g);
                }
                for (k, v) in extra_aux {
                    row.aux.insert(k.to_string(), *v);
                }
                out.push(row);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ResultRow> = nested.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Linear-interpolation quantile of unsorted data.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Groups `(method, m)` to the values `f(row)`.
fn group_by_method_m(rows: &[ResultRow], f: impl Fn(&ResultRow) -> f64) -> BTreeMap<(String, usize), Vec<f64>> {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.method.clone(), r.m)).or_default().push(f(r));
    }
    groups
}

pub(crate) fn run_recovery_curve(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rows = recovery_rows(cfg, &cfg.prior, &cfg.prior, &[])?;
    let mut out = ExperimentOutput::new(ExperimentKind::RecoveryCurve);
    let per_pixel = group_by_method_m(&rows, |r| r.aux["sq_err_per_dim"]);
    let errors = group_by_method_m(&rows, |r| r.error_l2);
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((method, m), v) in &per_pixel {
        series.entry(method.clone()).or_default().push((*m as f64, mean(v)));
        out.summary
            .insert(format!("{method}/m={m}/mean_sq_err_per_dim"), mean(v));
    }
    for ((method, m), v) in &errors {
        out.summary.insert(format!("{method}/m={m}/mean_error_l2"), mean(v));
        out.summary
            .insert(format!("{method}/m={m}/median_error_l2"), quantile(v, 0.5));
    }
    out.series = series
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();
    out.rows = rows;
    Ok(out)
}

fn unit_direction(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut d = cfg.params.shift_direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; cfg.n];
        e[0] = 1.0;
        e
    });
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    d.iter_mut().for_each(|v| *v /= norm);
    d
}

pub(crate) fn run_mismatch(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(ExperimentKind::Mismatch);
    let mut rows = Vec::new();
    if cfg.params.eps_factors.is_empty() || cfg.mismatch_prior.is_some() {
        rows.extend(recovery_rows(
            cfg,
            &cfg.prior,
            &cfg.prior,
            &[("eps", 0.0), ("eps_factor", 0.0)],
        )?);
    }
    if let Some(p) = &cfg.mismatch_prior {
        rows.extend(recovery_rows(cfg, &cfg.prior, p, &[("given_prior", 1.0)])?);
    } else {
        let dir = unit_direction(cfg);
        for &factor in &cfg.params.eps_factors {
            let eps = factor * cfg.sigma;
            let shift: Vec<f64> = dir.iter().map(|d| d * eps).collect();
            let model = cfg.prior.shift(&shift)?;
            rows.extend(recovery_rows(
                cfg,
                &cfg.prior,
                &model,
                &[("eps", eps), ("eps_factor", factor)],
            )?);
        }
    }
    sort_rows(&mut rows);

    let mut groups: BTreeMap<(String, usize, String), Vec<f64>> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.aux.contains_key("eps_factor") || r.aux.contains_key("given_prior"))
    {
        let variant = match r.aux.get("eps_factor") {
            Some(f) => format!("eps_factor={f}"),
            None => "given_prior".to_string(),
        };
        groups
            .entry((r.method.clone(), r.m, variant))
            .or_default()
            .push(r.error_l2);
    }
    for ((method, m, variant), errs) in &groups {
        out.summary
            .insert(format!("{method}/m={m}/{variant}/p90_error_l2"), quantile(errs, 0.9));
        out.summary
            .insert(format!("{method}/m={m}/{variant}/mean_error_l2"), mean(errs));
    }
    for ((method, m, variant), errs) in &groups {
        let Some(base) = groups.get(&(method.clone(), *m, "eps_factor=0".to_string())) else {
            continue;
        };
        if variant == "eps_factor=0" || variant == "given_prior" {
            continue;
        }
        let factor: f64 = variant["eps_factor=".len()..].parse().unwrap_or(f64::NAN);
        let eps = factor * cfg.sigma;
        let excess = quantile(errs, 0.9) - quantile(base, 0.9);
        out.reports.push(
            BoundReport::compare(
                &format!("mismatch_p90/{method}/m={m}/{variant}"),
                excess,
                eps + 2.0 * cfg.sigma,
                "l2",
            )
            .with_input("m", *m as f64)
            .with_input("eps", eps)
            .with_input("sigma", cfg.sigma),
        );
    }
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((method, m, variant), errs) in &groups {
        series
            .entry(format!("{method} {variant}"))
            .or_default()
            .push((*m as f64, quantile(errs, 0.9)));
    }
    out.series = series
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();
    out.rows = rows;
    Ok(out)
}

/// Default cover radii: a `√2` ladder down from the typical distance between
/// two prior samples, `√(2 tr Σ)`.
pub(crate) fn auto_etas(trace_cov: f64) -> Vec<f64> {
    let eta0 = (2.0 * trace_cov).sqrt();
    (0..AUTO_ETA_LEVELS)
        .map(|k| eta0 * 0.5f64.powf(k as f64 / 2.0))
        .collect()
}

/// Least-squares slope of `y` against `x`.
fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub(crate) fn run_zipf_cover(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let PriorSpec::LinearGenerative(gen) = &cfg.prior else {
        return Err(PcsError::Configuration(
            "zipf_cover needs a linear_generative prior".into(),
        ));
    };
    let seed = trial_seed(cfg.master_seed, ExperimentKind::ZipfCover.name(), 0, 0);
    let mut rng = RngStream::new(seed);
    let samples: Vec<Vector> = (0..cfg.params.cover_samples).map(|_| gen.sample(&mut rng)).collect();
    let cloud = EmpiricalDist::new(samples)?;
    let etas = if cfg.params.etas.is_empty() {
        auto_etas(gen.generator().frobenius_norm().powi(2))
    } else {
        cfg.params.etas.clone()
    };
    let mut out = ExperimentOutput::new(ExperimentKind::ZipfCover);
    for &delta in &cfg.params.deltas {
        let mut points = Vec::new();
        let mut log_counts = Vec::new();
        for &eta in &etas {
            let r = greedy_cover(&cloud, CoverSpec::new(eta, delta)?);
            let lc = (r.count as f64).log2();
            out.summary.insert(format!("delta={delta}/eta={eta:.6}/log2_count"), lc);
            points.push((1.0 / (eta * eta), lc));
            log_counts.push(lc);
            out.cover.push(CoverRow::from_result(&r, cloud.len(), seed));
        }
        for (k, w) in log_counts.windows(2).enumerate() {
            let ratio = if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN };
            out.summary.insert(format!("delta={delta}/ratio_{k}"), ratio);
        }
        if points.len() >= 2 {
            out.summary.insert(
                format!("delta={delta}/slope_log2_count_vs_inv_eta_sq"),
                ols_slope(&points),
            );
        }
        out.series.push(Series {
            label: format!("delta={delta}"),
            points,
        });
    }
    Ok(out)
}

/// Nearest atom of `y` among the projected atoms `A a_j`.
fn nearest_projected(projected: &[Vector], y: &[f64]) -> usize {
    projected
        .iter()
        .enumerate()
        .map(|(j, p)| (j, distance(p, y)))
        .fold((0, f64::INFINITY), |acc, (j, d)| if d < acc.1 { (j, d) } else { acc })
        .0
}

fn cover_count(atoms: &DiscreteAtoms, spec: CoverSpec) -> Result<CoverCount> {
    if atoms.len() <= BRUTE_FORCE_LIMIT {
        Ok(CoverCount {
            count: brute_force_cover(atoms, spec)?,
            exact: true,
        })
    } else {
        Ok(CoverCount {
            count: greedy_cover_atoms(atoms, spec).count,
            exact: false,
        })
    }
}

struct BoundsTrial {
    atom: usize,
    estimate: Vector,
    quantized_y: usize,
}

fn fano_report(
    pairs: &[(usize, Vector)],
    atoms: &DiscreteAtoms,
    eta: f64,
    cfg: &ExperimentConfig,
    failure_rate: f64,
) -> BoundReport {
    let delta = cfg.params.delta.unwrap_or(failure_rate);
    if failure_rate > delta {
        return BoundReport::not_applicable(
            "fano_variant",
            format!("failure rate {failure_rate} exceeds delta = {delta}"),
        );
    }
    if delta >= 1.0 / 3.0 {
        return BoundReport::not_applicable("fano_variant", format!("needs delta < 1/3, got {delta}"));
    }
    let taus: Vec<f64> = match cfg.params.tau {
        Some(t) => vec![t],
        None => (1..=TAU_SCAN)
            .map(|k| k as f64 / TAU_SCAN as f64 * (1.0 - 3.0 * delta))
            .collect(),
    };
    let mut worst: Option<BoundReport> = None;
    for tau in taus {
        match fano_check(pairs, atoms, eta, delta, tau, |s| cover_count(atoms, s)) {
            Ok(r) => {
                if worst.as_ref().is_none_or(|w| r.rhs - r.lhs < w.rhs - w.lhs) {
                    worst = Some(r);
                }
            }
            Err(e) => return BoundReport::not_applicable("fano_variant", e.to_string()),
        }
    }
    worst.expect("at least one tau")
}

pub(crate) fn run_bounds_report(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let PriorSpec::DiscreteAtoms(atoms) = &cfg.prior else {
        return Err(PcsError::Configuration(
            "bounds_report needs a discrete_atoms prior".into(),
        ));
    };
    let method = cfg.methods[0];
    let r = cfg.prior.support_radius().radius;
    let eta = cfg.params.eta.unwrap_or_else(|| {
        let sep = atoms.min_separation();
        if sep.is_finite() && sep > 0.0 {
            sep / 4.0
        } else {
            1.0
        }
    });
    let mut out = ExperimentOutput::new(ExperimentKind::BoundsReport);
    for &m in &cfg.m_list {
        let trials = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let tr = setup_trial(cfg, &cfg.prior, ExperimentKind::BoundsReport.name(), m, t)?;
                let (est, ms) = timed(cfg.timing, || {
                    estimate(cfg, method, &cfg.prior, &tr.rec, None, &mut tr.method_rng(method))
                })?;
                let projected: Vec<Vector> = atoms
                    .points()
                    .iter()
                    .map(|p| tr.rec.a.mul_vec(p))
                    .collect::<Result<_>>()?;
                let q = nearest_projected(&projected, tr.rec.y.as_slice());
                let mut row = result_row(cfg, &tr, t, m, method.name(), &est, ms);
                row.aux.insert("miss".into(), f64::from(u8::from(row.error_l2 > eta)));
                let bt = BoundsTrial {
                    atom: tr.component.expect("atom priors record the atom index"),
                    estimate: est,
                    quantized_y: q,
                };
                Ok((row, bt))
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(usize, Vector)> = trials.iter().map(|(_, b)| (b.atom, b.estimate.clone())).collect();
        let failures = trials.iter().filter(|(row, _)| row.error_l2 > eta).count();
        let failure_rate = failures as f64 / trials.len() as f64;
        let xh: Vec<(usize, usize)> = trials
            .iter()
            .map(|(_, b)| (b.atom, atoms.nearest(&b.estimate)))
            .collect();
        let xq: Vec<(usize, usize)> = trials.iter().map(|(_, b)| (b.atom, b.quantized_y)).collect();
        let tag = |name: &str| format!("{name}/m={m}");
        let with_common = |rep: BoundReport| {
            rep.with_input("m", m as f64)
                .with_input("sigma", cfg.sigma)
                .with_input("r", r)
        };

        let mut reports = Vec::new();
        match (plug_in_mi(&xh), plug_in_mi(&xq)) {
            (Ok(mi), Ok(mi_y)) => {
                let cap = awgn_mi_bound(m, r, cfg.sigma, Channel::Gaussian)?;
                reports.push(
                    BoundReport::compare(&tag("awgn_mi"), mi, cap + AWGN_SLACK_BITS, "bits")
                        .with_input("awgn_bits", cap)
                        .with_input("slack_bits", AWGN_SLACK_BITS),
                );
                reports.push(
                    BoundReport::compare(&tag("dpi"), mi, mi_y + DPI_SLACK_BITS, "bits")
                        .with_input("mi_quantized_y_bits", mi_y)
                        .with_input("slack_bits", DPI_SLACK_BITS),
                );
            }
            (Err(e), _) | (_, Err(e)) => {
                reports.push(BoundReport::not_applicable(&tag("awgn_mi"), e.to_string()));
                reports.push(BoundReport::not_applicable(&tag("dpi"), e.to_string()));
            }
        }
        let mut fano = fano_report(&pairs, atoms, eta, cfg, failure_rate);
        fano.name = tag("fano_variant");
        reports.push(fano);

        let delta_lb = cfg.params.delta.unwrap_or(failure_rate).max(1.0 / trials.len() as f64);
        let lower = if failure_rate > delta_lb {
            BoundReport::not_applicable(&tag("lower_bound_m"), "failure rate exceeds delta")
        } else {
            match CoverSpec::new(3.0 * eta, (4.0 * delta_lb).min(0.999)).and_then(|s| cover_count(atoms, s)) {
                Ok(c) => {
                    let log2_cov = (c.count.max(1) as f64).log2();
                    match lower_bound_measurements(log2_cov, delta_lb, r, cfg.sigma, Channel::Gaussian, m) {
                        Ok(bound) => {
                            BoundReport::compare(&tag("lower_bound_m"), bound.max(0.0), m as f64, "measurements")
                                .with_input("raw_bound", bound)
                                .with_input("log2_cov", log2_cov)
                                .with_input("delta", delta_lb)
                        }
                        Err(e) => BoundReport::not_applicable(&tag("lower_bound_m"), e.to_string()),
                    }
                }
                Err(e) => BoundReport::not_applicable(&tag("lower_bound_m"), e.to_string()),
            }
        };
        reports.push(lower);
        out.summary.insert(format!("m={m}/failure_rate"), failure_rate);
        out.reports.extend(reports.into_iter().map(|r| {
            with_common(r)
                .with_input("eta", eta)
                .with_input("failure_rate", failure_rate)
        }));
        out.rows.extend(trials.into_iter().map(|(row, _)| row));
    }
    sort_rows(&mut out.rows);
    let failed = out.failed_reports().len();
    out.summary.insert("failed_reports".into(), failed as f64);
    Ok(out)
}

/// Mean pairwise distance of a set of points.
pub(crate) fn mean_pairwise_distance(points: &[Vector]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            total += distance(&points[i], &points[j]);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

pub(crate) fn run_inpaint_demo(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let m = cfg.mask.as_ref().map_or(0, Vec::len);
    let name = ExperimentKind::InpaintDemo.name();
    let truth = setup_trial(cfg, &cfg.prior, name, m, 0)?;
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            // Every seed reuses the one masked signal.
            let seed = trial_seed(cfg.master_seed, name, m, t + 1);
            let root = RngStream::new(seed);
            let mut out = Vec::new();
            for &method in &cfg.methods {
                let mut rng = root.substream(method.stream());
                let (est, ms) = timed(cfg.timing, || {
                    estimate(cfg, method, &cfg.prior, &truth.rec, None, &mut rng)
                })?;
                let mut row = result_row(cfg, &truth, t, m, method.name(), &est, ms);
                row.seed = seed;
                out.push((row, est));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ExperimentOutput::new(ExperimentKind::InpaintDemo);
    let mut by_method: BTreeMap<String, Vec<Vector>> = BTreeMap::new();
    for (row, est) in rows.into_iter().flatten() {
        by_method.entry(row.method.clone()).or_default().push(est);
        out.rows.push(row);
    }
    sort_rows(&mut out.rows);
    for (method, ests) in &by_method {
        out.summary
            .insert(format!("{method}/dispersion"), mean_pairwise_distance(ests));
    }
    let post = out.summary.get("exact_posterior/dispersion").copied();
    let map = out.summary.get("map/dispersion").copied();
    if let (Some(p), Some(q)) = (post, map) {
        out.summary.insert("dispersion_ratio".into(), p / q);
    }
    Ok(out)
}
