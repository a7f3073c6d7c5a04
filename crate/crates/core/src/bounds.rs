//! Information and total-variation inequalities, evaluated numerically.
//!
//! Every information quantity is in bits. A [`BoundReport`] always reads
//! `lhs ≤ rhs`; lower bounds are stored with their sides swapped so that the
//! `holds` flag has one meaning.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cover::CoverSpec;
use crate::error::{invalid, PcsError, Result};
use crate::numeric::{distance, Vector};
use crate::priors::DiscreteAtoms;

/// Fewest joint samples accepted by [`plug_in_mi`].
pub const MIN_MI_PAIRS: usize = 100;

/// Additive constant in the Fano-variant inequality.
pub const FANO_SLACK_BITS: f64 = 1.98;

/// Multiplicative constant in the Fano-variant inequality.
pub const FANO_FACTOR: f64 = 0.99;

/// Slope and offset of the measurement lower bound.
pub const LOWER_BOUND_SLOPE: f64 = 0.1584;
pub const LOWER_BOUND_OFFSET: f64 = 3.96;

/// Largest `δ` for which the measurement lower bound is stated.
pub const LOWER_BOUND_MAX_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `false` when a precondition failed and the comparison was skipped.
    pub applicable: bool,
    pub direction: String,
    pub inputs: BTreeMap<String, f64>,
    pub units: String,
    pub note: String,
}

impl BoundReport {
    /// Report asserting `lhs ≤ rhs`.
    pub fn compare(name: &str, lhs: f64, rhs: f64, units: &str) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs,
            applicable: true,
            direction: "lhs <= rhs".to_string(),
            inputs: BTreeMap::new(),
            units: units.to_string(),
            note: String::new(),
        }
    }

    /// Report for a bound whose precondition failed; it does not count as a violation.
    pub fn not_applicable(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            holds: true,
            applicable: false,
            direction: "lhs <= rhs".to_string(),
            inputs: BTreeMap::new(),
            units: String::new(),
            note: reason.into(),
        }
    }

    pub fn with_input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Whether this report counts as a violation.
    pub fn failed(&self) -> bool {
        self.applicable && !self.holds
    }
}

/// Measurement ensemble entering the channel-capacity bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    /// `A` with i.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// A fixed matrix with largest absolute entry `a_inf`.
    Deterministic { a_inf: f64 },
}

fn check_noise(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("the bound needs a positive, finite noise level"));
    }
    Ok(())
}

fn snr(r: f64, sigma: f64, channel: Channel, m: usize) -> f64 {
    let base = r * r / (sigma * sigma);
    match channel {
        Channel::Gaussian => base,
        Channel::Deterministic { a_inf } => m as f64 * a_inf * a_inf * base,
    }
}

/// Upper bound on `I(y; x*)` in bits for signals of norm at most `r`.
///
/// Gaussian `A`: `(m/2) log₂(1 + r²/σ²)`; fixed `A`:
/// `(m/2) log₂(1 + m r² ‖A‖_∞²/σ²)`.
pub fn awgn_mi_bound(m: usize, r: f64, sigma: f64, channel: Channel) -> Result<f64> {
    check_noise(sigma)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("signal radius must be finite and non-negative"));
    }
    if let Channel::Deterministic { a_inf } = channel {
        if !(a_inf >= 0.0) || !a_inf.is_finite() {
            return Err(invalid("entry bound must be finite and non-negative"));
        }
    }
    Ok(0.5 * m as f64 * (1.0 + snr(r, sigma, channel, m)).log2())
}

/// Plug-in mutual information in bits from joint samples of two labels.
pub fn plug_in_mi(pairs: &[(usize, usize)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid("mutual information needs samples"));
    }
    if pairs.len() < MIN_MI_PAIRS {
        return Err(invalid(format!(
            "plug-in mutual information needs at least {MIN_MI_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut left: HashMap<usize, usize> = HashMap::new();
    let mut right: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in pairs {
        *joint.entry((a, b)).or_default() += 1;
        *left.entry(a).or_default() += 1;
        *right.entry(b).or_default() += 1;
    }
    let mut cells: Vec<_> = joint.into_iter().collect();
    cells.sort_unstable();
    let mi: f64 = cells
        .iter()
        .map(|&((a, b), c)| {
            let c = c as f64;
            (c / n) * (c * n / (left[&a] as f64 * right[&b] as f64)).log2()
        })
        .sum();
    Ok(mi.max(0.0))
}

/// Covering count handed to [`fano_check`], with whether it is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverCount {
    pub count: usize,
    pub exact: bool,
}

/// Checks `0.99 τ (1 − 2δ) log₂ cov_{3η, τ+3δ}(R) ≤ I(x; x̂) + 1.98`.
///
/// `pairs` holds the atom index of each `x` and the matching estimate; the
/// estimate is quantized to its nearest atom for the plug-in information.
pub fn fano_check<F>(
    pairs: &[(usize, Vector)],
    atoms: &DiscreteAtoms,
    eta: f64,
    delta: f64,
    tau: f64,
    cov_fn: F,
) -> Result<BoundReport>
where
    F: FnOnce(CoverSpec) -> Result<CoverCount>,
{
    if !(0.0..1.0 / 3.0).contains(&delta) {
        return Err(invalid(format!("Fano check needs 0 <= delta < 1/3, got {delta}")));
    }
    if !(tau > 0.0) || tau > 1.0 - 3.0 * delta {
        return Err(invalid(format!(
            "Fano check needs 0 < tau <= 1 - 3 delta, got tau = {tau}"
        )));
    }
    if !(eta > 0.0) {
        return Err(invalid("Fano check needs eta > 0"));
    }
    if pairs.iter().any(|(i, _)| *i >= atoms.len()) {
        return Err(invalid("atom index out of range"));
    }
    let failures = pairs
        .iter()
        .filter(|(i, est)| distance(&atoms.points()[*i], est) > eta)
        .count();
    let failure_rate = failures as f64 / pairs.len().max(1) as f64;
    if failure_rate > delta {
        return Err(invalid(format!(
            "empirical failure rate {failure_rate} exceeds delta = {delta}"
        )));
    }
    let quantized: Vec<(usize, usize)> = pairs.iter().map(|(i, e)| (*i, atoms.nearest(e))).collect();
    let mi = plug_in_mi(&quantized)?;
    let cover_delta = tau + 3.0 * delta;
    let (log_cov, exact) = if cover_delta >= 1.0 {
        // Zero balls already carry mass >= 0.
        (0.0, true)
    } else {
        let c = cov_fn(CoverSpec::new(3.0 * eta, cover_delta)?)?;
        ((c.count.max(1) as f64).log2(), c.exact)
    };
    let lhs = FANO_FACTOR * tau * (1.0 - 2.0 * delta) * log_cov;
    let rhs = mi + FANO_SLACK_BITS;
    let note = if exact {
        "covering number from exhaustive search"
    } else {
        "covering number from greedy search (upper bound)"
    };
    Ok(BoundReport::compare("fano_variant", lhs, rhs, "bits")
        .with_input("eta", eta)
        .with_input("delta", delta)
        .with_input("tau", tau)
        .with_input("failure_rate", failure_rate)
        .with_input("log2_cov", log_cov)
        .with_input("mi_bits", mi)
        .with_note(note))
}

/// Measurement count below which `(η, δ)` recovery is impossible.
///
/// `(0.1584 (log₂cov + log₂(6δ)) − 3.96) / log₂(1 + snr)` with
/// `snr = r²/σ²` for Gaussian `A` and `m_probe r² a_inf²/σ²` for a fixed `A`.
/// The value can be negative, in which case the bound is vacuous.
pub fn lower_bound_measurements(
    log2_cov: f64,
    delta: f64,
    r: f64,
    sigma: f64,
    channel: Channel,
    m_probe: usize,
) -> Result<f64> {
    if delta >= LOWER_BOUND_MAX_DELTA {
        return Err(PcsError::OutOfRegime(format!(
            "measurement lower bound needs delta < {LOWER_BOUND_MAX_DELTA}, got {delta}"
        )));
    }
    if !(delta > 0.0) {
        return Err(invalid("measurement lower bound needs delta > 0"));
    }
    check_noise(sigma)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("signal radius must be finite and non-negative"));
    }
    let numerator = LOWER_BOUND_SLOPE * (log2_cov + (6.0 * delta).log2()) - LOWER_BOUND_OFFSET;
    let denominator = (1.0 + snr(r, sigma, channel, m_probe)).log2();
    if denominator == 0.0 {
        return Ok(if numerator > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(numerator / denominator)
}

/// Lower bound `1 − 4 exp(−(m/2) ln(c/4e²))` on the expected two-ball TV.
pub fn twoball_tv_bound(m: usize, c: f64) -> Result<f64> {
    let threshold = 4.0 * std::f64::consts::E.powi(2);
    if !(c >= threshold * (1.0 - 1e-12)) {
        return Err(PcsError::OutOfRegime(format!(
            "two-ball TV bound needs c >= 4e^2 = {threshold:.6}, got {c}"
        )));
    }
    let rate = (c / threshold).ln().max(0.0);
    Ok(1.0 - 4.0 * (-(m as f64) / 2.0 * rate).exp())
}

/// Upper bound `1 − TV` on choosing the wrong mixture component.
pub fn wrong_component_bound(tv: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(invalid(format!("TV must lie in [0, 1], got {tv}")));
    }
    Ok(1.0 - tv)
}
