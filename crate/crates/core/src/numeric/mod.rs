//! Random streams, Gaussian sampling and dense linear algebra.

mod linalg;
mod rng;

pub use linalg::{
    cholesky, distance, distance_squared, dot, logdet_spd, norm, solve_spd, Matrix, SpdFactor, Vector, PIVOT_TOLERANCE,
};
pub use rng::{gaussian_vector, mix64, RngStream};

/// `ln Σ exp(v)` with a max shift. Returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalizes log-weights into probabilities with a max shift.
pub fn normalize_log_weights(log_weights: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_weights);
    log_weights.iter().map(|v| (v - lse).exp()).collect()
}

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_far_terms() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
