//! Measurement operators and noisy linear measurements `y = A x + ξ`.
//!
//! Gaussian operators have i.i.d. `N(0, 1/m)` entries and the noise is
//! `ξ ~ N(0, σ²/m · I_m)`, so that `E‖ξ‖² = σ²` regardless of `m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{Matrix, RngStream, Vector};

/// How the measurement matrix is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// I.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// Unscaled identity rows selecting the listed coordinates.
    Mask { indices: Vec<usize> },
    /// A fixed matrix used verbatim.
    Explicit { matrix: Matrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementProcess {
    #[serde(flatten)]
    pub kind: OperatorKind,
    pub m: usize,
    pub n: usize,
    pub sigma: f64,
}

impl MeasurementProcess {
    pub fn gaussian(m: usize, n: usize, sigma: f64) -> Result<Self> {
        Self {
            kind: OperatorKind::Gaussian,
            m,
            n,
            sigma,
        }
        .validated()
    }

    pub fn mask(indices: Vec<usize>, n: usize, sigma: f64) -> Result<Self> {
        Self {
            m: indices.len(),
            kind: OperatorKind::Mask { indices },
            n,
            sigma,
        }
        .validated()
    }

    pub fn explicit(matrix: Matrix, sigma: f64) -> Result<Self> {
        Self {
            m: matrix.rows(),
            n: matrix.cols(),
            kind: OperatorKind::Explicit { matrix },
            sigma,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.m == 0 {
            return Err(invalid("a measurement process needs m >= 1"));
        }
        if self.n == 0 {
            return Err(invalid("ambient dimension must be positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(invalid("noise level must be finite and non-negative"));
        }
        match &self.kind {
            OperatorKind::Gaussian => {}
            OperatorKind::Mask { indices } => {
                if indices.len() != self.m {
                    return Err(invalid("mask length must equal m"));
                }
                let mut seen = vec![false; self.n];
                for &i in indices {
                    if i >= self.n {
                        return Err(invalid(format!("mask index {i} out of range for n = {}", self.n)));
                    }
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(invalid(format!("mask index {i} repeated")));
                    }
                }
            }
            OperatorKind::Explicit { matrix } => {
                if matrix.shape() != (self.m, self.n) {
                    return Err(invalid("explicit matrix shape must be (m, n)"));
                }
            }
        }
        Ok(self)
    }
}

/// A realized measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub a: Matrix,
    pub y: Vector,
    pub sigma: f64,
    pub m: usize,
    pub n: usize,
}

impl MeasurementRecord {
    /// Wraps an existing `(A, y, σ)` triple.
    pub fn new(a: Matrix, y: Vector, sigma: f64) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(invalid(format!("y has length {} but A has {} rows", y.len(), a.rows())));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid("noise level must be finite and non-negative"));
        }
        Ok(Self {
            m: a.rows(),
            n: a.cols(),
            a,
            y,
            sigma,
        })
    }

    /// Per-coordinate noise variance `σ²/m`.
    pub fn noise_variance(&self) -> f64 {
        self.sigma * self.sigma / self.m as f64
    }

    /// `‖y − A x‖²`.
    pub fn residual_sq(&self, x: &[f64]) -> f64 {
        self.a
            .mul_slice(x)
            .iter()
            .zip(self.y.iter())
            .map(|(ax, y)| (y - ax) * (y - ax))
            .sum()
    }
}

/// Draws the operator for `proc`.
pub fn draw_matrix(proc: &MeasurementProcess, rng: &mut RngStream) -> Matrix {
    match &proc.kind {
        OperatorKind::Gaussian => {
            let scale = 1.0 / (proc.m as f64).sqrt();
            let data = (0..proc.m * proc.n).map(|_| scale * rng.standard_normal()).collect();
            Matrix::from_raw(proc.m, proc.n, data)
        }
        OperatorKind::Mask { indices } => {
            let mut a = Matrix::zeros(indices.len(), proc.n);
            for (row, &col) in indices.iter().enumerate() {
                a.set(row, col, 1.0);
            }
            a
        }
        OperatorKind::Explicit { matrix } => matrix.clone(),
    }
}

/// `y = A x + ξ`, `ξ ~ N(0, σ²/m · I)`.
pub fn measure(a: &Matrix, x: &[f64], sigma: f64, rng: &mut RngStream) -> Result<MeasurementRecord> {
    if x.len() != a.cols() {
        return Err(invalid(format!(
            "signal has dimension {} but A has {} columns",
            x.len(),
            a.cols()
        )));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid("noise level must be finite and non-negative"));
    }
    let m = a.rows();
    let noise_std = sigma / (m as f64).sqrt();
    let mut y = a.mul_slice(x);
    if sigma > 0.0 {
        for v in y.iter_mut() {
            *v += noise_std * rng.standard_normal();
        }
    }
    MeasurementRecord::new(a.clone(), Vector::new(y)?, sigma)
}

/// Largest absolute entry of `A`.
pub fn infinity_operator_norm(a: &Matrix) -> Result<f64> {
    if a.data().is_empty() {
        return Err(invalid("matrix is empty"));
    }
    Ok(a.max_abs())
}
