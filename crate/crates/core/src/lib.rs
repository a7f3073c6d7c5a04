//! Posterior-sampling compressed sensing for known priors.
//!
//! The crate recovers a signal `x*` from noisy Gaussian measurements
//! `y = A x* + ξ` by drawing from the posterior `P(x | y)`, and ships the
//! machinery for checking how many measurements that takes:
//!
//! - [`numeric`]: seeded random streams and dense linear algebra.
//! - [`priors`]: Gaussian mixtures, uniform-ball mixtures, linear generative
//!   models and discrete atoms.
//! - [`measurement`]: Gaussian, mask and explicit measurement operators.
//! - [`posterior`]: exact conjugate posteriors and an SIR fallback.
//! - [`samplers`]: annealed Langevin dynamics and MAP baselines.
//! - [`cover`] and [`transport`]: approximate covering numbers, TV and
//!   Wasserstein distances.
//! - [`bounds`]: mutual-information, Fano-type and lower-bound calculators.
//! - [`harness`]: seeded experiment runners behind the `pcs` binary.

pub mod bounds;
pub mod cover;
pub mod error;
pub mod harness;
pub mod measurement;
pub mod numeric;
pub mod posterior;
pub mod priors;
pub mod samplers;
pub mod transport;

pub use error::{PcsError, Result};
pub use numeric::{Matrix, RngStream, Vector};
