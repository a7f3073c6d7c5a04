//! Annealed Langevin dynamics and MAP / modified-MAP baselines.

mod langevin;
mod map;
mod schedule;

pub use langevin::{langevin_x, langevin_z, DIVERGENCE_FACTOR};
pub use map::{map_estimate, map_run, mixture_mode, MapConfig, MapPrior, MapRun, MAX_HALVINGS};
pub use schedule::{auto_base_step, AnnealSchedule, AUTO_STEP_FRACTION};
