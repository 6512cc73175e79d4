//! Gaussian-process regression used for every task (objective or constraint).
//!
//! Each task has its own independent GP. Models fitted with [`fit`] work on
//! centred, unit-scaled targets internally; the public posterior is always
//! reported in the units of the observations.

mod fantasy;
mod fit;
mod kernel;
mod likelihood;
mod model;

pub use fantasy::{condition_on_fantasy, FantasyModel};
pub use fit::{fit, FitOptions, NoiseMode};
pub use kernel::{kernel_eval, KernelFamily, KernelParams};
pub use likelihood::{log_marginal_likelihood, LogLikelihood};
pub use model::{GpModel, Posterior, PosteriorGradient};

/// Smallest noise variance used in any factorisation (standardised units).
pub const JITTER_FLOOR: f64 = 1e-4;
/// Largest noise variance reached by jitter escalation.
pub const JITTER_CEILING: f64 = 1e-1;
