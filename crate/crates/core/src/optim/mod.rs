//! Experimental designs and box-bounded multistart maximisation.

mod bounds;
mod design;
mod local;
mod multistart;

pub use bounds::Bounds;
pub use design::{lhs_sample, sobol_sample, sobol_unscrambled, SOBOL_MAX_DIM};
pub use local::{adam_projected, quasi_newton_bounded, LocalResult};
pub use multistart::{maximize, maximize_from_candidates, Maximum, MultistartConfig, Objective, SearchMethod};
