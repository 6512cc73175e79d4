//! Constrained Bayesian optimisation with decoupled evaluations.
//!
//! The objective and each constraint of a black-box problem are modelled by
//! independent Gaussian processes. Besides the classic coupled policies
//! (constrained EI, constrained knowledge gradient and an optimistic UCB
//! baseline) the crate implements cost-aware decoupled policies that choose
//! both *where* to evaluate and *which* function to evaluate there.
//!
//! Module map:
//!
//! * [`gp`]: kernels, likelihood fitting, posterior and fantasy conditioning.
//! * [`optim`]: Latin hypercube / Sobol designs and multistart box-bounded search.
//! * [`acquisition`]: feasibility, EI, KG-family and UCB-D acquisition functions.
//! * [`engine`]: the optimisation loops, budget ledger and recommendation.
//! * [`problems`]: synthetic benchmark problems and optimum certificates.
//! * [`harness`]: replicated experiments, CSV persistence, aggregation and plots.

pub mod acquisition;
pub mod engine;
mod error;
pub mod gp;
pub mod harness;
pub mod optim;
pub mod problems;
pub(crate) mod stats;

pub use error::{Error, Result};
