//! Acquisition functions over a bundle of independent task models.
//!
//! Task `0` is the objective and task `k >= 1` is constraint `k`, with
//! feasibility meaning `c_k(x) <= 0`.

mod fantasy_grid;
mod feasibility;
mod kg;
mod score;
mod ucbd;

pub use fantasy_grid::{
    make_fantasy_grid, FantasyDescriptor, FantasyGrid, FantasyMode, CONSTRAINT_DRAWS, QUANTILE_LEVELS,
};
pub use feasibility::{
    constrained_ei, ei_from_moments, expected_improvement, pf_from_moments, prob_feasible, prob_feasible_k,
};
pub use kg::{ckg, dckg_source, kg, InnerSolver, KgContext};
pub use score::PosteriorScore;
pub use ucbd::{ucbd_beta, ucbd_step, UcbdChoice, UcbdConfig};

use crate::error::{invalid, Result};
use crate::gp::GpModel;

/// Objective model plus one model per constraint.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub objective: GpModel,
    pub constraints: Vec<GpModel>,
}

impl ModelBundle {
    pub fn new(objective: GpModel, constraints: Vec<GpModel>) -> Result<Self> {
        let d = objective.dim();
        if constraints.iter().any(|c| c.dim() != d) {
            return invalid("all task models must share the input dimension");
        }
        Ok(Self { objective, constraints })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Model of task `k` (0 = objective).
    pub fn task(&self, k: usize) -> &GpModel {
        if k == 0 {
            &self.objective
        } else {
            &self.constraints[k - 1]
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.constraints.len() + 1
    }
}
