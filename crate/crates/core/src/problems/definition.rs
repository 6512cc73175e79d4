use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::CostVector;
use crate::error::{invalid, Result};
use crate::optim::Bounds;

/// A scalar task function of the input vector.
pub type TaskFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How the written objective is turned into a maximisation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    Maximize,
    /// Minimise the written objective, i.e. maximise its negation.
    MinimizeWritten,
}

impl Sense {
    pub fn apply(self, written: f64) -> f64 {
        match self {
            Sense::Maximize => written,
            Sense::MinimizeWritten => -written,
        }
    }
}

/// Known optimum in the maximisation convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub x: Vec<f64>,
}

/// A constrained benchmark: maximise `f` subject to `c_k(x) <= 0`.
#[derive(Clone)]
pub struct ProblemDefinition {
    name: String,
    bounds: Bounds,
    objective: TaskFn,
    constraints: Vec<TaskFn>,
    costs: CostVector,
    sense: Sense,
    penalty_m: f64,
    optimum: Option<Optimum>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("num_constraints", &self.constraints.len())
            .field("costs", &self.costs)
            .field("sense", &self.sense)
            .field("penalty_m", &self.penalty_m)
            .field("optimum", &self.optimum)
            .finish()
    }
}

impl ProblemDefinition {
    /// Unit costs, zero penalty and no known optimum.
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        objective: TaskFn,
        constraints: Vec<TaskFn>,
        sense: Sense,
    ) -> Self {
        let costs = CostVector::unit(constraints.len() + 1);
        Self { name: name.into(), bounds, objective, constraints, costs, sense, penalty_m: 0.0, optimum: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.constraints.len() + 1
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn costs(&self) -> &CostVector {
        &self.costs
    }

    pub fn penalty_m(&self) -> f64 {
        self.penalty_m
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }

    pub fn with_costs(mut self, costs: CostVector) -> Result<Self> {
        if costs.len() != self.num_tasks() {
            return invalid(format!(
                "{} has {} tasks but {} costs were given",
                self.name,
                self.num_tasks(),
                costs.len()
            ));
        }
        self.costs = costs;
        Ok(self)
    }

    pub fn with_penalty(mut self, m: f64) -> Result<Self> {
        if !m.is_finite() {
            return invalid("penalty must be finite");
        }
        self.penalty_m = m;
        Ok(self)
    }

    /// Changing the sense discards any known optimum.
    pub fn with_sense(mut self, sense: Sense) -> Self {
        if sense != self.sense {
            self.optimum = None;
        }
        self.sense = sense;
        self
    }

    pub fn with_optimum(mut self, optimum: Optimum) -> Result<Self> {
        if optimum.x.len() != self.dim() || !self.bounds.contains(&optimum.x) {
            return invalid("optimum location must lie in the box");
        }
        self.optimum = Some(optimum);
        Ok(self)
    }

    /// Appends `count` constraints that always return `value`.
    pub fn with_redundant_constraints(mut self, count: usize, value: f64) -> Result<Self> {
        if count == 0 {
            return invalid("at least one redundant constraint is required");
        }
        if !(value < 0.0 && value.is_finite()) {
            return invalid(format!("redundant constraint value must be negative, got {value}"));
        }
        for _ in 0..count {
            self.constraints.push(Arc::new(move |_: &[f64]| value));
        }
        self.costs = CostVector::unit(self.num_tasks());
        self.name = format!("{}-redundant{count}", self.name);
        Ok(self)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return invalid(format!("{} expects {} inputs, got {}", self.name, self.dim(), x.len()));
        }
        if !self.bounds.contains(x) {
            return invalid(format!("{}: {x:?} lies outside the box", self.name));
        }
        Ok(())
    }

    /// Objective in the maximisation convention.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.sense.apply((self.objective)(x)))
    }

    /// Objective exactly as written.
    pub fn objective_written(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok((self.objective)(x))
    }

    pub fn constraint(&self, k: usize, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        match self.constraints.get(k) {
            Some(c) => Ok(c(x)),
            None => invalid(format!("{} has no constraint {}", self.name, k + 1)),
        }
    }

    pub fn constraints(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self.constraints.iter().map(|c| c(x)).collect())
    }

    /// Value of task `task` (0 objective, `k` constraint `k`).
    pub fn evaluate(&self, task: usize, x: &[f64]) -> Result<f64> {
        if task == 0 {
            self.objective(x)
        } else {
            self.constraint(task - 1, x)
        }
    }

    pub fn is_feasible(&self, x: &[f64]) -> Result<bool> {
        Ok(self.constraints(x)?.iter().all(|c| *c <= 0.0))
    }

    // unchecked fast paths for grid searches
    pub(crate) fn objective_raw(&self, x: &[f64]) -> f64 {
        self.sense.apply((self.objective)(x))
    }

    pub(crate) fn feasible_raw(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c(x) <= 0.0)
    }
}
