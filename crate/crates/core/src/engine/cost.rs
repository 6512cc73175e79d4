use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-task evaluation costs; index 0 is the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return invalid("cost vector must have at least the objective entry");
        }
        if let Some(c) = costs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return invalid(format!("task costs must be positive and finite, got {c}"));
        }
        Ok(Self(costs))
    }

    /// `num_tasks` entries all equal to one.
    pub fn unit(num_tasks: usize) -> Self {
        Self(vec![1.0; num_tasks.max(1)])
    }

    pub fn get(&self, task: usize) -> f64 {
        self.0[task]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cost of one coupled evaluation of every task.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Summed cost of a task set.
    pub fn of(&self, tasks: &[usize]) -> f64 {
        tasks.iter().map(|&t| self.0[t]).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for CostVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CostVector> for Vec<f64> {
    fn from(c: CostVector) -> Self {
        c.0
    }
}

impl FromStr for CostVector {
    type Err = Error;

    /// Parses a comma separated list such as `5,1`.
    fn from_str(s: &str) -> Result<Self> {
        let costs = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad cost '{p}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(costs)
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
