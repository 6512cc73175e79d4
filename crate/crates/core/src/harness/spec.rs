use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{CostVector, EngineConfig, PenaltyPolicy, Policy};
use crate::error::{invalid, Error, Result};
use crate::problems::{problem, ProblemDefinition, Sense};

/// One experiment: every listed policy replicated on one problem and cost scenario.
///
/// Stored as TOML, for example
///
/// ```toml
/// problem = "mystery"
/// policies = ["dckg", "cei"]
/// costs = [1.0, 1.0]
/// budget = 60.0
/// replications = 10
/// output = "results/mystery"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: String,
    pub policies: Vec<Policy>,
    /// Per-task costs; unit costs when absent.
    #[serde(default)]
    pub costs: Option<CostVector>,
    /// Budget in cost units.
    pub budget: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_initial")]
    pub initial_design_size: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyPolicy,
    pub output: PathBuf,
    #[serde(default = "default_true")]
    pub include_coupled_ckg: bool,
    #[serde(default)]
    pub budget_includes_initial: bool,
    /// Overrides the problem's default objective sense.
    #[serde(default)]
    pub sense: Option<Sense>,
    /// `desk` or `reference`; ignored when `engine` is given.
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub engine: Option<EngineConfig>,
}

fn default_replications() -> usize {
    1
}

fn default_initial() -> usize {
    6
}

fn default_penalty() -> PenaltyPolicy {
    PenaltyPolicy::MinPosterior
}

fn default_true() -> bool {
    true
}

fn default_preset() -> String {
    "desk".to_string()
}

pub(crate) const SPEC_FILE: &str = "experiment.toml";

impl ExperimentSpec {
    /// A spec with defaults for everything but the essentials.
    pub fn new(problem: &str, policies: Vec<Policy>, budget: f64, output: impl Into<PathBuf>) -> Self {
        Self {
            problem: problem.to_string(),
            policies,
            costs: None,
            budget,
            replications: 1,
            initial_design_size: 6,
            base_seed: 0,
            penalty: PenaltyPolicy::MinPosterior,
            output: output.into(),
            include_coupled_ckg: true,
            budget_includes_initial: false,
            sense: None,
            preset: default_preset(),
            engine: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return invalid("replications must be at least 1");
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return invalid(format!("budget must be positive, got {}", self.budget));
        }
        if self.policies.is_empty() {
            return invalid("at least one policy is required");
        }
        self.engine_config()?.validate()?;
        self.problem_definition().map(|_| ())
    }

    /// Problem with the experiment's costs and sense applied.
    pub fn problem_definition(&self) -> Result<ProblemDefinition> {
        let mut p = problem(&self.problem)?;
        if let Some(s) = self.sense {
            if s != p.sense() {
                p = crate::problems::certified(p.with_sense(s))?;
            }
        }
        match &self.costs {
            Some(c) => p.with_costs(c.clone()),
            None => Ok(p),
        }
    }

    pub fn engine_config(&self) -> Result<EngineConfig> {
        let mut cfg = match &self.engine {
            Some(e) => e.clone(),
            None => EngineConfig::preset(&self.preset)?,
        };
        cfg.initial_design_size = self.initial_design_size;
        cfg.penalty = self.penalty;
        cfg.include_coupled_ckg = self.include_coupled_ckg;
        cfg.budget_includes_initial = self.budget_includes_initial;
        Ok(cfg)
    }
}
