use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::acquisition::InnerSolver;
use crate::error::{invalid, Error, Result};
use crate::gp::FitOptions;
use crate::optim::{MultistartConfig, SearchMethod};

/// Which loop drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Decoupled constrained KG with the coupled cKG comparison.
    Dckg,
    /// Decoupled constrained KG over single sources only.
    DckgNoCoupled,
    /// Location from constrained EI, task from the KG-type values there.
    CeiPlus,
    Cei,
    Ckg,
    Ucbd,
}

impl Policy {
    pub const ALL: [Policy; 6] =
        [Policy::Dckg, Policy::DckgNoCoupled, Policy::CeiPlus, Policy::Cei, Policy::Ckg, Policy::Ucbd];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Dckg => "dckg",
            Policy::DckgNoCoupled => "dckg-no-coupled",
            Policy::CeiPlus => "cei-plus",
            Policy::Cei => "cei",
            Policy::Ckg => "ckg",
            Policy::Ucbd => "ucbd",
        }
    }

    /// Whether every step evaluates all tasks together.
    pub fn is_coupled(self) -> bool {
        matches!(self, Policy::Cei | Policy::Ckg)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let key = match key.as_str() {
            "ceiplus" | "cei+" => "cei-plus",
            "dckg-nocoupled" => "dckg-no-coupled",
            k => k,
        }
        .to_string();
        Policy::ALL.into_iter().find(|p| p.name() == key).ok_or(Error::Unknown { kind: "policy", name: s.to_string() })
    }
}

/// The infeasibility value `M` inside the acquisition and recommendation
/// scores. Reported opportunity cost always uses the problem's own `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyPolicy {
    /// The problem's fixed `M` (zero for the built-in benchmarks).
    Zero,
    /// Minimum of the objective posterior mean over a Sobol grid, refreshed
    /// at every recommendation.
    MinPosterior,
}

impl FromStr for PenaltyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(PenaltyPolicy::Zero),
            "min-posterior" | "min_posterior" => Ok(PenaltyPolicy::MinPosterior),
            _ => Err(Error::Unknown { kind: "penalty policy", name: s.to_string() }),
        }
    }
}

/// Serializable choice of inner solver for KG-type acquisitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InnerSearch {
    Screened { raw_samples: usize },
    Multistart(MultistartConfig),
}

impl InnerSearch {
    pub fn solver(&self) -> InnerSolver {
        match self {
            InnerSearch::Screened { raw_samples } => InnerSolver::Screened(*raw_samples),
            InnerSearch::Multistart(cfg) => InnerSolver::Multistart(cfg.clone()),
        }
    }
}

/// Knobs of the optimisation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Coupled steps skip constraints with `PF_k(x) >= 1 - delta_threshold`.
    pub delta_threshold: f64,
    pub include_coupled_ckg: bool,
    pub initial_design_size: usize,
    /// When false the budget counts only spend after the initial design.
    pub budget_includes_initial: bool,
    pub penalty: PenaltyPolicy,
    pub fit: FitOptions,
    pub acquisition_cfg: MultistartConfig,
    pub posterior_mean_cfg: MultistartConfig,
    pub inner: InnerSearch,
    pub ucbd_domain_size: usize,
    pub ucbd_delta: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl EngineConfig {
    /// Reduced search effort suitable for many replications on one core.
    pub fn desk() -> Self {
        Self {
            delta_threshold: 1e-7,
            include_coupled_ckg: true,
            initial_design_size: 6,
            budget_includes_initial: false,
            penalty: PenaltyPolicy::MinPosterior,
            fit: FitOptions { restarts: 3, max_iters: 60, ..FitOptions::default() },
            acquisition_cfg: MultistartConfig::new(2, 32, SearchMethod::QuasiNewtonBounded, 15),
            posterior_mean_cfg: MultistartConfig::new(3, 256, SearchMethod::QuasiNewtonBounded, 50),
            inner: InnerSearch::Screened { raw_samples: 64 },
            ucbd_domain_size: 4096,
            ucbd_delta: 0.1,
        }
    }

    /// Restart and raw-sample counts of the published experiments.
    pub fn reference() -> Self {
        Self {
            fit: FitOptions::default(),
            acquisition_cfg: MultistartConfig::acquisition_reference(),
            posterior_mean_cfg: MultistartConfig::posterior_mean_reference(),
            inner: InnerSearch::Multistart(MultistartConfig::inner_reference()),
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "reference" => Ok(Self::reference()),
            _ => Err(Error::Unknown { kind: "preset", name: name.to_string() }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_threshold > 0.0 && self.delta_threshold < 1.0) {
            return invalid(format!("delta_threshold must lie in (0, 1), got {}", self.delta_threshold));
        }
        if self.initial_design_size < 2 {
            return invalid("the initial design needs at least two points");
        }
        if self.fit.restarts == 0 {
            return invalid("GP fitting needs at least one restart");
        }
        self.acquisition_cfg.validate()?;
        self.posterior_mean_cfg.validate()?;
        match &self.inner {
            InnerSearch::Screened { raw_samples: 0 } => return invalid("inner search needs raw samples"),
            InnerSearch::Multistart(c) => c.validate()?,
            _ => {}
        }
        if self.ucbd_domain_size == 0 || !(self.ucbd_delta > 0.0 && self.ucbd_delta < 1.0) {
            return invalid("UCB-D needs a positive domain size and delta in (0, 1)");
        }
        Ok(())
    }
}
