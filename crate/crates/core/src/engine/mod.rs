//! Optimisation loops, budget accounting and recommendation.
//!
//! A run evaluates a coupled Latin hypercube design, then repeats
//! decide / evaluate / refit / recommend until the budget cannot pay for
//! another step. Every task model is refitted after each step.

mod config;
mod cost;
mod decide;
mod ledger;
mod run;

pub use config::{EngineConfig, InnerSearch, PenaltyPolicy, Policy};
pub use cost::CostVector;
pub use decide::{argmax_cei, argmax_ckg, coupled_tasks, decide_at_point, decide_dckg, decide_ucbd, Decision, KgSetup};
pub use ledger::{EvaluationLedger, LedgerEntry};
pub use run::{opportunity_cost, recommend, run, Engine, Recommendation, RunRecord, StepRecord};
