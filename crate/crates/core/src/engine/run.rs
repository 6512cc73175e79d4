use log::debug;

use super::decide::{argmax_cei, argmax_ckg, decide_at_point, decide_dckg, decide_ucbd, Decision, KgSetup};
use super::{CostVector, EngineConfig, EvaluationLedger, LedgerEntry, PenaltyPolicy, Policy};
use crate::acquisition::{prob_feasible, InnerSolver, ModelBundle, PosteriorScore, UcbdConfig};
use crate::error::{invalid, Error, Result};
use crate::gp::{fit, FitOptions, GpModel, KernelParams};
use crate::optim::{lhs_sample, maximize, sobol_unscrambled, Bounds, MultistartConfig};
use crate::problems::ProblemDefinition;
use crate::stats::mix_seed;

/// The recommended solution after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub x: Vec<f64>,
    /// `(mu_f(x) - M) * PF(x)` at `x`.
    pub score: f64,
    /// Feasibility under the true constraints, when known.
    pub feasible_truth: Option<bool>,
}

/// Summary of the state after the initial design (`step == 0`) or a step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub tasks: Vec<usize>,
    /// `None` for the initial design, which spans several locations.
    pub location: Option<Vec<f64>>,
    /// Total spend so far, initial design included.
    pub spent: f64,
    pub oc: f64,
    pub recommended: Vec<f64>,
}

/// A complete seeded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
}

impl RunRecord {
    /// Evaluations of each task over the run; the step-0 record counts
    /// `initial_design_size` times.
    pub fn task_counts(&self, num_tasks: usize, initial_design_size: usize) -> Vec<usize> {
        let mut counts = vec![0; num_tasks];
        for s in &self.steps {
            let reps = if s.step == 0 { initial_design_size } else { 1 };
            for &t in &s.tasks {
                counts[t] += reps;
            }
        }
        counts
    }
}

/// Maximiser of `(mu_f - M) * PF` over the box.
pub fn recommend(
    bundle: &ModelBundle,
    bounds: &Bounds,
    search: &MultistartConfig,
    penalty: f64,
    seed: u64,
) -> Result<Recommendation> {
    let score = PosteriorScore::new(bundle, penalty);
    let m = maximize(&score, bounds, search, seed)?;
    Ok(Recommendation { x: m.x, score: m.value, feasible_truth: None })
}

/// `f* - f(x_r)` for a truly feasible `x_r`, `f* - M` otherwise.
pub fn opportunity_cost(problem: &ProblemDefinition, x_r: &[f64], penalty: f64) -> Result<f64> {
    let opt =
        problem.optimum().ok_or_else(|| Error::InvalidArgument(format!("{} has no known optimum", problem.name())))?;
    if problem.is_feasible(x_r)? {
        Ok(opt.value - problem.objective(x_r)?)
    } else {
        Ok(opt.value - penalty)
    }
}

#[derive(Debug, Clone, Default)]
struct TaskData {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

/// Step-by-step driver of one run.
pub struct Engine<'p> {
    problem: &'p ProblemDefinition,
    policy: Policy,
    cfg: EngineConfig,
    seed: u64,
    data: Vec<TaskData>,
    ledger: EvaluationLedger,
    warm: Vec<Option<KernelParams>>,
    bundle: Option<ModelBundle>,
    recommendation: Option<Recommendation>,
    penalty: f64,
    step: usize,
    finished: bool,
}

impl<'p> Engine<'p> {
    /// `budget` is in cost units of `problem.costs()`.
    pub fn new(
        problem: &'p ProblemDefinition,
        policy: Policy,
        budget: f64,
        seed: u64,
        cfg: EngineConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let costs = problem.costs().clone();
        let initial_cost = cfg.initial_design_size as f64 * costs.total();
        let total = if cfg.budget_includes_initial {
            if budget < initial_cost {
                return invalid(format!("budget {budget} does not cover the initial design cost {initial_cost}"));
            }
            budget
        } else {
            budget + initial_cost
        };
        let ledger = EvaluationLedger::new(costs, total)?;
        let n = problem.num_tasks();
        Ok(Self {
            problem,
            policy,
            cfg,
            seed,
            data: vec![TaskData::default(); n],
            ledger,
            warm: vec![None; n],
            bundle: None,
            recommendation: None,
            penalty: 0.0,
            step: 0,
            finished: false,
        })
    }

    pub fn ledger(&self) -> &EvaluationLedger {
        &self.ledger
    }

    pub fn bundle(&self) -> Option<&ModelBundle> {
        self.bundle.as_ref()
    }

    pub fn recommendation(&self) -> Option<&Recommendation> {
        self.recommendation.as_ref()
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    fn costs(&self) -> &CostVector {
        self.ledger.costs()
    }

    fn evaluate(&mut self, tasks: &[usize], x: &[f64]) -> Result<()> {
        let values = tasks.iter().map(|&t| self.problem.evaluate(t, x)).collect::<Result<Vec<_>>>()?;
        self.ledger.record(LedgerEntry {
            iteration: self.step,
            tasks: tasks.to_vec(),
            location: x.to_vec(),
            values: values.clone(),
        })?;
        for (&t, v) in tasks.iter().zip(values) {
            self.data[t].x.push(x.to_vec());
            self.data[t].y.push(v);
        }
        Ok(())
    }

    fn refit(&mut self) -> Result<()> {
        let bounds = self.problem.bounds();
        let mut models: Vec<GpModel> = Vec::with_capacity(self.data.len());
        for (t, d) in self.data.iter().enumerate() {
            let opts = FitOptions {
                seed: mix_seed(self.seed, (self.step as u64) << 8 | t as u64),
                warm_start: self.warm[t].clone(),
                ..self.cfg.fit.clone()
            };
            let m = fit(&d.x, &d.y, bounds, &opts)?;
            self.warm[t] = Some(m.params().clone());
            models.push(m);
        }
        let objective = models.remove(0);
        self.bundle = Some(ModelBundle::new(objective, models)?);
        Ok(())
    }

    fn update_recommendation(&mut self) -> Result<()> {
        let bundle = self.bundle.as_ref().expect("fitted");
        let bounds = self.problem.bounds();
        self.penalty = match self.cfg.penalty {
            PenaltyPolicy::Zero => self.problem.penalty_m(),
            PenaltyPolicy::MinPosterior => {
                let mut lo = f64::INFINITY;
                for u in sobol_unscrambled(bounds.dim(), 1024)? {
                    lo = lo.min(bundle.objective.posterior(&bounds.from_unit(&u))?.mean);
                }
                lo
            }
        };
        let mut seeds: Vec<Vec<f64>> = self.recommendation.iter().map(|r| r.x.clone()).collect();
        seeds.extend(self.data[0].x.iter().cloned());
        let search = self.cfg.posterior_mean_cfg.clone().with_seed_points(seeds);
        let mut rec = recommend(bundle, bounds, &search, self.penalty, mix_seed(self.seed, 0x5ec0 + self.step as u64))?;
        rec.feasible_truth = Some(self.problem.is_feasible(&rec.x)?);
        self.recommendation = Some(rec);
        Ok(())
    }

    fn record(&self, tasks: Vec<usize>, location: Option<Vec<f64>>) -> Result<StepRecord> {
        let rec = self.recommendation.as_ref().expect("recommendation");
        Ok(StepRecord {
            step: self.step,
            tasks,
            location,
            spent: self.ledger.spent(),
            // reported OC always charges the problem's fixed M so curves stay comparable
            oc: opportunity_cost(self.problem, &rec.x, self.problem.penalty_m())?,
            recommended: rec.x.clone(),
        })
    }

    /// Evaluates the coupled Latin hypercube design and fits the first models.
    pub fn initialize(&mut self) -> Result<StepRecord> {
        if self.bundle.is_some() {
            return invalid("engine already initialised");
        }
        let design = lhs_sample(self.problem.bounds(), self.cfg.initial_design_size, mix_seed(self.seed, 1))?;
        let all: Vec<usize> = (0..self.problem.num_tasks()).collect();
        for x in &design {
            self.evaluate(&all, x)?;
        }
        self.refit()?;
        self.update_recommendation()?;
        self.record(all, None)
    }

    /// Best observed objective among locations where every constraint was
    /// also observed and satisfied.
    fn best_feasible_observation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (x, y) in self.data[0].x.iter().zip(&self.data[0].y) {
            let feasible = self.data[1..].iter().all(|d| d.x.iter().zip(&d.y).any(|(xc, c)| xc == x && *c <= 0.0));
            if feasible && best.is_none_or(|b| *y > b) {
                best = Some(*y);
            }
        }
        best
    }

    /// Incumbent for constrained EI, falling back to the posterior mean at the
    /// observed objective location with the largest recommendation score.
    fn cei_incumbent(&self) -> Result<f64> {
        if let Some(b) = self.best_feasible_observation() {
            return Ok(b);
        }
        let bundle = self.bundle.as_ref().expect("fitted");
        let mut best: Option<(f64, f64)> = None;
        for x in &self.data[0].x {
            let mu = bundle.objective.posterior(x)?.mean;
            let s = (mu - self.penalty) * prob_feasible(bundle, x)?;
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, mu));
            }
        }
        Ok(best.expect("objective observed").1)
    }

    fn decide(&self) -> Result<Option<Decision>> {
        let bundle = self.bundle.as_ref().expect("fitted");
        let bounds = self.problem.bounds();
        let costs = self.costs();
        let remaining = self.ledger.remaining() + 1e-12 * self.ledger.budget();
        let coupled_fits = costs.total() <= remaining;
        let affordable: Vec<bool> = (0..costs.len()).map(|k| costs.get(k) <= remaining).collect();
        let x_r = self.recommendation.as_ref().expect("recommendation").x.clone();
        let inner: InnerSolver = self.cfg.inner.solver();
        let step_seed = mix_seed(self.seed, 0xac00 + self.step as u64);
        let setup = KgSetup {
            bundle,
            bounds,
            costs,
            x_r: &x_r,
            penalty: self.penalty,
            inner: &inner,
            search: &self.cfg.acquisition_cfg,
            delta: self.cfg.delta_threshold,
            seed: step_seed,
        };
        let all: Vec<usize> = (0..costs.len()).collect();
        let decision = match self.policy {
            Policy::Dckg | Policy::DckgNoCoupled => {
                if !affordable.iter().any(|a| *a) {
                    return Ok(None);
                }
                let with_coupled = self.policy == Policy::Dckg && self.cfg.include_coupled_ckg && coupled_fits;
                decide_dckg(&setup, &affordable, with_coupled)?
            }
            Policy::CeiPlus => {
                if !affordable.iter().any(|a| *a) {
                    return Ok(None);
                }
                let f_best = self.cei_incumbent()?;
                let search = self.cfg.acquisition_cfg.clone().with_seed_points(vec![x_r.clone()]);
                let m = argmax_cei(bundle, bounds, f_best, &search, step_seed)?;
                let with_coupled = self.cfg.include_coupled_ckg && coupled_fits;
                decide_at_point(&setup, &m.x, &affordable, with_coupled)?
            }
            Policy::Cei => {
                if !coupled_fits {
                    return Ok(None);
                }
                let f_best = self.cei_incumbent()?;
                let search = self.cfg.acquisition_cfg.clone().with_seed_points(vec![x_r.clone()]);
                let m = argmax_cei(bundle, bounds, f_best, &search, step_seed)?;
                Decision { x: m.x, tasks: all, source_values: Vec::new(), coupled_value: Some(m.value) }
            }
            Policy::Ckg => {
                if !coupled_fits {
                    return Ok(None);
                }
                let m = argmax_ckg(&setup)?;
                Decision { x: m.x, tasks: all, source_values: Vec::new(), coupled_value: Some(m.value) }
            }
            Policy::Ucbd => {
                let max_abs = self.data[0].y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let mut ucfg = UcbdConfig::new(costs.clone(), -1e6 * (1.0 + max_abs));
                ucfg.domain_size = self.cfg.ucbd_domain_size;
                ucfg.delta_conf = self.cfg.ucbd_delta;
                let d = decide_ucbd(bundle, bounds, self.step + 1, &ucfg)?;
                if !affordable[d.tasks[0]] {
                    return Ok(None);
                }
                d
            }
        };
        Ok(Some(decision))
    }

    /// Takes one optimisation step; `None` once the budget cannot pay for one.
    pub fn step(&mut self) -> Result<Option<StepRecord>> {
        if self.bundle.is_none() {
            return invalid("initialise the engine before stepping");
        }
        if self.finished {
            return Ok(None);
        }
        let Some(decision) = self.decide()? else {
            self.finished = true;
            return Ok(None);
        };
        self.step += 1;
        debug!(
            "step {} tasks {:?} at {:?} (sources {:?}, coupled {:?})",
            self.step, decision.tasks, decision.x, decision.source_values, decision.coupled_value
        );
        self.evaluate(&decision.tasks, &decision.x)?;
        self.refit()?;
        self.update_recommendation()?;
        self.record(decision.tasks, Some(decision.x)).map(Some)
    }
}

/// Runs `policy` on `problem` until the budget is spent.
pub fn run(
    problem: &ProblemDefinition,
    policy: Policy,
    budget: f64,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<RunRecord> {
    let mut engine = Engine::new(problem, policy, budget, seed, cfg.clone())?;
    let mut steps = vec![engine.initialize()?];
    while let Some(s) = engine.step()? {
        steps.push(s);
    }
    Ok(RunRecord { seed, steps })
}
