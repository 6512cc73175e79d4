//! Per-step choices of location and task set.

use super::CostVector;
use crate::acquisition::{constrained_ei, prob_feasible_k, ucbd_step, InnerSolver, KgContext, ModelBundle, UcbdConfig};
use crate::error::{Error, Result};
use crate::optim::{maximize, Bounds, Maximum, MultistartConfig};

/// The evaluation chosen for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub x: Vec<f64>,
    /// Sorted task indices to evaluate at `x`.
    pub tasks: Vec<usize>,
    /// Best cost-scaled single-source values, `None` where not considered.
    pub source_values: Vec<Option<f64>>,
    pub coupled_value: Option<f64>,
}

/// Shared inputs of the KG-type decisions.
pub struct KgSetup<'a> {
    pub bundle: &'a ModelBundle,
    pub bounds: &'a Bounds,
    pub costs: &'a CostVector,
    pub x_r: &'a [f64],
    pub penalty: f64,
    pub inner: &'a InnerSolver,
    pub search: &'a MultistartConfig,
    pub delta: f64,
    pub seed: u64,
}

fn best_of<F: Fn(&[f64]) -> Result<f64>>(
    f: F,
    bounds: &Bounds,
    search: &MultistartConfig,
    seed: u64,
) -> Result<Maximum> {
    let objective = |x: &[f64]| f(x).unwrap_or(f64::NAN);
    maximize(&objective, bounds, search, seed)
}

/// Objective plus every constraint that is not already near-certainly feasible at `x`.
pub fn coupled_tasks(bundle: &ModelBundle, x: &[f64], delta: f64) -> Result<Vec<usize>> {
    let mut tasks = vec![0];
    for (i, c) in bundle.constraints.iter().enumerate() {
        if prob_feasible_k(c, x)? < 1.0 - delta {
            tasks.push(i + 1);
        }
    }
    Ok(tasks)
}

/// Resolves source values against the coupled value: the coupled branch needs
/// a strictly larger value, ties between sources go to the lowest index.
fn resolve(
    setup: &KgSetup<'_>,
    sources: Vec<Option<(Vec<f64>, f64)>>,
    coupled: Option<(Vec<f64>, f64)>,
) -> Result<Decision> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in sources.iter().enumerate() {
        if let Some((_, v)) = s {
            if v.is_finite() && best.is_none_or(|(_, b)| *v > b) {
                best = Some((k, *v));
            }
        }
    }
    let source_values = sources.iter().map(|s| s.as_ref().map(|(_, v)| *v)).collect();
    let coupled_value = coupled.as_ref().map(|(_, v)| *v);
    if let Some((xc, vc)) = coupled {
        if vc.is_finite() && best.is_none_or(|(_, b)| vc > b) {
            let tasks = coupled_tasks(setup.bundle, &xc, setup.delta)?;
            return Ok(Decision { x: xc, tasks, source_values, coupled_value });
        }
    }
    let (k, _) = best.ok_or_else(|| Error::Numerical("no acquisition produced a finite value".into()))?;
    let x = sources[k].as_ref().expect("winning source").0.clone();
    Ok(Decision { x, tasks: vec![k], source_values, coupled_value })
}

/// Maximises every affordable single-source value and, if requested, the
/// cost-scaled coupled value, then applies the branching rule.
pub fn decide_dckg(setup: &KgSetup<'_>, affordable: &[bool], with_coupled: bool) -> Result<Decision> {
    let ctx =
        KgContext::new(setup.bundle, setup.bounds, setup.inner.clone(), setup.penalty, Some(setup.x_r), setup.seed)?;
    // every maximiser seen so far seeds the later searches
    let mut seeds = vec![setup.x_r.to_vec()];
    let coupled = if with_coupled {
        let total = setup.costs.total();
        let search = setup.search.clone().with_seed_points(seeds.clone());
        let m = best_of(|x| Ok(ctx.ckg(x)? / total), setup.bounds, &search, setup.seed ^ 0xc0)?;
        seeds.push(m.x.clone());
        Some((m.x, m.value))
    } else {
        None
    };
    let mut sources = Vec::with_capacity(affordable.len());
    for (k, ok) in affordable.iter().enumerate() {
        if !ok {
            sources.push(None);
            continue;
        }
        let cost = setup.costs.get(k);
        let search = setup.search.clone().with_seed_points(seeds.clone());
        let m = best_of(|x| ctx.dckg_source(x, k, cost), setup.bounds, &search, setup.seed ^ (k as u64 + 1))?;
        seeds.push(m.x.clone());
        sources.push(Some((m.x, m.value)));
    }
    resolve(setup, sources, coupled)
}

/// Applies the same branching rule with every value taken at the fixed point `x`.
pub fn decide_at_point(setup: &KgSetup<'_>, x: &[f64], affordable: &[bool], with_coupled: bool) -> Result<Decision> {
    let ctx =
        KgContext::new(setup.bundle, setup.bounds, setup.inner.clone(), setup.penalty, Some(setup.x_r), setup.seed)?;
    let mut sources = Vec::with_capacity(affordable.len());
    for (k, ok) in affordable.iter().enumerate() {
        sources.push(if *ok { Some((x.to_vec(), ctx.dckg_source(x, k, setup.costs.get(k))?)) } else { None });
    }
    let coupled = if with_coupled { Some((x.to_vec(), ctx.ckg(x)? / setup.costs.total())) } else { None };
    resolve(setup, sources, coupled)
}

/// Maximiser of constrained EI against `f_best`.
pub fn argmax_cei(
    bundle: &ModelBundle,
    bounds: &Bounds,
    f_best: f64,
    search: &MultistartConfig,
    seed: u64,
) -> Result<Maximum> {
    best_of(|x| constrained_ei(bundle, f_best, x), bounds, search, seed)
}

/// Maximiser of coupled cKG.
pub fn argmax_ckg(setup: &KgSetup<'_>) -> Result<Maximum> {
    let ctx =
        KgContext::new(setup.bundle, setup.bounds, setup.inner.clone(), setup.penalty, Some(setup.x_r), setup.seed)?;
    let search = setup.search.clone().with_seed_points(vec![setup.x_r.to_vec()]);
    best_of(|x| ctx.ckg(x), setup.bounds, &search, setup.seed)
}

/// UCB-D decision for iteration `t`.
pub fn decide_ucbd(bundle: &ModelBundle, bounds: &Bounds, t: usize, cfg: &UcbdConfig) -> Result<Decision> {
    let c = ucbd_step(bundle, t, cfg, bounds)?;
    Ok(Decision { x: c.x, tasks: vec![c.task], source_values: Vec::new(), coupled_value: None })
}
