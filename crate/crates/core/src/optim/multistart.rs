use serde::{Deserialize, Serialize};

use super::{adam_projected, quasi_newton_bounded, sobol_sample, Bounds};
use crate::error::{invalid, Error, Result};

/// Local refinement strategy used after the raw-sample screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    QuasiNewtonBounded,
    AdamProjected,
}

/// Multistart settings: screen `raw_samples` quasi-random points (plus any
/// seed points), then refine the best `num_restarts` of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartConfig {
    pub num_restarts: usize,
    pub raw_samples: usize,
    pub method: SearchMethod,
    pub max_iters: usize,
    #[serde(default)]
    pub seed_points: Vec<Vec<f64>>,
}

/// Adam step as a fraction of the box width.
pub(crate) const ADAM_STEP_FRACTION: f64 = 0.05;

impl MultistartConfig {
    pub fn new(num_restarts: usize, raw_samples: usize, method: SearchMethod, max_iters: usize) -> Self {
        Self { num_restarts, raw_samples, method, max_iters, seed_points: Vec::new() }
    }

    /// Posterior-mean maximisation: 20 restarts over 2048 raw samples.
    pub fn posterior_mean_reference() -> Self {
        Self::new(20, 2048, SearchMethod::QuasiNewtonBounded, 200)
    }

    /// Outer acquisition maximisation: 15 restarts over 72 raw samples.
    pub fn acquisition_reference() -> Self {
        Self::new(15, 72, SearchMethod::QuasiNewtonBounded, 100)
    }

    /// Per-fantasy inner maximisation: Adam, 15 restarts over 100 raw samples.
    pub fn inner_reference() -> Self {
        Self::new(15, 100, SearchMethod::AdamProjected, 100)
    }

    pub fn with_seed_points(mut self, points: Vec<Vec<f64>>) -> Self {
        self.seed_points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_restarts == 0 || self.raw_samples == 0 || self.max_iters == 0 {
            return invalid("multistart restarts, raw samples and iterations must be positive");
        }
        if self.num_restarts > self.raw_samples + self.seed_points.len() {
            return invalid(format!(
                "{} restarts requested from only {} candidates",
                self.num_restarts,
                self.raw_samples + self.seed_points.len()
            ));
        }
        Ok(())
    }
}

/// Function to maximise. Closures `Fn(&[f64]) -> f64` implement it without a
/// gradient; local search then uses central finite differences.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    fn value_and_gradient(&self, _x: &[f64]) -> Option<(f64, Vec<f64>)> {
        None
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub x: Vec<f64>,
    pub value: f64,
}

fn value_and_gradient<O: Objective + ?Sized>(f: &O, x: &[f64], bounds: &Bounds) -> (f64, Vec<f64>) {
    if let Some(vg) = f.value_and_gradient(x) {
        return vg;
    }
    let fx = f.value(x);
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * bounds.width(i);
        let up = (x[i] + h).min(bounds.upper()[i]);
        let down = (x[i] - h).max(bounds.lower()[i]);
        probe[i] = up;
        let fu = if up > x[i] { f.value(&probe) } else { fx };
        probe[i] = down;
        let fd = if down < x[i] { f.value(&probe) } else { fx };
        probe[i] = x[i];
        grad[i] = (fu - fd) / (up - down);
    }
    (fx, grad)
}

/// Multistart bounded maximisation of `f`.
///
/// Raw samples come from a Sobol sequence shifted by `seed`; seed points from
/// `cfg` are screened alongside them and rank first on ties.
pub fn maximize<O: Objective + ?Sized>(f: &O, bounds: &Bounds, cfg: &MultistartConfig, seed: u64) -> Result<Maximum> {
    cfg.validate()?;
    let mut candidates = Vec::with_capacity(cfg.seed_points.len() + cfg.raw_samples);
    for p in &cfg.seed_points {
        if p.len() != bounds.dim() {
            return invalid("seed point dimension does not match the box");
        }
        let mut q = p.clone();
        bounds.project(&mut q);
        let v = f.value(&q);
        candidates.push((q, v));
    }
    for u in sobol_sample(bounds.dim(), cfg.raw_samples, seed)? {
        let p = bounds.from_unit(&u);
        let v = f.value(&p);
        candidates.push((p, v));
    }
    maximize_from_candidates(f, bounds, cfg, candidates)
}

/// Refines the best `cfg.num_restarts` of already-evaluated candidates.
pub fn maximize_from_candidates<O: Objective + ?Sized>(
    f: &O,
    bounds: &Bounds,
    cfg: &MultistartConfig,
    candidates: Vec<(Vec<f64>, f64)>,
) -> Result<Maximum> {
    let mut order: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].1.is_finite()).collect();
    if order.is_empty() {
        return Err(Error::Numerical("objective is non-finite at every candidate".into()));
    }
    // stable: equal values keep their original (seed-first) order
    order.sort_by(|&a, &b| candidates[b].1.total_cmp(&candidates[a].1));

    let screened = &candidates[order[0]];
    let mut best = Maximum { x: screened.0.clone(), value: screened.1 };
    let mut refined_any = false;
    for &idx in order.iter().take(cfg.num_restarts) {
        let start = &candidates[idx].0;
        let fg = |x: &[f64]| value_and_gradient(f, x, bounds);
        let local = match cfg.method {
            SearchMethod::QuasiNewtonBounded => quasi_newton_bounded(fg, start, bounds, cfg.max_iters),
            SearchMethod::AdamProjected => adam_projected(fg, start, bounds, cfg.max_iters, ADAM_STEP_FRACTION),
        };
        if !local.value.is_finite() {
            continue;
        }
        refined_any = true;
        if local.value > best.value {
            best = Maximum { x: local.x, value: local.value };
        }
    }
    if !refined_any {
        return Err(Error::Numerical("every local refinement produced a non-finite value".into()));
    }
    Ok(best)
}
