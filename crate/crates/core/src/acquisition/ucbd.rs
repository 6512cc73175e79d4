use std::f64::consts::PI;

use super::ModelBundle;
use crate::engine::CostVector;
use crate::error::{invalid, Result};
use crate::optim::{sobol_unscrambled, Bounds};

/// Settings for the UCB-D baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbdConfig {
    pub delta_conf: f64,
    /// Size of the search discretization, also used as `|X|` in beta.
    pub domain_size: usize,
    pub penalty_rho: f64,
    pub costs: CostVector,
}

impl UcbdConfig {
    pub fn new(costs: CostVector, penalty_rho: f64) -> Self {
        Self { delta_conf: 0.1, domain_size: 4096, penalty_rho, costs }
    }

    pub fn validate(&self, num_tasks: usize) -> Result<()> {
        if !(self.delta_conf > 0.0 && self.delta_conf < 1.0) {
            return invalid(format!("delta_conf must lie in (0, 1), got {}", self.delta_conf));
        }
        if self.domain_size == 0 {
            return invalid("domain_size must be positive");
        }
        if !(self.penalty_rho.is_finite() && self.penalty_rho < 0.0) {
            return invalid("penalty_rho must be a finite negative number");
        }
        if self.costs.len() != num_tasks {
            return invalid(format!("expected {num_tasks} task costs, got {}", self.costs.len()));
        }
        Ok(())
    }
}

/// What one UCB-D iteration decided to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbdChoice {
    pub x: Vec<f64>,
    /// 0 is the objective, `k >= 1` constraint `k`.
    pub task: usize,
    pub beta: f64,
    /// Whether the chosen point was optimistically feasible.
    pub optimistic: bool,
}

/// Confidence multiplier `2 ln((K+1)|X| t^2 pi^2 / (6 delta))`.
pub fn ucbd_beta(num_constraints: usize, domain_size: usize, t: usize, delta: f64) -> f64 {
    let t = t as f64;
    2.0 * ((num_constraints as f64 + 1.0) * domain_size as f64 * t * t * PI * PI / (6.0 * delta)).ln()
}

struct Bounds1 {
    mean: f64,
    half: f64,
}

fn conf(bundle: &ModelBundle, task: usize, x: &[f64], beta: f64) -> Result<Bounds1> {
    let p = bundle.task(task).posterior(x)?;
    Ok(Bounds1 { mean: p.mean, half: (beta * p.variance).sqrt() })
}

/// One UCB-D decision over a `domain_size`-point Sobol discretization of `bounds`.
///
/// The point maximises the objective upper bound over the optimistic feasible
/// set (every constraint lower bound `<= 0`), with `penalty_rho` elsewhere.
/// The objective is queried unless some constraint upper bound exceeds
/// `v_t / c_f`, in which case the constraint with the largest `u_g / c_g` is.
/// If no grid point is optimistically feasible the point with the smallest
/// worst lower bound is taken and its least violated constraint is queried.
pub fn ucbd_step(bundle: &ModelBundle, t: usize, cfg: &UcbdConfig, bounds: &Bounds) -> Result<UcbdChoice> {
    if t == 0 {
        return invalid("UCB-D iteration counter starts at 1");
    }
    cfg.validate(bundle.num_tasks())?;
    if bounds.dim() != bundle.dim() {
        return invalid("box and models disagree on dimension");
    }
    let k = bundle.num_constraints();
    let beta = ucbd_beta(k, cfg.domain_size, t, cfg.delta_conf);
    let grid = sobol_unscrambled(bounds.dim(), cfg.domain_size)?;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut least_violated: Option<(f64, Vec<f64>)> = None;
    for u in &grid {
        let x = bounds.from_unit(u);
        let mut worst_lower = f64::NEG_INFINITY;
        for g in 1..=k {
            let c = conf(bundle, g, &x, beta)?;
            worst_lower = worst_lower.max(c.mean - c.half);
        }
        if worst_lower <= 0.0 {
            let f = conf(bundle, 0, &x, beta)?;
            let alpha = f.mean + f.half;
            if best.as_ref().is_none_or(|(a, _)| alpha > *a) {
                best = Some((alpha, x));
            }
        } else if least_violated.as_ref().is_none_or(|(v, _)| worst_lower < *v) {
            least_violated = Some((worst_lower, x));
        }
    }

    if let Some((_, x)) = best {
        let f = conf(bundle, 0, &x, beta)?;
        let v_t = 2.0 * f.half;
        let threshold = v_t / cfg.costs.get(0);
        let mut task = 0;
        let mut top = f64::NEG_INFINITY;
        let mut uncharted = false;
        for g in 1..=k {
            let c = conf(bundle, g, &x, beta)?;
            let upper = c.mean + c.half;
            uncharted |= upper > threshold;
            let scaled = upper / cfg.costs.get(g);
            if scaled > top {
                top = scaled;
                task = g;
            }
        }
        let task = if uncharted { task } else { 0 };
        return Ok(UcbdChoice { x, task, beta, optimistic: true });
    }

    let (_, x) = least_violated.expect("grid is non-empty");
    let mut task = 1;
    let mut smallest = f64::INFINITY;
    for g in 1..=k {
        let c = conf(bundle, g, &x, beta)?;
        let lower = c.mean - c.half;
        if lower > 0.0 && lower < smallest {
            smallest = lower;
            task = g;
        }
    }
    Ok(UcbdChoice { x, task, beta, optimistic: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_formula() {
        let b = ucbd_beta(2, 4096, 3, 0.1);
        let want = 2.0 * (3.0 * 4096.0 * 9.0 * PI * PI / 0.6_f64).ln();
        assert!((b - want).abs() < 1e-12);
        assert!(ucbd_beta(2, 4096, 4, 0.1) > b);
    }
}
