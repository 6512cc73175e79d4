use serde::{Deserialize, Serialize};

use super::{log_marginal_likelihood, GpModel, KernelFamily, KernelParams, JITTER_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::optim::{lhs_sample, quasi_newton_bounded, Bounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Noise fixed at the jitter floor.
    JitterOnly,
    /// Noise variance is a fitted hyperparameter in `[JITTER_FLOOR, 1]`.
    Learned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub family: KernelFamily,
    pub noise_mode: NoiseMode,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Extra starting point, typically the previous fit of the same task.
    #[serde(skip)]
    pub warm_start: Option<KernelParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            family: KernelFamily::Matern52,
            noise_mode: NoiseMode::JitterOnly,
            restarts: 10,
            max_iters: 100,
            seed: 0,
            warm_start: None,
        }
    }
}

const SIGNAL_BOUNDS: (f64, f64) = (1e-3, 1e3);
const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-2, 10.0);
const NOISE_CEILING: f64 = 1.0;

struct LogSpace {
    bounds: Bounds,
    dim: usize,
    learned_noise: bool,
    family: KernelFamily,
}

impl LogSpace {
    fn new(domain: &Bounds, opts: &FitOptions) -> Result<Self> {
        let dim = domain.dim();
        let mut lo = vec![SIGNAL_BOUNDS.0.ln()];
        let mut hi = vec![SIGNAL_BOUNDS.1.ln()];
        for w in domain.widths() {
            lo.push((LENGTHSCALE_BOUNDS.0 * w).ln());
            hi.push((LENGTHSCALE_BOUNDS.1 * w).ln());
        }
        let learned_noise = opts.noise_mode == NoiseMode::Learned;
        if learned_noise {
            lo.push(JITTER_FLOOR.ln());
            hi.push(NOISE_CEILING.ln());
        }
        Ok(Self { bounds: Bounds::new(lo, hi)?, dim, learned_noise, family: opts.family })
    }

    fn params(&self, theta: &[f64]) -> KernelParams {
        KernelParams {
            family: self.family,
            signal_variance: theta[0].exp(),
            lengthscales: theta[1..=self.dim].iter().map(|t| t.exp()).collect(),
            noise_variance: if self.learned_noise { theta[self.dim + 1].exp() } else { JITTER_FLOOR },
        }
    }

    fn theta(&self, p: &KernelParams) -> Vec<f64> {
        let mut t = vec![p.signal_variance.ln()];
        t.extend(p.lengthscales.iter().map(|l| l.ln()));
        if self.learned_noise {
            t.push(p.noise_variance.max(JITTER_FLOOR).ln());
        }
        self.bounds.project(&mut t);
        t
    }
}

/// Fits a GP by maximising the log marginal likelihood from several starts.
///
/// Targets are centred on their mean and divided by their standard deviation
/// (a constant target vector keeps unit scale). Lengthscale bounds are
/// relative to the widths of `domain`.
pub fn fit(x: &[Vec<f64>], y: &[f64], domain: &Bounds, opts: &FitOptions) -> Result<GpModel> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return invalid(format!("fit needs at least two matching observations, got {} and {}", n, y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return invalid("fit targets must be finite");
    }
    for xi in x {
        if !domain.contains(xi) {
            return invalid(format!("training input {xi:?} lies outside the domain"));
        }
    }
    if opts.restarts == 0 {
        return invalid("fit needs at least one restart");
    }
    let offset = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - offset).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    let scale = if sd > 1e-8 * offset.abs().max(1.0) { sd } else { 1.0 };
    let ys: Vec<f64> = y.iter().map(|v| (v - offset) / scale).collect();

    let space = LogSpace::new(domain, opts)?;
    let mut starts = lhs_sample(&space.bounds, opts.restarts, opts.seed)?;
    if let Some(w) = &opts.warm_start {
        if w.dim() == space.dim {
            starts.insert(0, space.theta(w));
        }
    }

    let objective = |theta: &[f64]| -> (f64, Vec<f64>) {
        let p = space.params(theta);
        match log_marginal_likelihood(&p, x, &ys) {
            Ok(ll) => {
                let mut g = ll.gradient;
                if !space.learned_noise {
                    g.pop();
                }
                (ll.value, g)
            }
            Err(_) => (f64::NAN, vec![f64::NAN; theta.len()]),
        }
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in &starts {
        let r = quasi_newton_bounded(objective, start, &space.bounds, opts.max_iters);
        if r.value.is_finite() && best.as_ref().is_none_or(|(v, _)| r.value > *v) {
            best = Some((r.value, r.x));
        }
    }
    let (_, theta) = best.ok_or_else(|| Error::Numerical("likelihood could not be evaluated from any start".into()))?;
    GpModel::standardized(space.params(&theta), x.to_vec(), y.to_vec(), offset, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_targets_predict_constant() {
        let domain = Bounds::unit(2);
        let x = lhs_sample(&domain, 6, 1).unwrap();
        let y = vec![3.25; 6];
        let m = fit(&x, &y, &domain, &FitOptions::default()).unwrap();
        for q in [[0.1, 0.9], [0.5, 0.5], [0.99, 0.01]] {
            assert!((m.posterior(&q).unwrap().mean - 3.25).abs() < 1e-3);
        }
    }

    #[test]
    fn duplicate_inputs_do_not_crash() {
        let domain = Bounds::unit(1);
        let r = fit(&[vec![0.5], vec![0.5]], &[0.0, 1.0], &domain, &FitOptions::default());
        match r {
            Ok(m) => assert!(m.effective_noise() >= JITTER_FLOOR),
            Err(e) => assert!(matches!(e, Error::Numerical(_))),
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let domain = Bounds::unit(1);
        let o = FitOptions::default();
        assert!(fit(&[vec![0.5]], &[1.0], &domain, &o).is_err());
        assert!(fit(&[vec![0.5], vec![0.1]], &[1.0, f64::INFINITY], &domain, &o).is_err());
        assert!(fit(&[vec![0.5], vec![1.5]], &[1.0, 2.0], &domain, &o).is_err());
    }

    #[test]
    fn learned_noise_stays_in_bounds() {
        let domain = Bounds::unit(1);
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0]).collect();
        let y: Vec<f64> =
            x.iter().enumerate().map(|(i, p)| (6.0 * p[0]).sin() + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let opts = FitOptions { noise_mode: NoiseMode::Learned, ..FitOptions::default() };
        let m = fit(&x, &y, &domain, &opts).unwrap();
        let nv = m.params().noise_variance;
        assert!((JITTER_FLOOR..=NOISE_CEILING).contains(&nv));
        assert!(nv > 1e-3, "noisy data should pick up noise, got {nv}");
    }
}
