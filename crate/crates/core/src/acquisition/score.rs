use nalgebra::DVector;

use super::ModelBundle;
use crate::error::Result;
use crate::gp::GpModel;
use crate::optim::Objective;
use crate::stats::{norm_cdf, norm_pdf};

/// Rank-one conditioning data for observing one task at `x`.
#[derive(Debug, Clone)]
pub(crate) struct SourceUpdate {
    pub task: usize,
    pub x: Vec<f64>,
    pub w_x: DVector<f64>,
    pub u_x: DVector<f64>,
    pub mean_std_x: f64,
    pub var_std_x: f64,
    pub denom: f64,
}

impl SourceUpdate {
    pub fn new(model: &GpModel, task: usize, x: &[f64]) -> Result<Self> {
        let s = model.solve_point(x)?;
        let u_x = model.backward(&s.w);
        Ok(Self {
            task,
            x: x.to_vec(),
            u_x,
            denom: s.var_std + model.effective_noise(),
            mean_std_x: s.mean_std,
            var_std_x: s.var_std,
            w_x: s.w,
        })
    }

    /// Standardised innovation of observing `y`.
    pub fn resid(&self, model: &GpModel, y: f64) -> f64 {
        (y - model.offset()) / model.scale() - self.mean_std_x
    }
}

/// Posterior moments (target units) with optional gradient.
pub(crate) struct Moments {
    pub mean: f64,
    pub var: f64,
    pub d_mean: Vec<f64>,
    pub d_var: Vec<f64>,
}

/// Posterior of `model` at `q`, optionally conditioned on a fantasy.
pub(crate) fn task_moments(
    model: &GpModel,
    q: &[f64],
    fantasy: Option<(&SourceUpdate, f64)>,
    with_grad: bool,
) -> Moments {
    let d = q.len();
    let sv = model.params().signal_variance;
    let (mut mean_std, mut var_std, mut d_mean, mut d_var);
    if with_grad {
        let (k, jac) = model.cross_cov_jacobian(q);
        let w = model.forward(&k);
        let u = model.backward(&w);
        mean_std = k.dot(model.alpha());
        var_std = sv - w.dot(&w);
        d_mean = (0..d).map(|i| jac.column(i).dot(model.alpha())).collect::<Vec<_>>();
        d_var = (0..d).map(|i| -2.0 * jac.column(i).dot(&u)).collect::<Vec<_>>();
        if let Some((src, resid)) = fantasy {
            let mut g = vec![0.0; d];
            let kx = model.params().k_grad_a(q, &src.x, &mut g);
            let cov = kx - w.dot(&src.w_x);
            let d_cov: Vec<f64> = (0..d).map(|i| g[i] - jac.column(i).dot(&src.u_x)).collect();
            mean_std += cov * resid / src.denom;
            var_std -= cov * cov / src.denom;
            for i in 0..d {
                d_mean[i] += d_cov[i] * resid / src.denom;
                d_var[i] -= 2.0 * cov * d_cov[i] / src.denom;
            }
        }
    } else {
        let k = model.cross_cov(q);
        let w = model.forward(&k);
        mean_std = k.dot(model.alpha());
        var_std = sv - w.dot(&w);
        if let Some((src, resid)) = fantasy {
            let cov = model.params().k(q, &src.x) - w.dot(&src.w_x);
            mean_std += cov * resid / src.denom;
            var_std -= cov * cov / src.denom;
        }
        d_mean = Vec::new();
        d_var = Vec::new();
    }
    if var_std <= 0.0 || var_std >= sv {
        var_std = var_std.clamp(0.0, sv);
        d_var.iter_mut().for_each(|v| *v = 0.0);
    }
    let s = model.scale();
    d_mean.iter_mut().for_each(|v| *v *= s);
    d_var.iter_mut().for_each(|v| *v *= s * s);
    Moments { mean: model.to_target_mean(mean_std), var: model.to_target_var(var_std), d_mean, d_var }
}

/// Feasibility probability and its gradient from moments.
pub(crate) fn pf_with_grad(m: &Moments) -> (f64, Vec<f64>) {
    let sd = m.var.max(0.0).sqrt();
    if sd < 1e-150 {
        let p = if m.mean <= 0.0 { 1.0 } else { 0.0 };
        return (p, vec![0.0; m.d_mean.len()]);
    }
    let z = -m.mean / sd;
    let dens = norm_pdf(z);
    let grad =
        m.d_mean.iter().zip(&m.d_var).map(|(dm, dv)| dens * (-dm / sd + m.mean * dv / (2.0 * sd * sd * sd))).collect();
    (norm_cdf(z), grad)
}

/// `(mu_f(x) - M) * PF(x)` of a possibly fantasised bundle; `M` is the
/// infeasibility penalty. Without constraints this is just `mu_f(x) - M`.
pub struct PosteriorScore<'a> {
    bundle: &'a ModelBundle,
    penalty: f64,
    use_constraints: bool,
    fantasies: Vec<(&'a SourceUpdate, f64)>,
}

impl<'a> PosteriorScore<'a> {
    pub fn new(bundle: &'a ModelBundle, penalty: f64) -> Self {
        Self { bundle, penalty, use_constraints: true, fantasies: Vec::new() }
    }

    /// Posterior mean of the objective only.
    pub fn objective_only(bundle: &'a ModelBundle) -> Self {
        Self { bundle, penalty: 0.0, use_constraints: false, fantasies: Vec::new() }
    }

    pub(crate) fn with_fantasies(mut self, fantasies: Vec<(&'a SourceUpdate, f64)>) -> Self {
        self.fantasies = fantasies;
        self
    }

    fn fantasy_for(&self, task: usize) -> Option<(&SourceUpdate, f64)> {
        self.fantasies.iter().find(|(s, _)| s.task == task).map(|(s, r)| (*s, *r))
    }

    fn eval(&self, x: &[f64], with_grad: bool) -> (f64, Vec<f64>) {
        let obj = task_moments(&self.bundle.objective, x, self.fantasy_for(0), with_grad);
        let mut value = obj.mean - self.penalty;
        let mut grad = obj.d_mean;
        if !self.use_constraints {
            return (value, grad);
        }
        for (i, model) in self.bundle.constraints.iter().enumerate() {
            let m = task_moments(model, x, self.fantasy_for(i + 1), with_grad);
            if with_grad {
                let (pf, dpf) = pf_with_grad(&m);
                for (g, dp) in grad.iter_mut().zip(&dpf) {
                    *g = *g * pf + value * dp;
                }
                value *= pf;
            } else {
                value *= super::pf_from_moments(m.mean, m.var);
            }
        }
        (value, grad)
    }
}

impl Objective for PosteriorScore<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x, false).0
    }

    fn value_and_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        Some(self.eval(x, true))
    }
}
