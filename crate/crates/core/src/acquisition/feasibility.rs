use super::ModelBundle;
use crate::error::Result;
use crate::gp::GpModel;
use crate::stats::{norm_cdf, norm_pdf};

/// `P(c <= 0)` for `c ~ N(mean, variance)`.
pub fn pf_from_moments(mean: f64, variance: f64) -> f64 {
    let sd = variance.max(0.0).sqrt();
    if sd == 0.0 {
        return if mean <= 0.0 { 1.0 } else { 0.0 };
    }
    norm_cdf(-mean / sd)
}

/// Closed-form expected improvement of `N(mean, sd²)` over `best`.
pub fn ei_from_moments(mean: f64, sd: f64, best: f64) -> f64 {
    let diff = mean - best;
    if sd <= 0.0 {
        return diff.max(0.0);
    }
    let z = diff / sd;
    (diff * norm_cdf(z) + sd * norm_pdf(z)).max(0.0)
}

pub fn prob_feasible_k(model: &GpModel, x: &[f64]) -> Result<f64> {
    let p = model.posterior(x)?;
    Ok(pf_from_moments(p.mean, p.variance))
}

/// Product of the per-constraint feasibility probabilities.
pub fn prob_feasible(bundle: &ModelBundle, x: &[f64]) -> Result<f64> {
    bundle.constraints.iter().try_fold(1.0, |acc, m| Ok(acc * prob_feasible_k(m, x)?))
}

pub fn expected_improvement(model: &GpModel, f_best: f64, x: &[f64]) -> Result<f64> {
    let p = model.posterior(x)?;
    Ok(ei_from_moments(p.mean, p.std_dev(), f_best))
}

/// Expected improvement weighted by the probability of feasibility.
pub fn constrained_ei(bundle: &ModelBundle, f_best_feasible: f64, x: &[f64]) -> Result<f64> {
    Ok(expected_improvement(&bundle.objective, f_best_feasible, x)? * prob_feasible(bundle, x)?)
}
