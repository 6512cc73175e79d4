use nalgebra::DVector;

use super::{GpModel, Posterior};
use crate::error::{invalid, Result};

/// A GP conditioned on one extra (hypothetical) observation with frozen
/// hyperparameters, evaluated through a rank-one update of the base posterior.
#[derive(Debug, Clone)]
pub struct FantasyModel<'a> {
    base: &'a GpModel,
    x: Vec<f64>,
    y: f64,
    w_x: DVector<f64>,
    // posterior variance of the observation at x (latent + noise), standardised
    denom: f64,
    // standardised residual y - mu(x)
    resid: f64,
}

/// Conditions `model` on observing `y` at `x`.
pub fn condition_on_fantasy<'a>(model: &'a GpModel, x: &[f64], y: f64) -> Result<FantasyModel<'a>> {
    model.check_dim(x)?;
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return invalid("fantasy observation must be finite");
    }
    let s = model.solve_point(x)?;
    let denom = s.var_std + model.effective_noise();
    let resid = (y - model.offset()) / model.scale() - s.mean_std;
    Ok(FantasyModel { base: model, x: x.to_vec(), y, w_x: s.w, denom, resid })
}

impl<'a> FantasyModel<'a> {
    pub fn base(&self) -> &'a GpModel {
        self.base
    }

    pub fn fantasy_x(&self) -> &[f64] {
        &self.x
    }

    pub fn fantasy_y(&self) -> f64 {
        self.y
    }

    pub fn posterior(&self, q: &[f64]) -> Result<Posterior> {
        let m = self.base;
        m.check_dim(q)?;
        let s = m.solve_point(q)?;
        let cov = m.latent_cov(q, &s.w, &self.x, &self.w_x);
        let mean_std = s.mean_std + cov * self.resid / self.denom;
        let var_std = m.clamp_var(s.var_std - cov * cov / self.denom)?;
        Ok(Posterior { mean: m.to_target_mean(mean_std), variance: m.to_target_var(var_std) })
    }

    /// Full refactorisation on the augmented data set with the same
    /// hyperparameters and target transform.
    pub fn to_refit(&self) -> Result<GpModel> {
        let mut x = self.base.train_x().to_vec();
        let mut y = self.base.train_y().to_vec();
        x.push(self.x.clone());
        y.push(self.y);
        self.base.refit_frozen(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelFamily, KernelParams};

    fn model() -> GpModel {
        let p = KernelParams::new(KernelFamily::Matern52, 1.2, vec![0.3, 0.5], 1e-4).unwrap();
        let x = vec![vec![0.1, 0.1], vec![0.8, 0.3], vec![0.4, 0.9], vec![0.6, 0.6]];
        GpModel::standardized(p, x, vec![0.5, -1.0, 2.0, 0.3], 0.2, 1.4).unwrap()
    }

    #[test]
    fn matches_refit() {
        let m = model();
        let f = condition_on_fantasy(&m, &[0.3, 0.5], 1.7).unwrap();
        let r = f.to_refit().unwrap();
        for q in [[0.0, 0.0], [0.3, 0.5], [0.9, 0.9], [0.5, 0.2]] {
            let a = f.posterior(&q).unwrap();
            let b = r.posterior(&q).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-8);
            assert!((a.variance - b.variance).abs() < 1e-8);
        }
    }

    #[test]
    fn mean_consistent_fantasy_only_shrinks_variance() {
        let m = model();
        let x = [0.3, 0.5];
        let before = m.posterior(&x).unwrap();
        let f = condition_on_fantasy(&m, &x, before.mean).unwrap();
        for q in [[0.0, 0.0], [0.3, 0.5], [0.9, 0.9]] {
            let a = m.posterior(&q).unwrap();
            let b = f.posterior(&q).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-12);
            assert!(b.variance <= a.variance + 1e-15);
        }
        assert!(f.posterior(&x).unwrap().variance < before.variance);
    }

    #[test]
    fn duplicate_training_location() {
        let m = model();
        let f = condition_on_fantasy(&m, &[0.1, 0.1], 5.0).unwrap();
        let p = f.posterior(&[0.1, 0.1]).unwrap();
        assert!(p.mean.is_finite() && p.variance >= 0.0);
    }
}
