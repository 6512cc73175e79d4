use super::ModelBundle;
use crate::error::{invalid, Result};
use crate::gp::GpModel;
use crate::optim::sobol_unscrambled;
use crate::stats::norm_ppf;

/// Probability levels of the deterministic Gaussian-quantile fantasies: the
/// midpoints of seven equal-probability bins.
pub const QUANTILE_LEVELS: [f64; 7] =
    [1.0 / 14.0, 3.0 / 14.0, 5.0 / 14.0, 7.0 / 14.0, 9.0 / 14.0, 11.0 / 14.0, 13.0 / 14.0];
/// Number of Sobol rows crossed with each objective quantile in coupled mode.
pub const CONSTRAINT_DRAWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FantasyMode {
    /// Objective and all constraints observed jointly.
    Coupled,
    /// Only task `k` observed (0 = objective).
    SingleSource(usize),
}

/// One joint hypothetical observation: `(task, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FantasyDescriptor {
    pub values: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FantasyGrid {
    /// Quantile fantasies of the objective (coupled) or of the single source.
    pub objective_quantiles: Vec<f64>,
    /// `CONSTRAINT_DRAWS × K` unit-interval values (empty in single-source mode).
    pub constraint_draws: Vec<Vec<f64>>,
    pub combined: Vec<FantasyDescriptor>,
}

/// Standard deviation of a new observation of `model` at a point with the
/// given latent variance.
pub(crate) fn observation_sd(model: &GpModel, latent_variance: f64) -> f64 {
    (latent_variance + model.to_target_var(model.effective_noise())).sqrt()
}

/// Unit-interval constraint draws, shared by every coupled fantasy grid.
pub(crate) fn constraint_draws(k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Ok(vec![Vec::new(); CONSTRAINT_DRAWS]);
    }
    sobol_unscrambled(k, CONSTRAINT_DRAWS)
}

/// Standard-normal quantiles of [`QUANTILE_LEVELS`], exactly antisymmetric.
pub(crate) fn quantile_offsets() -> [f64; 7] {
    let mut z = [0.0; 7];
    for i in 0..3 {
        z[i] = norm_ppf(QUANTILE_LEVELS[i]);
        z[6 - i] = -z[i];
    }
    z
}

/// Builds the deterministic fantasy observations at `x`.
pub fn make_fantasy_grid(bundle: &ModelBundle, x: &[f64], mode: FantasyMode) -> Result<FantasyGrid> {
    build_grid(mode, bundle.num_constraints(), |task| {
        let m = bundle.task(task);
        let p = m.posterior(x)?;
        Ok((p.mean, observation_sd(m, p.variance)))
    })
}

/// Grid construction from per-task `(mean, observation sd)` at the fantasy location.
pub(crate) fn build_grid<F>(mode: FantasyMode, num_constraints: usize, moments: F) -> Result<FantasyGrid>
where
    F: Fn(usize) -> Result<(f64, f64)>,
{
    let z = quantile_offsets();
    match mode {
        FantasyMode::SingleSource(k) => {
            if k > num_constraints {
                return invalid(format!("task {k} out of range for {} tasks", num_constraints + 1));
            }
            let (mu, sd) = moments(k)?;
            let q: Vec<f64> = z.iter().map(|zi| mu + sd * zi).collect();
            let combined = q.iter().map(|v| FantasyDescriptor { values: vec![(k, *v)] }).collect();
            Ok(FantasyGrid { objective_quantiles: q, constraint_draws: Vec::new(), combined })
        }
        FantasyMode::Coupled => {
            let draws = constraint_draws(num_constraints)?;
            let (mu, sd) = moments(0)?;
            let q: Vec<f64> = z.iter().map(|zi| mu + sd * zi).collect();
            let cons: Vec<(f64, f64)> = (1..=num_constraints).map(&moments).collect::<Result<_>>()?;
            let cons_z: Vec<Vec<f64>> = draws.iter().map(|row| row.iter().map(|u| norm_ppf(*u)).collect()).collect();
            let mut combined = Vec::with_capacity(q.len() * CONSTRAINT_DRAWS);
            for yq in &q {
                for row in &cons_z {
                    let mut values = Vec::with_capacity(num_constraints + 1);
                    values.push((0, *yq));
                    for (k, ((m, s), zk)) in cons.iter().zip(row).enumerate() {
                        values.push((k + 1, m + s * zk));
                    }
                    combined.push(FantasyDescriptor { values });
                }
            }
            Ok(FantasyGrid { objective_quantiles: q, constraint_draws: draws, combined })
        }
    }
}
