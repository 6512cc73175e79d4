use nalgebra::DVector;

use super::model::factorize;
use super::{KernelParams, JITTER_FLOOR};
use crate::error::{invalid, Result};

/// Log marginal likelihood and its gradient with respect to
/// `[log signal_variance, log lengthscale_1..d, log noise_variance]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// `log p(y | X, θ)` of a zero-mean GP, with analytic gradient.
///
/// The noise variance is floored at the jitter level; below the floor its
/// gradient entry is zero.
pub fn log_marginal_likelihood(params: &KernelParams, x: &[Vec<f64>], y: &[f64]) -> Result<LogLikelihood> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return invalid("likelihood needs matching non-empty data");
    }
    if x.iter().any(|xi| xi.len() != params.dim()) {
        return invalid("training inputs do not match the lengthscale dimension");
    }
    let (l, noise) = factorize(params, x)?;
    let yv = DVector::from_column_slice(y);
    let mut alpha = yv.clone();
    l.solve_lower_triangular_mut(&mut alpha);
    let data_fit = alpha.dot(&alpha);
    l.tr_solve_lower_triangular_mut(&mut alpha);
    let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    let value = -0.5 * data_fit - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    // K^{-1} from the factor
    let mut kinv = nalgebra::DMatrix::identity(n, n);
    l.solve_lower_triangular_mut(&mut kinv);
    l.tr_solve_lower_triangular_mut(&mut kinv);

    let d = params.dim();
    let mut gradient = vec![0.0; d + 2];
    let mut dk = vec![0.0; d + 1];
    for i in 0..n {
        for j in 0..=i {
            params.k_log_param_grads(&x[i], &x[j], &mut dk);
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            let mult = if i == j { 0.5 } else { 1.0 };
            for (g, dkv) in gradient.iter_mut().zip(&dk) {
                *g += mult * w * dkv;
            }
        }
    }
    if params.noise_variance >= JITTER_FLOOR && noise == params.noise_variance {
        let trace: f64 = (0..n).map(|i| alpha[i] * alpha[i] - kinv[(i, i)]).sum();
        gradient[d + 1] = 0.5 * noise * trace;
    }
    Ok(LogLikelihood { value, gradient })
}
