use nalgebra::{Cholesky, DMatrix, DVector};

use super::{KernelParams, JITTER_CEILING, JITTER_FLOOR};
use crate::error::{invalid, Error, Result};

/// Posterior marginal of the latent function at one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub variance: f64,
}

impl Posterior {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Posterior marginal plus its gradient with respect to the query location.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGradient {
    pub mean: f64,
    pub variance: f64,
    pub d_mean: Vec<f64>,
    pub d_variance: Vec<f64>,
}

/// Exact GP conditioned on a training set.
///
/// Targets are stored as observed; internally the model works with
/// `(y - offset) / scale`, and `params` live in that standardised space.
#[derive(Debug, Clone)]
pub struct GpModel {
    params: KernelParams,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    offset: f64,
    scale: f64,
    noise: f64,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
}

/// Covariance vector against the training inputs and its forward solve.
#[derive(Debug, Clone)]
pub(crate) struct PointSolve {
    pub w: DVector<f64>,
    pub mean_std: f64,
    pub var_std: f64,
}

pub(crate) fn factorize(params: &KernelParams, x: &[Vec<f64>]) -> Result<(DMatrix<f64>, f64)> {
    let n = x.len();
    let mut base = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = params.k(&x[i], &x[j]);
            base[(i, j)] = v;
            base[(j, i)] = v;
        }
    }
    let mut noise = params.noise_variance.max(JITTER_FLOOR);
    loop {
        let mut m = base.clone();
        for i in 0..n {
            m[(i, i)] += noise;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c.unpack(), noise));
        }
        if noise >= JITTER_CEILING {
            return Err(Error::Numerical(format!("covariance not positive definite at jitter {noise:e}")));
        }
        noise = (noise * 10.0).min(JITTER_CEILING);
    }
}

impl GpModel {
    /// Zero-mean GP with fixed hyperparameters on raw (unscaled) targets.
    pub fn new(params: KernelParams, train_x: Vec<Vec<f64>>, train_y: Vec<f64>) -> Result<Self> {
        Self::standardized(params, train_x, train_y, 0.0, 1.0)
    }

    /// GP on targets transformed as `(y - offset) / scale`; `params` refer to
    /// the transformed targets.
    pub fn standardized(
        params: KernelParams,
        train_x: Vec<Vec<f64>>,
        train_y: Vec<f64>,
        offset: f64,
        scale: f64,
    ) -> Result<Self> {
        if train_x.is_empty() || train_x.len() != train_y.len() {
            return invalid(format!(
                "need matching non-empty data, got {} inputs and {} targets",
                train_x.len(),
                train_y.len()
            ));
        }
        if train_x.iter().any(|x| x.len() != params.dim()) {
            return invalid("training inputs do not match the lengthscale dimension");
        }
        if train_y.iter().chain(train_x.iter().flatten()).any(|v| !v.is_finite()) {
            return invalid("training data must be finite");
        }
        if !(scale > 0.0 && scale.is_finite() && offset.is_finite()) {
            return invalid("target standardisation must have finite offset and positive scale");
        }
        let (chol, noise) = factorize(&params, &train_x)?;
        let ys = DVector::from_iterator(train_y.len(), train_y.iter().map(|y| (y - offset) / scale));
        let alpha = {
            let z =
                chol.solve_lower_triangular(&ys).ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
            chol.tr_solve_lower_triangular(&z).ok_or_else(|| Error::Numerical("triangular solve failed".into()))?
        };
        Ok(Self { params, train_x, train_y, offset, scale, noise, chol, alpha })
    }

    /// Same hyperparameters and target transform, new data.
    pub fn refit_frozen(&self, train_x: Vec<Vec<f64>>, train_y: Vec<f64>) -> Result<Self> {
        let mut params = self.params.clone();
        params.noise_variance = self.noise;
        Self::standardized(params, train_x, train_y, self.offset, self.scale)
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    /// Prior mean in target units.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Target scale; variances in target units are standardised ones times `scale²`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Noise variance actually used in the factorisation (standardised units).
    pub fn effective_noise(&self) -> f64 {
        self.noise
    }

    /// Lower Cholesky factor of `K_XX + noise·I` (standardised units).
    pub fn cov_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return invalid(format!("query has dimension {}, model expects {}", x.len(), self.dim()));
        }
        Ok(())
    }

    pub(crate) fn cross_cov(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.train_x.iter().map(|t| self.params.k(t, x)))
    }

    pub(crate) fn forward(&self, k: &DVector<f64>) -> DVector<f64> {
        let mut w = k.clone();
        self.chol.solve_lower_triangular_mut(&mut w);
        w
    }

    pub(crate) fn backward(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut u = w.clone();
        self.chol.tr_solve_lower_triangular_mut(&mut u);
        u
    }

    pub(crate) fn clamp_var(&self, raw: f64) -> Result<f64> {
        if raw < -1e-8 {
            return Err(Error::Numerical(format!("posterior variance {raw:e} is negative")));
        }
        Ok(raw.clamp(0.0, self.params.signal_variance))
    }

    /// Latent posterior in standardised units, keeping the forward solve.
    pub(crate) fn solve_point(&self, x: &[f64]) -> Result<PointSolve> {
        let k = self.cross_cov(x);
        let mean_std = k.dot(&self.alpha);
        let w = self.forward(&k);
        let var_std = self.clamp_var(self.params.signal_variance - w.dot(&w))?;
        Ok(PointSolve { w, mean_std, var_std })
    }

    /// Latent covariance between two query points (standardised units).
    pub(crate) fn latent_cov(&self, a: &[f64], wa: &DVector<f64>, b: &[f64], wb: &DVector<f64>) -> f64 {
        self.params.k(a, b) - wa.dot(wb)
    }

    pub(crate) fn to_target_mean(&self, m_std: f64) -> f64 {
        self.offset + self.scale * m_std
    }

    pub(crate) fn to_target_var(&self, v_std: f64) -> f64 {
        self.scale * self.scale * v_std
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Posterior> {
        self.check_dim(x)?;
        let s = self.solve_point(x)?;
        Ok(Posterior { mean: self.to_target_mean(s.mean_std), variance: self.to_target_var(s.var_std) })
    }

    /// Posterior mean and variance with gradients in the query location.
    pub fn posterior_gradient(&self, x: &[f64]) -> Result<PosteriorGradient> {
        self.check_dim(x)?;
        let (k, jac) = self.cross_cov_jacobian(x);
        let w = self.forward(&k);
        let u = self.backward(&w);
        let mean_std = k.dot(&self.alpha);
        let raw_var = self.params.signal_variance - w.dot(&w);
        let var_std = self.clamp_var(raw_var)?;
        let d = self.dim();
        let mut d_mean = vec![0.0; d];
        let mut d_var = vec![0.0; d];
        for i in 0..d {
            let col = jac.column(i);
            d_mean[i] = self.scale * col.dot(&self.alpha);
            d_var[i] = if var_std > 0.0 { -2.0 * self.scale * self.scale * col.dot(&u) } else { 0.0 };
        }
        Ok(PosteriorGradient {
            mean: self.to_target_mean(mean_std),
            variance: self.to_target_var(var_std),
            d_mean,
            d_variance: d_var,
        })
    }

    /// `k(X, x)` and its Jacobian with respect to `x` (n × d).
    pub(crate) fn cross_cov_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.len();
        let d = self.dim();
        let mut k = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, d);
        let mut g = vec![0.0; d];
        for (i, t) in self.train_x.iter().enumerate() {
            k[i] = self.params.k_grad_a(x, t, &mut g);
            for j in 0..d {
                jac[(i, j)] = g[j];
            }
        }
        (k, jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelFamily;

    fn se(noise: f64) -> KernelParams {
        KernelParams::new(KernelFamily::SquaredExponential, 1.0, vec![1.0], noise).unwrap()
    }

    #[test]
    fn single_point_hand_evaluation() {
        let m = GpModel::new(se(1e-4), vec![vec![0.3]], vec![2.0]).unwrap();
        let p = m.posterior(&[0.3]).unwrap();
        assert!((p.mean - 2.0 / (1.0 + 1e-4)).abs() < 1e-12);
        assert!((p.variance - (1.0 - 1.0 / (1.0 + 1e-4))).abs() < 1e-12);
        assert!((p.mean - 1.99980).abs() < 1e-5);
    }

    #[test]
    fn far_query_reverts_to_prior() {
        let m = GpModel::standardized(se(1e-4), vec![vec![0.0], vec![0.5]], vec![1.0, -1.0], 3.0, 2.0).unwrap();
        let p = m.posterior(&[1e3]).unwrap();
        assert!((p.mean - 3.0).abs() < 1e-6);
        assert!((p.variance - 4.0).abs() < 1e-6);
    }

    #[test]
    fn factor_reconstructs_covariance() {
        let params = KernelParams::new(KernelFamily::Matern52, 1.3, vec![0.4, 0.7], 1e-3).unwrap();
        let x = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.7, 0.3], vec![0.2, 0.8]];
        let m = GpModel::new(params.clone(), x.clone(), vec![1.0, 2.0, 0.5, -1.0]).unwrap();
        let l = m.cov_factor();
        let rebuilt = l * l.transpose();
        for i in 0..4 {
            for j in 0..4 {
                let mut expected = params.k(&x[i], &x[j]);
                if i == j {
                    expected += 1e-3;
                }
                assert!((rebuilt[(i, j)] - expected).abs() <= 1e-8 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn noise_never_below_floor() {
        let m = GpModel::new(se(0.0), vec![vec![0.0], vec![0.0]], vec![1.0, 2.0]).unwrap();
        assert!(m.effective_noise() >= JITTER_FLOOR);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let params = KernelParams::new(KernelFamily::Matern52, 1.3, vec![0.4, 0.7], 1e-4).unwrap();
        let x = vec![vec![0.1, 0.2], vec![0.5, 0.9], vec![0.7, 0.3]];
        let m = GpModel::standardized(params, x, vec![1.0, 2.0, 0.5], 0.5, 1.5).unwrap();
        let q = [0.33, 0.61];
        let g = m.posterior_gradient(&q).unwrap();
        for i in 0..2 {
            let h = 1e-6;
            let mut up = q;
            let mut dn = q;
            up[i] += h;
            dn[i] -= h;
            let (pu, pd) = (m.posterior(&up).unwrap(), m.posterior(&dn).unwrap());
            assert!(((pu.mean - pd.mean) / (2.0 * h) - g.d_mean[i]).abs() < 1e-6);
            assert!(((pu.variance - pd.variance) / (2.0 * h) - g.d_variance[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_data() {
        assert!(GpModel::new(se(0.0), vec![], vec![]).is_err());
        assert!(GpModel::new(se(0.0), vec![vec![0.0]], vec![f64::NAN]).is_err());
        assert!(GpModel::new(se(0.0), vec![vec![0.0, 1.0]], vec![1.0]).is_err());
        let m = GpModel::new(se(0.0), vec![vec![0.0]], vec![1.0]).unwrap();
        assert!(m.posterior(&[0.0, 1.0]).is_err());
    }
}
