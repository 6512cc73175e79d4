use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Matern52,
    SquaredExponential,
}

/// Stationary ARD kernel hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub family: KernelFamily,
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

const SQRT5: f64 = 2.236_067_977_499_79;

impl KernelParams {
    pub fn new(
        family: KernelFamily,
        signal_variance: f64,
        lengthscales: Vec<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return invalid(format!("signal variance must be positive, got {signal_variance}"));
        }
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return invalid("lengthscales must be non-empty and positive");
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return invalid(format!("noise variance must be non-negative, got {noise_variance}"));
        }
        Ok(Self { family, signal_variance, lengthscales, noise_variance })
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn scaled_sq_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| {
                let t = (x - y) / l;
                t * t
            })
            .sum()
    }

    /// `k(a, b)` without dimension checks.
    #[inline]
    pub(crate) fn k(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2 = self.scaled_sq_dist(a, b);
        match self.family {
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                self.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * (-SQRT5 * r).exp()
            }
            KernelFamily::SquaredExponential => self.signal_variance * (-0.5 * r2).exp(),
        }
    }

    /// `k(a, b)` and its gradient with respect to `a`.
    pub(crate) fn k_grad_a(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        let r2 = self.scaled_sq_dist(a, b);
        let (k, factor) = match self.family {
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let e = (-SQRT5 * r).exp();
                let k = self.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * e;
                (k, -5.0 / 3.0 * self.signal_variance * (1.0 + SQRT5 * r) * e)
            }
            KernelFamily::SquaredExponential => {
                let k = self.signal_variance * (-0.5 * r2).exp();
                (k, -k)
            }
        };
        for (i, g) in grad.iter_mut().enumerate() {
            let l = self.lengthscales[i];
            *g = factor * (a[i] - b[i]) / (l * l);
        }
        k
    }

    /// `k(a, b)` and its derivatives with respect to `log signal_variance`
    /// followed by each `log lengthscale`.
    pub(crate) fn k_log_param_grads(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        let r2 = self.scaled_sq_dist(a, b);
        let (k, factor) = match self.family {
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let e = (-SQRT5 * r).exp();
                let k = self.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * e;
                (k, 5.0 / 3.0 * self.signal_variance * (1.0 + SQRT5 * r) * e)
            }
            KernelFamily::SquaredExponential => {
                let k = self.signal_variance * (-0.5 * r2).exp();
                (k, k)
            }
        };
        grad[0] = k;
        for i in 0..self.dim() {
            let t = (a[i] - b[i]) / self.lengthscales[i];
            grad[1 + i] = factor * t * t;
        }
        k
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(params: &KernelParams, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != params.dim() || b.len() != params.dim() {
        return invalid(format!("kernel expects {}-dimensional inputs, got {} and {}", params.dim(), a.len(), b.len()));
    }
    Ok(params.k(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(family: KernelFamily, ls: Vec<f64>) -> KernelParams {
        KernelParams::new(family, 1.0, ls, 0.0).unwrap()
    }

    #[test]
    fn zero_distance_gives_signal_variance() {
        let k = KernelParams::new(KernelFamily::Matern52, 2.5, vec![0.3, 4.0], 0.0).unwrap();
        assert_eq!(kernel_eval(&k, &[0.1, 0.2], &[0.1, 0.2]).unwrap(), 2.5);
    }

    #[test]
    fn hand_evaluated_values() {
        let se = kernel_eval(&p(KernelFamily::SquaredExponential, vec![1.0]), &[0.0], &[1.0]).unwrap();
        assert!((se - (-0.5f64).exp()).abs() < 1e-15);
        assert!((se - 0.60653).abs() < 1e-5);
        let m = kernel_eval(&p(KernelFamily::Matern52, vec![1.0]), &[0.0], &[1.0]).unwrap();
        let expected = (1.0 + 5f64.sqrt() + 5.0 / 3.0) * (-(5f64.sqrt())).exp();
        assert!((m - expected).abs() < 1e-15);
        assert!((m - 0.52399).abs() < 1e-5);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(kernel_eval(&p(KernelFamily::Matern52, vec![1.0, 1.0]), &[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(KernelParams::new(KernelFamily::Matern52, 0.0, vec![1.0], 0.0).is_err());
        assert!(KernelParams::new(KernelFamily::Matern52, 1.0, vec![-1.0], 0.0).is_err());
        assert!(KernelParams::new(KernelFamily::Matern52, 1.0, vec![1.0], -1e-3).is_err());
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        for family in [KernelFamily::Matern52, KernelFamily::SquaredExponential] {
            let k = KernelParams::new(family, 1.7, vec![0.4, 1.3], 0.0).unwrap();
            let a = [0.3, -0.8];
            let b = [0.9, 0.1];
            let mut g = [0.0; 2];
            k.k_grad_a(&a, &b, &mut g);
            for i in 0..2 {
                let h = 1e-6;
                let mut up = a;
                let mut dn = a;
                up[i] += h;
                dn[i] -= h;
                let fd = (k.k(&up, &b) - k.k(&dn, &b)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7, "{family:?} {i}: {fd} vs {}", g[i]);
            }
        }
    }
}
