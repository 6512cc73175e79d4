//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use dcbo::acquisition::{make_fantasy_grid, FantasyMode, ModelBundle};
use dcbo::gp::{GpModel, KernelFamily, KernelParams};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Kernel written out directly from the textbook formulas.
pub fn kernel(p: &KernelParams, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(&p.lengthscales).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    match p.family {
        KernelFamily::SquaredExponential => p.signal_variance * (-0.5 * r2).exp(),
        KernelFamily::Matern52 => {
            let r = r2.sqrt();
            let s5 = 5.0_f64.sqrt();
            p.signal_variance * (1.0 + s5 * r + 5.0 * r2 / 3.0) * (-s5 * r).exp()
        }
    }
}

/// Posterior mean and variance through an explicit matrix inverse.
pub fn dense_posterior(p: &KernelParams, x: &[Vec<f64>], y: &[f64], noise: f64, q: &[f64]) -> (f64, f64) {
    let n = x.len();
    let k = DMatrix::from_fn(n, n, |i, j| kernel(p, &x[i], &x[j]) + if i == j { noise } else { 0.0 });
    let kinv = k.try_inverse().expect("invertible");
    let kq = DVector::from_fn(n, |i, _| kernel(p, &x[i], q));
    let yv = DVector::from_column_slice(y);
    let mean = kq.dot(&(&kinv * yv));
    let var = kernel(p, q, q) - kq.dot(&(&kinv * &kq));
    (mean, var)
}

/// Dense log marginal likelihood.
pub fn dense_lml(p: &KernelParams, x: &[Vec<f64>], y: &[f64], noise: f64) -> f64 {
    let n = x.len();
    let k = DMatrix::from_fn(n, n, |i, j| kernel(p, &x[i], &x[j]) + if i == j { noise } else { 0.0 });
    let det = k.clone().lu().determinant();
    let kinv = k.try_inverse().expect("invertible");
    let yv = DVector::from_column_slice(y);
    -0.5 * yv.dot(&(&kinv * &yv)) - 0.5 * det.ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

pub fn random_params(r: &mut ChaCha8Rng, d: usize, family: KernelFamily, noise: f64) -> KernelParams {
    KernelParams::new(family, r.random_range(0.5..2.0), (0..d).map(|_| r.random_range(0.2..1.0)).collect(), noise)
        .unwrap()
}

pub fn random_points(r: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| r.random_range(0.0..1.0)).collect()).collect()
}

pub fn unit_grid_1d(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect()
}

/// Standard normal CDF.
pub fn phi(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

fn score(bundle: &[GpModel], q: &[f64], penalty: f64, current_objective: Option<f64>) -> f64 {
    let mu = current_objective.unwrap_or_else(|| bundle[0].posterior(q).unwrap().mean);
    let mut v = mu - penalty;
    for c in &bundle[1..] {
        let p = c.posterior(q).unwrap();
        v *= if p.variance > 0.0 {
            phi(-p.mean / p.variance.sqrt())
        } else if p.mean <= 0.0 {
            1.0
        } else {
            0.0
        };
    }
    v
}

/// Coupled cKG by refitting every task model on each of the 35 fantasies and
/// maximising over `points`.
pub fn brute_force_ckg(bundle: &ModelBundle, x: &[f64], x_r: &[f64], points: &[Vec<f64>], penalty: f64) -> f64 {
    let grid = make_fantasy_grid(bundle, x, FantasyMode::Coupled).unwrap();
    let mu_r = bundle.objective.posterior(x_r).unwrap().mean;
    let mut total = 0.0;
    for desc in &grid.combined {
        let models: Vec<GpModel> = (0..bundle.num_tasks())
            .map(|t| {
                let m = bundle.task(t);
                let y = desc.values.iter().find(|(k, _)| *k == t).map(|(_, v)| *v).unwrap();
                let mut xs = m.train_x().to_vec();
                let mut ys = m.train_y().to_vec();
                xs.push(x.to_vec());
                ys.push(y);
                m.refit_frozen(xs, ys).unwrap()
            })
            .collect();
        let best = points.iter().map(|q| score(&models, q, penalty, None)).fold(f64::NEG_INFINITY, f64::max);
        total += best - score(&models, x_r, penalty, Some(mu_r));
    }
    total / grid.combined.len() as f64
}

/// Monte-Carlo knowledge gradient over a finite set, sampling the
/// observation at `x` from its posterior predictive.
pub fn monte_carlo_kg(model: &GpModel, x: &[f64], points: &[Vec<f64>], samples: usize, seed: u64) -> f64 {
    let p = model.params();
    let noise = model.effective_noise();
    let (xs, ys) = (model.train_x(), model.train_y());
    let n = xs.len();
    let kmat = DMatrix::from_fn(n, n, |i, j| kernel(p, &xs[i], &xs[j]) + if i == j { noise } else { 0.0 });
    let kinv = kmat.try_inverse().unwrap();
    let ystd = DVector::from_iterator(n, ys.iter().map(|v| (v - model.offset()) / model.scale()));
    let kx = DVector::from_fn(n, |i, _| kernel(p, &xs[i], x));
    let var_x = kernel(p, x, x) - kx.dot(&(&kinv * &kx));
    let sd_obs = (var_x + noise).sqrt();
    let mut a = Vec::with_capacity(points.len());
    let mut b = Vec::with_capacity(points.len());
    for q in points {
        let kq = DVector::from_fn(n, |i, _| kernel(p, &xs[i], q));
        let mean = kq.dot(&(&kinv * &ystd));
        let cov = kernel(p, q, x) - kq.dot(&(&kinv * &kx));
        a.push(mean);
        b.push(cov / sd_obs);
    }
    let current = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut r = rng(seed);
    let normal = rand_distr::StandardNormal;
    let mut acc = 0.0;
    for _ in 0..samples {
        let z: f64 = r.sample(normal);
        acc += a.iter().zip(&b).map(|(ai, bi)| ai + bi * z).fold(f64::NEG_INFINITY, f64::max);
    }
    model.scale() * (acc / samples as f64 - current)
}
