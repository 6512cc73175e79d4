mod common;

use common::*;
use dcbo::gp::{condition_on_fantasy, fit, FitOptions, GpModel, KernelFamily, KernelParams};
use dcbo::optim::Bounds;
use proptest::prelude::*;

fn family(i: u8) -> KernelFamily {
    if i.is_multiple_of(2) {
        KernelFamily::Matern52
    } else {
        KernelFamily::SquaredExponential
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_matches_dense_inverse(seed in 0u64..10_000, n in 1usize..9, d in 1usize..4, fam in 0u8..2) {
        let mut r = rng(seed);
        let p = random_params(&mut r, d, family(fam), 1e-3);
        let x = random_points(&mut r, n, d);
        let y: Vec<f64> = x.iter().map(|v| v.iter().sum::<f64>().sin()).collect();
        let m = GpModel::new(p.clone(), x.clone(), y.clone()).unwrap();
        for q in random_points(&mut r, 5, d) {
            let got = m.posterior(&q).unwrap();
            let (mean, var) = dense_posterior(&p, &x, &y, 1e-3, &q);
            prop_assert!((got.mean - mean).abs() < 1e-8);
            prop_assert!((got.variance - var).abs() < 1e-8);
            prop_assert!(got.variance >= 0.0);
        }
    }

    #[test]
    fn conditioning_never_raises_variance(seed in 0u64..10_000, n in 1usize..8) {
        let mut r = rng(seed);
        let p = random_params(&mut r, 2, KernelFamily::Matern52, 1e-4);
        let x = random_points(&mut r, n, 2);
        let y: Vec<f64> = x.iter().map(|v| v[0] - v[1]).collect();
        let m = GpModel::new(p, x, y).unwrap();
        let at = random_points(&mut r, 1, 2).remove(0);
        let f = condition_on_fantasy(&m, &at, 0.3).unwrap();
        for q in random_points(&mut r, 6, 2) {
            prop_assert!(f.posterior(&q).unwrap().variance <= m.posterior(&q).unwrap().variance + 1e-12);
        }
    }

    #[test]
    fn rank_one_update_equals_refit(seed in 0u64..10_000, n in 1usize..8, y_new in -3.0f64..3.0) {
        let mut r = rng(seed);
        let p = random_params(&mut r, 2, KernelFamily::SquaredExponential, 1e-3);
        let x = random_points(&mut r, n, 2);
        let y: Vec<f64> = x.iter().map(|v| (3.0 * v[0]).cos() + v[1]).collect();
        let m = GpModel::standardized(p, x, y, 0.4, 1.7).unwrap();
        let at = random_points(&mut r, 1, 2).remove(0);
        let f = condition_on_fantasy(&m, &at, y_new).unwrap();
        let refit = f.to_refit().unwrap();
        for q in random_points(&mut r, 4, 2) {
            let a = f.posterior(&q).unwrap();
            let b = refit.posterior(&q).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-7);
            prop_assert!((a.variance - b.variance).abs() < 1e-7);
        }
    }
}

#[test]
fn noise_floor_applies_to_noiseless_data() {
    let p = KernelParams::new(KernelFamily::Matern52, 1.0, vec![0.5], 0.0).unwrap();
    let m = GpModel::new(p, vec![vec![0.2], vec![0.2 + 1e-9]], vec![1.0, 1.0]).unwrap();
    assert!(m.effective_noise() >= 1e-4);
    assert!(m.posterior(&[0.2]).unwrap().variance.is_finite());
}

#[test]
fn fit_recovers_a_smooth_function() {
    let bounds = Bounds::unit(1);
    let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0]).collect();
    let y: Vec<f64> = x.iter().map(|v| (6.0 * v[0]).sin() * 10.0 + 3.0).collect();
    let m = fit(&x, &y, &bounds, &FitOptions::default()).unwrap();
    for q in [0.05f64, 0.5, 0.93] {
        let truth = (6.0 * q).sin() * 10.0 + 3.0;
        let post = m.posterior(&[q]).unwrap();
        assert!((post.mean - truth).abs() < 0.5, "{q}: {} vs {truth}", post.mean);
    }
}
