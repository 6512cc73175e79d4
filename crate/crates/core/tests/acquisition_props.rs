mod common;

use common::*;
use dcbo::acquisition::{
    ei_from_moments, make_fantasy_grid, pf_from_moments, ucbd_beta, ucbd_step, FantasyMode, InnerSolver, KgContext,
    ModelBundle, UcbdConfig,
};
use dcbo::engine::CostVector;
use dcbo::gp::{GpModel, KernelFamily, KernelParams};
use dcbo::optim::Bounds;
use proptest::prelude::*;

fn model(seed: u64, n: usize, shift: f64) -> GpModel {
    let mut r = rng(seed);
    let p = random_params(&mut r, 2, KernelFamily::Matern52, 1e-4);
    let x = random_points(&mut r, n, 2);
    let y: Vec<f64> = x.iter().map(|v| (4.0 * v[0]).sin() + v[1] - shift).collect();
    GpModel::new(p, x, y).unwrap()
}

fn bundle(seed: u64, k: usize) -> ModelBundle {
    let cons = (0..k).map(|i| model(seed + 100 + i as u64, 5, 0.6)).collect();
    ModelBundle::new(model(seed, 6, 0.0), cons).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pf_is_monotone_in_mean(a in -5.0f64..5.0, b in -5.0f64..5.0, v in 1e-6f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(pf_from_moments(lo, v) >= pf_from_moments(hi, v));
        prop_assert!((0.0..=1.0).contains(&pf_from_moments(a, v)));
    }

    #[test]
    fn ei_is_monotone_in_sd(mu in -3.0f64..3.0, s1 in 1e-4f64..3.0, s2 in 1e-4f64..3.0, best in -3.0f64..3.0) {
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(ei_from_moments(mu, hi, best) >= ei_from_moments(mu, lo, best) - 1e-12);
        prop_assert!(ei_from_moments(mu, lo, best) >= (mu - best).max(0.0) - 1e-12);
    }

    #[test]
    fn ckg_is_nonnegative(seed in 0u64..500, k in 0usize..3, x0 in 0.0f64..1.0, x1 in 0.0f64..1.0) {
        let b = bundle(seed, k);
        let bounds = Bounds::unit(2);
        let ctx = KgContext::new(&b, &bounds, InnerSolver::Screened(32), 0.0, Some(&[0.5, 0.5]), seed).unwrap();
        prop_assert!(ctx.ckg(&[x0, x1]).unwrap() >= -1e-9);
        for t in 0..=k {
            prop_assert!(ctx.dckg_source(&[x0, x1], t, 1.0).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn source_value_scales_inversely_with_cost(seed in 0u64..500, cost in 0.01f64..50.0) {
        let b = bundle(seed, 1);
        let bounds = Bounds::unit(2);
        let ctx = KgContext::new(&b, &bounds, InnerSolver::Screened(16), 0.0, Some(&[0.3, 0.7]), seed).unwrap();
        for t in 0..2 {
            let unit = ctx.dckg_source(&[0.6, 0.2], t, 1.0).unwrap();
            prop_assert_eq!(ctx.dckg_source(&[0.6, 0.2], t, cost).unwrap(), unit / cost);
        }
    }

    #[test]
    fn fantasy_grid_is_centred(seed in 0u64..500, x0 in 0.0f64..1.0, x1 in 0.0f64..1.0) {
        let b = bundle(seed, 2);
        let g = make_fantasy_grid(&b, &[x0, x1], FantasyMode::Coupled).unwrap();
        let mu = b.objective.posterior(&[x0, x1]).unwrap().mean;
        let avg: f64 = g.objective_quantiles.iter().sum::<f64>() / 7.0;
        prop_assert!((avg - mu).abs() < 1e-9 * mu.abs().max(1.0));
        prop_assert_eq!(g.objective_quantiles[3], mu);
    }
}

#[test]
fn kg_vanishes_where_the_model_is_certain() {
    let p = KernelParams::new(KernelFamily::Matern52, 1.0, vec![0.4], 0.0).unwrap();
    let xs: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 / 14.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|v| (3.0 * v[0]).sin()).collect();
    let b = ModelBundle::new(GpModel::new(p, xs.clone(), ys).unwrap(), vec![]).unwrap();
    let grid = unit_grid_1d(61);
    let ctx = KgContext::new(&b, &Bounds::unit(1), InnerSolver::Discrete(grid), 0.0, None, 0).unwrap();
    let v = ctx.kg(&xs[7]).unwrap();
    // only the jitter floor keeps this above zero
    assert!(v < 1e-3, "{v}");
}

#[test]
fn uncertain_point_beats_a_training_point() {
    let p = KernelParams::new(KernelFamily::Matern52, 1.0, vec![0.15], 1e-4).unwrap();
    let xs = vec![vec![0.1], vec![0.2], vec![0.3]];
    let b = ModelBundle::new(GpModel::new(p, xs, vec![0.0, 0.5, 0.2]).unwrap(), vec![]).unwrap();
    let ctx = KgContext::new(&b, &Bounds::unit(1), InnerSolver::Discrete(unit_grid_1d(51)), 0.0, None, 0).unwrap();
    assert!(ctx.kg(&[0.8]).unwrap() > ctx.kg(&[0.2]).unwrap());
}

#[test]
fn ucbd_beta_grows_with_iterations_and_domain() {
    let b1 = ucbd_beta(1, 4096, 1, 0.1);
    let expected = 2.0 * (2.0 * 4096.0 * std::f64::consts::PI.powi(2) / 0.6).ln();
    assert!((b1 - expected).abs() < 1e-12);
    assert!(ucbd_beta(1, 4096, 5, 0.1) > b1);
    assert!(ucbd_beta(3, 4096, 1, 0.1) > b1);
    assert!(ucbd_beta(1, 100, 1, 0.1) < b1);
}

#[test]
fn ucbd_probes_the_constraint_when_feasibility_is_unclear() {
    // objective well known, constraint observed only far away
    let p = KernelParams::new(KernelFamily::Matern52, 1.0, vec![0.3, 0.3], 1e-4).unwrap();
    let dense: Vec<Vec<f64>> = (0..25).map(|i| vec![(i % 5) as f64 / 4.0, (i / 5) as f64 / 4.0]).collect();
    let fy: Vec<f64> = dense.iter().map(|v| -(v[0] - 0.5).powi(2) - (v[1] - 0.5).powi(2)).collect();
    let obj = GpModel::new(p.clone(), dense, fy).unwrap();
    let con = GpModel::new(p, vec![vec![0.0, 0.0]], vec![-1.0]).unwrap();
    let b = ModelBundle::new(obj, vec![con]).unwrap();
    let cfg = UcbdConfig::new(CostVector::unit(2), -1e6);
    let choice = ucbd_step(&b, 1, &cfg, &Bounds::unit(2)).unwrap();
    assert_eq!(choice.task, 1);
    assert!(choice.optimistic);
}

#[test]
fn ucbd_picks_least_violated_constraint_when_nothing_is_optimistic() {
    // both constraints are confidently violated everywhere
    let p = KernelParams::new(KernelFamily::Matern52, 0.01, vec![5.0, 5.0], 1e-4).unwrap();
    let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![(i % 3) as f64 / 2.0, (i / 3) as f64 / 2.0]).collect();
    let obj = GpModel::new(p.clone(), pts.clone(), vec![0.0; 9]).unwrap();
    let c1 = GpModel::new(p.clone(), pts.clone(), vec![5.0; 9]).unwrap();
    let c2 = GpModel::new(p, pts, vec![1.0; 9]).unwrap();
    let b = ModelBundle::new(obj, vec![c1, c2]).unwrap();
    let cfg = UcbdConfig::new(CostVector::unit(3), -1e6);
    let choice = ucbd_step(&b, 1, &cfg, &Bounds::unit(2)).unwrap();
    assert!(!choice.optimistic);
    assert_eq!(choice.task, 2);
}
