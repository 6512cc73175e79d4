use std::collections::VecDeque;

use super::Bounds;

/// Outcome of one bounded local search (maximisation).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected limited-memory BFGS on a box, maximising `fg`.
///
/// `fg` returns the objective value and its gradient. Variables sitting on a
/// bound with the gradient pointing outwards are frozen for the quasi-Newton
/// direction; the step is a projected backtracking (Armijo) search.
pub fn quasi_newton_bounded<F>(mut fg: F, x0: &[f64], bounds: &Bounds, max_iters: usize) -> LocalResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let d = bounds.dim();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let (f0, g0) = fg(&x);
    let mut evaluations = 1;
    // minimise the negated objective
    let mut val = -f0;
    let mut grad: Vec<f64> = g0.iter().map(|g| -g).collect();
    if !val.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return LocalResult { x, value: f0, evaluations };
    }
    let widths = bounds.widths();
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);

    for _ in 0..max_iters {
        let free: Vec<bool> = (0..d)
            .map(|i| {
                let at_lo = x[i] <= bounds.lower()[i] && grad[i] > 0.0;
                let at_hi = x[i] >= bounds.upper()[i] && grad[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        let pg = (0..d).filter(|&i| free[i]).map(|i| grad[i].abs() * widths[i]).fold(0.0, f64::max);
        if pg <= 1e-12 * val.abs().max(1.0) {
            break;
        }

        // two-loop recursion on the free subspace
        let mut q: Vec<f64> = (0..d).map(|i| if free[i] { grad[i] } else { 0.0 }).collect();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = (0..d).map(|i| if free[i] { -q[i] } else { 0.0 }).collect();
        if dot(&dir, &grad) >= 0.0 {
            dir = (0..d).map(|i| if free[i] { -grad[i] } else { 0.0 }).collect();
        }
        let mut t = 1.0;
        if memory.is_empty() {
            let span = (0..d).map(|i| dir[i].abs() / widths[i]).fold(0.0, f64::max);
            if span > 0.1 {
                t = 0.1 / span;
            }
        }

        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            bounds.project(&mut trial);
            let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if step.iter().all(|s| *s == 0.0) {
                break;
            }
            let (ft, gt) = fg(&trial);
            evaluations += 1;
            let vt = -ft;
            if vt.is_finite() && vt <= val + ARMIJO * dot(&grad, &step) && gt.iter().all(|g| g.is_finite()) {
                accepted = Some((trial, vt, gt.iter().map(|g| -g).collect::<Vec<_>>(), step));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, v_new, g_new, step)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&step, &y);
        if sy > 1e-12 * dot(&step, &step).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((step, y, 1.0 / sy));
        }
        let decrease = val - v_new;
        x = x_new;
        val = v_new;
        grad = g_new;
        if decrease <= 1e-15 * val.abs().max(1.0) {
            break;
        }
    }
    LocalResult { x, value: -val, evaluations }
}

/// Projected Adam ascent. Returns the best iterate visited.
pub fn adam_projected<F>(mut fg: F, x0: &[f64], bounds: &Bounds, iterations: usize, step_fraction: f64) -> LocalResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-12;
    let d = bounds.dim();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let lr: Vec<f64> = bounds.widths().iter().map(|w| w * step_fraction).collect();
    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut best = LocalResult { x: x.clone(), value: f64::NEG_INFINITY, evaluations: 0 };
    for t in 1..=iterations.max(1) {
        let (f, g) = fg(&x);
        best.evaluations += 1;
        if f.is_finite() && f > best.value {
            best.value = f;
            best.x.copy_from_slice(&x);
        }
        if !f.is_finite() || g.iter().any(|gi| !gi.is_finite()) {
            break;
        }
        let c1 = 1.0 - B1.powi(t as i32);
        let c2 = 1.0 - B2.powi(t as i32);
        for i in 0..d {
            m[i] = B1 * m[i] + (1.0 - B1) * g[i];
            v[i] = B2 * v[i] + (1.0 - B2) * g[i] * g[i];
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            x[i] += lr[i] * mh / (vh.sqrt() + EPS);
        }
        bounds.project(&mut x);
    }
    if best.value == f64::NEG_INFINITY {
        best.value = f64::NAN;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bowl(x: &[f64]) -> (f64, Vec<f64>) {
        let c = [0.3, -0.2];
        let f = -(x[0] - c[0]).powi(2) - 4.0 * (x[1] - c[1]).powi(2);
        (f, vec![-2.0 * (x[0] - c[0]), -8.0 * (x[1] - c[1])])
    }

    #[test]
    fn quasi_newton_finds_interior_maximum() {
        let b = Bounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = quasi_newton_bounded(bowl, &[0.9, 0.9], &b, 100);
        assert!((r.x[0] - 0.3).abs() < 1e-6 && (r.x[1] + 0.2).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn quasi_newton_stops_on_bound() {
        let b = Bounds::new(vec![0.5, 0.0], vec![1.0, 1.0]).unwrap();
        let r = quasi_newton_bounded(bowl, &[0.9, 0.9], &b, 100);
        assert!((r.x[0] - 0.5).abs() < 1e-12 && r.x[1].abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn rosenbrock_converges() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            (-v, vec![2.0 * (1.0 - a) + 400.0 * a * (b - a * a), -200.0 * (b - a * a)])
        };
        let b = Bounds::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let r = quasi_newton_bounded(f, &[-1.2, 1.0], &b, 500);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn adam_climbs_and_tracks_best() {
        let b = Bounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let start = bowl(&[0.9, 0.9]).0;
        let r = adam_projected(bowl, &[0.9, 0.9], &b, 200, 0.05);
        assert!(r.value >= start);
        assert!((r.x[0] - 0.3).abs() < 0.02 && (r.x[1] + 0.2).abs() < 0.02, "{r:?}");
        assert!(b.contains(&r.x));
    }
}
