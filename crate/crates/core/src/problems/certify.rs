use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::definition::{Optimum, ProblemDefinition};
use crate::error::{invalid, Error, Result};
use crate::optim::{quasi_newton_bounded, Bounds};

/// Default grid resolution per dimension.
pub const CERTIFY_RESOLUTION: usize = 1000;

/// How the grid incumbent was polished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// Unconstrained local search, used when no constraint is near active.
    QuasiNewton,
    /// Feasible grid pattern search, then gradient ascent along the
    /// active constraint boundary.
    Boundary,
}

/// Grid search plus refinement result for a problem's constrained optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueOptimumCertificate {
    pub grid_resolution: usize,
    pub best_grid_value: f64,
    pub best_grid_point: Vec<f64>,
    pub refinement: Refinement,
    pub value: f64,
    pub x: Vec<f64>,
}

impl TrueOptimumCertificate {
    pub fn optimum(&self) -> Optimum {
        Optimum { value: self.value, x: self.x.clone() }
    }
}

/// Calls `visit` on every point of a `per_dim^d` grid over `[lower, upper]`.
fn for_each_grid_point(lower: &[f64], upper: &[f64], per_dim: usize, mut visit: impl FnMut(&[f64])) {
    let d = lower.len();
    let mut idx = vec![0usize; d];
    let mut x = lower.to_vec();
    let step: Vec<f64> = (0..d).map(|i| (upper[i] - lower[i]) / (per_dim - 1) as f64).collect();
    loop {
        for i in 0..d {
            x[i] = if idx[i] + 1 == per_dim { upper[i] } else { lower[i] + step[i] * idx[i] as f64 };
        }
        visit(&x);
        let mut i = 0;
        loop {
            if i == d {
                return;
            }
            idx[i] += 1;
            if idx[i] < per_dim {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn best_feasible(problem: &ProblemDefinition, lower: &[f64], upper: &[f64], per_dim: usize) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_grid_point(lower, upper, per_dim, |x| {
        if !problem.feasible_raw(x) {
            return;
        }
        let v = problem.objective_raw(x);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x.to_vec()));
        }
    });
    best
}

fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], b: &Bounds) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-7 * b.width(i);
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] = (x[i] + h).min(b.upper()[i]);
            dn[i] = (x[i] - h).max(b.lower()[i]);
            (f(&up) - f(&dn)) / (up[i] - dn[i])
        })
        .collect()
}

/// Newton projection of `y` onto `c_k = 0` for the active `k`.
fn retract(problem: &ProblemDefinition, active: &[usize], y: &mut [f64]) -> Result<()> {
    let b = problem.bounds();
    for _ in 0..8 {
        let c =
            DVector::from_iterator(active.len(), active.iter().map(|&k| problem.constraint(k, y).unwrap_or(f64::NAN)));
        if c.iter().all(|v| v.abs() < 1e-15) {
            break;
        }
        let jac = jacobian(problem, active, y);
        let Some(inv) = (&jac * jac.transpose()).try_inverse() else { break };
        let delta = jac.transpose() * (inv * c);
        for (yi, di) in y.iter_mut().zip(delta.iter()) {
            *yi -= di;
        }
        b.project(y);
    }
    Ok(())
}

fn jacobian(problem: &ProblemDefinition, active: &[usize], x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut j = DMatrix::zeros(active.len(), d);
    for (r, &k) in active.iter().enumerate() {
        let g = fd_gradient(|z| problem.constraint(k, z).unwrap_or(f64::NAN), x, problem.bounds());
        for i in 0..d {
            j[(r, i)] = g[i];
        }
    }
    j
}

/// Projected gradient ascent on the manifold of active constraints, with
/// every accepted point feasible.
fn ascend_on_boundary(problem: &ProblemDefinition, x0: &[f64], f0: f64) -> Result<(f64, Vec<f64>)> {
    let b = problem.bounds();
    let d = x0.len();
    let scale = b.widths().iter().copied().fold(0.0, f64::max);
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut step = 1e-3 * scale;
    for _ in 0..5000 {
        if step < 1e-15 * scale {
            break;
        }
        let cons = problem.constraints(&x)?;
        let active: Vec<usize> = (0..cons.len()).filter(|&k| cons[k] > -1e-9).collect();
        let g = DVector::from_vec(fd_gradient(|z| problem.objective_raw(z), &x, b));
        let p = if active.is_empty() {
            g
        } else {
            let jac = jacobian(problem, &active, &x);
            match (&jac * jac.transpose()).try_inverse() {
                Some(inv) => &g - jac.transpose() * (inv * (&jac * &g)),
                None => break,
            }
        };
        let norm = p.norm();
        if norm.is_nan() || norm <= 1e-14 {
            break;
        }
        let mut y: Vec<f64> = (0..d).map(|i| x[i] + step * p[i] / norm).collect();
        b.project(&mut y);
        retract(problem, &active, &mut y)?;
        if !problem.feasible_raw(&y) {
            // pull back towards the feasible incumbent
            let mut lo = 0.0;
            let mut hi = 1.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let z: Vec<f64> = (0..d).map(|i| x[i] + mid * (y[i] - x[i])).collect();
                if problem.feasible_raw(&z) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            y = (0..d).map(|i| x[i] + lo * (y[i] - x[i])).collect();
        }
        let fy = problem.objective_raw(&y);
        if fy > fx && problem.feasible_raw(&y) {
            x = y;
            fx = fy;
            step *= 2.0;
        } else {
            step *= 0.5;
        }
    }
    Ok((fx, x))
}

/// Certifies the feasible maximum by a `grid_resolution^d` grid search and
/// a local refinement from the best feasible grid point.
pub fn certify_optimum(problem: &ProblemDefinition, grid_resolution: usize) -> Result<TrueOptimumCertificate> {
    if grid_resolution < 2 {
        return invalid("grid resolution must be at least 2");
    }
    let b = problem.bounds();
    let (grid_value, grid_point) = best_feasible(problem, b.lower(), b.upper(), grid_resolution)
        .ok_or_else(|| Error::Numerical(format!("no feasible grid point for {}", problem.name())))?;

    let d = problem.dim();
    let cell: Vec<f64> = b.widths().iter().map(|w| w / (grid_resolution - 1) as f64).collect();
    let interior = problem.constraints(&grid_point)?.iter().all(|c| *c < -1e-6);

    let (mut value, mut x, mut refinement) = (grid_value, grid_point.clone(), Refinement::Boundary);
    if interior {
        let local = Bounds::new(
            (0..d).map(|i| (grid_point[i] - 2.0 * cell[i]).max(b.lower()[i])).collect(),
            (0..d).map(|i| (grid_point[i] + 2.0 * cell[i]).min(b.upper()[i])).collect(),
        )?;
        let fg = |z: &[f64]| {
            let h: Vec<f64> = cell.iter().map(|c| c * 1e-4).collect();
            let f0 = problem.objective_raw(z);
            let g = (0..d)
                .map(|i| {
                    let mut up = z.to_vec();
                    let mut dn = z.to_vec();
                    up[i] = (z[i] + h[i]).min(local.upper()[i]);
                    dn[i] = (z[i] - h[i]).max(local.lower()[i]);
                    (problem.objective_raw(&up) - problem.objective_raw(&dn)) / (up[i] - dn[i])
                })
                .collect();
            (f0, g)
        };
        let r = quasi_newton_bounded(fg, &grid_point, &local, 200);
        if r.value >= value && problem.feasible_raw(&r.x) {
            value = r.value;
            x = r.x;
            refinement = Refinement::QuasiNewton;
        }
    }
    // Feasible pattern search: move to the best point of a local grid while
    // that improves, otherwise shrink the window. It follows active
    // constraint boundaries and also polishes the local-search result.
    let mut half: Vec<f64> = cell.iter().map(|c| 2.0 * c).collect();
    let per_dim = if d <= 2 { 21 } else { 7 };
    for _ in 0..10_000 {
        if half.iter().zip(b.widths()).all(|(h, w)| *h < 1e-14 * w) {
            break;
        }
        let lo: Vec<f64> = (0..d).map(|i| (x[i] - half[i]).max(b.lower()[i])).collect();
        let hi: Vec<f64> = (0..d).map(|i| (x[i] + half[i]).min(b.upper()[i])).collect();
        match best_feasible(problem, &lo, &hi, per_dim) {
            Some((v, p)) if v > value => {
                value = v;
                x = p;
            }
            _ => half.iter_mut().for_each(|h| *h *= 0.25),
        }
    }
    let (v, p) = ascend_on_boundary(problem, &x, value)?;
    if v > value {
        value = v;
        x = p;
    }
    Ok(TrueOptimumCertificate {
        grid_resolution,
        best_grid_value: grid_value,
        best_grid_point: grid_point,
        refinement,
        value,
        x,
    })
}
