use nalgebra::DVector;

use super::fantasy_grid::{build_grid, observation_sd, FantasyGrid, FantasyMode};
use super::score::{PosteriorScore, SourceUpdate};
use super::{pf_from_moments, ModelBundle};
use crate::error::{invalid, Result};
use crate::optim::{maximize_from_candidates, sobol_sample, Bounds, MultistartConfig};

/// How the maximum of each fantasised posterior score is found.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSolver {
    /// Exact maximum over a fixed finite set of points.
    Discrete(Vec<Vec<f64>>),
    /// Maximum over the recommendation, the outer candidate and
    /// this many Sobol points, without local refinement.
    Screened(usize),
    /// Screen the recommendation, the outer candidate and `raw_samples`
    /// Sobol points, then refine the best `num_restarts` locally.
    Multistart(MultistartConfig),
}

struct TaskCache {
    w: Vec<DVector<f64>>,
    mean: Vec<f64>,
    var_std: Vec<f64>,
    pf: Vec<f64>,
}

/// Shared state for evaluating KG-type acquisitions of one bundle.
///
/// Posterior solves at the inner candidate points are computed once and
/// reused for every outer location and every fantasy, so each acquisition
/// value costs one solve per conditioned task plus the local refinements.
/// Evaluation is a pure function of the constructor arguments and `x`.
pub struct KgContext<'a> {
    bundle: &'a ModelBundle,
    bounds: Bounds,
    inner: InnerSolver,
    penalty: f64,
    x_r: Option<Vec<f64>>,
    candidates: Vec<Vec<f64>>,
    cache: Vec<TaskCache>,
    // per task: (mean in target units, standardised variance, forward solve) at x_r
    at_xr: Vec<(f64, f64, DVector<f64>)>,
    mean_max: f64,
}

#[derive(Clone, Copy)]
enum At {
    Candidate(usize),
    Recommendation,
    Outer,
}

struct Prepared {
    src: SourceUpdate,
    cov: Vec<f64>,
    cov_xr: f64,
}

impl<'a> KgContext<'a> {
    /// `x_r` is the current recommendation (required by cKG and dcKG) and
    /// `penalty` the infeasibility value `M` the score is measured against.
    pub fn new(
        bundle: &'a ModelBundle,
        bounds: &Bounds,
        inner: InnerSolver,
        penalty: f64,
        x_r: Option<&[f64]>,
        seed: u64,
    ) -> Result<Self> {
        let d = bundle.dim();
        if bounds.dim() != d {
            return invalid("box and models disagree on dimension");
        }
        if let Some(xr) = x_r {
            if !bounds.contains(xr) {
                return invalid("recommendation lies outside the box");
            }
        }
        let candidates = match &inner {
            InnerSolver::Discrete(points) => {
                if points.is_empty() || points.iter().any(|p| p.len() != d) {
                    return invalid("discrete inner set must be non-empty with matching dimension");
                }
                points.clone()
            }
            InnerSolver::Screened(raw) | InnerSolver::Multistart(MultistartConfig { raw_samples: raw, .. }) => {
                let seeds = match &inner {
                    InnerSolver::Multistart(cfg) => {
                        cfg.validate()?;
                        cfg.seed_points.as_slice()
                    }
                    _ => &[],
                };
                if *raw == 0 {
                    return invalid("inner search needs at least one raw sample");
                }
                let mut pts = Vec::with_capacity(raw + seeds.len() + 1);
                if let Some(xr) = x_r {
                    pts.push(xr.to_vec());
                }
                for p in seeds {
                    if p.len() != d {
                        return invalid("seed point dimension does not match the box");
                    }
                    let mut q = p.clone();
                    bounds.project(&mut q);
                    pts.push(q);
                }
                pts.extend(sobol_sample(d, *raw, seed)?.iter().map(|u| bounds.from_unit(u)));
                pts
            }
        };
        let mut cache = Vec::with_capacity(bundle.num_tasks());
        let mut at_xr = Vec::with_capacity(bundle.num_tasks());
        for t in 0..bundle.num_tasks() {
            let m = bundle.task(t);
            let mut tc = TaskCache {
                w: Vec::with_capacity(candidates.len()),
                mean: Vec::with_capacity(candidates.len()),
                var_std: Vec::with_capacity(candidates.len()),
                pf: Vec::with_capacity(candidates.len()),
            };
            for c in &candidates {
                let s = m.solve_point(c)?;
                let mean = m.to_target_mean(s.mean_std);
                tc.pf.push(pf_from_moments(mean, m.to_target_var(s.var_std)));
                tc.mean.push(mean);
                tc.var_std.push(s.var_std);
                tc.w.push(s.w);
            }
            cache.push(tc);
            if let Some(xr) = x_r {
                let s = m.solve_point(xr)?;
                at_xr.push((m.to_target_mean(s.mean_std), s.var_std, s.w));
            }
        }
        let mut ctx = Self {
            bundle,
            bounds: bounds.clone(),
            inner,
            penalty,
            x_r: x_r.map(<[f64]>::to_vec),
            candidates,
            cache,
            at_xr,
            mean_max: f64::NEG_INFINITY,
        };
        ctx.mean_max = ctx.current_mean_max()?;
        Ok(ctx)
    }

    pub fn bundle(&self) -> &ModelBundle {
        self.bundle
    }

    pub fn recommendation(&self) -> Option<&[f64]> {
        self.x_r.as_deref()
    }

    fn current_mean_max(&self) -> Result<f64> {
        let means = &self.cache[0].mean;
        match &self.inner {
            InnerSolver::Discrete(_) | InnerSolver::Screened(_) => {
                Ok(means.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            }
            InnerSolver::Multistart(cfg) => {
                let cands = self.candidates.iter().cloned().zip(means.iter().copied()).collect();
                let score = PosteriorScore::objective_only(self.bundle);
                let best = maximize_from_candidates(&score, &self.bounds, cfg, cands)?.value;
                Ok(self.at_xr.first().map_or(best, |(m, _, _)| best.max(*m)))
            }
        }
    }

    fn prepare(&self, x: &[f64], task: usize) -> Result<Prepared> {
        let m = self.bundle.task(task);
        let src = SourceUpdate::new(m, task, x)?;
        let cache = &self.cache[task];
        let cov = self.candidates.iter().zip(&cache.w).map(|(c, w)| m.params().k(c, x) - w.dot(&src.w_x)).collect();
        let cov_xr = match (&self.x_r, self.at_xr.get(task)) {
            (Some(xr), Some((_, _, w))) => m.params().k(xr, x) - w.dot(&src.w_x),
            _ => 0.0,
        };
        Ok(Prepared { src, cov, cov_xr })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.bundle.dim() {
            return invalid("acquisition point has the wrong dimension");
        }
        Ok(())
    }

    fn grid(&self, mode: FantasyMode, prepared: &[Option<Prepared>]) -> Result<FantasyGrid> {
        build_grid(mode, self.bundle.num_constraints(), |t| {
            let p = prepared[t].as_ref().expect("prepared source");
            let m = self.bundle.task(t);
            Ok((m.to_target_mean(p.src.mean_std_x), observation_sd(m, m.to_target_var(p.src.var_std_x))))
        })
    }

    /// Fantasised moments (target units) of task `t` at `at`.
    fn moments_at(&self, t: usize, at: At, base_x: &[(f64, f64)], fant: Option<(&Prepared, f64)>) -> (f64, f64) {
        let m = self.bundle.task(t);
        let (mean, var_std, cov) = match at {
            At::Candidate(r) => (self.cache[t].mean[r], self.cache[t].var_std[r], fant.map(|(p, _)| p.cov[r])),
            At::Recommendation => (self.at_xr[t].0, self.at_xr[t].1, fant.map(|(p, _)| p.cov_xr)),
            At::Outer => (base_x[t].0, base_x[t].1, fant.map(|(p, _)| p.src.var_std_x)),
        };
        match (fant, cov) {
            (Some((p, resid)), Some(c)) => {
                let mean = mean + m.scale() * c * resid / p.src.denom;
                let v = (var_std - c * c / p.src.denom).clamp(0.0, m.params().signal_variance);
                (mean, m.to_target_var(v))
            }
            _ => (mean, m.to_target_var(var_std)),
        }
    }

    /// Evaluates every fantasy of `grid`, returning per-fantasy
    /// `(max of fantasised score, fantasised score at x_r)`.
    fn fantasy_values(
        &self,
        x: &[f64],
        grid: &FantasyGrid,
        prepared: &[Option<Prepared>],
        use_constraints: bool,
    ) -> Result<Vec<(f64, f64)>> {
        let n_tasks = if use_constraints { self.bundle.num_tasks() } else { 1 };
        // current moments of every task at the outer point
        let base_x: Vec<(f64, f64)> = (0..n_tasks)
            .map(|t| match &prepared[t] {
                Some(p) => Ok((self.bundle.task(t).to_target_mean(p.src.mean_std_x), p.src.var_std_x)),
                None => {
                    let m = self.bundle.task(t);
                    let s = m.solve_point(x)?;
                    Ok((m.to_target_mean(s.mean_std), s.var_std))
                }
            })
            .collect::<Result<_>>()?;
        let inject_x = !matches!(self.inner, InnerSolver::Discrete(_));
        let mut out = Vec::with_capacity(grid.combined.len());
        let mut fants: Vec<Option<(&Prepared, f64)>> = vec![None; n_tasks];
        for desc in &grid.combined {
            fants.iter_mut().for_each(|f| *f = None);
            for (t, y) in &desc.values {
                if *t < n_tasks {
                    let p = prepared[*t].as_ref().expect("prepared source");
                    fants[*t] = Some((p, p.src.resid(self.bundle.task(*t), *y)));
                }
            }
            let score = |at: At, current_objective: bool| -> f64 {
                let mu = if current_objective { self.at_xr[0].0 } else { self.moments_at(0, at, &base_x, fants[0]).0 };
                let mut v = if use_constraints { mu - self.penalty } else { mu };
                for (t, f) in fants.iter().enumerate().skip(1) {
                    v *= match (at, f) {
                        (At::Candidate(r), None) => self.cache[t].pf[r],
                        _ => {
                            let (m, var) = self.moments_at(t, at, &base_x, *f);
                            pf_from_moments(m, var)
                        }
                    };
                }
                v
            };
            let raw: Vec<f64> = (0..self.candidates.len()).map(|r| score(At::Candidate(r), false)).collect();
            let mut best = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if inject_x {
                let at_x = score(At::Outer, false);
                best = best.max(at_x);
                if let InnerSolver::Multistart(cfg) = &self.inner {
                    let updates: Vec<(&SourceUpdate, f64)> =
                        fants.iter().flatten().map(|(p, resid)| (&p.src, *resid)).collect();
                    let objective = if use_constraints {
                        PosteriorScore::new(self.bundle, self.penalty)
                    } else {
                        PosteriorScore::objective_only(self.bundle)
                    }
                    .with_fantasies(updates);
                    let mut cands: Vec<(Vec<f64>, f64)> = self.candidates.iter().cloned().zip(raw).collect();
                    cands.insert(usize::from(self.x_r.is_some()), (x.to_vec(), at_x));
                    best = best.max(maximize_from_candidates(&objective, &self.bounds, cfg, cands)?.value);
                }
            }
            let at_xr = if self.x_r.is_some() { score(At::Recommendation, true) } else { f64::NAN };
            out.push((best, at_xr));
        }
        Ok(out)
    }

    /// Unconstrained knowledge gradient of the objective at `x`.
    pub fn kg(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut prepared: Vec<Option<Prepared>> = (0..self.bundle.num_tasks()).map(|_| None).collect();
        prepared[0] = Some(self.prepare(x, 0)?);
        let grid = self.grid(FantasyMode::SingleSource(0), &prepared)?;
        let vals = self.fantasy_values(x, &grid, &prepared, false)?;
        let mut current = self.mean_max;
        if !matches!(self.inner, InnerSolver::Discrete(_)) {
            let p = prepared[0].as_ref().unwrap();
            current = current.max(self.bundle.objective.to_target_mean(p.src.mean_std_x));
        }
        let avg = vals.iter().map(|(b, _)| b).sum::<f64>() / vals.len() as f64;
        Ok((avg - current).max(0.0))
    }

    fn require_xr(&self) -> Result<()> {
        if self.x_r.is_none() {
            return invalid("constrained knowledge gradient needs the current recommendation");
        }
        Ok(())
    }

    /// Constrained KG of a coupled evaluation of every task at `x`.
    pub fn ckg(&self, x: &[f64]) -> Result<f64> {
        self.require_xr()?;
        self.check_point(x)?;
        let prepared: Vec<Option<Prepared>> =
            (0..self.bundle.num_tasks()).map(|t| self.prepare(x, t).map(Some)).collect::<Result<_>>()?;
        let grid = self.grid(FantasyMode::Coupled, &prepared)?;
        let vals = self.fantasy_values(x, &grid, &prepared, true)?;
        Ok(vals.iter().map(|(b, s)| b - s).sum::<f64>() / vals.len() as f64)
    }

    /// Cost-normalised constrained KG of evaluating only task `k` at `x`.
    pub fn dckg_source(&self, x: &[f64], k: usize, cost: f64) -> Result<f64> {
        self.require_xr()?;
        self.check_point(x)?;
        if k >= self.bundle.num_tasks() {
            return invalid(format!("task {k} out of range"));
        }
        if !(cost > 0.0 && cost.is_finite()) {
            return invalid(format!("task cost must be positive, got {cost}"));
        }
        let mut prepared: Vec<Option<Prepared>> = (0..self.bundle.num_tasks()).map(|_| None).collect();
        prepared[k] = Some(self.prepare(x, k)?);
        let grid = self.grid(FantasyMode::SingleSource(k), &prepared)?;
        let vals = self.fantasy_values(x, &grid, &prepared, true)?;
        Ok(vals.iter().map(|(b, s)| b - s).sum::<f64>() / vals.len() as f64 / cost)
    }
}

/// Knowledge gradient of the objective model at `x`.
pub fn kg(bundle: &ModelBundle, bounds: &Bounds, x: &[f64], inner: &InnerSolver, seed: u64) -> Result<f64> {
    KgContext::new(bundle, bounds, inner.clone(), 0.0, None, seed)?.kg(x)
}

/// Constrained knowledge gradient (coupled evaluation) at `x`.
pub fn ckg(
    bundle: &ModelBundle,
    bounds: &Bounds,
    x: &[f64],
    x_r: &[f64],
    inner: &InnerSolver,
    penalty: f64,
    seed: u64,
) -> Result<f64> {
    KgContext::new(bundle, bounds, inner.clone(), penalty, Some(x_r), seed)?.ckg(x)
}

/// Decoupled constrained knowledge gradient of task `k` at `x`, divided by `cost`.
#[allow(clippy::too_many_arguments)]
pub fn dckg_source(
    bundle: &ModelBundle,
    bounds: &Bounds,
    x: &[f64],
    k: usize,
    x_r: &[f64],
    cost: f64,
    inner: &InnerSolver,
    penalty: f64,
    seed: u64,
) -> Result<f64> {
    KgContext::new(bundle, bounds, inner.clone(), penalty, Some(x_r), seed)?.dckg_source(x, k, cost)
}
