use serde::{Deserialize, Serialize};

use crate::engine::RunRecord;
use crate::error::{invalid, Result};
use crate::stats::percentile_sorted;

/// Median and quartile opportunity cost, and mean cumulative evaluations per
/// task, on a common budget grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub label: String,
    pub budget: Vec<f64>,
    pub median: Vec<f64>,
    pub p25: Vec<f64>,
    pub p75: Vec<f64>,
    /// `cumulative[t][i]`: mean evaluations of task `t` up to `budget[i]`.
    pub cumulative: Vec<Vec<f64>>,
    pub runs: usize,
}

/// Index of the last step with `spent <= b` (the first step if none).
fn last_at(run: &RunRecord, b: f64) -> usize {
    let tol = 1e-9 * b.abs().max(1.0);
    run.steps.iter().rposition(|s| s.spent <= b + tol).unwrap_or(0)
}

/// Aggregates runs on the grid `start, start + step, ...` covering the
/// largest final spend, where `start` is the smallest initial spend.
/// Opportunity cost is carried forward between steps.
pub fn aggregate(
    label: &str,
    runs: &[RunRecord],
    step: f64,
    num_tasks: usize,
    initial_design_size: usize,
) -> Result<AggregateCurve> {
    if runs.is_empty() || runs.iter().any(|r| r.steps.is_empty()) {
        return invalid("aggregation needs at least one non-empty run");
    }
    if step.is_nan() || step <= 0.0 {
        return invalid("budget grid step must be positive");
    }
    let start = runs.iter().map(|r| r.steps[0].spent).fold(f64::INFINITY, f64::min);
    let end = runs.iter().map(|r| r.steps.last().unwrap().spent).fold(f64::NEG_INFINITY, f64::max);
    let n_points = ((end - start) / step + 1e-9).floor() as usize + 1;
    let budget: Vec<f64> = (0..n_points).map(|i| start + step * i as f64).collect();

    // cumulative task counts per run, per step
    let counts: Vec<Vec<Vec<usize>>> = runs
        .iter()
        .map(|r| {
            let mut acc = vec![0usize; num_tasks];
            r.steps
                .iter()
                .map(|s| {
                    let reps = if s.step == 0 { initial_design_size } else { 1 };
                    for &t in &s.tasks {
                        acc[t] += reps;
                    }
                    acc.clone()
                })
                .collect()
        })
        .collect();

    let mut curve = AggregateCurve {
        label: label.to_string(),
        budget: budget.clone(),
        median: Vec::with_capacity(n_points),
        p25: Vec::with_capacity(n_points),
        p75: Vec::with_capacity(n_points),
        cumulative: vec![Vec::with_capacity(n_points); num_tasks],
        runs: runs.len(),
    };
    for &b in &budget {
        let idx: Vec<usize> = runs.iter().map(|r| last_at(r, b)).collect();
        let mut ocs: Vec<f64> = runs.iter().zip(&idx).map(|(r, &i)| r.steps[i].oc).collect();
        ocs.sort_by(f64::total_cmp);
        curve.median.push(percentile_sorted(&ocs, 50.0));
        curve.p25.push(percentile_sorted(&ocs, 25.0));
        curve.p75.push(percentile_sorted(&ocs, 75.0));
        for t in 0..num_tasks {
            let mean = counts.iter().zip(&idx).map(|(c, &i)| c[i][t] as f64).sum::<f64>() / runs.len() as f64;
            curve.cumulative[t].push(mean);
        }
    }
    Ok(curve)
}
