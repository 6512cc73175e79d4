//! Benchmark problems with certified optima.
//!
//! | name | d | constraints | sense |
//! |------|---|-------------|-------|
//! | `mystery` | 2 | 1 | maximise |
//! | `branin-c` | 2 | 1 | minimise written objective |
//! | `testfn2` | 2 | 3 | maximise |
//! | `mystery-redundant8` | 2 | 9 | maximise |

mod certify;
mod definition;
mod functions;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub use certify::{certify_optimum, Refinement, TrueOptimumCertificate, CERTIFY_RESOLUTION};
pub use definition::{Optimum, ProblemDefinition, Sense, TaskFn};
pub use functions::{constrained_branin, mystery, test_function_2};

use crate::engine::CostVector;
use crate::error::{Error, Result};
use crate::optim::Bounds;

/// Names accepted by [`problem`].
pub const PROBLEM_NAMES: [&str; 4] = ["mystery", "branin-c", "testfn2", "mystery-redundant8"];

/// Value of every redundant constraint in `mystery-redundant8`.
pub const REDUNDANT_VALUE: f64 = -1.0;

fn square(lo: [f64; 2], hi: [f64; 2]) -> Bounds {
    Bounds::new(lo.to_vec(), hi.to_vec()).expect("static box")
}

/// The named problem without a certified optimum.
pub fn problem_uncertified(name: &str) -> Result<ProblemDefinition> {
    use functions::*;
    let p = match name {
        "mystery" => ProblemDefinition::new(
            "mystery",
            square([0.0, 0.0], [5.0, 5.0]),
            Arc::new(mystery_objective),
            vec![Arc::new(mystery_constraint)],
            Sense::Maximize,
        ),
        "branin-c" => ProblemDefinition::new(
            "branin-c",
            square([-5.0, 0.0], [10.0, 15.0]),
            Arc::new(branin_objective),
            vec![Arc::new(branin_constraint)],
            Sense::MinimizeWritten,
        ),
        "testfn2" => ProblemDefinition::new(
            "testfn2",
            square([0.0, 0.0], [1.0, 1.0]),
            Arc::new(tf2_objective),
            vec![Arc::new(tf2_c1), Arc::new(tf2_c2), Arc::new(tf2_c3)],
            Sense::Maximize,
        ),
        "mystery-redundant8" => problem_uncertified("mystery")?.with_redundant_constraints(8, REDUNDANT_VALUE)?,
        other => return Err(Error::Unknown { kind: "problem", name: other.to_string() }),
    };
    Ok(p)
}

type CertCache = Mutex<HashMap<(String, Sense), Optimum>>;

fn cache() -> &'static CertCache {
    static CACHE: OnceLock<CertCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Attaches a certified optimum (computed once per process and sense).
pub fn certified(problem: ProblemDefinition) -> Result<ProblemDefinition> {
    let key = (problem.name().to_string(), problem.sense());
    let known = cache().lock().expect("certificate cache").get(&key).cloned();
    let opt = match known {
        Some(o) => o,
        None => {
            let o = certify_optimum(&problem, CERTIFY_RESOLUTION)?.optimum();
            cache().lock().expect("certificate cache").insert(key, o.clone());
            o
        }
    };
    problem.with_optimum(opt)
}

/// The named problem with its certified optimum attached.
pub fn problem(name: &str) -> Result<ProblemDefinition> {
    certified(problem_uncertified(name)?)
}

/// Equal costs first, then scenarios where one task costs five units.
///
/// Single-constraint problems get objective-heavy and constraint-heavy
/// variants, `testfn2` one per task, and the redundant variant the two
/// scenarios of its base problem.
pub fn cost_scenarios(problem: &ProblemDefinition) -> Vec<CostVector> {
    let n = problem.num_tasks();
    let heavy_tasks = if problem.name() == "testfn2" { n } else { 2.min(n) };
    let mut out = vec![CostVector::unit(n)];
    for t in 0..heavy_tasks {
        let mut c = vec![1.0; n];
        c[t] = 5.0;
        out.push(CostVector::new(c).expect("positive costs"));
    }
    out
}
