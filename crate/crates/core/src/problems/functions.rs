//! The raw benchmark functions, objectives as written.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

fn check_box(name: &str, x: &[f64], lower: [f64; 2], upper: [f64; 2]) -> Result<()> {
    if x.len() != 2 {
        return invalid(format!("{name} takes 2 inputs, got {}", x.len()));
    }
    for i in 0..2 {
        if !(x[i] >= lower[i] && x[i] <= upper[i]) {
            return invalid(format!("{name}: x[{i}] = {} outside [{}, {}]", x[i], lower[i], upper[i]));
        }
    }
    Ok(())
}

pub(crate) fn mystery_objective(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    -2.0 - 0.01 * (x2 - x1 * x1).powi(2)
        - (1.0 - x1).powi(2)
        - 2.0 * (2.0 - x2).powi(2)
        - 7.0 * (0.5 * x1).sin() * (0.7 * x1 * x2).sin()
}

pub(crate) fn mystery_constraint(x: &[f64]) -> f64 {
    -(x[0] - x[1] - PI / 8.0).sin()
}

/// Mystery function on `[0,5]^2`: `(f, c)`, maximised as written.
pub fn mystery(x: &[f64]) -> Result<(f64, f64)> {
    check_box("mystery", x, [0.0, 0.0], [5.0, 5.0])?;
    Ok((mystery_objective(x), mystery_constraint(x)))
}

pub(crate) fn branin_objective(x: &[f64]) -> f64 {
    (x[0] - 10.0).powi(2) + (x[1] - 15.0).powi(2)
}

pub(crate) fn branin_constraint(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    (x2 - 5.1 / (4.0 * PI * PI) * x1 * x1 + 5.0 / PI * x1 - 6.0).powi(2)
        + 10.0 * (1.0 - 1.0 / (8.0 * PI)) * x1.cos()
        + 5.0
}

/// Constrained Branin on `[-5,10] x [0,15]`: `(f, c)` with `f` as written.
pub fn constrained_branin(x: &[f64]) -> Result<(f64, f64)> {
    check_box("constrained branin", x, [-5.0, 0.0], [10.0, 15.0])?;
    Ok((branin_objective(x), branin_constraint(x)))
}

pub(crate) fn tf2_objective(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2) + (x[1] - 0.5).powi(2)
}

pub(crate) fn tf2_c1(x: &[f64]) -> f64 {
    (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2) - 12.0
}

pub(crate) fn tf2_c2(x: &[f64]) -> f64 {
    10.0 * x[0] + x[1] - 7.0
}

pub(crate) fn tf2_c3(x: &[f64]) -> f64 {
    (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) - 0.2
}

/// Test function 2 on `[0,1]^2`: `(f, c1, c2, c3)` with `f` as written.
pub fn test_function_2(x: &[f64]) -> Result<(f64, f64, f64, f64)> {
    check_box("test function 2", x, [0.0, 0.0], [1.0, 1.0])?;
    Ok((tf2_objective(x), tf2_c1(x), tf2_c2(x), tf2_c3(x)))
}
