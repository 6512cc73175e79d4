use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Axis-aligned box `lower[i] <= x[i] <= upper[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return invalid(format!(
                "box needs matching non-empty bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            ));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid(format!("box dimension {i} has lower {lo} >= upper {hi}"));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        Self { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, lo), hi)| *lo <= *v && *v <= *hi)
    }

    /// Clips `x` onto the box in place.
    pub fn project(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Maps a point of the unit cube onto the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(i, ui)| self.lower[i] + ui * self.width(i)).collect()
    }

    /// Regular grid with `per_dim` points per axis (endpoints included).
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let per_dim = per_dim.max(2);
        let total = per_dim.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut p = Vec::with_capacity(d);
            for i in 0..d {
                let j = idx % per_dim;
                idx /= per_dim;
                p.push(self.lower[i] + self.width(i) * j as f64 / (per_dim - 1) as f64);
            }
            out.push(p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_box() {
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
    }

    #[test]
    fn projection_and_grid() {
        let b = Bounds::new(vec![0.0, -1.0], vec![5.0, 1.0]).unwrap();
        let mut x = vec![7.0, -3.0];
        b.project(&mut x);
        assert_eq!(x, vec![5.0, -1.0]);
        let g = b.grid(3);
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|p| b.contains(p)));
        assert_eq!(g[0], vec![0.0, -1.0]);
        assert_eq!(g[8], vec![5.0, 1.0]);
    }
}
