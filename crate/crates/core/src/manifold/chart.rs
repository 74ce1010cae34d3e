use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Single coordinate chart. Periodic coordinates have period 2π and are
/// reported in `[-π, π)`; the others are bounded by `lower`/`upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub periodic: Vec<bool>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Chart {
    pub fn new(periodic: Vec<bool>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert!(periodic.len() == lower.len() && lower.len() == upper.len(), "chart bounds");
        Chart { periodic, lower, upper }
    }

    /// `ℝⁿ` restricted to the sampling box `[-half_width, half_width]ⁿ`.
    pub fn euclidean(n: usize, half_width: f64) -> Self {
        Chart::new(vec![false; n], vec![-half_width; n], vec![half_width; n])
    }

    /// Chart with the given periodic flags; bounded coordinates get `[-w, w]`.
    pub fn with_flags(periodic: &[bool], half_width: f64) -> Self {
        let lower = periodic.iter().map(|&p| if p { -PI } else { -half_width }).collect();
        let upper = periodic.iter().map(|&p| if p { PI } else { half_width }).collect();
        Chart::new(periodic.to_vec(), lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.periodic.len()
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic[i]
    }

    pub fn periodic_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.periodic[i]).collect()
    }

    /// Reduce periodic coordinates into `[-π, π)`.
    pub fn wrap(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.periodic)
            .map(|(&v, &p)| if p { wrap_angle(v) } else { v })
            .collect()
    }

    /// Strict containment for bounded coordinates; periodic ones always pass.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| {
                v.is_finite() && (self.periodic[i] || (v > self.lower[i] && v < self.upper[i]))
            })
    }

    /// Tensor grid with `n` points per axis. Bounded axes are sampled on
    /// `[lower + margin, upper - margin]`; periodic axes on `[-π, π)`.
    pub fn grid(&self, n: usize, margin: f64) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                if self.periodic[i] {
                    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
                } else {
                    linspace(self.lower[i] + margin, self.upper[i] - margin, n)
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

pub fn wrap_angle(v: f64) -> f64 {
    (v + PI).rem_euclid(2.0 * PI) - PI
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}
