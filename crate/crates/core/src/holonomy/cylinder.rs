use std::f64::consts::TAU;

use crate::calculus::{integrate_ode, OdeOptions, Solution};
use crate::error::{Error, Result};
use crate::manifold::{Chart, Connection};

use super::periodic_affine;

/// Layout of a connection on `ℝ × 𝕊¹` whose only nonzero symbols are
/// `Γʳₚₚ` and `Γᵖₚₚ`, functions of the periodic coordinate alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CylinderLayout {
    /// Index of the line coordinate.
    pub line: usize,
    /// Index of the circle coordinate.
    pub circle: usize,
}

impl CylinderLayout {
    pub fn from_chart(chart: &Chart) -> Result<Self> {
        let p = chart.periodic_indices();
        if chart.dim() != 2 || p.len() != 1 {
            return Err(Error::Structure("chart is not a cylinder ℝ × 𝕊¹".into()));
        }
        Ok(CylinderLayout { line: 1 - p[0], circle: p[0] })
    }

    pub fn point(&self, line: f64, circle: f64) -> Vec<f64> {
        let mut x = vec![0.0; 2];
        x[self.line] = line;
        x[self.circle] = circle;
        x
    }

    /// `(Γʳₚₚ, Γᵖₚₚ)` at circle coordinate `s`, line coordinate 0.
    pub fn symbols<C: Connection>(&self, c: &C, s: f64) -> Result<(f64, f64)> {
        let g = c.christoffel(&self.point(0.0, s))?;
        let p = self.circle;
        Ok((g[(self.line, p, p)], g[(p, p, p)]))
    }

    /// Largest violation of the cylinder structure over the grid.
    pub fn structure_defect<C: Connection>(&self, c: &C, grid: &[Vec<f64>]) -> Result<f64> {
        let (r, p) = (self.line, self.circle);
        let mut worst = 0.0f64;
        for x in grid {
            let g = c.christoffel(x)?;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        if !((k, i, j) == (r, p, p) || (k, i, j) == (p, p, p)) {
                            worst = worst.max(g[(k, i, j)].abs());
                        }
                    }
                }
            }
            let (a, b) = self.symbols(c, x[p])?;
            worst = worst.max((g[(r, p, p)] - a).abs()).max((g[(p, p, p)] - b).abs());
        }
        Ok(worst)
    }
}

/// `I₁(t) = −∫₀ᵗ Γᵖₚₚ` and `I₂(t) = ∫₀ᵗ Γʳₚₚ exp(I₁)`, tabulated over one
/// period and extended to the lift.
///
/// The transport along the circle from 0 to `t` is
/// `[[1, −I₂], [0, exp(I₁)]]` in (line, circle) components.
#[derive(Clone, Debug)]
pub struct CylinderIntegrals {
    pub layout: CylinderLayout,
    table: Solution<f64>,
}

impl CylinderIntegrals {
    pub fn new<C: Connection>(c: &C, layout: CylinderLayout, grid: &[Vec<f64>], tol: f64) -> Result<Self> {
        let defect = layout.structure_defect(c, grid)?;
        if defect > 1e-9 {
            return Err(Error::Structure(format!(
                "connection is not of cylinder form (defect {defect:e})"
            )));
        }
        let rhs = |s: f64, x: &[f64]| {
            let (gr, gp) = layout.symbols(c, s)?;
            Ok(vec![-gp, gr * x[0].exp()])
        };
        let opts = OdeOptions::default().with_tol(tol).with_max_step(0.002);
        let table = integrate_ode(rhs, 0.0, &[0.0, 0.0], TAU, &opts)?;
        Ok(CylinderIntegrals { layout, table })
    }

    /// `(I₁(2π), I₂(2π))`.
    pub fn period(&self) -> (f64, f64) {
        let e = self.table.last();
        (e[0], e[1])
    }

    /// `(I₁(t), I₂(t))` for any real `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let k = (t / TAU).floor();
        let r = t - k * TAU;
        let at = self.table.at(r);
        let (p1, p2) = self.period();
        (at[0] + k * p1, periodic_affine(p2, p1.exp(), k as i64, at[1]))
    }
}
