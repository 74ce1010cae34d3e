use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::quad_try;
use crate::error::{check_dim, Error, Result};
use crate::holonomy::LoopDescriptor;
use crate::manifold::Chart;

/// A one-form given by its components at a point.
pub type OneForm = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Axis-aligned piece of a canonical path: coordinate `axis` runs from
/// `from` to `to` while the others stay at `at`.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub axis: usize,
    pub from: f64,
    pub to: f64,
    pub at: Vec<f64>,
}

impl Leg {
    pub fn point(&self, s: f64) -> Vec<f64> {
        let mut p = self.at.clone();
        p[self.axis] = s;
        p
    }
}

/// Path from `base` to `x` moving one coordinate at a time: periodic
/// coordinates first, then the others in index order.
pub fn canonical_legs(chart: &Chart, base: &[f64], x: &[f64]) -> Vec<Leg> {
    let periodic = chart.periodic_indices();
    let order = periodic.iter().copied().chain((0..chart.dim()).filter(|i| !chart.is_periodic(*i)));
    let mut at = base.to_vec();
    let mut legs = Vec::new();
    for axis in order {
        legs.push(Leg { axis, from: at[axis], to: x[axis], at: at.clone() });
        at[axis] = x[axis];
    }
    legs
}

/// `∫ form` along the canonical path from `base` to `x`.
pub fn line_integral(
    form: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    chart: &Chart,
    base: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<f64> {
    check_dim(chart.dim(), x.len())?;
    let mut total = 0.0;
    for leg in canonical_legs(chart, base, x) {
        total += quad_try(|s| Ok(form(&leg.point(s))?[leg.axis]), leg.from, leg.to, tol)?;
    }
    Ok(total)
}

/// `∮ form` around a loop, piece by piece.
pub fn loop_integral(form: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync), lp: &LoopDescriptor, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for seg in &lp.segments {
        let mut knots = seg.breakpoints();
        let (a, b) = seg.span();
        knots.retain(|t| *t > a && *t < b);
        knots.insert(0, a);
        knots.push(b);
        for w in knots.windows(2) {
            total += quad_try(
                |t| {
                    let w = form(&seg.point(t))?;
                    Ok(w.iter().zip(seg.velocity(t)).map(|(p, q)| p * q).sum())
                },
                w[0],
                w[1],
                tol,
            )?;
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exactness {
    pub exact: bool,
    pub closed: bool,
    /// Largest `|∂ᵢωⱼ − ∂ⱼωᵢ| / (1 + max|ω|)` over the grid.
    pub closed_residual: f64,
    /// `∮ω` around each generator.
    pub loop_integrals: Vec<f64>,
    pub tol: f64,
}

/// Closedness by central differences on the grid, plus vanishing integrals
/// around each generator.
pub fn exactness_check(
    form: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    chart: &Chart,
    grid: &[Vec<f64>],
    generators: &[LoopDescriptor],
    tol: f64,
) -> Result<Exactness> {
    let n = chart.dim();
    let per_point = grid
        .par_iter()
        .map(|x| {
            check_dim(n, x.len())?;
            let w0 = form(x)?;
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                let h = 1e-4 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let (wp, wm) = (form(&xp)?, form(&xm)?);
                for j in 0..n {
                    d[i][j] = (wp[j] - wm[j]) / (2.0 * h);
                }
            }
            let mut curl = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    curl = curl.max((d[i][j] - d[j][i]).abs());
                }
            }
            Ok((curl, w0.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let curl = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
    let size = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
    let closed_residual = curl / (1.0 + size);
    let loop_integrals = generators
        .iter()
        .map(|lp| loop_integral(&form, lp, (tol * 1e-3).max(1e-13)))
        .collect::<Result<Vec<f64>>>()?;
    let closed = closed_residual < tol;
    Ok(Exactness {
        exact: closed && loop_integrals.iter().all(|v| v.abs() < tol),
        closed,
        closed_residual,
        loop_integrals,
        tol,
    })
}

/// Potential of an exact one-form, integrated along canonical paths.
#[derive(Clone)]
pub struct LinePotential {
    pub form: OneForm,
    pub chart: Chart,
    pub base: Vec<f64>,
    pub tol: f64,
}

impl std::fmt::Debug for LinePotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinePotential").field("base", &self.base).field("tol", &self.tol).finish()
    }
}

impl LinePotential {
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        line_integral(&*self.form, &self.chart, &self.base, x, self.tol)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.form)(x)
    }
}

/// `P` with `dP = form` and `P(base) = 0`, after an exactness check.
pub fn potential_from_oneform(
    form: OneForm,
    chart: &Chart,
    base: Vec<f64>,
    grid: &[Vec<f64>],
    generators: &[LoopDescriptor],
    tol: f64,
) -> Result<(LinePotential, Exactness)> {
    let ex = exactness_check(&*form, chart, grid, generators, tol)?;
    if !ex.exact {
        return Err(Error::NotExact(format!(
            "closedness residual {:e}, loop integrals {:?}",
            ex.closed_residual, ex.loop_integrals
        )));
    }
    Ok((LinePotential { form, chart: chart.clone(), base, tol: 1e-12 }, ex))
}
