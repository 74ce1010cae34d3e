use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_ode, OdeOptions, Solution};
use crate::dual::Dual;
use crate::error::{check_dim, Error, Result};
use crate::holonomy::{CylinderIntegrals, CylinderLayout};
use crate::lagrangian::LagrangianStructure;
use crate::linalg::Mat;
use crate::manifold::linspace;
use crate::vhc::ReducedDynamics;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSearchOptions {
    /// Interval swept for the free metric parameter `a`.
    pub a_range: (f64, f64),
    pub a_samples: usize,
    /// Second metric parameter; must exceed `a²`.
    pub b: f64,
    /// Points on `[0, 2π]` at which closedness is checked.
    pub s_samples: usize,
    /// Closedness and loop-integral threshold.
    pub tol: f64,
}

impl Default for CylinderSearchOptions {
    fn default() -> Self {
        CylinderSearchOptions { a_range: (-2.0, 2.0), a_samples: 401, b: 1.0, s_samples: 361, tol: 1e-6 }
    }
}

/// Outcome of the search over the metric family
/// `D_C = [[1, e^{−I₁}(I₂+a)], [·, e^{−2I₁}(I₂² + 2aI₂ + b)]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderReport {
    pub lagrangian: bool,
    /// Minimizer of the closedness residual.
    pub a: f64,
    pub b: f64,
    /// `max_s |∂ₛ μ_line|` at `a`.
    pub residual: f64,
    /// `(a, residual)` over the sweep.
    pub residual_curve: Vec<(f64, f64)>,
    /// `∮ μ` around the circle, when the closedness test passed.
    pub loop_integral: Option<f64>,
    /// Largest `|∂_line λ|` seen; must vanish for this family to apply.
    pub line_dependence: f64,
}

/// Closedness residual `r(a)(s) = A(s) + a B(s)` sampled on the circle.
#[derive(Clone, Debug)]
struct Closedness {
    a_coef: Vec<f64>,
    b_coef: Vec<f64>,
}

impl Closedness {
    fn residual(&self, a: f64) -> f64 {
        self.a_coef.iter().zip(&self.b_coef).map(|(p, q)| (p + a * q).abs()).fold(0.0, f64::max)
    }
}

/// `λ` and its derivatives along the circle and the line at `(0, s)`.
fn lambda_jet<R: ReducedDynamics>(r: &R, layout: CylinderLayout, s: f64) -> Result<[Vec<f64>; 3]> {
    let x = layout.point(0.0, s);
    let seeded = |axis: usize| -> Result<Vec<f64>> {
        let xd: Vec<Dual<f64>> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == axis { Dual::variable(v) } else { Dual::constant(v) })
            .collect();
        Ok(r.lambda(&xd)?.iter().map(|d| d.eps).collect())
    };
    Ok([r.lambda(&x)?, seeded(layout.circle)?, seeded(layout.line)?])
}

/// Metric of the cylinder family with the potential `P_C(θ) = J(s) + ℓ μ_line(s)`,
/// `J' = μ_circle`, where `ℓ` and `s` are the line and circle coordinates.
#[derive(Clone, Debug)]
pub struct CylinderMetric<R> {
    pub dynamics: R,
    pub integrals: CylinderIntegrals,
    pub a: f64,
    pub b: f64,
    j_table: Solution<f64>,
}

/// Values at circle coordinate `s`.
struct Pointwise {
    d12: f64,
    d22: f64,
    dd12: f64,
    dd22: f64,
    mu: [f64; 2],
    dmu_line: f64,
}

impl<R: ReducedDynamics> CylinderMetric<R> {
    fn pointwise(&self, s: f64) -> Result<Pointwise> {
        let layout = self.integrals.layout;
        let (i1, i2) = self.integrals.eval(s);
        let (gr, gp) = layout.symbols(&self.dynamics, s)?;
        let di1 = -gp;
        let di2 = gr * i1.exp();
        let (a, b) = (self.a, self.b);
        let e = (-i1).exp();
        let q = i2 * i2 + 2.0 * a * i2 + b;
        let d12 = e * (i2 + a);
        let d22 = e * e * q;
        let dd12 = e * (di2 - di1 * (i2 + a));
        let dd22 = e * e * (2.0 * i2 * di2 + 2.0 * a * di2 - 2.0 * di1 * q);
        let [lam, dlam, _] = lambda_jet(&self.dynamics, layout, s)?;
        let (l, c) = (lam[layout.line], lam[layout.circle]);
        let (dl, dc) = (dlam[layout.line], dlam[layout.circle]);
        let mu = [l + d12 * c, d12 * l + d22 * c];
        let dmu_line = dl + dd12 * c + d12 * dc;
        Ok(Pointwise { d12, d22, dd12, dd22, mu, dmu_line })
    }

    fn place(&self, line_line: f64, off: f64, circ_circ: f64) -> Mat<f64> {
        let l = self.integrals.layout;
        let mut m = Mat::zeros(2, 2);
        m[(l.line, l.line)] = line_line;
        m[(l.line, l.circle)] = off;
        m[(l.circle, l.line)] = off;
        m[(l.circle, l.circle)] = circ_circ;
        m
    }

    /// `J(s)` on the lift, using `J(s + 2π) = J(s) + J(2π)`.
    pub fn j(&self, s: f64) -> f64 {
        let k = (s / TAU).floor();
        let period = self.j_table.last()[0];
        self.j_table.at(s - k * TAU)[0] + k * period
    }

    /// `∮ μ` around the circle.
    pub fn loop_integral(&self) -> f64 {
        self.j_table.last()[0]
    }
}

impl<R: ReducedDynamics> LagrangianStructure for CylinderMetric<R> {
    fn dim(&self) -> usize {
        2
    }

    fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
        check_dim(2, x.len())?;
        let p = self.pointwise(x[self.integrals.layout.circle])?;
        Ok(self.place(1.0, p.d12, p.d22))
    }

    fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
        check_dim(2, x.len())?;
        let l = self.integrals.layout;
        let p = self.pointwise(x[l.circle])?;
        let mut out = vec![Mat::zeros(2, 2); 2];
        out[l.circle] = self.place(0.0, p.dd12, p.dd22);
        Ok(out)
    }

    fn potential(&self, x: &[f64]) -> Result<f64> {
        check_dim(2, x.len())?;
        let l = self.integrals.layout;
        let p = self.pointwise(x[l.circle])?;
        Ok(self.j(x[l.circle]) + x[l.line] * p.mu[0])
    }

    fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(2, x.len())?;
        let l = self.integrals.layout;
        let p = self.pointwise(x[l.circle])?;
        let mut g = vec![0.0; 2];
        g[l.line] = p.mu[0];
        g[l.circle] = p.mu[1] + x[l.line] * p.dmu_line;
        Ok(g)
    }
}

/// Search the metric family of a flat connection on `ℝ × 𝕊¹` with trivial
/// generator holonomy for a member whose potential form `μ = D_C λ` is exact.
///
/// Closedness of `μ` reduces to `∂ₛ[λ_line + e^{−I₁}(I₂+a)λ_circle] = 0`,
/// which is affine in `a`; the sweep locates the minimizer of its sup norm
/// and a ternary search refines it.
pub fn cylinder_lagrangian_search<R: ReducedDynamics + Clone + Sync>(
    r: &R,
    integrals: &CylinderIntegrals,
    opts: &CylinderSearchOptions,
) -> Result<(CylinderReport, Option<CylinderMetric<R>>)> {
    let layout = integrals.layout;
    let (p1, p2) = integrals.period();
    if p1.abs() > 1e-7 || p2.abs() > 1e-7 {
        return Err(Error::Unsupported(format!(
            "generator transport is not the identity (I₁ = {p1:e}, I₂ = {p2:e})"
        )));
    }
    let s = linspace(0.0, TAU, opts.s_samples.max(2));
    let rows = s
        .par_iter()
        .map(|&si| {
            let [lam, dlam, dline] = lambda_jet(r, layout, si)?;
            let (gr, gp) = layout.symbols(r, si)?;
            let (i1, i2) = integrals.eval(si);
            let di1 = -gp;
            let di2 = gr * i1.exp();
            let e = (-i1).exp();
            let (l, c) = (lam[layout.line], lam[layout.circle]);
            let (dl, dc) = (dlam[layout.line], dlam[layout.circle]);
            let a_coef = dl - di1 * e * i2 * c + e * di2 * c + e * i2 * dc;
            let b_coef = -di1 * e * c + e * dc;
            let scale = 1.0 + l.abs() + c.abs();
            let line_dep = dline.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
            Ok((a_coef, b_coef, line_dep))
        })
        .collect::<Result<Vec<_>>>()?;
    let line_dependence = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if line_dependence > 1e-8 {
        return Err(Error::Structure(format!(
            "λ depends on the line coordinate (|∂λ| up to {line_dependence:e})"
        )));
    }
    let cl = Closedness {
        a_coef: rows.iter().map(|r| r.0).collect(),
        b_coef: rows.iter().map(|r| r.1).collect(),
    };
    let grid = linspace(opts.a_range.0, opts.a_range.1, opts.a_samples.max(3));
    let residual_curve: Vec<(f64, f64)> = grid.par_iter().map(|&a| (a, cl.residual(a))).collect();
    let k = residual_curve
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .map_or(0, |(i, _)| i);
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if cl.residual(m1) <= cl.residual(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let a = 0.5 * (lo + hi);
    let residual = cl.residual(a);
    let b = if opts.b > a * a { opts.b } else { a * a + 1.0 };
    let mut report = CylinderReport {
        lagrangian: false,
        a,
        b,
        residual,
        residual_curve,
        loop_integral: None,
        line_dependence,
    };
    if residual >= opts.tol {
        return Ok((report, None));
    }
    let mut metric = CylinderMetric {
        dynamics: r.clone(),
        integrals: integrals.clone(),
        a,
        b,
        j_table: Solution { t: vec![0.0], x: vec![vec![0.0]], dx: vec![vec![0.0]] },
    };
    let ode = OdeOptions::default().with_tol(1e-12).with_max_step(0.005);
    metric.j_table = integrate_ode(|si, _| Ok(vec![metric.pointwise(si)?.mu[1]]), 0.0, &[0.0], TAU, &ode)?;
    let lp = metric.loop_integral();
    report.loop_integral = Some(lp);
    report.lagrangian = lp.abs() < opts.tol;
    Ok((report, Some(metric)))
}
