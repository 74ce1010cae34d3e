use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_ode, OdeOptions};
use crate::dual::Dual;
use crate::error::{check_dim, Error, Result};
use crate::lagrangian::LagrangianStructure;
use crate::linalg::{Mat, Tensor3};
use crate::scalar::Real;
use crate::manifold::{christoffel_from_parts, ricci, total_cov_derivative_parts, Chart, Connection};
use crate::vhc::ReducedDynamics;

use super::exact::canonical_legs;

/// Relative bound on `‖∇Ric − ω⊗Ric‖ / ‖Ric‖` for a recurrent Ricci tensor.
pub const RECURRENCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
}

/// Sign pattern of the symmetric parts of `samples`; degenerate or mixed
/// samples give [`Definiteness::Indefinite`].
pub fn definiteness(samples: &[Mat<f64>], tol: f64) -> Definiteness {
    let mut pos = true;
    let mut neg = true;
    for m in samples {
        let sym = (m + &m.transpose()).scale(0.5);
        let scale = sym.frobenius().max(f64::MIN_POSITIVE);
        for e in sym.symmetric_eigenvalues() {
            pos &= e > tol * scale;
            neg &= e < -tol * scale;
        }
    }
    match (pos && !samples.is_empty(), neg && !samples.is_empty()) {
        (true, _) => Definiteness::Positive,
        (_, true) => Definiteness::Negative,
        _ => Definiteness::Indefinite,
    }
}

/// Ricci tensor, its partials and the least-squares recurrence form at a point.
#[derive(Clone, Debug)]
pub struct RicciJet {
    pub ric: Mat<f64>,
    /// `[∂₀Ric, ∂₁Ric, …]`.
    pub dric: Vec<Mat<f64>>,
    pub omega: Vec<f64>,
    /// `‖∇Ric − ω⊗Ric‖ / ‖Ric‖`.
    pub residual: f64,
}

impl RicciJet {
    /// Whether `Ric` is invertible relative to its size.
    pub fn nonsingular(&self) -> bool {
        let f = self.ric.frobenius();
        f > 1e-8 && self.ric.det().is_ok_and(|d| d.abs() > 1e-8 * f.powi(self.ric.rows() as i32))
    }
}

/// `Ric`, `[∂ᵢRic]`, `∇Ric` and `ω` on any scalar type.
#[allow(clippy::type_complexity)]
fn ricci_parts<T: Real, C: Connection>(c: &C, x: &[T]) -> Result<(Mat<T>, Vec<Mat<T>>, Tensor3<T>, Vec<T>)> {
    let n = c.dim();
    check_dim(n, x.len())?;
    let mut ric = Mat::zeros(n, n);
    let mut dric = Vec::with_capacity(n);
    for i in 0..n {
        let xd: Vec<Dual<T>> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == i { Dual::variable(v) } else { Dual::constant(v) })
            .collect();
        let r = ricci(c, &xd)?;
        ric = r.map(|d| d.re);
        dric.push(r.map(|d| d.eps));
    }
    let nabla = total_cov_derivative_parts(&c.christoffel(x)?, &ric, &dric);
    let norm2 = ric.as_slice().iter().fold(T::zero(), |s, &v| s + v * v);
    let omega = (0..n)
        .map(|i| {
            let mut s = T::zero();
            for j in 0..n {
                for k in 0..n {
                    s += nabla[(i, j, k)] * ric[(j, k)];
                }
            }
            s / norm2
        })
        .collect();
    Ok((ric, dric, nabla, omega))
}

/// `ωᵢ = ⟨∇ᵢRic, Ric⟩ / ⟨Ric, Ric⟩`, the least-squares solution of
/// `(∇Ric)ᵢⱼₖ = ωᵢ Ricⱼₖ` over all tensor slots.
pub fn ricci_jet<C: Connection>(c: &C, x: &[f64]) -> Result<RicciJet> {
    let n = c.dim();
    let (ric, dric, nabla, omega) = ricci_parts(c, x)?;
    let norm2: f64 = ric.as_slice().iter().map(|v| v * v).sum();
    if !(norm2 > 0.0) {
        return Ok(RicciJet { ric, dric, omega: vec![0.0; n], residual: f64::INFINITY });
    }
    let mut res = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                res += (nabla[(i, j, k)] - omega[i] * ric[(j, k)]).powi(2);
            }
        }
    }
    Ok(RicciJet { ric, dric, omega, residual: (res / norm2).sqrt() })
}

/// Largest `|∂ᵢωⱼ − ∂ⱼωᵢ|` at `x`, differentiated exactly.
pub fn omega_curl<C: Connection>(c: &C, x: &[f64]) -> Result<f64> {
    let n = c.dim();
    check_dim(n, x.len())?;
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let xd: Vec<Dual<f64>> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == i { Dual::variable(v) } else { Dual::constant(v) })
            .collect();
        d[i] = ricci_parts(c, &xd)?.3.iter().map(|w| w.eps).collect();
    }
    let mut curl = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            curl = curl.max((d[i][j] - d[j][i]).abs());
        }
    }
    Ok(curl)
}

/// Pointwise recurrence data over a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceData {
    pub points: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    /// Largest relative recurrence residual.
    pub residual: f64,
    pub recurrent: bool,
    pub definiteness: Definiteness,
    pub tol: f64,
}

impl RecurrenceData {
    /// `+1` for a positive, `−1` for a negative definite Ricci tensor.
    pub fn sign(&self) -> Option<f64> {
        match self.definiteness {
            Definiteness::Positive => Some(1.0),
            Definiteness::Negative => Some(-1.0),
            Definiteness::Indefinite => None,
        }
    }
}

/// Solve `∇Ric = ω⊗Ric` on a grid of a two-dimensional connection.
///
/// Fails with [`Error::Structure`] when the Ricci tensor vanishes at every
/// grid point and with [`Error::Unsupported`] when it is singular at some
/// but not all of them. A residual above `tol` is reported through
/// `recurrent = false`.
pub fn recurrence_solve<C: Connection + Sync>(c: &C, grid: &[Vec<f64>], tol: f64) -> Result<RecurrenceData> {
    if c.dim() != 2 {
        return Err(Error::Unsupported(format!("Ricci recurrence needs dimension 2, got {}", c.dim())));
    }
    let jets = grid.par_iter().map(|x| ricci_jet(c, x)).collect::<Result<Vec<_>>>()?;
    let singular = jets.iter().filter(|j| !j.nonsingular()).count();
    if singular == jets.len() {
        return Err(Error::Structure("Ricci tensor is singular on the whole grid".into()));
    }
    if singular > 0 {
        let at = grid[jets.iter().position(|j| !j.nonsingular()).unwrap_or(0)].clone();
        return Err(Error::Unsupported(format!(
            "curvature vanishes at {singular} of {} grid points (first at {at:?}) but not everywhere",
            jets.len()
        )));
    }
    let residual = jets.iter().map(|j| j.residual).fold(0.0, f64::max);
    let rics: Vec<Mat<f64>> = jets.iter().map(|j| j.ric.clone()).collect();
    Ok(RecurrenceData {
        points: grid.to_vec(),
        omega: jets.into_iter().map(|j| j.omega).collect(),
        residual,
        recurrent: residual < tol,
        definiteness: definiteness(&rics, 1e-9),
        tol,
    })
}

/// `g = ±exp(−f + b) Ric` with `df = ω` and `f(base) = 0`.
///
/// `f` is integrated along the canonical axis-aligned path from `base`.
#[derive(Clone, Debug)]
pub struct RicciMetric<C> {
    pub conn: C,
    pub chart: Chart,
    pub base: Vec<f64>,
    pub sign: f64,
    pub b: f64,
    pub tol: f64,
}

fn sym(m: &Mat<f64>) -> Mat<f64> {
    (m + &m.transpose()).scale(0.5)
}

impl<C: Connection> RicciMetric<C> {
    /// Default base point: the chart center, `0` on periodic axes.
    pub fn default_base(chart: &Chart) -> Vec<f64> {
        (0..chart.dim())
            .map(|i| if chart.is_periodic(i) { 0.0 } else { 0.5 * (chart.lower[i] + chart.upper[i]) })
            .collect()
    }

    pub fn new(conn: C, chart: Chart, base: Vec<f64>, sign: f64, b: f64) -> Self {
        RicciMetric { conn, chart, base, sign, b, tol: 1e-11 }
    }

    /// Integrate `(f, extra…)` along the canonical path to `x`, where
    /// `extra'` along axis `a` is `extra(jet, f, point, a)`.
    pub(crate) fn integrate<F>(&self, x: &[f64], n_extra: usize, extra: F) -> Result<Vec<f64>>
    where
        F: Fn(&RicciJet, f64, &[f64], usize) -> Result<Vec<f64>>,
    {
        check_dim(self.conn.dim(), x.len())?;
        let mut state = vec![0.0; 1 + n_extra];
        for leg in canonical_legs(&self.chart, &self.base, x) {
            if leg.from == leg.to {
                continue;
            }
            let rhs = |s: f64, y: &[f64]| {
                let p = leg.point(s);
                let jet = ricci_jet(&self.conn, &p)?;
                let mut out = vec![jet.omega[leg.axis]];
                out.extend(extra(&jet, y[0], &p, leg.axis)?);
                Ok(out)
            };
            let h = (leg.to - leg.from).abs();
            let opts = OdeOptions::default().with_tol(self.tol).with_max_step(h.max(1e-3) / 2.0);
            state = integrate_ode(rhs, leg.from, &state, leg.to, &opts)?.last().to_vec();
        }
        Ok(state)
    }

    /// `f(x)`, the potential of `ω` normalized at the base point.
    pub fn log_factor(&self, x: &[f64]) -> Result<f64> {
        Ok(self.integrate(x, 0, |_, _, _, _| Ok(Vec::new()))?[0])
    }

    fn scale_at(&self, f: f64) -> f64 {
        self.sign * (self.b - f).exp()
    }

    pub fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
        let f = self.log_factor(x)?;
        let jet = ricci_jet(&self.conn, x)?;
        Ok(sym(&jet.ric).scale(self.scale_at(f)))
    }

    /// `∂ᵢg = ±exp(−f + b)(∂ᵢRic − ωᵢ Ric)`.
    pub fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
        let s = self.scale_at(self.log_factor(x)?);
        let jet = ricci_jet(&self.conn, x)?;
        let ric = sym(&jet.ric);
        Ok((0..x.len())
            .map(|i| (&sym(&jet.dric[i]) - &ric.scale(jet.omega[i])).scale(s))
            .collect())
    }

    /// Largest `|Γ(g) − Γ| / (1 + max|Γ|)` over the grid: how far the
    /// reconstructed metric's Levi-Civita connection is from the given one.
    pub fn compatibility_defect(&self, grid: &[Vec<f64>]) -> Result<f64>
    where
        C: Sync,
    {
        let worst = grid
            .par_iter()
            .map(|x| {
                let g = self.metric(x)?;
                let dg = self.metric_partials(x)?;
                let lc = christoffel_from_parts(&g, &dg)?;
                let gamma = self.conn.christoffel(x)?;
                let n = x.len();
                let mut w = 0.0f64;
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            w = w.max((lc[(k, i, j)] - gamma[(k, i, j)]).abs());
                        }
                    }
                }
                Ok(w / (1.0 + gamma.max_abs()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(worst.into_iter().fold(0.0, f64::max))
    }
}

/// Candidate metric `±exp(−f + b) Ric` from recurrence data.
///
/// Requires a recurrent, definite Ricci tensor; the sign follows the
/// definiteness. Fails with [`Error::NotExact`] when `ω` is not exact.
pub fn metric_from_ricci<C: Connection + Sync>(
    data: &RecurrenceData,
    conn: C,
    chart: Chart,
    base: Vec<f64>,
    b: f64,
) -> Result<RicciMetric<C>> {
    if !data.recurrent {
        return Err(Error::Structure(format!(
            "Ricci tensor is not recurrent (residual {:e} above {:e})",
            data.residual, data.tol
        )));
    }
    let sign = data
        .sign()
        .ok_or_else(|| Error::Structure("Ricci tensor is not definite on the grid".into()))?;
    let metric = RicciMetric::new(conn, chart, base, sign, b);
    let curls = data
        .points
        .par_iter()
        .map(|x| omega_curl(&metric.conn, x))
        .collect::<Result<Vec<f64>>>()?;
    let size = data.omega.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let closed = curls.into_iter().fold(0.0, f64::max) / (1.0 + size);
    let loops = super::generators_of(&metric.chart, &metric.base)
        .iter()
        .map(|lp| super::exact::loop_integral(&|x: &[f64]| Ok(ricci_jet(&metric.conn, x)?.omega), lp, 1e-12))
        .collect::<Result<Vec<f64>>>()?;
    if closed > 1e-6 || loops.iter().any(|v| v.abs() > 1e-6) {
        return Err(Error::NotExact(format!(
            "recurrence form: closedness {closed:e}, loop integrals {loops:?}"
        )));
    }
    Ok(metric)
}

/// Mechanical Lagrangian `(±exp(−f + b) Ric, P_C)` of reduced dynamics,
/// with `dP_C = g λ`.
#[derive(Clone, Debug)]
pub struct RicciLagrangian<R> {
    pub metric: RicciMetric<R>,
}

impl<R: ReducedDynamics> RicciLagrangian<R> {
    /// `ν = Ric λ`; the potential form is `μ = ±exp(−f + b) ν`.
    fn nu(jet: &RicciJet, lambda: &[f64]) -> Vec<f64> {
        sym(&jet.ric).mul_vec(lambda)
    }

    /// Largest `|dν − ω ∧ ν|` over the grid, which vanishes exactly when
    /// `μ` is closed.
    pub fn closedness_defect(&self, grid: &[Vec<f64>]) -> Result<f64> {
        let c = &self.metric.conn;
        let worst = grid
            .par_iter()
            .map(|x| {
                let jet = ricci_jet(c, x)?;
                let lam = c.lambda(x)?;
                let nu = Self::nu(&jet, &lam);
                let n = x.len();
                let mut dnu = vec![vec![0.0; n]; n];
                for i in 0..n {
                    let xd: Vec<Dual<f64>> = x
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| if k == i { Dual::variable(v) } else { Dual::constant(v) })
                        .collect();
                    let dl: Vec<f64> = c.lambda(&xd)?.iter().map(|d| d.eps).collect();
                    let a = sym(&jet.dric[i]).mul_vec(&lam);
                    let b = sym(&jet.ric).mul_vec(&dl);
                    dnu[i] = a.iter().zip(&b).map(|(p, q)| p + q).collect();
                }
                let mut w = 0.0f64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let curl = dnu[i][j] - dnu[j][i] - (jet.omega[i] * nu[j] - jet.omega[j] * nu[i]);
                        w = w.max(curl.abs());
                    }
                }
                Ok(w)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(worst.into_iter().fold(0.0, f64::max))
    }

    fn f_and_potential(&self, x: &[f64]) -> Result<(f64, f64)> {
        let m = &self.metric;
        let y = m.integrate(x, 1, |jet, f, p, axis| {
            let lam = m.conn.lambda(p)?;
            Ok(vec![m.scale_at(f) * Self::nu(jet, &lam)[axis]])
        })?;
        Ok((y[0], y[1]))
    }
}

impl<R: ReducedDynamics> LagrangianStructure for RicciLagrangian<R> {
    fn dim(&self) -> usize {
        self.metric.conn.dim()
    }

    fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
        self.metric.metric(x)
    }

    fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
        self.metric.metric_partials(x)
    }

    fn potential(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f_and_potential(x)?.1)
    }

    fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.metric.metric(x)?;
        Ok(g.mul_vec(&self.metric.conn.lambda(x)?))
    }

    fn energy(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let (f, p) = self.f_and_potential(x)?;
        let g = sym(&ricci_jet(&self.metric.conn, x)?.ric).scale(self.metric.scale_at(f));
        Ok(0.5 * g.bilinear(v, v) + p)
    }
}
