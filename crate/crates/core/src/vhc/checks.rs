use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{gradient, matrix_partials, MatrixField, ScalarField};
use crate::error::{Error, Result};
use crate::lagrangian::LagrangianStructure;
use crate::linalg::Mat;
use crate::scalar::Real;

use super::{Constrained, ConstraintParametrization, ControlSystem};

/// Outcome of a regularity sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub regular: bool,
    /// Smallest `σ_min / σ_max` of `[dφ | D⁻¹B]` over the grid.
    pub margin: f64,
    pub worst: Vec<f64>,
}

/// `σ_min / σ_max` of the `n × n` matrix `[dφ(θ) | D⁻¹B(φ(θ))]`.
pub fn regularity_margin<S, P>(sys: &S, par: &P, theta: &[f64]) -> Result<f64>
where
    S: ControlSystem,
    P: ConstraintParametrization,
{
    let q = par.embed(theta)?;
    let b = sys.input_matrix(&q)?;
    if b.cols() + theta.len() != sys.dim() {
        return Err(Error::Dimension { expected: sys.dim() - b.cols(), got: theta.len() });
    }
    let dinv_b = sys.inertia(&q)?.solve_mat(&b)?;
    let s = par.tangent(theta)?.hstack(&dinv_b).singular_values();
    let (hi, lo) = (s[0], s[s.len() - 1]);
    Ok(if hi > 0.0 { lo / hi } else { 0.0 })
}

pub fn check_regularity<S, P>(sys: &S, par: &P, grid: &[Vec<f64>], tol: f64) -> Result<Regularity>
where
    S: ControlSystem,
    P: ConstraintParametrization,
{
    let margins: Vec<f64> = grid
        .par_iter()
        .map(|t| regularity_margin(sys, par, t))
        .collect::<Result<_>>()?;
    let (idx, margin) = margins
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Domain("empty grid".into()))?;
    Ok(Regularity { regular: margin > tol, margin, worst: grid[idx].clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orthogonality {
    pub orthogonal: bool,
    /// Largest Frobenius norm of `dφᵀ B` over the grid.
    pub max_norm: f64,
}

/// Whether the control forces are orthogonal to the constraint, `dφᵀ B = 0`.
pub fn orthogonality_check<S, P>(sys: &S, par: &P, grid: &[Vec<f64>], tol: f64) -> Result<Orthogonality>
where
    S: ControlSystem,
    P: ConstraintParametrization,
{
    let norms: Vec<f64> = grid
        .par_iter()
        .map(|t| {
            let q = par.embed(t)?;
            Ok((&par.tangent(t)?.transpose() * &sys.input_matrix(&q)?).frobenius())
        })
        .collect::<Result<_>>()?;
    let max_norm = norms.into_iter().fold(0.0, f64::max);
    Ok(Orthogonality { orthogonal: max_norm < tol, max_norm })
}

/// Restriction `(dφᵀ D dφ, P ∘ φ)` of the ambient Lagrangian to the constraint.
#[derive(Clone, Debug)]
pub struct RestrictedStructure<S, P>(Constrained<S, P>);

struct Pullback<'a, S, P>(&'a Constrained<S, P>);

impl<S: ControlSystem, P: ConstraintParametrization> MatrixField for Pullback<'_, S, P> {
    fn dim(&self) -> usize {
        self.0.reduced_dim()
    }
    fn shape(&self) -> (usize, usize) {
        (self.0.reduced_dim(), self.0.reduced_dim())
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>> {
        let q = self.0.par.embed(x)?;
        let j = self.0.par.tangent(x)?;
        Ok(&(&j.transpose() * &self.0.sys.inertia(&q)?) * &j)
    }
}

struct Restricted<'a, S, P>(&'a Constrained<S, P>);

impl<S: ControlSystem, P: ConstraintParametrization> ScalarField for Restricted<'_, S, P> {
    fn dim(&self) -> usize {
        self.0.reduced_dim()
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<T> {
        self.0.sys.potential(&self.0.par.embed(x)?)
    }
}

impl<S: ControlSystem, P: ConstraintParametrization> LagrangianStructure for RestrictedStructure<S, P> {
    fn dim(&self) -> usize {
        self.0.reduced_dim()
    }
    fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
        Pullback(&self.0).eval(x)
    }
    fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
        matrix_partials(&Pullback(&self.0), x)
    }
    fn potential(&self, x: &[f64]) -> Result<f64> {
        Restricted(&self.0).eval(x)
    }
    fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        gradient(&Restricted(&self.0), x)
    }
}

/// The restricted Lagrangian, available only when the forces are orthogonal
/// to the constraint on `grid`.
pub fn restricted_structure<S, P>(
    c: &Constrained<S, P>,
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<RestrictedStructure<S, P>>
where
    S: ControlSystem + Clone,
    P: ConstraintParametrization + Clone,
{
    let o = orthogonality_check(&c.sys, &c.par, grid, tol)?;
    if !o.orthogonal {
        return Err(Error::Structure(format!(
            "control forces are not orthogonal to the constraint (max |dφᵀB| = {:e})",
            o.max_norm
        )));
    }
    Ok(RestrictedStructure(c.clone()))
}
