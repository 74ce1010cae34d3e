//! Differential geometry in a single chart: Christoffel symbols, covariant
//! derivatives, curvature, Ricci tensor and total covariant derivatives of
//! (0,2) tensor fields.
//!
//! Index conventions: `Γ[(k, i, j)] = Γᵏᵢⱼ`, `R[(l, i, j, k)] = Rˡᵢⱼₖ` and
//! `Ric_ij = Σₖ Rᵏₖᵢⱼ`.

mod chart;

pub use chart::{linspace, wrap_angle, Chart};

use crate::calculus::{jacobian, matrix_partials, CurveSampler, MatrixField, VectorField};
use crate::dual::{seed, Dual};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{Mat, Tensor3, Tensor4};
use crate::scalar::Real;

/// Affine connection given by its Christoffel symbols in one chart.
pub trait Connection {
    fn dim(&self) -> usize;
    fn christoffel<T: Real>(&self, x: &[T]) -> Result<Tensor3<T>>;
}

impl<C: Connection> Connection for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn christoffel<T: Real>(&self, x: &[T]) -> Result<Tensor3<T>> {
        (**self).christoffel(x)
    }
}

/// The connection with all symbols zero.
#[derive(Clone, Copy, Debug)]
pub struct FlatConnection(pub usize);

impl Connection for FlatConnection {
    fn dim(&self) -> usize {
        self.0
    }
    fn christoffel<T: Real>(&self, x: &[T]) -> Result<Tensor3<T>> {
        check_dim(self.0, x.len())?;
        Ok(Tensor3::zeros(self.0))
    }
}

/// Levi-Civita connection of a metric field.
#[derive(Clone, Debug)]
pub struct LeviCivita<M>(pub M);

impl<M: MatrixField> Connection for LeviCivita<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn christoffel<T: Real>(&self, x: &[T]) -> Result<Tensor3<T>> {
        christoffel_from_metric(&self.0, x)
    }
}

/// `Γᵏᵢⱼ = ½ Σₗ gᵏˡ (∂ᵢg_jl + ∂ⱼg_il − ∂ₗg_ij)` from a metric and its partials.
pub fn christoffel_from_parts<T: Real>(g: &Mat<T>, dg: &[Mat<T>]) -> Result<Tensor3<T>> {
    let n = g.rows();
    check_dim(n, dg.len())?;
    let ginv = g.inverse()?;
    let half = T::c(0.5);
    let mut first = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                first[(l, i, j)] = half * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
        }
    }
    Ok(Tensor3::from_fn(n, |k, i, j| {
        (0..n).fold(T::zero(), |acc, l| acc + ginv[(k, l)] * first[(l, i, j)])
    }))
}

pub fn christoffel_from_metric<T: Real, M: MatrixField>(g: &M, x: &[T]) -> Result<Tensor3<T>> {
    check_dim(g.dim(), x.len())?;
    let gx = g.eval(x)?;
    let dg = matrix_partials(g, x)?;
    christoffel_from_parts(&gx, &dg)
}

/// Christoffel symbols at `x` together with `∂ᵢΓ` for every direction `i`.
pub fn christoffel_with_partials<T: Real, C: Connection>(
    c: &C,
    x: &[T],
) -> Result<(Tensor3<T>, Vec<Tensor3<T>>)> {
    let n = c.dim();
    check_dim(n, x.len())?;
    let mut gamma = None;
    let mut partials = Vec::with_capacity(n);
    for i in 0..n {
        let g: Tensor3<Dual<T>> = c.christoffel(&seed(x, i))?;
        if gamma.is_none() {
            gamma = Some(Tensor3::from_fn(n, |a, b, d| g[(a, b, d)].re));
        }
        partials.push(Tensor3::from_fn(n, |a, b, d| g[(a, b, d)].eps));
    }
    let gamma = match gamma {
        Some(g) => g,
        None => c.christoffel(x)?,
    };
    Ok((gamma, partials))
}

/// `∇_Y Z = Σₖ (Y(zₖ) + Σ Γᵏᵢⱼ yⁱ zʲ) ∂ₖ`.
pub fn covariant_derivative<T: Real, C: Connection, Y: VectorField, Z: VectorField>(
    c: &C,
    y: &Y,
    z: &Z,
    x: &[T],
) -> Result<Vec<T>> {
    let yv = y.eval(x)?;
    let zv = z.eval(x)?;
    let jz = jacobian(z, x)?;
    let dz = jz.mul_vec(&yv);
    let gamma = c.christoffel(x)?;
    let corr = gamma.contract(&yv, &zv);
    Ok(dz.iter().zip(corr).map(|(&a, b)| a + b).collect())
}

/// `γ̈ᵏ + Σ Γᵏᵢⱼ γ̇ⁱ γ̇ʲ`; zero along geodesics.
pub fn geodesic_residual<C: Connection>(c: &C, curve: &dyn CurveSampler, t: f64) -> Result<Vec<f64>> {
    let (a, b) = curve.span();
    if curve.breakpoints().iter().any(|&s| (s - t).abs() < 1e-9) {
        return Err(Error::Domain(format!("t = {t} is a breakpoint of the curve")));
    }
    if t < a || t > b {
        return Err(Error::Domain(format!("t = {t} outside [{a}, {b}]")));
    }
    let p = curve.point(t);
    let v = curve.velocity(t);
    let acc = curve.acceleration(t);
    let gamma = c.christoffel(&p)?;
    Ok(acc.iter().zip(gamma.contract(&v, &v)).map(|(a, g)| a + g).collect())
}

/// `Rˡᵢⱼₖ = ∂ᵢΓˡⱼₖ − ∂ⱼΓˡᵢₖ + Σₘ (Γᵐⱼₖ Γˡᵢₘ − Γᵐᵢₖ Γˡⱼₘ)`.
pub fn curvature<T: Real, C: Connection>(c: &C, x: &[T]) -> Result<Tensor4<T>> {
    let n = c.dim();
    let (g, dg) = christoffel_with_partials(c, x)?;
    let mut r = Tensor4::zeros(n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dg[i][(l, j, k)] - dg[j][(l, i, k)];
                    for m in 0..n {
                        v += g[(m, j, k)] * g[(l, i, m)] - g[(m, i, k)] * g[(l, j, m)];
                    }
                    r[(l, i, j, k)] = v;
                }
            }
        }
    }
    Ok(r)
}

/// `Ric_ij = Σₖ Rᵏₖᵢⱼ`.
pub fn ricci<T: Real, C: Connection>(c: &C, x: &[T]) -> Result<Mat<T>> {
    let n = c.dim();
    let r = curvature(c, x)?;
    Ok(Mat::from_fn(n, n, |i, j| (0..n).fold(T::zero(), |acc, k| acc + r[(k, k, i, j)])))
}

/// Largest `|Rˡᵢⱼₖ|` over a set of points.
pub fn max_curvature<C: Connection>(c: &C, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        worst = worst.max(curvature(c, p)?.max_abs());
    }
    Ok(worst)
}

/// `(∇F)ᵢⱼₖ = ∂ᵢFⱼₖ − Σₘ Γᵐᵢⱼ Fₘₖ − Σₘ Γᵐᵢₖ Fⱼₘ` from precomputed parts.
pub fn total_cov_derivative_parts<T: Real>(gamma: &Tensor3<T>, f: &Mat<T>, df: &[Mat<T>]) -> Tensor3<T> {
    let n = gamma.dim();
    Tensor3::from_fn(n, |i, j, k| {
        let mut v = df[i][(j, k)];
        for m in 0..n {
            v -= gamma[(m, i, j)] * f[(m, k)] + gamma[(m, i, k)] * f[(j, m)];
        }
        v
    })
}

pub fn total_cov_derivative_02<T: Real, C: Connection, F: MatrixField>(
    c: &C,
    f: &F,
    x: &[T],
) -> Result<Tensor3<T>> {
    let gamma = c.christoffel(x)?;
    let fx = f.eval(x)?;
    let df = matrix_partials(f, x)?;
    Ok(total_cov_derivative_parts(&gamma, &fx, &df))
}

/// Ricci tensor of a connection as an evaluable (0,2) field.
#[derive(Clone, Debug)]
pub struct RicciField<C>(pub C);

impl<C: Connection> MatrixField for RicciField<C> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn shape(&self) -> (usize, usize) {
        (self.0.dim(), self.0.dim())
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>> {
        ricci(&self.0, x)
    }
}
