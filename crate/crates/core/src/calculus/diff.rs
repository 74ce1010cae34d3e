use crate::dual::{seed, Dual};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Relative step used by the finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-6;

/// Scalar field evaluable on any [`Real`], so dual numbers can pass through.
pub trait ScalarField {
    fn dim(&self) -> usize;
    fn eval<T: Real>(&self, x: &[T]) -> Result<T>;
}

pub trait VectorField {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn eval<T: Real>(&self, x: &[T]) -> Result<Vec<T>>;
}

pub trait MatrixField {
    fn dim(&self) -> usize;
    fn shape(&self) -> (usize, usize);
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>>;
}

fn finite<T: Real>(v: T, what: &str) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn check_point<T: Real>(dim: usize, x: &[T], i: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension { expected: dim, got: x.len() });
    }
    if i >= dim {
        return Err(Error::Domain(format!("partial index {i} out of range for dimension {dim}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("evaluation point".into()));
    }
    Ok(())
}

/// `∂f/∂xⁱ` by forward-mode propagation.
pub fn partial<T: Real, F: ScalarField>(f: &F, x: &[T], i: usize) -> Result<T> {
    check_point(f.dim(), x, i)?;
    finite(f.eval(&seed(x, i))?.eps, "partial derivative")
}

pub fn gradient<T: Real, F: ScalarField>(f: &F, x: &[T]) -> Result<Vec<T>> {
    (0..x.len()).map(|i| partial(f, x, i)).collect()
}

/// `∂²f/∂xⁱ∂xʲ` with nested duals.
pub fn second_partial<T: Real, F: ScalarField>(f: &F, x: &[T], i: usize, j: usize) -> Result<T> {
    check_point(f.dim(), x, i)?;
    check_point(f.dim(), x, j)?;
    let inner = seed(x, j);
    let outer: Vec<Dual<Dual<T>>> = inner
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let d = if k == i { Dual::constant(T::one()) } else { Dual::constant(T::zero()) };
            Dual::new(v, d)
        })
        .collect();
    finite(f.eval(&outer)?.eps.eps, "second partial derivative")
}

pub fn hessian<T: Real, F: ScalarField>(f: &F, x: &[T]) -> Result<Mat<T>> {
    let n = x.len();
    let mut h = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = second_partial(f, x, i, j)?;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Jacobian with rows indexed by components and columns by inputs.
pub fn jacobian<T: Real, V: VectorField>(v: &V, x: &[T]) -> Result<Mat<T>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        check_point(v.dim(), x, i)?;
        cols.push(v.eval(&seed(x, i))?);
    }
    let m = cols.first().map_or(0, Vec::len);
    let j = Mat::from_fn(m, n, |r, c| cols[c][r].eps);
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite("jacobian".into()))
    }
}

/// `[∂₀M, ∂₁M, …]`.
pub fn matrix_partials<T: Real, M: MatrixField>(m: &M, x: &[T]) -> Result<Vec<Mat<T>>> {
    (0..x.len())
        .map(|i| {
            check_point(m.dim(), x, i)?;
            let d = m.eval(&seed(x, i))?.map(|v| v.eps);
            if d.is_finite() {
                Ok(d)
            } else {
                Err(Error::NonFinite("matrix partial".into()))
            }
        })
        .collect()
}

/// `out[a][(i, j)] = ∂ᵢ∂ⱼvᵃ`, one nested-dual evaluation per pair `i ≤ j`.
pub fn vector_hessians<T: Real, V: VectorField>(v: &V, x: &[T]) -> Result<Vec<Mat<T>>> {
    let n = x.len();
    let mut out = vec![Mat::zeros(n, n); v.len()];
    for i in 0..n {
        for j in i..n {
            check_point(v.dim(), x, j)?;
            let p: Vec<Dual<Dual<T>>> = seed(x, j)
                .into_iter()
                .enumerate()
                .map(|(k, d)| Dual::new(d, Dual::constant(if k == i { T::one() } else { T::zero() })))
                .collect();
            for (a, val) in v.eval(&p)?.into_iter().enumerate() {
                let d = finite(val.eps.eps, "vector hessian")?;
                out[a][(i, j)] = d;
                out[a][(j, i)] = d;
            }
        }
    }
    Ok(out)
}

fn step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Central difference for black-box fields.
pub fn partial_fd(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], i: usize) -> Result<f64> {
    check_point(x.len(), x, i)?;
    let h = step(x[i], FD_STEP);
    let mut p = x.to_vec();
    p[i] = x[i] + h;
    let fp = f(&p)?;
    p[i] = x[i] - h;
    let fm = f(&p)?;
    finite((fp - fm) / (2.0 * h), "finite difference")
}

/// Nested central differences; the step is the cube root of machine epsilon scale.
pub fn second_partial_fd(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    i: usize,
    j: usize,
) -> Result<f64> {
    check_point(x.len(), x, i)?;
    check_point(x.len(), x, j)?;
    let hi = step(x[i], 1e-4);
    let hj = step(x[j], 1e-4);
    let eval = |di: f64, dj: f64| {
        let mut p = x.to_vec();
        p[i] += di;
        p[j] += dj;
        f(&p)
    };
    let v = if i == j {
        (eval(hi, 0.0)? - 2.0 * f(x)? + eval(-hi, 0.0)?) / (hi * hi)
    } else {
        (eval(hi, hj)? - eval(hi, -hj)? - eval(-hi, hj)? + eval(-hi, -hj)?) / (4.0 * hi * hj)
    };
    finite(v, "finite difference")
}
