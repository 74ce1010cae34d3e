//! Small dense matrices and tensors generic over [`Real`].
//!
//! Factorizations that carry derivatives (LU solve) are implemented here;
//! `f64`-only spectral routines delegate to nalgebra.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Row-major construction.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn column_vector(v: &[T]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn diag(v: &[T]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `vᵀ A w`.
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        v.iter().zip(self.mul_vec(w)).fold(T::zero(), |acc, (&a, b)| acc + a * b)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.re().abs()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.re() * x.re()).sum::<f64>().sqrt()
    }

    /// Real parts as an `f64` matrix.
    pub fn value(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Real::re).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn lu(&self) -> Result<(Vec<T>, Vec<usize>)> {
        if self.rows != self.cols {
            return Err(Error::Dimension { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].re().abs().total_cmp(&a[j * n + k].re().abs()))
                .unwrap_or(k);
            if a[p * n + k].re().abs() <= 1e-14 * scale {
                return Err(Error::Singular(format!("pivot {k} of {n}x{n} matrix")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
        Ok((a, perm))
    }

    /// Solve `A x = b` by LU with partial pivoting on the real part.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        if b.len() != n {
            return Err(Error::Dimension { expected: n, got: b.len() });
        }
        let (lu, perm) = self.lu()?;
        let mut x: Vec<T> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= lu[i * n + i];
        }
        Ok(x)
    }

    /// Solve `A X = B` column by column.
    pub fn solve_mat(&self, b: &Mat<T>) -> Result<Mat<T>> {
        let mut out = Mat::zeros(self.rows, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j))?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve_mat(&Mat::identity(self.rows))
    }

    pub fn det(&self) -> Result<T> {
        match self.lu() {
            Ok((lu, perm)) => {
                let n = self.rows;
                let mut d = T::one();
                for i in 0..n {
                    d *= lu[i * n + i];
                }
                let mut p = perm.clone();
                let mut sign = T::one();
                for i in 0..n {
                    while p[i] != i {
                        let j = p[i];
                        p.swap(i, j);
                        sign = -sign;
                    }
                }
                Ok(d * sign)
            }
            Err(Error::Singular(_)) => Ok(T::zero()),
            Err(e) => Err(e),
        }
    }
}

impl Mat<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Eigenvalues of the symmetric part, increasing.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let sym = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Orthonormal basis (as columns) of the numerical nullspace.
    pub fn nullspace(&self, rel_tol: f64) -> Mat<f64> {
        let m = self.to_nalgebra();
        let n = self.cols;
        // pad to square so the SVD exposes all right singular vectors
        let padded = if m.nrows() < n {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (m.nrows(), n)).copy_from(&m);
            p
        } else {
            m
        };
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
        let cols: Vec<Vec<f64>> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] <= rel_tol * smax)
            .map(|k| v_t.row(k).iter().copied().collect())
            .collect();
        Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    pub fn is_positive_definite(&self) -> bool {
        self.symmetric_eigenvalues().first().is_some_and(|&l| l > 0.0)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "matrix product shape");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)] * o[(k, j)])
        })
    }
}

impl<T: Real> Mul for Mat<T> {
    type Output = Mat<T>;
    fn mul(self, o: Mat<T>) -> Mat<T> {
        &self * &o
    }
}

impl<T: Real> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), o.shape());
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + o[(i, j)])
    }
}

impl<T: Real> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.shape(), o.shape());
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - o[(i, j)])
    }
}

/// Rank-3 array with a uniform index range, stored as `[a][b][c]`.
///
/// For connections `Γ[(k, i, j)] = Γᵏᵢⱼ`; for covariant derivatives of
/// (0,2) tensors `∇F[(i, j, k)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize) -> Self {
        Tensor3 { n, data: vec![T::zero(); n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    t[(a, b, c)] = f(a, b, c);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.re().abs()).fold(0.0, f64::max)
    }

    pub fn value(&self) -> Tensor3<f64> {
        Tensor3 { n: self.n, data: self.data.iter().map(Real::re).collect() }
    }

    /// Contract the two lower slots: `Σᵢⱼ T[(k,i,j)] uⁱ vʲ`.
    pub fn contract(&self, u: &[T], v: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        s += self[(k, i, j)] * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Matrix `Mᵏⱼ = Σᵢ T[(k,i,j)] uⁱ`.
    pub fn contract_first(&self, u: &[T]) -> Mat<T> {
        let n = self.n;
        Mat::from_fn(n, n, |k, j| {
            (0..n).fold(T::zero(), |acc, i| acc + self[(k, i, j)] * u[i])
        })
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (a, b, c): (usize, usize, usize)) -> &T {
        &self.data[(a * self.n + b) * self.n + c]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    fn index_mut(&mut self, (a, b, c): (usize, usize, usize)) -> &mut T {
        &mut self.data[(a * self.n + b) * self.n + c]
    }
}

/// Rank-4 array stored as `[a][b][c][d]`; curvature uses `R[(l, i, j, k)] = Rˡᵢⱼₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor4<T> {
    pub fn zeros(n: usize) -> Self {
        Tensor4 { n, data: vec![T::zero(); n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.re().abs()).fold(0.0, f64::max)
    }
}

impl<T> Index<(usize, usize, usize, usize)> for Tensor4<T> {
    type Output = T;
    fn index(&self, (a, b, c, d): (usize, usize, usize, usize)) -> &T {
        &self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }
}

impl<T> IndexMut<(usize, usize, usize, usize)> for Tensor4<T> {
    fn index_mut(&mut self, (a, b, c, d): (usize, usize, usize, usize)) -> &mut T {
        &mut self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }
}
