use crate::error::{check_dim, Error, Result};
use crate::linalg::{Mat, Tensor3};
use crate::manifold::{christoffel_from_parts, Chart, Connection};
use crate::scalar::Real;

use super::{ConstraintParametrization, ControlSystem, ReducedDynamics};

/// A control system together with a regular constraint.
#[derive(Clone, Debug)]
pub struct Constrained<S, P> {
    pub sys: S,
    pub par: P,
}

/// Everything the constrained dynamics needs at one point `θ`.
#[derive(Clone, Debug)]
pub struct InducedData<T> {
    pub q: Vec<T>,
    pub tangent: Mat<T>,
    /// `(B⊥ D dφ)⁻¹ B⊥ D`, which maps ambient vectors to `θ`-components.
    pub sigma: Mat<T>,
    pub gamma: Tensor3<T>,
    pub lambda: Vec<T>,
}

impl<S: ControlSystem, P: ConstraintParametrization> Constrained<S, P> {
    pub fn new(sys: S, par: P) -> Result<Self> {
        let (n, m, k) = (sys.dim(), sys.inputs(), par.chart().dim());
        check_dim(n, par.ambient_dim())?;
        if m == 0 || m >= n || k != n - m {
            return Err(Error::InvalidModel(format!(
                "constraint of dimension {k} does not match n = {n}, m = {m}"
            )));
        }
        Ok(Constrained { sys, par })
    }

    pub fn reduced_dim(&self) -> usize {
        self.sys.dim() - self.sys.inputs()
    }

    /// `(B⊥ D dφ)⁻¹ B⊥ D` at `θ`, or a singularity error where regularity fails.
    fn sigma_at<T: Real>(&self, q: &[T], tangent: &Mat<T>) -> Result<Mat<T>> {
        let d = self.sys.inertia(q)?;
        let n = &self.sys.annihilator(q)? * &d;
        let m = &n * tangent;
        m.solve_mat(&n)
            .map_err(|_| Error::Singular("B⊥ D dφ is singular; the constraint is not regular here".into()))
    }

    pub fn induced<T: Real>(&self, theta: &[T]) -> Result<InducedData<T>> {
        check_dim(self.reduced_dim(), theta.len())?;
        let q = self.par.embed(theta)?;
        let tangent = self.par.tangent(theta)?;
        let second = self.par.second(theta)?;
        let d = self.sys.inertia(&q)?;
        let dd = self.sys.inertia_partials(&q)?;
        let ambient = christoffel_from_parts(&d, &dd)?;
        let sigma = self.sigma_at(&q, &tangent)?;
        let k = theta.len();
        let cols: Vec<Vec<T>> = (0..k).map(|i| tangent.column(i)).collect();
        let mut gamma = Tensor3::zeros(k);
        for i in 0..k {
            for j in i..k {
                let g = ambient.contract(&cols[i], &cols[j]);
                let w: Vec<T> = g.iter().enumerate().map(|(a, &v)| second[a][(i, j)] + v).collect();
                for (c, v) in sigma.mul_vec(&w).into_iter().enumerate() {
                    gamma[(c, i, j)] = v;
                    gamma[(c, j, i)] = v;
                }
            }
        }
        let grad = self.sys.potential_gradient(&q)?;
        let lambda = sigma.mul_vec(&d.solve(&grad)?);
        Ok(InducedData { q, tangent, sigma, gamma, lambda })
    }

    /// `θ`-components of the projection of an ambient vector `v` at `φ(θ)`.
    pub fn projection<T: Real>(&self, theta: &[T], v: &[T]) -> Result<Vec<T>> {
        let q = self.par.embed(theta)?;
        let tangent = self.par.tangent(theta)?;
        check_dim(q.len(), v.len())?;
        Ok(self.sigma_at(&q, &tangent)?.mul_vec(v))
    }

    /// `(Ψ₁, Ψ₂)` with `θ̈ = Ψ₁ + Ψ₂ θ̇²` for one-dimensional constraints,
    /// evaluated from the scalar formulas rather than through `ΓC`.
    pub fn psi(&self, theta: f64) -> Result<(f64, f64)> {
        if self.reduced_dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: self.reduced_dim() });
        }
        let th = [theta];
        let q = self.par.embed(&th)?;
        let dphi = self.par.tangent(&th)?.column(0);
        let ddphi: Vec<f64> = self.par.second(&th)?.iter().map(|h| h[(0, 0)]).collect();
        let d = self.sys.inertia(&q)?;
        let bpd = (&self.sys.annihilator(&q)? * &d).row(0);
        let ambient = christoffel_from_parts(&d, &self.sys.inertia_partials(&q)?)?;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let den = dot(&bpd, &dphi);
        if den.abs() < 1e-14 * (1.0 + bpd.iter().map(|v| v.abs()).sum::<f64>()) {
            return Err(Error::Singular(format!("B⊥ D φ' vanishes at θ = {theta}")));
        }
        let bp = self.sys.annihilator(&q)?.row(0);
        let psi1 = -dot(&bp, &self.sys.potential_gradient(&q)?) / den;
        let curv = ambient.contract(&dphi, &dphi);
        let psi2 = -(dot(&bpd, &ddphi) + dot(&bpd, &curv)) / den;
        Ok((psi1, psi2))
    }
}

impl<S: ControlSystem, P: ConstraintParametrization> Connection for Constrained<S, P> {
    fn dim(&self) -> usize {
        self.reduced_dim()
    }
    fn christoffel<T: Real>(&self, x: &[T]) -> Result<Tensor3<T>> {
        Ok(self.induced(x)?.gamma)
    }
}

impl<S: ControlSystem, P: ConstraintParametrization> ReducedDynamics for Constrained<S, P> {
    fn chart(&self) -> Chart {
        self.par.chart()
    }

    fn lambda<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        Ok(self.induced(theta)?.lambda)
    }

    fn acceleration<T: Real>(&self, theta: &[T], dtheta: &[T]) -> Result<Vec<T>> {
        let data = self.induced(theta)?;
        let g = data.gamma.contract(dtheta, dtheta);
        Ok(g.iter().zip(&data.lambda).map(|(&a, &b)| -a - b).collect())
    }
}
