use std::f64::consts::{PI, SQRT_2, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{CurveSampler, Segment};
use crate::error::{check_dim, Result};
use crate::holonomy::LoopDescriptor;
use crate::linalg::Mat;
use crate::manifold::Chart;
use crate::scalar::Real;
use crate::vhc::{ConstraintParametrization, ControlSystem};

/// Which joint is actuated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DpcCase {
    /// Force on the cart, `B = e₁`.
    A,
    /// Torque on the last joint, `B = e₃`.
    B,
}

/// Double pendulum on a cart with unit masses and lengths,
/// `q = (cart position, first link angle, second link angle)`, under the
/// constraint `q₃ = ρ(q₂)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublePendulumCart {
    pub case: DpcCase,
    /// Gravitational constant.
    pub g: f64,
}

const K: f64 = 1.0 + SQRT_2;

/// `ρ(q) = q + 2 atan((1 + √2) tan(−q/2))` on its continuous branch, written
/// as `−2 atan(√2 sin q / (2 + √2 − √2 cos q))`: smooth, odd and 2π-periodic.
pub fn rho<T: Real>(q: T) -> T {
    let s2 = T::c(SQRT_2);
    T::c(-2.0) * (s2 * q.sin() / (T::c(2.0 + SQRT_2) - s2 * q.cos())).atan()
}

fn rho_w<T: Real>(q: T) -> T {
    let s = (q * T::c(0.5)).sin();
    T::one() + T::c(K * K - 1.0) * s * s
}

pub fn rho_prime<T: Real>(q: T) -> T {
    T::one() - T::c(K) / rho_w(q)
}

pub fn rho_second<T: Real>(q: T) -> T {
    let w = rho_w(q);
    T::c(K * (K * K - 1.0) * 0.5) * q.sin() / (w * w)
}

impl DoublePendulumCart {
    pub fn new(case: DpcCase, g: f64) -> Self {
        DoublePendulumCart { case, g }
    }

    /// The loop `t ↦ (0, t)`, `t ∈ [0, 2π]`.
    /// Cart positions `|θ¹| ≤ 5`; the chart itself allows `|θ¹| ≤ 1000`.
    pub fn sample_box() -> Chart {
        Chart::new(vec![false, true], vec![-5.0, -PI], vec![5.0, PI])
    }

    pub fn generator() -> LoopDescriptor {
        let seg: Arc<dyn CurveSampler> = Arc::new(Segment::timed(vec![0.0, 0.0], vec![0.0, TAU], 0.0, TAU));
        LoopDescriptor::new(vec![0.0, 0.0], vec![seg], "cylinder-S1 generator")
    }
}

impl ControlSystem for DoublePendulumCart {
    fn dim(&self) -> usize {
        3
    }

    fn inputs(&self) -> usize {
        1
    }

    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        let (c2, c3, c23) = (q[1].cos(), q[2].cos(), (q[1] - q[2]).cos());
        let two = T::c(2.0);
        Ok(Mat::from_rows(&[
            vec![T::c(3.0), -two * c2, -c3],
            vec![-two * c2, two, c23],
            vec![-c3, c23, T::one()],
        ]))
    }

    fn inertia_partials<T: Real>(&self, q: &[T]) -> Result<Vec<Mat<T>>> {
        check_dim(3, q.len())?;
        let (s2, s3, s23) = (q[1].sin(), q[2].sin(), (q[1] - q[2]).sin());
        let mut d2 = Mat::zeros(3, 3);
        d2[(0, 1)] = T::c(2.0) * s2;
        d2[(1, 0)] = d2[(0, 1)];
        d2[(1, 2)] = -s23;
        d2[(2, 1)] = -s23;
        let mut d3 = Mat::zeros(3, 3);
        d3[(0, 2)] = s3;
        d3[(2, 0)] = s3;
        d3[(1, 2)] = s23;
        d3[(2, 1)] = s23;
        Ok(vec![Mat::zeros(3, 3), d2, d3])
    }

    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        check_dim(3, q.len())?;
        Ok((T::c(2.0) * q[1].cos() + q[2].cos()) * T::c(self.g))
    }

    fn potential_gradient<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(3, q.len())?;
        let g = T::c(self.g);
        Ok(vec![T::zero(), T::c(-2.0) * g * q[1].sin(), -g * q[2].sin()])
    }

    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        let idx = match self.case {
            DpcCase::A => 0,
            DpcCase::B => 2,
        };
        Ok(Mat::from_fn(3, 1, |i, _| if i == idx { T::one() } else { T::zero() }))
    }

    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        let rows: [usize; 2] = match self.case {
            DpcCase::A => [1, 2],
            DpcCase::B => [0, 1],
        };
        Ok(Mat::from_fn(2, 3, |r, c| if c == rows[r] { T::one() } else { T::zero() }))
    }
}

impl ConstraintParametrization for DoublePendulumCart {
    fn chart(&self) -> Chart {
        Chart::new(vec![false, true], vec![-1e3, -PI], vec![1e3, PI])
    }

    fn ambient_dim(&self) -> usize {
        3
    }

    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        check_dim(2, theta.len())?;
        Ok(vec![theta[0], theta[1], rho(theta[1])])
    }

    fn tangent<T: Real>(&self, theta: &[T]) -> Result<Mat<T>> {
        check_dim(2, theta.len())?;
        let (o, z) = (T::one(), T::zero());
        Ok(Mat::from_rows(&[vec![o, z], vec![z, o], vec![z, rho_prime(theta[1])]]))
    }

    fn second<T: Real>(&self, theta: &[T]) -> Result<Vec<Mat<T>>> {
        check_dim(2, theta.len())?;
        let mut last = Mat::zeros(2, 2);
        last[(1, 1)] = rho_second(theta[1]);
        Ok(vec![Mat::zeros(2, 2), Mat::zeros(2, 2), last])
    }

    fn constraint<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(3, q.len())?;
        Ok(vec![q[2] - rho(q[1])])
    }
}
