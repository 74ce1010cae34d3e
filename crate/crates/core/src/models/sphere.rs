use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::linalg::Mat;
use crate::manifold::Chart;
use crate::scalar::Real;
use crate::vhc::{ConstraintParametrization, ControlSystem};

/// Unit point mass in space driven along `B = diag(1, 1, 2) q`, constrained
/// to the unit sphere in spherical coordinates (poles excluded).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphereMass;

impl ControlSystem for SphereMass {
    fn dim(&self) -> usize {
        3
    }

    fn inputs(&self) -> usize {
        1
    }

    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        Ok(Mat::identity(3))
    }

    fn inertia_partials<T: Real>(&self, q: &[T]) -> Result<Vec<Mat<T>>> {
        check_dim(3, q.len())?;
        Ok(vec![Mat::zeros(3, 3); 3])
    }

    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        check_dim(3, q.len())?;
        Ok(T::zero())
    }

    fn potential_gradient<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(3, q.len())?;
        Ok(vec![T::zero(); 3])
    }

    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        Ok(Mat::column_vector(&[q[0], q[1], T::c(2.0) * q[2]]))
    }

    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(3, q.len())?;
        let half = T::c(0.5);
        Ok(Mat::from_rows(&[
            vec![-q[1], q[0], T::zero()],
            vec![-q[0] * q[2], -q[1] * q[2], half * (q[0] * q[0] + q[1] * q[1])],
        ]))
    }
}

impl ConstraintParametrization for SphereMass {
    fn chart(&self) -> Chart {
        Chart::new(vec![false, false], vec![0.0, -PI], vec![PI, PI])
    }

    fn ambient_dim(&self) -> usize {
        3
    }

    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        check_dim(2, theta.len())?;
        let (s1, c1, s2, c2) = (theta[0].sin(), theta[0].cos(), theta[1].sin(), theta[1].cos());
        Ok(vec![s1 * c2, s1 * s2, c1])
    }

    fn constraint<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(3, q.len())?;
        Ok(vec![q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - T::one()])
    }
}
