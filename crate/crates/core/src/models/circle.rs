use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{CurveSampler, Segment};
use crate::error::{check_dim, Result};
use crate::holonomy::LoopDescriptor;
use crate::linalg::Mat;
use crate::manifold::Chart;
use crate::scalar::Real;
use crate::vhc::{ConstraintParametrization, ControlSystem};

/// Unit-mass particle in the plane, `q̈ = (R_α q) τ`, constrained to the
/// unit circle `φ(θ) = (cos θ, sin θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleParticle {
    pub alpha: f64,
}

fn rotate<T: Real>(angle: f64, q: &[T]) -> [T; 2] {
    let (s, c) = (T::c(angle.sin()), T::c(angle.cos()));
    [c * q[0] - s * q[1], s * q[0] + c * q[1]]
}

impl CircleParticle {
    pub fn new(alpha: f64) -> Self {
        CircleParticle { alpha }
    }

    /// One counterclockwise turn from `θ = 0`.
    pub fn generator() -> LoopDescriptor {
        let seg: Arc<dyn CurveSampler> = Arc::new(Segment::timed(vec![0.0], vec![TAU], 0.0, TAU));
        LoopDescriptor::new(vec![0.0], vec![seg], "circle generator")
    }
}

impl ControlSystem for CircleParticle {
    fn dim(&self) -> usize {
        2
    }

    fn inputs(&self) -> usize {
        1
    }

    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(2, q.len())?;
        Ok(Mat::identity(2))
    }

    fn inertia_partials<T: Real>(&self, q: &[T]) -> Result<Vec<Mat<T>>> {
        check_dim(2, q.len())?;
        Ok(vec![Mat::zeros(2, 2); 2])
    }

    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        check_dim(2, q.len())?;
        Ok(T::zero())
    }

    fn potential_gradient<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(2, q.len())?;
        Ok(vec![T::zero(); 2])
    }

    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(2, q.len())?;
        Ok(Mat::column_vector(&rotate(self.alpha, q)))
    }

    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(2, q.len())?;
        Ok(Mat::from_rows(&[rotate(self.alpha + FRAC_PI_2, q).to_vec()]))
    }
}

impl ConstraintParametrization for CircleParticle {
    fn chart(&self) -> Chart {
        Chart::new(vec![true], vec![-PI], vec![PI])
    }

    fn ambient_dim(&self) -> usize {
        2
    }

    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        check_dim(1, theta.len())?;
        Ok(vec![theta[0].cos(), theta[0].sin()])
    }

    fn tangent<T: Real>(&self, theta: &[T]) -> Result<Mat<T>> {
        check_dim(1, theta.len())?;
        Ok(Mat::column_vector(&[-theta[0].sin(), theta[0].cos()]))
    }

    fn second<T: Real>(&self, theta: &[T]) -> Result<Vec<Mat<T>>> {
        check_dim(1, theta.len())?;
        Ok(vec![Mat::diag(&[-theta[0].cos()]), Mat::diag(&[-theta[0].sin()])])
    }

    fn constraint<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(2, q.len())?;
        Ok(vec![q[0] * q[0] + q[1] * q[1] - T::one()])
    }
}
