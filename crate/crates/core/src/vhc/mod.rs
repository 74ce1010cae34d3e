//! Virtual holonomic constraints: regularity, the projection onto the
//! constraint along the control directions, the induced connection and the
//! constrained dynamics, plus the feedback that enforces the constraint.
//!
//! A control system `D(q) q̈ + C(q, q̇) q̇ + ∇P(q) = B(q) τ` is described by
//! [`ControlSystem`]; a constraint manifold by a [`ConstraintParametrization`]
//! `φ: Θ → Q`. [`Constrained`] combines the two.

mod checks;
mod constrained;
mod feedback;

pub use checks::{
    check_regularity, orthogonality_check, regularity_margin, restricted_structure, Orthogonality,
    Regularity, RestrictedStructure,
};
pub use constrained::{Constrained, InducedData};
pub use feedback::{constraint_state, full_acceleration, stabilizing_feedback, Gains};

use crate::calculus::{gradient, jacobian, matrix_partials, vector_hessians};
use crate::calculus::{MatrixField, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::{Chart, Connection};
use crate::scalar::Real;

/// Lagrangian control system with `n` configuration variables and `m` inputs.
pub trait ControlSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn inputs(&self) -> usize;

    /// Inertia matrix `D(q)`, symmetric positive definite.
    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>>;

    fn inertia_partials<T: Real>(&self, q: &[T]) -> Result<Vec<Mat<T>>> {
        matrix_partials(&InertiaField(self), q)
    }

    fn potential<T: Real>(&self, q: &[T]) -> Result<T>;

    fn potential_gradient<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        gradient(&PotentialField(self), q)
    }

    /// `B(q)`, `n × m`.
    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>>;

    /// `B⊥(q)`, `(n − m) × n` with `B⊥ B = 0`.
    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>>;
}

/// Regular parametrization `φ` of a constraint manifold of dimension `n − m`.
pub trait ConstraintParametrization: Send + Sync {
    /// Chart of the constraint coordinates `θ`.
    fn chart(&self) -> Chart;

    fn ambient_dim(&self) -> usize;

    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>>;

    /// `dφ`, `n × (n − m)`.
    fn tangent<T: Real>(&self, theta: &[T]) -> Result<Mat<T>> {
        jacobian(&EmbeddingField(self), theta)
    }

    /// `out[a][(i, j)] = ∂ᵢ∂ⱼφᵃ`.
    fn second<T: Real>(&self, theta: &[T]) -> Result<Vec<Mat<T>>> {
        vector_hessians(&EmbeddingField(self), theta)
    }

    /// Constraint function `h` with `h(φ(θ)) = 0`, when one is known.
    fn constraint<T: Real>(&self, _q: &[T]) -> Result<Vec<T>> {
        Err(Error::Unsupported("parametrization has no constraint function".into()))
    }
}

/// Second-order dynamics `θ̈ = −Γ(θ̇, θ̇) − λ(θ)` on a reduced chart.
pub trait ReducedDynamics: Connection + Send + Sync {
    fn chart(&self) -> Chart;

    fn lambda<T: Real>(&self, theta: &[T]) -> Result<Vec<T>>;

    fn acceleration<T: Real>(&self, theta: &[T], dtheta: &[T]) -> Result<Vec<T>> {
        let g = self.christoffel(theta)?.contract(dtheta, dtheta);
        let l = self.lambda(theta)?;
        Ok(g.iter().zip(&l).map(|(&a, &b)| -a - b).collect())
    }
}

impl<R: ReducedDynamics> ReducedDynamics for &R {
    fn chart(&self) -> Chart {
        (**self).chart()
    }
    fn lambda<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        (**self).lambda(theta)
    }
}

/// `D(q)` of a system as a matrix field.
pub struct InertiaField<'a, S: ?Sized>(pub &'a S);

impl<S: ControlSystem + ?Sized> MatrixField for InertiaField<'_, S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn shape(&self) -> (usize, usize) {
        (self.0.dim(), self.0.dim())
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>> {
        self.0.inertia(x)
    }
}

/// `P(q)` of a system as a scalar field.
pub struct PotentialField<'a, S: ?Sized>(pub &'a S);

impl<S: ControlSystem + ?Sized> ScalarField for PotentialField<'_, S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<T> {
        self.0.potential(x)
    }
}

/// `φ(θ)` as a vector field.
pub struct EmbeddingField<'a, P: ?Sized>(pub &'a P);

impl<P: ConstraintParametrization + ?Sized> VectorField for EmbeddingField<'_, P> {
    fn dim(&self) -> usize {
        self.0.chart().dim()
    }
    fn len(&self) -> usize {
        self.0.ambient_dim()
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.embed(x)
    }
}

/// `h(q)` as a vector field.
pub struct ConstraintField<'a, P: ?Sized>(pub &'a P);

impl<P: ConstraintParametrization + ?Sized> VectorField for ConstraintField<'_, P> {
    fn dim(&self) -> usize {
        self.0.ambient_dim()
    }
    fn len(&self) -> usize {
        self.0.ambient_dim() - self.0.chart().dim()
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.constraint(x)
    }
}
