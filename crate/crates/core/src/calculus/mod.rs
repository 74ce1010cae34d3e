//! Numerical kernels: differentiation of evaluable fields, adaptive
//! quadrature, ODE integration and piecewise curves.

mod curve;
mod diff;
mod ode;
mod quad;

pub use curve::{check_velocity, Concat, Constant, CurveSampler, FnCurve, Polyline, Reversed, Segment};
pub use diff::{
    gradient, hessian, jacobian, matrix_partials, partial, partial_fd, second_partial,
    second_partial_fd, vector_hessians, MatrixField, ScalarField, VectorField, FD_STEP,
};
pub use ode::{integrate_ode, integrate_ode_guarded, Method, OdeOptions, Solution};
pub use quad::{quad, quad_try, QUAD_TOL};
