//! Analysis and simulation of virtual holonomic constraints on underactuated
//! Lagrangian control systems.
//!
//! The geometric core (dual numbers, Christoffel symbols, induced connections)
//! is generic over the scalar type through [`Real`], so the same code runs on
//! `f32`, `f64`, and nested dual numbers for exact derivatives.

pub mod analysis;
pub mod calculus;
pub mod dual;
pub mod error;
pub mod expr;
pub mod holonomy;
pub mod lagrangian;
pub mod linalg;
pub mod manifold;
pub mod metrize2d;
pub mod models;
pub mod scalar;
pub mod sim;
pub mod vhc;

pub use dual::Dual;
pub use error::{Error, Result};
pub use linalg::{Mat, Tensor3, Tensor4};
pub use scalar::Real;

/// First-order dual number over `f64`.
pub type Dual64 = Dual<f64>;
/// Second-order (nested) dual number over `f64`.
pub type HyperDual64 = Dual<Dual<f64>>;
/// Dense matrix of `f64`.
pub type Mat64 = Mat<f64>;
/// Dense matrix of `f32`.
pub type Mat32 = Mat<f32>;
