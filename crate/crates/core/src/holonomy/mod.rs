//! Parallel transport, holonomy of loops and the metrizability decisions
//! built on it for one-dimensional constraints, flat connections with
//! prescribed homotopy generators and the cylinder integrals.

mod cylinder;
mod flat;
mod one_dim;
mod transport;

pub use cylinder::{CylinderIntegrals, CylinderLayout};
pub use flat::{find_spd, flat_metrizability, flatness_certificate, invariant_forms, FlatReport, FLAT_TOL};
pub use one_dim::{lagrangian_1d, metrizability_1d, Metrizability1d, OneDimReport, VERDICT_TOL};
pub use transport::{
    loop_transport, metric_by_transport, parallel_transport, transport_matrix, LoopDescriptor, TransportMap,
    TRANSPORT_TOL,
};

/// Value at `x + 2πk` of a function obeying `f(x + 2π) = a + b f(x)`, given `f(x)`.
pub(crate) fn periodic_affine(a: f64, b: f64, k: i64, fx: f64) -> f64 {
    let mut f = fx;
    if k >= 0 {
        for _ in 0..k {
            f = a + b * f;
        }
    } else {
        for _ in 0..(-k) {
            f = (f - a) / b;
        }
    }
    f
}
