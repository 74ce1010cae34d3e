use serde::{Deserialize, Serialize};

use crate::calculus::{jacobian, vector_hessians};
use crate::error::{check_dim, Error, Result};
use crate::manifold::christoffel_from_parts;

use super::{ConstraintField, ConstraintParametrization, ControlSystem};

/// Proportional and derivative gains of the output-zeroing feedback.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub kp: f64,
    pub kd: f64,
}

impl Gains {
    pub fn new(kp: f64, kd: f64) -> Self {
        Gains { kp, kd }
    }
}

/// `(h(q), ḣ = dh(q) q̇)`.
pub fn constraint_state<P: ConstraintParametrization>(
    par: &P,
    q: &[f64],
    dq: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = par.constraint(q)?;
    let dh = jacobian(&ConstraintField(par), q)?.mul_vec(dq);
    Ok((h, dh))
}

/// `q̈ = −Γ(q̇, q̇) + D⁻¹ (B τ − ∇P)`.
pub fn full_acceleration<S: ControlSystem>(sys: &S, q: &[f64], dq: &[f64], tau: &[f64]) -> Result<Vec<f64>> {
    check_dim(sys.dim(), q.len())?;
    check_dim(sys.inputs(), tau.len())?;
    let d = sys.inertia(q)?;
    let gamma = christoffel_from_parts(&d, &sys.inertia_partials(q)?)?;
    let bt = sys.input_matrix(q)?.mul_vec(tau);
    let grad = sys.potential_gradient(q)?;
    let f: Vec<f64> = bt.iter().zip(&grad).map(|(a, b)| a - b).collect();
    let acc = d.solve(&f)?;
    Ok(gamma.contract(dq, dq).iter().zip(acc).map(|(g, a)| a - g).collect())
}

/// Input that makes the output `h` obey `ḧ = −K_p h − K_d ḣ`.
///
/// With zero gains and a state on the constraint this is the unique
/// feedback keeping the constraint invariant.
pub fn stabilizing_feedback<S, P>(sys: &S, par: &P, q: &[f64], dq: &[f64], gains: Gains) -> Result<Vec<f64>>
where
    S: ControlSystem,
    P: ConstraintParametrization,
{
    check_dim(sys.dim(), q.len())?;
    check_dim(sys.dim(), dq.len())?;
    let h = par.constraint(q)?;
    let dh = jacobian(&ConstraintField(par), q)?;
    let hess = vector_hessians(&ConstraintField(par), q)?;
    let d = sys.inertia(q)?;
    let gamma = christoffel_from_parts(&d, &sys.inertia_partials(q)?)?;
    let drift = d.solve(&sys.potential_gradient(q)?)?;
    let g: Vec<f64> = gamma.contract(dq, dq).iter().zip(&drift).map(|(a, b)| a + b).collect();
    let b = &dh * &d.solve_mat(&sys.input_matrix(q)?)?;
    let hdot = dh.mul_vec(dq);
    let dh_g = dh.mul_vec(&g);
    let rhs: Vec<f64> = (0..h.len())
        .map(|j| -gains.kp * h[j] - gains.kd * hdot[j] - hess[j].bilinear(dq, dq) + dh_g[j])
        .collect();
    b.solve(&rhs)
        .map_err(|_| Error::Singular("dh D⁻¹ B is singular; feedback undefined".into()))
}
