//! Trajectories of the constrained and the full closed-loop dynamics,
//! energy audits and phase portraits.

mod portrait;
mod trajectory;

pub use portrait::{
    classify_orbit, phase_portrait, portrait_csv, speed_sweep, Orbit, OrbitClass, PortraitOptions, PORTRAIT_SPEEDS,
};
pub use trajectory::Trajectory;

use crate::calculus::{integrate_ode_guarded, OdeOptions, Solution};
use crate::error::{check_dim, Error, Result};
use crate::lagrangian::LagrangianStructure;
use crate::vhc::{
    constraint_state, full_acceleration, stabilizing_feedback, Constrained, ConstraintParametrization,
    ControlSystem, Gains, ReducedDynamics,
};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimOptions {
    pub ode: OdeOptions,
    /// Uniform output spacing; `None` keeps the integrator's own steps.
    /// Samples are integrated to exactly, not interpolated.
    pub sample_dt: Option<f64>,
}

impl SimOptions {
    /// Fixed-step RK4 sampled at every step, for reproducible output.
    pub fn rk4(step: f64) -> Self {
        SimOptions { ode: OdeOptions::rk4(step), sample_dt: None }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// States at the integrator's steps, or exactly at multiples of `dt` by
/// restarting the integrator on each output interval.
fn integrate_sampled(
    rhs: impl Fn(f64, &[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    t1: f64,
    opts: &SimOptions,
    guard: impl Fn(&[f64]) -> bool,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    match opts.sample_dt {
        Some(dt) if dt > 0.0 => {
            let n = (t1.abs() / dt).round().max(1.0) as usize;
            let t: Vec<f64> = (0..=n).map(|k| t1 * k as f64 / n as f64).collect();
            let mut x = vec![x0.to_vec()];
            for w in t.windows(2) {
                let sol: Solution<f64> = integrate_ode_guarded(&rhs, w[0], x.last().unwrap(), w[1], &opts.ode, &guard)?;
                x.push(sol.last().to_vec());
            }
            Ok((t, x))
        }
        _ => {
            let sol = integrate_ode_guarded(&rhs, 0.0, x0, t1, &opts.ode, &guard)?;
            Ok((sol.t, sol.x))
        }
    }
}

/// `(φ(θ), dφ θ̇)`, the configuration-space state of a constrained state.
pub fn on_constraint_state<P: ConstraintParametrization>(
    par: &P,
    theta: &[f64],
    dtheta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(theta.len(), dtheta.len())?;
    Ok((par.embed(theta)?, par.tangent(theta)?.mul_vec(dtheta)))
}

fn residual_of(h: &(Vec<f64>, Vec<f64>)) -> f64 {
    h.0.iter().chain(&h.1).map(|v| v.abs()).sum()
}

/// `|h| + |ḣ|` along sampled states, or `None` when the model has no
/// constraint function.
fn residuals<P: ConstraintParametrization>(
    par: &P,
    states: &[Vec<f64>],
    to_q: impl Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
) -> Result<Option<Vec<f64>>> {
    let mut out = Vec::with_capacity(states.len());
    for s in states {
        let (q, dq) = to_q(s)?;
        match constraint_state(par, &q, &dq) {
            Ok(h) => out.push(residual_of(&h)),
            Err(Error::Unsupported(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

/// Integrate `θ̈ = −ΓC(θ̇, θ̇) − λ` from `(θ₀, θ̇₀)` to `t1`.
///
/// Stops with [`Error::Guard`] if `θ` leaves the chart. With a Lagrangian
/// structure attached, its energy is recorded at every sample.
pub fn simulate_constrained<S: ControlSystem, P: ConstraintParametrization>(
    c: &Constrained<S, P>,
    lagrangian: Option<&dyn LagrangianStructure>,
    theta0: &[f64],
    dtheta0: &[f64],
    t1: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let k = c.reduced_dim();
    check_dim(k, theta0.len())?;
    check_dim(k, dtheta0.len())?;
    let chart = ReducedDynamics::chart(c);
    let rhs = |_t: f64, x: &[f64]| {
        let mut out = x[k..].to_vec();
        out.extend(c.acceleration(&x[..k], &x[k..])?);
        Ok(out)
    };
    let x0: Vec<f64> = theta0.iter().chain(dtheta0).copied().collect();
    let (t, states) = integrate_sampled(rhs, &x0, t1, opts, |x| chart.contains(&x[..k]))?;
    let residual = residuals(&c.par, &states, |s| on_constraint_state(&c.par, &s[..k], &s[k..]))?;
    let energy = match lagrangian {
        Some(l) => Some(states.iter().map(|s| l.energy(&s[..k], &s[k..])).collect::<Result<Vec<f64>>>()?),
        None => None,
    };
    Ok(Trajectory { coords: names("theta", k), t, states, residual, energy })
}

/// Integrate the full system `q̈ = −Γ(q̇, q̇) + D⁻¹(Bτ − ∇P)` under the
/// output-zeroing feedback with gains `(K_p, K_d)`.
pub fn simulate_full<S: ControlSystem, P: ConstraintParametrization>(
    sys: &S,
    par: &P,
    q0: &[f64],
    dq0: &[f64],
    gains: Gains,
    t1: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let n = sys.dim();
    check_dim(n, q0.len())?;
    check_dim(n, dq0.len())?;
    let rhs = |_t: f64, x: &[f64]| {
        let (q, dq) = x.split_at(n);
        let tau = stabilizing_feedback(sys, par, q, dq, gains)?;
        let mut out = dq.to_vec();
        out.extend(full_acceleration(sys, q, dq, &tau)?);
        Ok(out)
    };
    let x0: Vec<f64> = q0.iter().chain(dq0).copied().collect();
    let (t, states) = integrate_sampled(rhs, &x0, t1, opts, |_| true)?;
    let residual = residuals(par, &states, |s| Ok((s[..n].to_vec(), s[n..].to_vec())))?;
    Ok(Trajectory { coords: names("q", n), t, states, residual, energy: None })
}
