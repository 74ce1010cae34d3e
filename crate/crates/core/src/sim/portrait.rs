use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vhc::{Constrained, ConstraintParametrization, ControlSystem};

use super::{simulate_constrained, SimOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitClass {
    Stationary,
    /// Oscillation whose lift spans less than a full turn.
    Rocking,
    /// The lift covers more than a full turn.
    Rotating,
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrbitClass::Stationary => "stationary",
            OrbitClass::Rocking => "rocking",
            OrbitClass::Rotating => "rotating",
        })
    }
}

/// Class of an orbit from the lift of its angle and the angular rate.
/// Returns the class and the range of the lift.
pub fn classify_orbit(angle: &[f64], rate: &[f64]) -> (OrbitClass, f64) {
    let lo = angle.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = angle.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if angle.is_empty() { 0.0 } else { hi - lo };
    let speed = rate.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let class = if range > TAU {
        OrbitClass::Rotating
    } else if range < 1e-9 && speed < 1e-9 {
        OrbitClass::Stationary
    } else {
        OrbitClass::Rocking
    };
    (class, range)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub theta0: Vec<f64>,
    pub dtheta0: Vec<f64>,
    pub class: OrbitClass,
    /// `max − min` of the lifted angle.
    pub lift_range: f64,
    pub t: Vec<f64>,
    pub angle: Vec<f64>,
    pub rate: Vec<f64>,
}

/// Initial angular rates of the default portrait sweep.
pub const PORTRAIT_SPEEDS: [f64; 9] = [0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0, 30.0];

/// Initial conditions `(θ₀, v eₖ)` for each rate `v`, with `k = coord`.
pub fn speed_sweep(theta0: &[f64], coord: usize, speeds: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    speeds
        .iter()
        .map(|&v| {
            let mut dth = vec![0.0; theta0.len()];
            dth[coord] = v;
            (theta0.to_vec(), dth)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortraitOptions {
    /// Index of the angle whose phase plane is recorded.
    pub coord: usize,
    pub t1: f64,
    pub sim: SimOptions,
}

/// Constrained runs from each initial condition, in parallel.
pub fn phase_portrait<S, P>(
    c: &Constrained<S, P>,
    ics: &[(Vec<f64>, Vec<f64>)],
    opts: &PortraitOptions,
) -> Result<Vec<Orbit>>
where
    S: ControlSystem,
    P: ConstraintParametrization,
{
    let k = c.reduced_dim();
    if opts.coord >= k {
        return Err(Error::Dimension { expected: k, got: opts.coord + 1 });
    }
    ics.par_iter()
        .map(|(th, dth)| {
            let tr = simulate_constrained(c, None, th, dth, opts.t1, &opts.sim)?;
            let angle: Vec<f64> = (0..tr.len()).map(|i| tr.position(i)[opts.coord]).collect();
            let rate: Vec<f64> = (0..tr.len()).map(|i| tr.velocity(i)[opts.coord]).collect();
            let (class, lift_range) = classify_orbit(&angle, &rate);
            Ok(Orbit { theta0: th.clone(), dtheta0: dth.clone(), class, lift_range, t: tr.t, angle, rate })
        })
        .collect()
}

/// Long-format table `run,t,angle,rate,class` of a portrait.
pub fn portrait_csv(orbits: &[Orbit]) -> String {
    let mut out = String::from("run,t,angle,rate,class\n");
    for (r, o) in orbits.iter().enumerate() {
        for i in 0..o.t.len() {
            out.push_str(&format!("{r},{:.16e},{:.16e},{:.16e},{}\n", o.t[i], o.angle[i], o.rate[i], o.class));
        }
    }
    out
}
