//! Built-in example systems with their constraints, homotopy generators and
//! reference constants, plus systems defined by expression strings.

mod circle;
mod custom;
mod dpc;
mod sphere;

use std::collections::BTreeMap;
use std::f64::consts::{SQRT_2, TAU};

pub use circle::CircleParticle;
pub use custom::{ExprModel, ExprModelSpec};
pub use dpc::{rho, rho_prime, rho_second, DoublePendulumCart, DpcCase};
pub use sphere::SphereMass;

use crate::error::{Error, Result};
use crate::holonomy::LoopDescriptor;
use crate::linalg::Mat;
use crate::manifold::Chart;
use crate::scalar::Real;
use crate::vhc::{Constrained, ConstraintParametrization, ControlSystem};

/// Names accepted by [`by_name`].
pub const MODEL_NAMES: [&str; 4] = ["circle", "sphere", "dpc-a", "dpc-b"];

/// Default gravitational constant.
pub const DEFAULT_G: f64 = 9.81;

/// Any supported model; implements both the system and the constraint.
#[derive(Clone, Debug)]
pub enum Model {
    Circle(CircleParticle),
    Sphere(SphereMass),
    Dpc(DoublePendulumCart),
    Custom(ExprModel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Circle($m) => $e,
            Model::Sphere($m) => $e,
            Model::Dpc($m) => $e,
            Model::Custom($m) => $e,
        }
    };
}

impl ControlSystem for Model {
    fn dim(&self) -> usize {
        dispatch!(self, m => ControlSystem::dim(m))
    }
    fn inputs(&self) -> usize {
        dispatch!(self, m => m.inputs())
    }
    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        dispatch!(self, m => m.inertia(q))
    }
    fn inertia_partials<T: Real>(&self, q: &[T]) -> Result<Vec<Mat<T>>> {
        dispatch!(self, m => m.inertia_partials(q))
    }
    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        dispatch!(self, m => m.potential(q))
    }
    fn potential_gradient<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        dispatch!(self, m => m.potential_gradient(q))
    }
    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        dispatch!(self, m => m.input_matrix(q))
    }
    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        dispatch!(self, m => m.annihilator(q))
    }
}

impl ConstraintParametrization for Model {
    fn chart(&self) -> Chart {
        dispatch!(self, m => ConstraintParametrization::chart(m))
    }
    fn ambient_dim(&self) -> usize {
        dispatch!(self, m => m.ambient_dim())
    }
    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        dispatch!(self, m => m.embed(theta))
    }
    fn tangent<T: Real>(&self, theta: &[T]) -> Result<Mat<T>> {
        dispatch!(self, m => m.tangent(theta))
    }
    fn second<T: Real>(&self, theta: &[T]) -> Result<Vec<Mat<T>>> {
        dispatch!(self, m => m.second(theta))
    }
    fn constraint<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        dispatch!(self, m => m.constraint(q))
    }
}

/// A model with everything the analysis needs to know about it.
#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub name: String,
    pub model: Model,
    /// Generators of the fundamental group of the constraint chart.
    pub generators: Vec<LoopDescriptor>,
    /// Reference constants for regression checks.
    pub expected: BTreeMap<String, f64>,
    /// Box for sampling grids, when narrower than the chart.
    pub sample_box: Option<Chart>,
}

impl ModelBundle {
    pub fn constrained(&self) -> Constrained<Model, Model> {
        Constrained { sys: self.model.clone(), par: self.model.clone() }
    }

    pub fn chart(&self) -> Chart {
        self.model.chart()
    }

    /// Grid with `n` points per axis and margin `1e-3` at bounded ends.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        self.sample_box.clone().unwrap_or_else(|| self.chart()).grid(n, 1e-3)
    }

    /// The grid used by default for checks: 32 points on a circle, 17 per
    /// axis in two dimensions.
    pub fn standard_grid(&self) -> Vec<Vec<f64>> {
        match self.chart().dim() {
            1 => self.grid(32),
            _ => self.grid(17),
        }
    }
}

pub fn circle_particle(alpha: f64) -> ModelBundle {
    let t = alpha.tan();
    ModelBundle {
        name: "circle".into(),
        model: Model::Circle(CircleParticle::new(alpha)),
        generators: vec![CircleParticle::generator()],
        expected: BTreeMap::from([
            ("alpha".into(), alpha),
            ("gamma_c".into(), t),
            ("psi2".into(), -t),
            ("int_psi2".into(), -TAU * t),
        ]),
        sample_box: None,
    }
}

pub fn sphere_mass() -> ModelBundle {
    ModelBundle {
        name: "sphere".into(),
        model: Model::Sphere(SphereMass),
        generators: Vec::new(),
        expected: BTreeMap::from([("metric_gauge_b".into(), 0.25f64.ln()), ("lagrangian".into(), 1.0)]),
        sample_box: None,
    }
}

pub fn double_pendulum_cart(case: DpcCase, g: f64) -> ModelBundle {
    let name = match case {
        DpcCase::A => "dpc-a",
        DpcCase::B => "dpc-b",
    };
    let mut expected = BTreeMap::from([
        ("g".to_string(), g),
        ("generator_transport_identity".to_string(), 1.0),
        ("lagrangian".to_string(), if case == DpcCase::B { 1.0 } else { 0.0 }),
    ]);
    if case == DpcCase::B {
        expected.insert("closedness_a".into(), -(2.0 - SQRT_2) / 3.0);
    }
    ModelBundle {
        name: name.into(),
        model: Model::Dpc(DoublePendulumCart::new(case, g)),
        generators: vec![DoublePendulumCart::generator()],
        expected,
        sample_box: Some(DoublePendulumCart::sample_box()),
    }
}

pub fn custom_model(name: &str, spec: ExprModelSpec) -> Result<ModelBundle> {
    let m = ExprModel::new(spec)?;
    Ok(ModelBundle {
        name: name.into(),
        generators: m.generators(),
        model: Model::Custom(m),
        expected: BTreeMap::new(),
        sample_box: None,
    })
}

fn take(params: &mut BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.remove(key).unwrap_or(default)
}

/// Built-in model by registry name with parameter overrides
/// (`alpha` for the circle, `g` for the pendulum).
pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelBundle> {
    let mut p = params.clone();
    let bundle = match name {
        "circle" => circle_particle(take(&mut p, "alpha", 0.0)),
        "sphere" => sphere_mass(),
        "dpc-a" => double_pendulum_cart(DpcCase::A, take(&mut p, "g", DEFAULT_G)),
        "dpc-b" => double_pendulum_cart(DpcCase::B, take(&mut p, "g", DEFAULT_G)),
        _ => {
            return Err(Error::InvalidModel(format!(
                "unknown model '{name}' (available: {})",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    if let Some(k) = p.keys().next() {
        return Err(Error::InvalidModel(format!("model '{name}' has no parameter '{k}'")));
    }
    Ok(bundle)
}
