use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::Expr;
use crate::holonomy::LoopDescriptor;
use crate::linalg::Mat;
use crate::manifold::Chart;
use crate::scalar::Real;
use crate::vhc::{ConstraintParametrization, ControlSystem};

/// Declarative description of a system and constraint by expression strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExprModelSpec {
    /// Names of the configuration variables.
    pub coords: Vec<String>,
    pub inertia: Vec<Vec<String>>,
    pub potential: String,
    /// `n × m` input matrix.
    pub input: Vec<Vec<String>>,
    /// `(n − m) × n` annihilator of the input matrix.
    pub annihilator: Vec<Vec<String>>,
    /// Names of the constraint coordinates.
    pub reduced_coords: Vec<String>,
    pub periodic: Vec<bool>,
    /// Bounds of the constraint chart; periodic coordinates use `[-π, π]`.
    #[serde(default)]
    pub lower: Vec<f64>,
    #[serde(default)]
    pub upper: Vec<f64>,
    /// `φ(θ)`, one expression per configuration variable.
    pub embedding: Vec<String>,
    #[serde(default)]
    pub constraint: Option<Vec<String>>,
    /// Named constants available in every expression.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

/// System compiled from an [`ExprModelSpec`].
#[derive(Clone, Debug)]
pub struct ExprModel {
    pub spec: ExprModelSpec,
    inertia: Vec<Vec<Expr>>,
    potential: Expr,
    input: Vec<Vec<Expr>>,
    annihilator: Vec<Vec<Expr>>,
    embedding: Vec<Expr>,
    constraint: Option<Vec<Expr>>,
    chart: Chart,
}

fn compile_matrix(rows: &[Vec<String>], shape: (usize, usize), vars: &[String], c: &BTreeMap<String, f64>, what: &str) -> Result<Vec<Vec<Expr>>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::InvalidModel(format!("{what} must be {} × {}", shape.0, shape.1)));
    }
    rows.iter()
        .map(|r| r.iter().map(|s| Expr::parse_with(s, vars, c)).collect())
        .collect()
}

fn eval_matrix<T: Real>(m: &[Vec<Expr>], x: &[T]) -> Mat<T> {
    Mat::from_fn(m.len(), m.first().map_or(0, Vec::len), |i, j| m[i][j].eval(x))
}

impl ExprModel {
    pub fn new(spec: ExprModelSpec) -> Result<Self> {
        let n = spec.coords.len();
        let k = spec.reduced_coords.len();
        let m = spec.input.first().map_or(0, Vec::len);
        if n == 0 || k == 0 || m == 0 || k + m != n {
            return Err(Error::InvalidModel(format!("need n = k + m with n = {n}, k = {k}, m = {m}")));
        }
        if spec.periodic.len() != k || spec.embedding.len() != n {
            return Err(Error::InvalidModel("periodic flags or embedding have the wrong length".into()));
        }
        let c = &spec.constants;
        let vars = &spec.coords;
        let inertia = compile_matrix(&spec.inertia, (n, n), vars, c, "inertia")?;
        let potential = Expr::parse_with(&spec.potential, vars, c)?;
        let input = compile_matrix(&spec.input, (n, m), vars, c, "input")?;
        let annihilator = compile_matrix(&spec.annihilator, (k, n), vars, c, "annihilator")?;
        let embedding = spec
            .embedding
            .iter()
            .map(|s| Expr::parse_with(s, &spec.reduced_coords, c))
            .collect::<Result<_>>()?;
        let constraint = match &spec.constraint {
            Some(h) if h.len() != m => {
                return Err(Error::InvalidModel(format!("constraint needs {m} components")));
            }
            Some(h) => Some(h.iter().map(|s| Expr::parse_with(s, vars, c)).collect::<Result<_>>()?),
            None => None,
        };
        let bound = |v: &[f64], i: usize, default: f64| v.get(i).copied().unwrap_or(default);
        let lower = (0..k).map(|i| if spec.periodic[i] { -PI } else { bound(&spec.lower, i, -10.0) }).collect();
        let upper = (0..k).map(|i| if spec.periodic[i] { PI } else { bound(&spec.upper, i, 10.0) }).collect();
        let chart = Chart::new(spec.periodic.clone(), lower, upper);
        Ok(ExprModel { spec, inertia, potential, input, annihilator, embedding, constraint, chart })
    }

    /// One loop per periodic coordinate, based at the chart's center.
    pub fn generators(&self) -> Vec<LoopDescriptor> {
        let base: Vec<f64> = (0..self.chart.dim())
            .map(|i| if self.chart.is_periodic(i) { 0.0 } else { 0.5 * (self.chart.lower[i] + self.chart.upper[i]) })
            .collect();
        let mut loops = LoopDescriptor::axis_generators(&self.chart, &base);
        for (lp, i) in loops.iter_mut().zip(self.chart.periodic_indices()) {
            lp.tag = format!("{} generator", self.spec.reduced_coords[i]);
        }
        loops
    }
}

impl ControlSystem for ExprModel {
    fn dim(&self) -> usize {
        self.spec.coords.len()
    }

    fn inputs(&self) -> usize {
        self.input[0].len()
    }

    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(self.dim(), q.len())?;
        Ok(eval_matrix(&self.inertia, q))
    }

    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        check_dim(self.dim(), q.len())?;
        Ok(self.potential.eval(q))
    }

    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(self.dim(), q.len())?;
        Ok(eval_matrix(&self.input, q))
    }

    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        check_dim(self.dim(), q.len())?;
        Ok(eval_matrix(&self.annihilator, q))
    }
}

impl ConstraintParametrization for ExprModel {
    fn chart(&self) -> Chart {
        self.chart.clone()
    }

    fn ambient_dim(&self) -> usize {
        self.spec.coords.len()
    }

    fn embed<T: Real>(&self, theta: &[T]) -> Result<Vec<T>> {
        check_dim(self.chart.dim(), theta.len())?;
        Ok(self.embedding.iter().map(|e| e.eval(theta)).collect())
    }

    fn constraint<T: Real>(&self, q: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), q.len())?;
        match &self.constraint {
            Some(h) => Ok(h.iter().map(|e| e.eval(q)).collect()),
            None => Err(Error::Unsupported("model defines no constraint function".into())),
        }
    }
}
