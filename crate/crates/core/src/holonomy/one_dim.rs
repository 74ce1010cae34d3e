use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_ode, quad_try, OdeOptions, Solution};
use crate::error::{check_dim, Error, Result};
use crate::lagrangian::LagrangianStructure;
use crate::linalg::Mat;

use super::periodic_affine;

/// Threshold on period integrals for the one-dimensional verdicts.
pub const VERDICT_TOL: f64 = 1e-8;

type PsiFn = Arc<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrizability1d {
    pub metrizable: bool,
    /// `∫₀^{2π} Ψ₂` on a circle; absent on the line.
    pub integral: Option<f64>,
}

/// A one-dimensional connection `Ψ₂` is metrizable on the line, and on the
/// circle iff `∫₀^{2π} Ψ₂ = 0`.
pub fn metrizability_1d(psi2: impl Fn(f64) -> Result<f64>, periodic: bool, tol: f64) -> Result<Metrizability1d> {
    if !periodic {
        return Ok(Metrizability1d { metrizable: true, integral: None });
    }
    let integral = quad_try(psi2, 0.0, TAU, tol)?;
    Ok(Metrizability1d { metrizable: integral.abs() < VERDICT_TOL, integral: Some(integral) })
}

/// Full decision for `θ̈ = Ψ₁(θ) + Ψ₂(θ) θ̇²` with
/// `M̂(x) = exp(−2∫₀ˣ Ψ₂)` and `P̂(x) = −∫₀ˣ Ψ₁ M̂`.
#[derive(Clone)]
pub struct OneDimReport {
    pub periodic: bool,
    pub metrizable: bool,
    pub lagrangian: bool,
    pub int_psi2: Option<f64>,
    pub int_psi1_m: Option<f64>,
    psi: PsiFn,
    /// `(ln M̂, P̂)` over one period.
    table: Option<Solution<f64>>,
    tol: f64,
}

impl std::fmt::Debug for OneDimReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneDimReport")
            .field("periodic", &self.periodic)
            .field("metrizable", &self.metrizable)
            .field("lagrangian", &self.lagrangian)
            .field("int_psi2", &self.int_psi2)
            .field("int_psi1_m", &self.int_psi1_m)
            .finish()
    }
}

fn hat_rhs(psi: &PsiFn) -> impl Fn(f64, &[f64]) -> Result<Vec<f64>> + '_ {
    move |x, s| {
        let (p1, p2) = psi(x)?;
        Ok(vec![-2.0 * p2, -p1 * s[0].exp()])
    }
}

pub fn lagrangian_1d(
    psi: impl Fn(f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    periodic: bool,
    tol: f64,
) -> Result<OneDimReport> {
    let psi: PsiFn = Arc::new(psi);
    let mut report = OneDimReport {
        periodic,
        metrizable: true,
        lagrangian: true,
        int_psi2: None,
        int_psi1_m: None,
        psi: psi.clone(),
        table: None,
        tol,
    };
    if !periodic {
        return Ok(report);
    }
    let int_psi2 = quad_try(|x| psi(x).map(|p| p.1), 0.0, TAU, tol)?;
    let opts = OdeOptions::default().with_tol(tol * 1e-2).with_max_step(0.01);
    let table = integrate_ode(hat_rhs(&psi), 0.0, &[0.0, 0.0], TAU, &opts)?;
    let int_psi1_m = quad_try(
        |x| {
            let (p1, _) = psi(x)?;
            Ok(p1 * table.at(x)[0].exp())
        },
        0.0,
        TAU,
        tol,
    )?;
    report.metrizable = int_psi2.abs() < VERDICT_TOL;
    report.lagrangian = report.metrizable && int_psi1_m.abs() < VERDICT_TOL;
    report.int_psi2 = Some(int_psi2);
    report.int_psi1_m = Some(int_psi1_m);
    report.table = Some(table);
    Ok(report)
}

impl OneDimReport {
    pub fn psi(&self, x: f64) -> Result<(f64, f64)> {
        (self.psi)(x)
    }

    /// `(M̂(x), P̂(x))` on the lift.
    pub fn hats(&self, x: f64) -> Result<(f64, f64)> {
        match &self.table {
            Some(table) => {
                let k = (x / TAU).floor();
                let r = x - k * TAU;
                let at = table.at(r);
                let end = table.last();
                let lm = at[0] + k * end[0];
                let p = periodic_affine(end[1], end[0].exp(), k as i64, at[1]);
                Ok((lm.exp(), p))
            }
            None => {
                let opts = OdeOptions::default().with_tol(self.tol * 1e-2).with_max_step(0.01);
                let s = integrate_ode(hat_rhs(&self.psi), 0.0, &[0.0, 0.0], x, &opts)?;
                let end = s.last();
                Ok((end[0].exp(), end[1]))
            }
        }
    }

    pub fn m_hat(&self, x: f64) -> Result<f64> {
        Ok(self.hats(x)?.0)
    }

    pub fn p_hat(&self, x: f64) -> Result<f64> {
        Ok(self.hats(x)?.1)
    }

    fn require_lagrangian(&self) -> Result<()> {
        if self.lagrangian {
            Ok(())
        } else {
            Err(Error::Structure("reduced dynamics are not Lagrangian".into()))
        }
    }
}

impl LagrangianStructure for OneDimReport {
    fn dim(&self) -> usize {
        1
    }
    fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
        check_dim(1, x.len())?;
        self.require_lagrangian()?;
        Ok(Mat::diag(&[self.m_hat(x[0])?]))
    }
    fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
        check_dim(1, x.len())?;
        self.require_lagrangian()?;
        let (_, p2) = self.psi(x[0])?;
        Ok(vec![Mat::diag(&[-2.0 * p2 * self.m_hat(x[0])?])])
    }
    fn potential(&self, x: &[f64]) -> Result<f64> {
        check_dim(1, x.len())?;
        self.require_lagrangian()?;
        self.p_hat(x[0])
    }
    fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(1, x.len())?;
        self.require_lagrangian()?;
        let (p1, _) = self.psi(x[0])?;
        Ok(vec![-p1 * self.m_hat(x[0])?])
    }
}
