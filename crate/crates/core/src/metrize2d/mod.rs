//! Metrizability and Lagrangian reconstruction for two-dimensional
//! constraint manifolds.
//!
//! Curved connections go through Ricci recurrence: a definite Ricci tensor
//! with `∇Ric = ω ⊗ Ric` and exact `ω = df` gives the metric
//! `±exp(−f + b) Ric`. Flat connections on a cylinder use the explicit metric
//! family built from the transport integrals. In both cases the reduced
//! dynamics is Lagrangian when `μ = g λ` is exact, with potential `dP = μ`.

mod cylinder;
mod exact;
mod recurrence;

use serde::{Deserialize, Serialize};

pub use cylinder::{cylinder_lagrangian_search, CylinderMetric, CylinderReport, CylinderSearchOptions};
pub use exact::{
    canonical_legs, exactness_check, line_integral, loop_integral, potential_from_oneform, Exactness, Leg,
    LinePotential, OneForm,
};
pub use recurrence::{
    definiteness, metric_from_ricci, recurrence_solve, ricci_jet, Definiteness, RecurrenceData, RicciJet,
    RicciLagrangian, RicciMetric, RECURRENCE_TOL,
};

use crate::error::{Error, Result};
use crate::calculus::CurveSampler;
use crate::holonomy::LoopDescriptor;
use crate::lagrangian::LagrangianStructure;
use crate::manifold::Chart;
use crate::vhc::ReducedDynamics;

pub(crate) fn generators_of(chart: &Chart, base: &[f64]) -> Vec<LoopDescriptor> {
    LoopDescriptor::axis_generators(chart, base)
}

/// Diagnostics of the curved-case decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciReport {
    pub metrizable: bool,
    pub lagrangian: bool,
    pub definiteness: Definiteness,
    pub recurrence_residual: f64,
    /// `±1`, following the definiteness.
    pub sign: Option<f64>,
    pub b: f64,
    pub base: Vec<f64>,
    /// Why `ω` failed to be exact, if it did.
    pub exactness_failure: Option<String>,
    /// Largest `|Γ(g) − Γ|` of the reconstructed metric.
    pub compatibility_defect: Option<f64>,
    /// Largest `|d(g λ)|` over the grid.
    pub potential_closedness: Option<f64>,
    /// `∮ g λ` around each generator.
    pub potential_loop_integrals: Vec<f64>,
}

/// Metrizability and Lagrangian decision for reduced dynamics with
/// nowhere-vanishing curvature.
pub fn ricci_lagrangian<R: ReducedDynamics + Clone + Sync>(
    r: &R,
    grid: &[Vec<f64>],
    b: f64,
    tol: f64,
) -> Result<(RicciReport, Option<RicciLagrangian<R>>)> {
    let chart = r.chart();
    let base = RicciMetric::<R>::default_base(&chart);
    let data = recurrence_solve(r, grid, RECURRENCE_TOL)?;
    let mut report = RicciReport {
        metrizable: false,
        lagrangian: false,
        definiteness: data.definiteness,
        recurrence_residual: data.residual,
        sign: data.sign(),
        b,
        base: base.clone(),
        exactness_failure: None,
        compatibility_defect: None,
        potential_closedness: None,
        potential_loop_integrals: Vec::new(),
    };
    if !data.recurrent || data.sign().is_none() {
        return Ok((report, None));
    }
    let metric = match metric_from_ricci(&data, r.clone(), chart.clone(), base.clone(), b) {
        Ok(m) => m,
        Err(Error::NotExact(msg)) => {
            report.exactness_failure = Some(msg);
            return Ok((report, None));
        }
        Err(e) => return Err(e),
    };
    let coarse: Vec<Vec<f64>> = grid.iter().step_by((grid.len() / 25).max(1)).cloned().collect();
    let defect = metric.compatibility_defect(&coarse)?;
    report.compatibility_defect = Some(defect);
    report.metrizable = defect < 1e-5;
    let lag = RicciLagrangian { metric };
    report.potential_closedness = Some(lag.closedness_defect(grid)?);
    for lp in generators_of(&chart, &base) {
        let curve = lp.curve();
        let end = curve.point(curve.span().1);
        report.potential_loop_integrals.push(lag.potential(&end)?);
    }
    report.lagrangian = report.metrizable
        && report.potential_closedness.is_some_and(|c| c < tol)
        && report.potential_loop_integrals.iter().all(|v| v.abs() < tol);
    Ok((report, Some(lag)))
}
