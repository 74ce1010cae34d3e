//! End-to-end Lagrangian analysis of a model: regularity, the orthogonal
//! shortcut, then the one-dimensional, flat or curved decision, and an
//! Euler–Lagrange audit of whatever structure was reconstructed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{
    flat_metrizability, flatness_certificate, lagrangian_1d, CylinderIntegrals, CylinderLayout, TRANSPORT_TOL,
};
use crate::lagrangian::{el_residual, LagrangianStructure};
use crate::metrize2d::{cylinder_lagrangian_search, ricci_lagrangian, CylinderReport, CylinderSearchOptions, RicciReport};
use crate::models::ModelBundle;
use crate::vhc::{check_regularity, orthogonality_check, restricted_structure, Orthogonality, ReducedDynamics, Regularity};

/// Version of the serialized [`AnalysisReport`].
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Lagrangian,
    NotLagrangian,
    Unsupported,
}

impl Verdict {
    /// Process exit code: 0 Lagrangian, 3 not Lagrangian, 2 unsupported.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Lagrangian => 0,
            Verdict::NotLagrangian => 3,
            Verdict::Unsupported => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Lagrangian => "yes",
            Verdict::NotLagrangian => "no",
            Verdict::Unsupported => "unsupported",
        })
    }
}

/// Which decision procedure produced the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Orthogonal,
    OneDim,
    Flat,
    Curved,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Points per axis; `None` uses the model's standard grid.
    pub grid: Option<usize>,
    /// Closedness and loop-integral threshold for potentials.
    pub tol: f64,
    /// Gauge constant of the curved-case metric; `None` takes the model's
    /// reference value, or 0.
    pub b: Option<f64>,
    pub search: CylinderSearchOptions,
    /// Random states for the Euler–Lagrange audit.
    pub el_samples: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            grid: None,
            tol: 1e-6,
            b: None,
            search: CylinderSearchOptions::default(),
            el_samples: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDimSummary {
    pub periodic: bool,
    pub metrizable: bool,
    pub int_psi2: Option<f64>,
    pub int_psi1_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSummary {
    pub max_curvature: f64,
    /// `‖P − I‖` for each generator loop.
    pub transport_defects: Vec<f64>,
    pub metrizable: bool,
}

/// Metric and potential of the reconstructed structure at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSample {
    pub theta: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    pub potential: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub model: String,
    pub dim: usize,
    pub route: Route,
    pub verdict: Verdict,
    pub metrizable: Option<bool>,
    pub regularity: Regularity,
    pub orthogonality: Option<Orthogonality>,
    pub one_dim: Option<OneDimSummary>,
    pub flat: Option<FlatSummary>,
    pub cylinder: Option<CylinderReport>,
    pub ricci: Option<RicciReport>,
    /// Largest Euler–Lagrange residual over the random audit states.
    pub el_residual: Option<f64>,
    pub samples: Vec<StructureSample>,
    pub diagnostic: Option<String>,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("model: {}\nroute: {:?}\nLagrangian: {}\n", self.model, self.route, self.verdict);
        if let Some(m) = self.metrizable {
            s += &format!("metrizable: {}\n", if m { "yes" } else { "no" });
        }
        if let Some(c) = &self.cylinder {
            s += &format!("a = {:.9}, b = {}, closedness residual = {:.3e}\n", c.a, c.b, c.residual);
        }
        if let Some(r) = &self.ricci {
            s += &format!("recurrence residual = {:.3e}, b = {}\n", r.recurrence_residual, r.b);
        }
        if let Some(e) = self.el_residual {
            s += &format!("Euler-Lagrange residual = {e:.3e}\n");
        }
        for p in &self.samples {
            s += &format!("D_C{:?} = {:?}, P_C = {:.12}\n", p.theta, p.metric, p.potential);
        }
        if let Some(d) = &self.diagnostic {
            s += &format!("note: {d}\n");
        }
        s
    }
}

pub struct Analysis {
    pub report: AnalysisReport,
    pub structure: Option<Box<dyn LagrangianStructure>>,
}

impl std::fmt::Debug for Analysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Analysis").field("report", &self.report).finish()
    }
}

struct Outcome {
    route: Route,
    verdict: Verdict,
    metrizable: Option<bool>,
    structure: Option<Box<dyn LagrangianStructure>>,
}

impl Outcome {
    fn unsupported(route: Route, msg: String, diag: &mut Option<String>) -> Self {
        *diag = Some(msg);
        Outcome { route, verdict: Verdict::Unsupported, metrizable: None, structure: None }
    }
}

fn verdict(lagrangian: bool) -> Verdict {
    if lagrangian {
        Verdict::Lagrangian
    } else {
        Verdict::NotLagrangian
    }
}

/// Run the full pipeline on a model.
pub fn analyze(bundle: &ModelBundle, opts: &AnalysisOptions) -> Result<Analysis> {
    let c = bundle.constrained();
    let chart = bundle.chart();
    let dim = chart.dim();
    let grid = match opts.grid {
        Some(n) => bundle.grid(n),
        None => bundle.standard_grid(),
    };
    let regularity = check_regularity(&c.sys, &c.par, &grid, 1e-8)?;
    if !regularity.regular {
        return Err(Error::Structure(format!(
            "constraint is not regular (margin {:e} at {:?})",
            regularity.margin, regularity.worst
        )));
    }
    let mut report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        model: bundle.name.clone(),
        dim,
        route: Route::None,
        verdict: Verdict::Unsupported,
        metrizable: None,
        regularity,
        orthogonality: None,
        one_dim: None,
        flat: None,
        cylinder: None,
        ricci: None,
        el_residual: None,
        samples: Vec::new(),
        diagnostic: None,
    };
    let orth = orthogonality_check(&c.sys, &c.par, &grid, 1e-10)?;
    let orthogonal = orth.orthogonal;
    report.orthogonality = Some(orth);

    let outcome = if orthogonal {
        let s = restricted_structure(&c, &grid, 1e-10)?;
        Outcome { route: Route::Orthogonal, verdict: Verdict::Lagrangian, metrizable: Some(true), structure: Some(Box::new(s)) }
    } else if dim == 1 {
        let cc = c.clone();
        let r = lagrangian_1d(move |x| cc.psi(x), chart.is_periodic(0), 1e-10)?;
        report.one_dim = Some(OneDimSummary {
            periodic: r.periodic,
            metrizable: r.metrizable,
            int_psi2: r.int_psi2,
            int_psi1_m: r.int_psi1_m,
        });
        let lag = r.lagrangian;
        Outcome {
            route: Route::OneDim,
            verdict: verdict(lag),
            metrizable: Some(r.metrizable),
            structure: if lag { Some(Box::new(r)) } else { None },
        }
    } else if dim == 2 {
        match flatness_certificate(&c, &grid) {
            Ok(_) => flat_case(bundle, &c, &grid, opts, &mut report)?,
            Err(Error::NotFlat(_)) => {
                let b = opts.b.or_else(|| bundle.expected.get("metric_gauge_b").copied()).unwrap_or(0.0);
                match ricci_lagrangian(&c, &grid, b, opts.tol) {
                    Ok((r, lag)) => {
                        let (metrizable, lagrangian) = (r.metrizable, r.lagrangian);
                        report.ricci = Some(r);
                        Outcome {
                            route: Route::Curved,
                            verdict: verdict(lagrangian),
                            metrizable: Some(metrizable),
                            structure: lag.filter(|_| lagrangian).map(|l| Box::new(l) as Box<dyn LagrangianStructure>),
                        }
                    }
                    Err(Error::Unsupported(msg)) => Outcome::unsupported(Route::Curved, msg, &mut report.diagnostic),
                    Err(e) => return Err(e),
                }
            }
            Err(e) => return Err(e),
        }
    } else {
        Outcome::unsupported(
            Route::None,
            format!("constraint manifolds of dimension {dim} are not supported"),
            &mut report.diagnostic,
        )
    };

    report.route = outcome.route;
    report.verdict = outcome.verdict;
    report.metrizable = outcome.metrizable;
    if let Some(s) = &outcome.structure {
        report.el_residual = Some(el_audit(&c, s.as_ref(), &grid, opts.el_samples, opts.seed)?);
        for k in [grid.len() / 4, grid.len() / 2, 3 * grid.len() / 4] {
            let x = &grid[k];
            let g = s.metric(x)?;
            report.samples.push(StructureSample {
                theta: x.clone(),
                metric: (0..g.rows()).map(|i| g.row(i)).collect(),
                potential: s.potential(x)?,
            });
        }
    }
    Ok(Analysis { report, structure: outcome.structure })
}

fn flat_case<R: ReducedDynamics + Clone + Sync + 'static>(
    bundle: &ModelBundle,
    c: &R,
    grid: &[Vec<f64>],
    opts: &AnalysisOptions,
    report: &mut AnalysisReport,
) -> Result<Outcome> {
    let flat = flat_metrizability(c, &bundle.generators, grid, TRANSPORT_TOL)?;
    let metrizable = flat.metrizable();
    report.flat = Some(FlatSummary {
        max_curvature: flat.max_curvature,
        transport_defects: flat.transports.iter().map(|t| t.distance_from_identity()).collect(),
        metrizable,
    });
    if !metrizable {
        return Ok(Outcome { route: Route::Flat, verdict: Verdict::NotLagrangian, metrizable: Some(false), structure: None });
    }
    let layout = match CylinderLayout::from_chart(&c.chart()) {
        Ok(l) => l,
        Err(e) => {
            return Ok(Outcome::unsupported(
                Route::Flat,
                format!("flat connection off the cylinder: {e}"),
                &mut report.diagnostic,
            ))
        }
    };
    let searched = CylinderIntegrals::new(c, layout, grid, 1e-12)
        .and_then(|ints| cylinder_lagrangian_search(c, &ints, &opts.search));
    match searched {
        Ok((r, metric)) => {
            let lagrangian = r.lagrangian;
            report.cylinder = Some(r);
            Ok(Outcome {
                route: Route::Flat,
                verdict: verdict(lagrangian),
                metrizable: Some(true),
                structure: metric.filter(|_| lagrangian).map(|m| Box::new(m) as Box<dyn LagrangianStructure>),
            })
        }
        Err(Error::Unsupported(msg) | Error::Structure(msg)) => {
            Ok(Outcome::unsupported(Route::Flat, msg, &mut report.diagnostic))
        }
        Err(e) => Err(e),
    }
}

/// Largest Euler–Lagrange residual of `s` against the constrained dynamics
/// at `n` random grid points with velocities in `[−1, 1]ᵏ`.
pub fn el_audit<R: ReducedDynamics>(
    r: &R,
    s: &dyn LagrangianStructure,
    grid: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = &grid[rng.gen_range(0..grid.len())];
        let v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = r.acceleration(x, &v)?;
        worst = worst.max(el_residual(s, x, &v, &a)?);
    }
    Ok(worst)
}
