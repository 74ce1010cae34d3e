use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_ode, Concat, CurveSampler, OdeOptions, Segment};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Mat;
use crate::manifold::{wrap_angle, Chart, Connection};

/// Default tolerance for transport integrations.
pub const TRANSPORT_TOL: f64 = 1e-10;

/// Closed piecewise curve at a base point, used as a homotopy generator.
#[derive(Clone)]
pub struct LoopDescriptor {
    pub base: Vec<f64>,
    pub segments: Vec<Arc<dyn CurveSampler>>,
    pub tag: String,
}

impl std::fmt::Debug for LoopDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoopDescriptor")
            .field("base", &self.base)
            .field("segments", &self.segments.len())
            .field("tag", &self.tag)
            .finish()
    }
}

impl LoopDescriptor {
    pub fn new(base: Vec<f64>, segments: Vec<Arc<dyn CurveSampler>>, tag: impl Into<String>) -> Self {
        LoopDescriptor { base, segments, tag: tag.into() }
    }

    /// One full turn along each periodic coordinate, starting at `base`.
    pub fn axis_generators(chart: &Chart, base: &[f64]) -> Vec<LoopDescriptor> {
        chart
            .periodic_indices()
            .into_iter()
            .map(|i| {
                let mut end = base.to_vec();
                end[i] += std::f64::consts::TAU;
                let seg: Arc<dyn CurveSampler> =
                    Arc::new(Segment::timed(base.to_vec(), end, 0.0, std::f64::consts::TAU));
                LoopDescriptor::new(base.to_vec(), vec![seg], format!("axis {i} generator"))
            })
            .collect()
    }

    pub fn curve(&self) -> Concat {
        Concat::new(self.segments.clone())
    }

    /// Checks that segments join up and the loop closes modulo the chart's
    /// periodic coordinates.
    pub fn validate(&self, chart: &Chart, tol: f64) -> Result<()> {
        let same = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).enumerate().all(|(i, (x, y))| {
                let d = if chart.is_periodic(i) { wrap_angle(x - y) } else { x - y };
                d.abs() <= tol
            })
        };
        if self.segments.is_empty() {
            return Err(Error::Domain(format!("loop '{}' has no segments", self.tag)));
        }
        let mut at = self.base.clone();
        for (k, s) in self.segments.iter().enumerate() {
            let (a, b) = s.span();
            let start = s.point(a);
            check_dim(chart.dim(), start.len())?;
            if !same(&at, &start) {
                return Err(Error::Domain(format!("loop '{}' is discontinuous at segment {k}", self.tag)));
            }
            at = s.point(b);
        }
        if !same(&at, &self.base) {
            return Err(Error::Domain(format!("loop '{}' does not return to its base point", self.tag)));
        }
        Ok(())
    }
}

/// Parallel transport map around a loop or along a path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportMap {
    pub matrix: Vec<Vec<f64>>,
    pub tag: String,
    pub tol: f64,
}

impl TransportMap {
    pub fn mat(&self) -> Mat<f64> {
        Mat::from_rows(&self.matrix)
    }

    /// Largest entry of `P − I`.
    pub fn distance_from_identity(&self) -> f64 {
        let p = self.mat();
        (&p - &Mat::identity(p.rows())).max_abs()
    }
}

/// Transports every vector in `cols` along `path`, piece by piece between
/// breakpoints.
fn transport_columns<C: Connection>(c: &C, path: &dyn CurveSampler, cols: Vec<Vec<f64>>, tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = c.dim();
    check_dim(n, path.dim())?;
    let (a, b) = path.span();
    let mut knots = vec![a];
    knots.extend(path.breakpoints().into_iter().filter(|&s| s > a && s < b));
    knots.push(b);
    let nc = cols.len();
    let mut state: Vec<f64> = cols.into_iter().flatten().collect();
    let opts = OdeOptions::default().with_tol(tol).with_max_step(f64::INFINITY);
    for w in knots.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let eps = 1e-12 * (1.0 + s0.abs().max(s1.abs()));
        let rhs = |t: f64, x: &[f64]| {
            // stay strictly inside the piece so the velocity is the one-sided limit
            let t = t.clamp(s0 + eps, s1 - eps);
            let gamma = c.christoffel(&path.point(t))?;
            let v = path.velocity(t);
            let mut out = Vec::with_capacity(x.len());
            for j in 0..nc {
                out.extend(gamma.contract(&v, &x[j * n..(j + 1) * n]).into_iter().map(|g| -g));
            }
            Ok(out)
        };
        state = integrate_ode(rhs, s0, &state, s1, &opts)?.last().to_vec();
    }
    Ok(state.chunks(n).map(<[f64]>::to_vec).collect())
}

/// `X(t_end)` for `Ẋᵏ = −Σ γ̇ⁱ Γᵏᵢⱼ Xʲ`, `X(t_start) = v0`.
pub fn parallel_transport<C: Connection>(c: &C, path: &dyn CurveSampler, v0: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_dim(c.dim(), v0.len())?;
    Ok(transport_columns(c, path, vec![v0.to_vec()], tol)?.remove(0))
}

/// Matrix of the transport along `path` (columns are transported basis vectors).
pub fn transport_matrix<C: Connection>(c: &C, path: &dyn CurveSampler, tol: f64) -> Result<Mat<f64>> {
    let n = c.dim();
    let basis = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let cols = transport_columns(c, path, basis, tol)?;
    Ok(Mat::from_fn(n, n, |i, j| cols[j][i]))
}

/// Transport around a loop, composed segment by segment.
pub fn loop_transport<C: Connection>(c: &C, lp: &LoopDescriptor, tol: f64) -> Result<TransportMap> {
    let mut p = Mat::identity(c.dim());
    for s in &lp.segments {
        p = &transport_matrix(c, s.as_ref(), tol)? * &p;
    }
    let matrix = (0..p.rows()).map(|i| p.row(i)).collect();
    Ok(TransportMap { matrix, tag: lp.tag.clone(), tol })
}

/// `g = P⁻ᵀ G₀ P⁻¹` at the end of `path`, where `P` transports from its start.
pub fn metric_by_transport<C: Connection>(c: &C, g0: &Mat<f64>, path: &dyn CurveSampler, tol: f64) -> Result<Mat<f64>> {
    let pinv = transport_matrix(c, path, tol)?.inverse()?;
    Ok(&(&pinv.transpose() * g0) * &pinv)
}
