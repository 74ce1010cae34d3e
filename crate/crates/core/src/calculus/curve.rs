use std::sync::Arc;

/// Piecewise-smooth parametrized curve in chart coordinates.
pub trait CurveSampler: Send + Sync {
    fn span(&self) -> (f64, f64);

    /// Interior times where the curve is only continuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn point(&self, t: f64) -> Vec<f64>;

    fn velocity(&self, t: f64) -> Vec<f64>;

    fn acceleration(&self, t: f64) -> Vec<f64> {
        let h = 1e-5 * t.abs().max(1.0);
        let (a, b) = self.span();
        let (lo, hi) = ((t - h).max(a), (t + h).min(b));
        let vp = self.velocity(hi);
        let vm = self.velocity(lo);
        vp.iter().zip(&vm).map(|(p, m)| (p - m) / (hi - lo)).collect()
    }

    fn dim(&self) -> usize {
        self.point(self.span().0).len()
    }
}

/// Largest deviation between `velocity` and a central difference of `point`,
/// sampled away from breakpoints.
pub fn check_velocity(c: &dyn CurveSampler, samples: usize) -> f64 {
    let (a, b) = c.span();
    let bps = c.breakpoints();
    let h = 1e-6 * (b - a).abs().max(1.0);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let t = a + (b - a) * (k as f64 + 0.5) / samples as f64;
        if bps.iter().any(|&s| (s - t).abs() < 2.0 * h) {
            continue;
        }
        let (p, m) = (c.point(t + h), c.point(t - h));
        for (i, v) in c.velocity(t).iter().enumerate() {
            worst = worst.max((v - (p[i] - m[i]) / (2.0 * h)).abs());
        }
    }
    worst
}

/// Straight segment traversed at constant speed over `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct Segment {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
}

impl Segment {
    pub fn new(from: Vec<f64>, to: Vec<f64>) -> Self {
        Segment { from, to, t0: 0.0, t1: 1.0 }
    }

    pub fn timed(from: Vec<f64>, to: Vec<f64>, t0: f64, t1: f64) -> Self {
        Segment { from, to, t0, t1 }
    }
}

impl CurveSampler for Segment {
    fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t0) / (self.t1 - self.t0);
        self.from.iter().zip(&self.to).map(|(a, b)| a + s * (b - a)).collect()
    }

    fn velocity(&self, _t: f64) -> Vec<f64> {
        let d = self.t1 - self.t0;
        self.from.iter().zip(&self.to).map(|(a, b)| (b - a) / d).collect()
    }

    fn acceleration(&self, _t: f64) -> Vec<f64> {
        vec![0.0; self.from.len()]
    }
}

/// The constant curve at a point.
#[derive(Clone, Debug)]
pub struct Constant {
    pub at: Vec<f64>,
    pub duration: f64,
}

impl CurveSampler for Constant {
    fn span(&self) -> (f64, f64) {
        (0.0, self.duration)
    }

    fn point(&self, _t: f64) -> Vec<f64> {
        self.at.clone()
    }

    fn velocity(&self, _t: f64) -> Vec<f64> {
        vec![0.0; self.at.len()]
    }
}

/// Polygonal path through vertices, one unit of time per edge.
#[derive(Clone, Debug)]
pub struct Polyline {
    pub vertices: Vec<Vec<f64>>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        assert!(vertices.len() >= 2, "polyline needs two vertices");
        Polyline { vertices }
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let edges = self.vertices.len() - 1;
        let k = (t.floor().max(0.0) as usize).min(edges - 1);
        (k, t - k as f64)
    }
}

impl CurveSampler for Polyline {
    fn span(&self) -> (f64, f64) {
        (0.0, (self.vertices.len() - 1) as f64)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (1..self.vertices.len() - 1).map(|k| k as f64).collect()
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let (k, s) = self.locate(t);
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        let (k, _) = self.locate(t);
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        a.iter().zip(b).map(|(x, y)| y - x).collect()
    }

    fn acceleration(&self, _t: f64) -> Vec<f64> {
        vec![0.0; self.vertices[0].len()]
    }
}

type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Curve given by closures for position and velocity.
#[derive(Clone)]
pub struct FnCurve {
    span: (f64, f64),
    point: CurveFn,
    velocity: CurveFn,
}

impl FnCurve {
    pub fn new(
        span: (f64, f64),
        point: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        velocity: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        FnCurve { span, point: Arc::new(point), velocity: Arc::new(velocity) }
    }
}

impl CurveSampler for FnCurve {
    fn span(&self) -> (f64, f64) {
        self.span
    }

    fn point(&self, t: f64) -> Vec<f64> {
        (self.point)(t)
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        (self.velocity)(t)
    }
}

/// The same curve traversed backwards over the same span.
#[derive(Clone)]
pub struct Reversed(pub Arc<dyn CurveSampler>);

impl CurveSampler for Reversed {
    fn span(&self) -> (f64, f64) {
        self.0.span()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.0.span();
        let mut bp: Vec<f64> = self.0.breakpoints().iter().map(|s| a + b - s).collect();
        bp.sort_by(f64::total_cmp);
        bp
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let (a, b) = self.0.span();
        self.0.point(a + b - t)
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        let (a, b) = self.0.span();
        self.0.velocity(a + b - t).iter().map(|v| -v).collect()
    }
}

/// Concatenation `γ₁ · γ₂ · …`, each piece shifted to follow the previous one.
#[derive(Clone)]
pub struct Concat {
    pieces: Vec<Arc<dyn CurveSampler>>,
    offsets: Vec<f64>,
    end: f64,
}

impl Concat {
    pub fn new(pieces: Vec<Arc<dyn CurveSampler>>) -> Self {
        assert!(!pieces.is_empty(), "concatenation of no curves");
        let mut offsets = Vec::with_capacity(pieces.len());
        let mut t = 0.0;
        for p in &pieces {
            let (a, b) = p.span();
            offsets.push(t - a);
            t += b - a;
        }
        Concat { pieces, offsets, end: t }
    }

    pub fn pieces(&self) -> &[Arc<dyn CurveSampler>] {
        &self.pieces
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        for (k, p) in self.pieces.iter().enumerate() {
            let (_, b) = p.span();
            if t <= b + self.offsets[k] || k + 1 == self.pieces.len() {
                return (k, t - self.offsets[k]);
            }
        }
        unreachable!("pieces is nonempty")
    }
}

impl CurveSampler for Concat {
    fn span(&self) -> (f64, f64) {
        (0.0, self.end)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let (_, b) = p.span();
            out.extend(p.breakpoints().iter().map(|s| s + self.offsets[k]));
            if k + 1 < self.pieces.len() {
                out.push(b + self.offsets[k]);
            }
        }
        out
    }

    fn point(&self, t: f64) -> Vec<f64> {
        let (k, s) = self.locate(t);
        self.pieces[k].point(s)
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        let (k, s) = self.locate(t);
        self.pieces[k].velocity(s)
    }
}
