use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical RK4 with a fixed step (rounded so the grid lands on `t1`).
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with error control.
    Rk45,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub method: Method,
    /// Per-step tolerance, used as both absolute and relative.
    pub tol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            method: Method::Rk45,
            tol: 1e-10,
            max_step: 1e-2,
            initial_step: None,
            min_step: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn rk4(step: f64) -> Self {
        OdeOptions { method: Method::Rk4 { step }, ..Self::default() }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }
}

/// Dense trajectory with cubic Hermite interpolation between accepted steps.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub t: Vec<T>,
    pub x: Vec<Vec<T>>,
    pub dx: Vec<Vec<T>>,
}

impl<T: Real> Solution<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> &[T] {
        self.x.last().expect("solution has at least one sample")
    }

    pub fn t_end(&self) -> T {
        *self.t.last().expect("solution has at least one sample")
    }

    /// State at an arbitrary time inside the integrated span.
    pub fn at(&self, t: T) -> Vec<T> {
        let n = self.t.len();
        if n == 1 {
            return self.x[0].clone();
        }
        let forward = self.t[n - 1] >= self.t[0];
        let key = |s: T| if forward { s } else { -s };
        let tk = key(t);
        let idx = self.t.partition_point(|&s| key(s) <= tk).clamp(1, n - 1);
        let (i0, i1) = (idx - 1, idx);
        let (t0, t1) = (self.t[i0], self.t[i1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::c(2.0);
        let three = T::c(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        (0..self.x[i0].len())
            .map(|k| {
                h00 * self.x[i0][k]
                    + h10 * h * self.dx[i0][k]
                    + h01 * self.x[i1][k]
                    + h11 * h * self.dx[i1][k]
            })
            .collect()
    }
}

fn axpy<T: Real>(x: &[T], h: T, terms: &[(&[T], f64)]) -> Vec<T> {
    let mut out = x.to_vec();
    for &(v, c) in terms {
        let ch = h * T::c(c);
        for (o, &vi) in out.iter_mut().zip(v) {
            *o += ch * vi;
        }
    }
    out
}

fn check_finite<T: Real>(v: &[T], t: T) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("ODE state at t = {}", t.re())))
    }
}

/// Integrate `ẋ = rhs(t, x)` from `t0` to `t1` (either direction).
pub fn integrate_ode<T: Real>(
    rhs: impl FnMut(T, &[T]) -> Result<Vec<T>>,
    t0: T,
    x0: &[T],
    t1: T,
    opts: &OdeOptions,
) -> Result<Solution<T>> {
    integrate_ode_guarded(rhs, t0, x0, t1, opts, |_: &[T]| true)
}

/// As [`integrate_ode`], failing with [`Error::Guard`] when `guard(x)` turns false.
pub fn integrate_ode_guarded<T: Real>(
    mut rhs: impl FnMut(T, &[T]) -> Result<Vec<T>>,
    t0: T,
    x0: &[T],
    t1: T,
    opts: &OdeOptions,
    guard: impl Fn(&[T]) -> bool,
) -> Result<Solution<T>> {
    check_finite(x0, t0)?;
    if !guard(x0) {
        return Err(Error::Guard { t: t0.re() });
    }
    let f0 = rhs(t0, x0)?;
    check_finite(&f0, t0)?;
    let mut sol = Solution { t: vec![t0], x: vec![x0.to_vec()], dx: vec![f0] };
    if t0 == t1 {
        return Ok(sol);
    }
    match opts.method {
        Method::Rk4 { step } => rk4(&mut rhs, &mut sol, t1, step, &guard)?,
        Method::Rk45 => dopri(&mut rhs, &mut sol, t1, opts, &guard)?,
    }
    Ok(sol)
}

fn rk4<T: Real>(
    rhs: &mut impl FnMut(T, &[T]) -> Result<Vec<T>>,
    sol: &mut Solution<T>,
    t1: T,
    step: f64,
    guard: &impl Fn(&[T]) -> bool,
) -> Result<()> {
    let t0 = sol.t[0];
    let span = t1 - t0;
    let n = (span.re().abs() / step).ceil().max(1.0) as usize;
    let h = span / T::c(n as f64);
    let half = T::c(0.5);
    for k in 0..n {
        let t = t0 + h * T::c(k as f64);
        let x = sol.x.last().expect("nonempty").clone();
        let k1 = sol.dx.last().expect("nonempty").clone();
        let k2 = rhs(t + h * half, &axpy(&x, h, &[(&k1, 0.5)]))?;
        let k3 = rhs(t + h * half, &axpy(&x, h, &[(&k2, 0.5)]))?;
        let k4 = rhs(t + h, &axpy(&x, h, &[(&k3, 1.0)]))?;
        let xn = axpy(&x, h, &[(&k1, 1.0 / 6.0), (&k2, 1.0 / 3.0), (&k3, 1.0 / 3.0), (&k4, 1.0 / 6.0)]);
        let tn = if k + 1 == n { t1 } else { t0 + h * T::c((k + 1) as f64) };
        check_finite(&xn, tn)?;
        if !guard(&xn) {
            return Err(Error::Guard { t: tn.re() });
        }
        let fn_ = rhs(tn, &xn)?;
        sol.t.push(tn);
        sol.x.push(xn);
        sol.dx.push(fn_);
    }
    Ok(())
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri<T: Real>(
    rhs: &mut impl FnMut(T, &[T]) -> Result<Vec<T>>,
    sol: &mut Solution<T>,
    t1: T,
    opts: &OdeOptions,
    guard: &impl Fn(&[T]) -> bool,
) -> Result<()> {
    let t0 = sol.t[0];
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).re().abs();
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| (opts.tol.powf(0.2) * 0.1).min(opts.max_step))
        .min(span);
    let mut t = t0;
    let mut x = sol.x[0].clone();
    let mut k1 = sol.dx[0].clone();
    let mut steps = 0usize;
    while (t1 - t).re() * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::NonConvergence(format!("more than {} ODE steps", opts.max_steps)));
        }
        let remaining = (t1 - t).re().abs();
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        let hs = T::c(dir * hh);
        let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let terms: Vec<(&[T], f64)> = (0..s).map(|j| (k[j].as_slice(), A[s][j])).collect();
            let xs = axpy(&x, hs, &terms);
            let ts = if s >= 5 && last { t1 } else { t + hs * T::c(C[s]) };
            k.push(rhs(ts, &xs)?);
        }
        let terms: Vec<(&[T], f64)> = (0..6).map(|j| (k[j].as_slice(), A[6][j])).collect();
        let xn = axpy(&x, hs, &terms);
        let mut err = 0.0f64;
        for i in 0..x.len() {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i].re()).sum::<f64>() * hh;
            let sc = opts.tol * (1.0 + x[i].re().abs().max(xn[i].re().abs()));
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            let tn = if last { t1 } else { t + hs };
            check_finite(&xn, tn)?;
            if !guard(&xn) {
                return Err(Error::Guard { t: tn.re() });
            }
            t = tn;
            x = xn;
            k1 = k.pop().expect("seven stages");
            sol.t.push(t);
            sol.x.push(x.clone());
            sol.dx.push(k1.clone());
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (hh * fac).min(opts.max_step);
        } else {
            h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.min_step * (1.0 + t.re().abs()) {
                return Err(Error::StepUnderflow { t: t.re() });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution() {
        let sol = integrate_ode(|_, _| Ok(vec![0.0]), 0.0, &[3.5], 2.0, &OdeOptions::default()).unwrap();
        assert!(sol.x.iter().all(|x| x[0] == 3.5));
    }

    #[test]
    fn exponential_growth() {
        for opts in [OdeOptions::default(), OdeOptions::rk4(1e-3)] {
            let sol = integrate_ode(|_, x: &[f64]| Ok(vec![x[0]]), 0.0, &[1.0], 1.0, &opts).unwrap();
            assert!((sol.last()[0] - std::f64::consts::E).abs() < 1e-8);
            assert_eq!(sol.t_end(), 1.0);
        }
    }

    #[test]
    fn backward_integration() {
        let sol =
            integrate_ode(|_, x: &[f64]| Ok(vec![x[0]]), 1.0, &[1.0], 0.0, &OdeOptions::default()).unwrap();
        assert!((sol.last()[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert!((sol.at(0.5)[0] - (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn oscillator_energy_and_interpolation() {
        let sol = integrate_ode(
            |_, x: &[f64]| Ok(vec![x[1], -x[0]]),
            0.0,
            &[1.0, 0.0],
            100.0,
            &OdeOptions::default(),
        )
        .unwrap();
        let drift = sol
            .x
            .iter()
            .map(|x| (0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.5).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
        for t in [0.123, 17.77, 99.9] {
            assert!((sol.at(t)[0] - f64::cos(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn rk45_agrees_with_fine_rk4() {
        let f = |t: f64, x: &[f64]| Ok(vec![x[1], -x[0].sin() + 0.3 * t.cos()]);
        let a = integrate_ode(f, 0.0, &[0.5, 0.0], 5.0, &OdeOptions::default()).unwrap();
        let b = integrate_ode(f, 0.0, &[0.5, 0.0], 5.0, &OdeOptions::rk4(1e-4)).unwrap();
        for i in 0..2 {
            assert!((a.last()[i] - b.last()[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn guard_stops_integration() {
        let r = integrate_ode_guarded(
            |_, _: &[f64]| Ok(vec![1.0]),
            0.0,
            &[0.0],
            5.0,
            &OdeOptions::default(),
            |x| x[0] < 1.0,
        );
        assert!(matches!(r, Err(Error::Guard { .. })));
    }
}
