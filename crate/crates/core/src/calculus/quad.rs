use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default absolute tolerance for [`quad`].
pub const QUAD_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    err: f64,
}

fn kronrod<T: Real>(f: &mut impl FnMut(T) -> Result<T>, a: T, b: T) -> Result<Piece<T>> {
    let c = (a + b) * T::c(0.5);
    let h = (b - a) * T::c(0.5);
    let fc = f(c)?;
    let mut k = fc * T::c(WGK[7]);
    let mut g = fc * T::c(WG[3]);
    for j in 0..7 {
        let dx = h * T::c(XGK[j]);
        let s = f(c - dx)? + f(c + dx)?;
        k += s * T::c(WGK[j]);
        if j % 2 == 1 {
            g += s * T::c(WG[j / 2]);
        }
    }
    let value = k * h;
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{}, {}]", a.re(), b.re())));
    }
    let err = ((k - g) * h).re().abs();
    Ok(Piece { a, b, value, err })
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of a fallible integrand.
pub fn quad_try<T: Real>(mut f: impl FnMut(T) -> Result<T>, a: T, b: T, tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let mut pieces = vec![kronrod(&mut f, a, b)?];
    loop {
        let total: f64 = pieces.iter().map(|p| p.err).sum();
        if total <= tol {
            break;
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence(format!(
                "quadrature error estimate {total:e} above {tol:e} after {MAX_INTERVALS} intervals"
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = pieces.swap_remove(worst);
        let mid = (p.a + p.b) * T::c(0.5);
        if mid == p.a || mid == p.b {
            return Err(Error::NonConvergence("quadrature interval collapsed".into()));
        }
        pieces.push(kronrod(&mut f, p.a, mid)?);
        pieces.push(kronrod(&mut f, mid, p.b)?);
    }
    Ok(pieces.iter().map(|p| p.value).fold(T::zero(), |s, v| s + v))
}

/// Adaptive quadrature of an infallible integrand; `|error| ≤ tol` (estimated).
pub fn quad<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: f64) -> Result<T> {
    quad_try(|x| Ok(f(x)), a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn basic_integrals() {
        assert!(quad(f64::sin, 0.0, 2.0 * PI, QUAD_TOL).unwrap().abs() < 1e-12);
        assert!((quad(|x: f64| x * x, 0.0, 1.0, QUAD_TOL).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((quad(|x: f64| x * x, 1.0, 0.0, QUAD_TOL).unwrap() + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn matches_refined_simpson() {
        let f = |t: f64| t.sin().exp();
        let simpson = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let mut s = f(0.0) + f(2.0 * PI);
            for k in 1..n {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
            }
            s * h / 3.0
        };
        let (s1, s2) = (simpson(2000), simpson(4000));
        let q = quad(f, 0.0, 2.0 * PI, QUAD_TOL).unwrap();
        assert!((s1 - s2).abs() < 1e-11);
        assert!((q - s2).abs() < 1e-10);
    }

    #[test]
    fn additivity() {
        let f = |x: f64| (3.0 * x).cos() * (-x * x).exp();
        let ac = quad(f, -1.0, 2.5, QUAD_TOL).unwrap();
        let ab = quad(f, -1.0, 0.7, QUAD_TOL).unwrap();
        let bc = quad(f, 0.7, 2.5, QUAD_TOL).unwrap();
        assert!((ac - ab - bc).abs() <= 2.0 * QUAD_TOL);
    }

    #[test]
    fn non_finite_reported() {
        assert!(quad(|x: f64| 1.0 / x, -1.0, 1.0, QUAD_TOL).is_err());
    }
}
