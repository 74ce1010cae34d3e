//! Mechanical Lagrangians `L = ½ θ̇ᵀ g(θ) θ̇ − P(θ)` and their Euler–Lagrange
//! equations.

use crate::error::{check_dim, Result};
use crate::linalg::Mat;

/// A metric and potential on a chart, evaluated in `f64`.
pub trait LagrangianStructure: Send + Sync {
    fn dim(&self) -> usize;

    fn metric(&self, x: &[f64]) -> Result<Mat<f64>>;

    /// `[∂₀g, ∂₁g, …]`.
    fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>>;

    fn potential(&self, x: &[f64]) -> Result<f64>;

    fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn energy(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        Ok(0.5 * self.metric(x)?.bilinear(v, v) + self.potential(x)?)
    }
}

/// `cᵢ = Σⱼₖ (∂ₖgᵢⱼ − ½ ∂ᵢgⱼₖ) vʲ vᵏ`.
fn velocity_terms(dg: &[Mat<f64>], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut c = 0.0;
            for j in 0..n {
                for k in 0..n {
                    c += (dg[k][(i, j)] - 0.5 * dg[i][(j, k)]) * v[j] * v[k];
                }
            }
            c
        })
        .collect()
}

/// Acceleration prescribed by the Euler–Lagrange equations.
pub fn el_acceleration(s: &dyn LagrangianStructure, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_dim(s.dim(), x.len())?;
    check_dim(s.dim(), v.len())?;
    let g = s.metric(x)?;
    let c = velocity_terms(&s.metric_partials(x)?, v);
    let dp = s.potential_gradient(x)?;
    let rhs: Vec<f64> = c.iter().zip(&dp).map(|(a, b)| -a - b).collect();
    g.solve(&rhs)
}

/// Largest component of `g a + c(v) + ∇P`, i.e. how far the acceleration `a`
/// is from satisfying the Euler–Lagrange equations.
pub fn el_residual(s: &dyn LagrangianStructure, x: &[f64], v: &[f64], a: &[f64]) -> Result<f64> {
    check_dim(s.dim(), x.len())?;
    check_dim(s.dim(), a.len())?;
    let ga = s.metric(x)?.mul_vec(a);
    let c = velocity_terms(&s.metric_partials(x)?, v);
    let dp = s.potential_gradient(x)?;
    Ok((0..a.len()).map(|i| (ga[i] + c[i] + dp[i]).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Polar;

    impl LagrangianStructure for Polar {
        fn dim(&self) -> usize {
            2
        }
        fn metric(&self, x: &[f64]) -> Result<Mat<f64>> {
            Ok(Mat::diag(&[1.0, x[0] * x[0]]))
        }
        fn metric_partials(&self, x: &[f64]) -> Result<Vec<Mat<f64>>> {
            Ok(vec![Mat::diag(&[0.0, 2.0 * x[0]]), Mat::zeros(2, 2)])
        }
        fn potential(&self, x: &[f64]) -> Result<f64> {
            Ok(0.5 * x[0] * x[0])
        }
        fn potential_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0], 0.0])
        }
    }

    #[test]
    fn polar_oscillator() {
        let (x, v) = ([2.0, 0.3], [0.5, 0.7]);
        let a = el_acceleration(&Polar, &x, &v).unwrap();
        assert!((a[0] - (x[0] * v[1] * v[1] - x[0])).abs() < 1e-14);
        assert!((a[1] + 2.0 * v[0] * v[1] / x[0]).abs() < 1e-14);
        assert!(el_residual(&Polar, &x, &v, &a).unwrap() < 1e-14);
        assert!((Polar.energy(&x, &v).unwrap() - (0.5 * (0.25 + 4.0 * 0.49) + 2.0)).abs() < 1e-14);
    }
}
