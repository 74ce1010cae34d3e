use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::manifold::{curvature, Connection};

use super::{loop_transport, LoopDescriptor, TransportMap};

/// Curvature bound below which a connection is treated as flat.
pub const FLAT_TOL: f64 = 1e-8;

/// Largest `|Rˡᵢⱼₖ|` over the grid, or [`Error::NotFlat`] above [`FLAT_TOL`].
pub fn flatness_certificate<C: Connection + Sync>(c: &C, grid: &[Vec<f64>]) -> Result<f64> {
    let worst = grid
        .par_iter()
        .map(|x| curvature(c, x).map(|r| r.max_abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if worst < FLAT_TOL {
        Ok(worst)
    } else {
        Err(Error::NotFlat(worst))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatReport {
    pub max_curvature: f64,
    pub transports: Vec<TransportMap>,
    /// Basis of the symmetric forms invariant under every generator.
    pub invariant_basis: Vec<Vec<Vec<f64>>>,
    /// An invariant positive definite form, normalized to `g₁₁ = 1`.
    pub form: Option<Vec<Vec<f64>>>,
}

impl FlatReport {
    pub fn metrizable(&self) -> bool {
        self.form.is_some()
    }
}

fn sym_basis(k: usize) -> Vec<Mat<f64>> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in i..k {
            let mut e = Mat::zeros(k, k);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            out.push(e);
        }
    }
    out
}

/// Basis of `{G = Gᵀ : PᵀGP = G for every P}`.
pub fn invariant_forms(transports: &[Mat<f64>], k: usize, tol: f64) -> Vec<Mat<f64>> {
    let basis = sym_basis(k);
    if transports.is_empty() {
        return basis;
    }
    let eqs_per = k * (k + 1) / 2;
    let a = Mat::from_fn(transports.len() * eqs_per, basis.len(), |row, col| {
        let (p, e) = (&transports[row / eqs_per], &basis[col]);
        let r = &(&(&p.transpose() * e) * p) - e;
        let mut idx = row % eqs_per;
        for i in 0..k {
            for j in i..k {
                if idx == 0 {
                    return r[(i, j)];
                }
                idx -= 1;
            }
        }
        unreachable!("equation index in range")
    });
    let null = a.nullspace(tol);
    (0..null.cols())
        .map(|c| {
            let mut g = Mat::zeros(k, k);
            for (b, e) in basis.iter().enumerate() {
                g = &g + &e.scale(null[(b, c)]);
            }
            g
        })
        .collect()
}

fn combine(basis: &[Mat<f64>], c: &[f64]) -> Mat<f64> {
    let k = basis[0].rows();
    basis.iter().zip(c).fold(Mat::zeros(k, k), |acc, (b, &w)| &acc + &b.scale(w))
}

/// `λ_min / max|λ|` of a symmetric matrix; positive iff definite positive.
fn spd_score(g: &Mat<f64>) -> f64 {
    let ev = g.symmetric_eigenvalues();
    let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return -1.0;
    }
    ev[0] / scale
}

/// Positive definite element of the span of `basis`, if any: the identity
/// when it is in the span, otherwise the best point of a coefficient sweep
/// refined by pattern search.
pub fn find_spd(basis: &[Mat<f64>], tol: f64) -> Option<Mat<f64>> {
    let d = basis.len();
    if d == 0 {
        return None;
    }
    let k = basis[0].rows();
    let ident = Mat::identity(k);
    let flat = |m: &Mat<f64>| m.as_slice().to_vec();
    let cols: Vec<Vec<f64>> = basis.iter().map(flat).collect();
    let gram = Mat::from_fn(d, d, |i, j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum());
    let rhs: Vec<f64> = cols.iter().map(|c| c.iter().zip(ident.as_slice()).map(|(a, b)| a * b).sum()).collect();
    if let Ok(coef) = gram.solve(&rhs) {
        if (&combine(basis, &coef) - &ident).max_abs() < tol {
            return Some(ident);
        }
    }
    let step: f64 = match d {
        1 | 2 => 1e-2,
        3 => 5e-2,
        _ => 0.25,
    };
    let n = (2.0 / step).round() as usize + 1;
    let total = n.pow(d as u32);
    let (mut best, mut score) = (vec![0.0; d], f64::NEG_INFINITY);
    for idx in 0..total {
        let mut r = idx;
        let c: Vec<f64> = (0..d)
            .map(|_| {
                let v = -1.0 + step * (r % n) as f64;
                r /= n;
                v
            })
            .collect();
        let s = spd_score(&combine(basis, &c));
        if s > score {
            score = s;
            best = c;
        }
    }
    let mut h = step;
    while h > 1e-6 {
        let mut improved = false;
        for i in 0..d {
            for sgn in [-1.0, 1.0] {
                let mut c = best.clone();
                c[i] += sgn * h;
                let s = spd_score(&combine(basis, &c));
                if s > score {
                    score = s;
                    best = c;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    if score <= tol {
        return None;
    }
    let g = combine(basis, &best);
    Some(g.scale(1.0 / g[(0, 0)]))
}

/// Metrizability of a flat connection: an inner product at the base point
/// invariant under the transport around every generator loop.
pub fn flat_metrizability<C: Connection + Sync>(
    c: &C,
    generators: &[LoopDescriptor],
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<FlatReport> {
    let max_curvature = flatness_certificate(c, grid)?;
    let transports = generators
        .iter()
        .map(|g| loop_transport(c, g, tol))
        .collect::<Result<Vec<_>>>()?;
    let mats: Vec<Mat<f64>> = transports.iter().map(TransportMap::mat).collect();
    let basis = invariant_forms(&mats, c.dim(), 1e-6);
    let form = find_spd(&basis, 1e-9);
    let rows = |m: &Mat<f64>| (0..m.rows()).map(|i| m.row(i)).collect::<Vec<_>>();
    Ok(FlatReport {
        max_curvature,
        transports,
        invariant_basis: basis.iter().map(rows).collect(),
        form: form.as_ref().map(rows),
    })
}
