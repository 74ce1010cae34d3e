use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use proptest::prelude::*;
use vhc_core::calculus::{Concat, Constant, CurveSampler, MatrixField, Polyline, Reversed, Segment};
use vhc_core::holonomy::{
    flat_metrizability, invariant_forms, lagrangian_1d, loop_transport, metric_by_transport, metrizability_1d,
    parallel_transport, transport_matrix, CylinderIntegrals, CylinderLayout, LoopDescriptor, TRANSPORT_TOL,
};
use vhc_core::lagrangian::{el_residual, LagrangianStructure};
use vhc_core::manifold::{FlatConnection, LeviCivita};
use vhc_core::models::{circle_particle, double_pendulum_cart, sphere_mass, DpcCase};
use vhc_core::{Mat, Real, Result};

/// Round sphere `dθ² + sin²θ dφ²`.
struct RoundSphere;

impl MatrixField for RoundSphere {
    fn dim(&self) -> usize {
        2
    }
    fn shape(&self) -> (usize, usize) {
        (2, 2)
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>> {
        let s = x[0].sin();
        Ok(Mat::diag(&[T::one(), s * s]))
    }
}

fn seg(a: &[f64], b: &[f64]) -> Arc<dyn CurveSampler> {
    Arc::new(Segment::new(a.to_vec(), b.to_vec()))
}

fn max_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (a - b).max_abs()
}

#[test]
fn constant_path_and_flat_connection_give_identity() {
    let c = sphere_mass().constrained();
    let p = transport_matrix(&c, &Constant { at: vec![1.0, 0.2], duration: 1.0 }, TRANSPORT_TOL).unwrap();
    assert!(max_diff(&p, &Mat::identity(2)) < 1e-14);

    let path = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-3.0, 0.5]]);
    let v = parallel_transport(&FlatConnection(2), &path, &[0.3, -0.7], TRANSPORT_TOL).unwrap();
    assert_eq!(v, vec![0.3, -0.7]);
}

#[test]
fn reverse_transport_round_trip() {
    let c = sphere_mass().constrained();
    let path: Arc<dyn CurveSampler> = Arc::new(Polyline::new(vec![vec![0.6, -1.0], vec![1.4, 0.4], vec![2.2, 1.5]]));
    let v0 = [0.4, 1.2];
    let v1 = parallel_transport(&c, path.as_ref(), &v0, TRANSPORT_TOL).unwrap();
    let back = parallel_transport(&c, &Reversed(path), &v1, TRANSPORT_TOL).unwrap();
    assert!((back[0] - v0[0]).abs() < 1e-9 && (back[1] - v0[1]).abs() < 1e-9);
}

#[test]
fn dpc_generator_transport_is_identity() {
    for case in [DpcCase::A, DpcCase::B] {
        let b = double_pendulum_cart(case, 9.81);
        let t = loop_transport(&b.constrained(), &b.generators[0], TRANSPORT_TOL).unwrap();
        assert!(t.distance_from_identity() < 1e-7, "{:?}", t.matrix);
    }
}

#[test]
fn circle_generator_transport_is_scalar_exponential() {
    let alpha: f64 = 0.3;
    let b = circle_particle(alpha);
    let t = loop_transport(&b.constrained(), &b.generators[0], TRANSPORT_TOL).unwrap();
    assert!((t.matrix[0][0] - (-TAU * alpha.tan()).exp()).abs() < 1e-9);
}

#[test]
fn one_dimensional_metrizability() {
    let line = metrizability_1d(|x| Ok(x.sin() + 3.0), false, 1e-12).unwrap();
    assert!(line.metrizable && line.integral.is_none());

    for (alpha, ok) in [(0.0f64, true), (0.3, false)] {
        let c = circle_particle(alpha).constrained();
        let m = metrizability_1d(|x| Ok(c.psi(x)?.1), true, 1e-12).unwrap();
        assert_eq!(m.metrizable, ok);
        assert!((m.integral.unwrap() + TAU * alpha.tan()).abs() < 1e-9);
    }
}

#[test]
fn lagrangian_1d_trivial_and_synthetic() {
    let r = lagrangian_1d(|_| Ok((0.0, 0.0)), true, 1e-10).unwrap();
    assert!(r.lagrangian);
    assert!((r.metric(&[1.0]).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    assert!(r.potential(&[2.0]).unwrap().abs() < 1e-12);

    let r = lagrangian_1d(|x| Ok((0.0, x.sin())), true, 1e-10).unwrap();
    assert!(r.metrizable && r.lagrangian);
    for k in 0..40 {
        let x = -PI + k as f64 * 0.157;
        let m = r.metric(&[x]).unwrap()[(0, 0)];
        assert!((m - (2.0 * (x.cos() - 1.0)).exp()).abs() < 1e-8);
        let v = [0.8];
        let a = [x.sin() * v[0] * v[0]];
        assert!(el_residual(&r, &[x], &v, &a).unwrap() < 1e-8);
    }
}

#[test]
fn lagrangian_1d_with_potential_term() {
    // Ψ₁ = −sin θ, Ψ₂ = 0: the pendulum, L = ½θ̇² + cos θ
    let r = lagrangian_1d(|x| Ok((-x.sin(), 0.0)), true, 1e-10).unwrap();
    assert!(r.lagrangian);
    for k in 0..20 {
        let x = -3.0 + 0.3 * k as f64;
        let expected = 1.0 - x.cos();
        assert!((r.potential(&[x]).unwrap() - expected).abs() < 1e-8);
        let v = [1.7];
        assert!(el_residual(&r, &[x], &v, &[-x.sin()]).unwrap() < 1e-8);
    }
    let r = lagrangian_1d(|x| Ok((1.0 + x.cos(), 0.0)), true, 1e-10).unwrap();
    assert!(r.metrizable && !r.lagrangian);
}

#[test]
fn invariant_forms_and_flat_metrizability() {
    assert_eq!(invariant_forms(&[Mat::identity(2)], 2, 1e-9).len(), 3);
    assert!(invariant_forms(&[Mat::diag(&[0.5])], 1, 1e-9).is_empty());

    let b = double_pendulum_cart(DpcCase::B, 9.81);
    let r = flat_metrizability(&b.constrained(), &b.generators, &b.standard_grid(), TRANSPORT_TOL).unwrap();
    assert!(r.metrizable());
    assert_eq!(r.invariant_basis.len(), 3);
    assert!(r.max_curvature < 1e-8);

    let c = circle_particle(0.3);
    let r = flat_metrizability(&c.constrained(), &c.generators, &c.standard_grid(), TRANSPORT_TOL).unwrap();
    assert!(!r.metrizable());

    let s = sphere_mass();
    assert!(flat_metrizability(&s.constrained(), &[], &s.standard_grid(), TRANSPORT_TOL).is_err());
}

#[test]
fn cylinder_integrals_reference_values() {
    let cases = [(DpcCase::A, 0.10804831, -0.45038309), (DpcCase::B, -1.06002497, 0.17134496)];
    for (case, i1, i2) in cases {
        let b = double_pendulum_cart(case, 9.81);
        let layout = CylinderLayout::from_chart(&b.chart()).unwrap();
        let ints = CylinderIntegrals::new(&b.constrained(), layout, &b.standard_grid(), 1e-12).unwrap();
        let (p1, p2) = ints.period();
        assert!(p1.abs() < 1e-9 && p2.abs() < 1e-9);
        let (v1, v2) = ints.eval(FRAC_PI_2);
        assert!((v1 - i1).abs() < 1e-7 && (v2 - i2).abs() < 1e-7, "{v1} {v2}");
        let (w1, w2) = ints.eval(FRAC_PI_2 + 2.0 * TAU);
        assert!((w1 - v1).abs() < 1e-9 && (w2 - v2).abs() < 1e-9);
    }
    let layout = CylinderLayout { line: 0, circle: 1 };
    let flat = CylinderIntegrals::new(&FlatConnection(2), layout, &[vec![0.0, 0.0]], 1e-12).unwrap();
    assert_eq!(flat.eval(1.3), (0.0, 0.0));
}

#[test]
fn dpc_metric_by_transport_matches_family() {
    let b = double_pendulum_cart(DpcCase::B, 9.81);
    let c = b.constrained();
    let layout = CylinderLayout::from_chart(&b.chart()).unwrap();
    let ints = CylinderIntegrals::new(&c, layout, &b.standard_grid(), 1e-12).unwrap();
    let (a, bb) = (-0.5, 1.0);
    let g0 = Mat::from_rows(&[vec![1.0, a], vec![a, bb]]);
    for s in [0.4, 1.3, 2.5, -2.0] {
        let g = metric_by_transport(&c, &g0, &Segment::new(vec![0.0, 0.0], vec![0.0, s]), 1e-12).unwrap();
        let (i1, i2) = ints.eval(s);
        let e = (-i1).exp();
        let expected = Mat::from_rows(&[
            vec![1.0, e * (i2 + a)],
            vec![e * (i2 + a), e * e * (i2 * i2 + 2.0 * a * i2 + bb)],
        ]);
        assert!(max_diff(&g, &expected) < 1e-7, "s = {s}");
    }
}

#[test]
fn metric_by_transport_is_path_independent_when_flat() {
    let b = double_pendulum_cart(DpcCase::A, 9.81);
    let c = b.constrained();
    let g0 = Mat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]);
    let direct = Polyline::new(vec![vec![0.0, 0.0], vec![1.5, 2.0]]);
    let detour = Polyline::new(vec![vec![0.0, 0.0], vec![-1.0, -1.0], vec![0.5, 3.0], vec![1.5, 2.0]]);
    let g1 = metric_by_transport(&c, &g0, &direct, 1e-12).unwrap();
    let g2 = metric_by_transport(&c, &g0, &detour, 1e-12).unwrap();
    assert!(max_diff(&g1, &g2) < 1e-7);
}

#[test]
fn levi_civita_transport_preserves_inner_products() {
    let c = LeviCivita(RoundSphere);
    let path = Polyline::new(vec![vec![0.7, 0.0], vec![1.6, 1.2], vec![2.1, -0.4], vec![1.0, 0.3]]);
    let (v, w) = ([0.3, 1.1], [-0.5, 0.2]);
    let g = |x: &[f64]| RoundSphere.eval(x).unwrap();
    let before = g(&path.point(0.0)).bilinear(&v, &w);
    let (vt, wt) = (
        parallel_transport(&c, &path, &v, TRANSPORT_TOL).unwrap(),
        parallel_transport(&c, &path, &w, TRANSPORT_TOL).unwrap(),
    );
    let after = g(&path.point(path.span().1)).bilinear(&vt, &wt);
    assert!((before - after).abs() < 1e-8);
}

#[test]
fn loop_descriptor_validation() {
    let chart = double_pendulum_cart(DpcCase::B, 9.81).chart();
    let closed = LoopDescriptor::new(vec![0.0, 0.0], vec![seg(&[0.0, 0.0], &[1.0, 0.0]), seg(&[1.0, 0.0], &[0.0, 0.0])], "out and back");
    assert!(closed.validate(&chart, 1e-12).is_ok());
    let around = LoopDescriptor::axis_generators(&chart, &[0.5, 0.0]);
    assert_eq!(around.len(), 1);
    assert!(around[0].validate(&chart, 1e-12).is_ok());
    let open = LoopDescriptor::new(vec![0.0, 0.0], vec![seg(&[0.0, 0.0], &[1.0, 0.5])], "open");
    assert!(open.validate(&chart, 1e-12).is_err());
    let broken = LoopDescriptor::new(vec![0.0, 0.0], vec![seg(&[0.0, 0.0], &[1.0, 0.0]), seg(&[2.0, 0.0], &[0.0, 0.0])], "gap");
    assert!(broken.validate(&chart, 1e-12).is_err());
}

fn random_path(points: &[(f64, f64)]) -> Arc<dyn CurveSampler> {
    Arc::new(Polyline::new(points.iter().map(|&(x, y)| vec![x, y]).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transport_composes(
        p in prop::collection::vec((0.4f64..2.7, -2.5f64..2.5), 3..5),
        q in prop::collection::vec((0.4f64..2.7, -2.5f64..2.5), 2..4),
    ) {
        let c = sphere_mass().constrained();
        let g1 = random_path(&p);
        let mut qq = vec![*p.last().unwrap()];
        qq.extend(q);
        let g2 = random_path(&qq);
        let p1 = transport_matrix(&c, g1.as_ref(), TRANSPORT_TOL).unwrap();
        let p2 = transport_matrix(&c, g2.as_ref(), TRANSPORT_TOL).unwrap();
        let both = transport_matrix(&c, &Concat::new(vec![g1.clone(), g2]), TRANSPORT_TOL).unwrap();
        prop_assert!(max_diff(&both, &(&p2 * &p1)) < 1e-8);
        let there_and_back = transport_matrix(&c, &Concat::new(vec![g1.clone(), Arc::new(Reversed(g1))]), TRANSPORT_TOL).unwrap();
        prop_assert!(max_diff(&there_and_back, &Mat::identity(2)) < 1e-8);
    }
}
