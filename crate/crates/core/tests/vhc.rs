use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use vhc_core::models::{by_name, circle_particle, double_pendulum_cart, sphere_mass, DpcCase, Model};
use vhc_core::vhc::{
    check_regularity, constraint_state, orthogonality_check, restricted_structure, stabilizing_feedback,
    Constrained, ConstraintParametrization, ControlSystem, Gains, ReducedDynamics,
};
use vhc_core::lagrangian::{el_residual, LagrangianStructure};
use vhc_core::manifold::Connection;
use vhc_core::{Mat, Real, Result};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// The same system with its annihilator multiplied by `2 + q₀²`.
#[derive(Clone)]
struct Rescaled(Model);

impl ControlSystem for Rescaled {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn inputs(&self) -> usize {
        self.0.inputs()
    }
    fn inertia<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        self.0.inertia(q)
    }
    fn potential<T: Real>(&self, q: &[T]) -> Result<T> {
        self.0.potential(q)
    }
    fn input_matrix<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        self.0.input_matrix(q)
    }
    fn annihilator<T: Real>(&self, q: &[T]) -> Result<Mat<T>> {
        Ok(self.0.annihilator(q)?.scale(T::c(2.0) + q[0] * q[0]))
    }
}

#[test]
fn regularity_of_examples() {
    for alpha in [FRAC_PI_6, 0.0, -0.4] {
        let b = circle_particle(alpha);
        let c = b.constrained();
        assert!(check_regularity(&c.sys, &c.par, &b.standard_grid(), 1e-8).unwrap().regular);
    }
    let s = sphere_mass();
    assert!(check_regularity(&s.model, &s.model, &s.standard_grid(), 1e-8).unwrap().regular);

    let b = circle_particle(FRAC_PI_2);
    let r = check_regularity(&b.model, &b.model, &b.standard_grid(), 1e-8).unwrap();
    assert!(!r.regular);
    assert!(r.margin < 1e-12);
}

#[test]
fn circle_connection_is_tan_alpha() {
    for alpha in [0.0, 0.3, FRAC_PI_6, -0.4] {
        let c = circle_particle(alpha).constrained();
        for k in 0..8 {
            let th = -PI + k as f64 * 0.7;
            let g = c.christoffel(&[th]).unwrap();
            assert!(close(g[(0, 0, 0)], alpha.tan(), 1e-12));
            let (p1, p2) = c.psi(th).unwrap();
            assert!(close(p1, 0.0, 1e-14));
            assert!(close(p2, -g[(0, 0, 0)], 1e-12));
            let v = 1.3;
            let a = c.acceleration(&[th], &[v]).unwrap()[0];
            assert!(close(a, p1 + p2 * v * v, 1e-12));
        }
    }
}

#[test]
fn sphere_connection_and_dynamics() {
    let c = sphere_mass().constrained();
    for &(t1, t2) in &[(0.4, -2.0), (FRAC_PI_4, 0.3), (1.9, 1.0), (2.8, -0.2)] {
        let g = c.christoffel(&[t1, t2]).unwrap();
        let den = t1.cos().powi(2) + 1.0;
        let s2 = (2.0 * t1).sin();
        assert!(close(g[(0, 0, 0)], -s2 / (2.0 * den), 1e-12));
        assert!(close(g[(0, 1, 1)], -s2 / den, 1e-12));
        assert!(close(g[(1, 0, 1)], 1.0 / t1.tan(), 1e-12));
        assert!(close(g[(1, 1, 0)], 1.0 / t1.tan(), 1e-12));
        for (k, i, j) in [(0, 0, 1), (1, 0, 0), (1, 1, 1)] {
            assert!(g[(k, i, j)].abs() < 1e-12);
        }
        let (v1, v2) = (0.7, -1.1);
        let a = c.acceleration(&[t1, t2], &[v1, v2]).unwrap();
        assert!(close(a[0], s2 / (2.0 * den) * v1 * v1 + s2 / den * v2 * v2, 1e-12));
        assert!(close(a[1], -2.0 / t1.tan() * v1 * v2, 1e-12));
    }
    assert!(close(c.christoffel(&[FRAC_PI_4, 0.0]).unwrap()[(1, 0, 1)], 1.0, 1e-12));
}

#[test]
fn projection_identity_kernel_idempotence() {
    let c = sphere_mass().constrained();
    let th = [1.1, 0.4];
    let q = c.par.embed(&th).unwrap();
    let dphi = c.par.tangent(&th).unwrap();
    let w = [0.3, -0.8];
    let v = dphi.mul_vec(&w);
    let p = c.projection(&th, &v).unwrap();
    assert!(close(p[0], w[0], 1e-12) && close(p[1], w[1], 1e-12));

    let db = c.sys.inertia(&q).unwrap().solve_mat(&c.sys.input_matrix(&q).unwrap()).unwrap();
    let p = c.projection(&th, &db.column(0)).unwrap();
    assert!(p.iter().all(|x| x.abs() < 1e-12));

    let v = [0.2, -0.5, 1.7];
    let once = c.projection(&th, &v).unwrap();
    let twice = c.projection(&th, &dphi.mul_vec(&once)).unwrap();
    assert!(once.iter().zip(&twice).all(|(a, b)| close(*a, *b, 1e-10)));
}

#[test]
fn sphere_projection_of_vertical_at_equator() {
    let c = sphere_mass().constrained();
    let th = [FRAC_PI_2, 0.0];
    let p = c.projection(&th, &[0.0, 0.0, 1.0]).unwrap();
    // at q = e₁, B = e₁ is normal, so e₃ = −∂θ¹φ is tangent already
    assert!(close(p[0], -1.0, 1e-12));
    assert!(p[1].abs() < 1e-12);
}

#[test]
fn annihilator_independence() {
    for name in ["sphere", "dpc-a", "dpc-b"] {
        let b = by_name(name, &Default::default()).unwrap();
        let c = b.constrained();
        let r = Constrained { sys: Rescaled(b.model.clone()), par: b.model.clone() };
        for x in b.grid(5) {
            let (g1, g2) = (c.christoffel(&x).unwrap(), r.christoffel(&x).unwrap());
            let (l1, l2) = (c.lambda(&x).unwrap(), r.lambda(&x).unwrap());
            for k in 0..2 {
                assert!(close(l1[k], l2[k], 1e-9 * (1.0 + l1[k].abs())));
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(close(g1[(k, i, j)], g2[(k, i, j)], 1e-9));
                    }
                }
            }
        }
    }
}

#[test]
fn induced_symbols_are_symmetric() {
    for name in ["sphere", "dpc-a", "dpc-b"] {
        let b = by_name(name, &Default::default()).unwrap();
        let c = b.constrained();
        for x in b.grid(6) {
            let g = c.christoffel(&x).unwrap();
            for k in 0..2 {
                assert_eq!(g[(k, 0, 1)], g[(k, 1, 0)]);
            }
        }
    }
}

#[test]
fn dpc_symbols_and_lambda_reference_values() {
    let a = double_pendulum_cart(DpcCase::A, 9.81).constrained();
    let b = double_pendulum_cart(DpcCase::B, 9.81).constrained();
    let x = [0.0, FRAC_PI_2];

    let ga = a.christoffel(&x).unwrap();
    assert!(close(ga[(0, 1, 1)], 0.38858931128200302, 1e-9));
    assert!(close(ga[(1, 1, 1)], -0.16336344838611799, 1e-9));
    let la = a.lambda(&x).unwrap();
    assert!(close(la[0], -3.3996182853287307, 1e-9));
    assert!(close(la[1], -10.943206095109575, 1e-9));

    let gb = b.christoffel(&x).unwrap();
    assert!(close(gb[(0, 1, 1)], 0.51731758655604032, 1e-9));
    assert!(close(gb[(1, 1, 1)], -0.16336344838611799, 1e-9));
    let lb = b.lambda(&x).unwrap();
    assert!(close(lb[0], -0.75547073007305099, 1e-9));
    assert!(close(lb[1], -10.943206095109575, 1e-9));

    let lb1 = b.lambda(&[0.0, 1.0]).unwrap();
    assert!(close(lb1[0], -3.2176387496670524, 1e-9));
    assert!(close(lb1[1], -9.8024443445843907, 1e-9));

    for c in [&a, &b] {
        assert!(c.lambda(&[0.0, PI]).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn dpc_only_line_free_symbols_and_oddness() {
    for case in [DpcCase::A, DpcCase::B] {
        let c = double_pendulum_cart(case, 9.81).constrained();
        for k in 0..24 {
            let s = -PI + 0.27 * k as f64;
            let g = c.christoffel(&[0.0, s]).unwrap();
            let gm = c.christoffel(&[0.0, -s]).unwrap();
            let shifted = c.christoffel(&[2.3, s]).unwrap();
            for (kk, i, j) in [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1)] {
                assert!(g[(kk, i, j)].abs() < 1e-12);
            }
            for kk in 0..2 {
                assert!((g[(kk, 1, 1)] + gm[(kk, 1, 1)]).abs() < 1e-9);
                assert!(close(g[(kk, 1, 1)], shifted[(kk, 1, 1)], 1e-12));
            }
            let (l, lm) = (c.lambda(&[0.0, s]).unwrap(), c.lambda(&[0.0, -s]).unwrap());
            assert!((l[0] + lm[0]).abs() < 1e-9 && (l[1] + lm[1]).abs() < 1e-9);
        }
    }
}

#[test]
fn orthogonality_verdicts() {
    let check = |b: vhc_core::models::ModelBundle| {
        orthogonality_check(&b.model, &b.model, &b.standard_grid(), 1e-10).unwrap().orthogonal
    };
    assert!(check(circle_particle(0.0)));
    assert!(!check(circle_particle(FRAC_PI_6)));
    assert!(!check(sphere_mass()));
}

#[test]
fn restricted_structure_of_radial_circle() {
    let b = circle_particle(0.0);
    let c = b.constrained();
    let s = restricted_structure(&c, &b.standard_grid(), 1e-10).unwrap();
    for x in b.standard_grid() {
        assert!(close(s.metric(&x).unwrap()[(0, 0)], 1.0, 1e-14));
        assert!(s.potential(&x).unwrap().abs() < 1e-14);
        let v = [0.9];
        let a = c.acceleration(&x, &v).unwrap();
        assert!(el_residual(&s, &x, &v, &a).unwrap() < 1e-12);
    }
    let tilted = circle_particle(0.3);
    assert!(restricted_structure(&tilted.constrained(), &tilted.standard_grid(), 1e-10).is_err());
}

#[test]
fn circle_feedback_matches_closed_form() {
    let alpha = 0.3;
    let c = circle_particle(alpha).constrained();
    let (kp, kd) = (16.0, 8.0);
    for &(q, dq) in &[([1.1, 0.2], [0.3, -0.4]), ([0.0, 0.9], [1.0, 0.5]), ([-0.7, -0.8], [0.0, 0.2])] {
        let tau = stabilizing_feedback(&c.sys, &c.par, &q, &dq, Gains::new(kp, kd)).unwrap()[0];
        let rq = [alpha.cos() * q[0] - alpha.sin() * q[1], alpha.sin() * q[0] + alpha.cos() * q[1]];
        let qrq = q[0] * rq[0] + q[1] * rq[1];
        let e = q[0] * q[0] + q[1] * q[1] - 1.0;
        let de = 2.0 * (q[0] * dq[0] + q[1] * dq[1]);
        let expected = (-2.0 * (dq[0] * dq[0] + dq[1] * dq[1]) - kp * e - kd * de) / (2.0 * qrq);
        assert!(close(tau, expected, 1e-12), "{tau} vs {expected}");
    }
}

#[test]
fn geodesic_constraint_needs_no_force() {
    // radial forcing on the unit circle at rest and on-constraint: h = ḣ = 0, no potential
    let c = circle_particle(0.0).constrained();
    let (q, dq) = ([1.0, 0.0], [0.0, 0.0]);
    let tau = stabilizing_feedback(&c.sys, &c.par, &q, &dq, Gains::new(0.0, 0.0)).unwrap();
    assert!(tau[0].abs() < 1e-14);
    let (h, dh) = constraint_state(&c.par, &q, &dq).unwrap();
    assert!(h[0].abs() < 1e-14 && dh[0].abs() < 1e-14);
}

#[test]
fn constrained_new_checks_dimensions() {
    let s = sphere_mass();
    let circle = circle_particle(0.0);
    assert!(Constrained::new(s.model.clone(), circle.model.clone()).is_err());
    assert!(Constrained::new(s.model.clone(), s.model.clone()).is_ok());
}
