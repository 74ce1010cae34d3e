//! Acceptance criteria 1 to 11. Each prints one PASS or FAIL line with its
//! measured values and runtime; the process fails if any criterion does.

use std::f64::consts::{FRAC_PI_6, PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vhc_core::analysis::{analyze, AnalysisOptions, Verdict};
use vhc_core::calculus::{Concat, CurveSampler, MatrixField, Polyline, Reversed};
use vhc_core::holonomy::{flatness_certificate, lagrangian_1d, loop_transport, transport_matrix, TRANSPORT_TOL};
use vhc_core::lagrangian::LagrangianStructure;
use vhc_core::manifold::{total_cov_derivative_02, Chart, Connection, LeviCivita, RicciField};
use vhc_core::metrize2d::{metric_from_ricci, recurrence_solve, ricci_jet, ricci_lagrangian, RECURRENCE_TOL};
use vhc_core::models::{circle_particle, double_pendulum_cart, sphere_mass, DpcCase, ModelBundle};
use vhc_core::sim::{
    on_constraint_state, phase_portrait, simulate_constrained, simulate_full, speed_sweep, OrbitClass,
    PortraitOptions, SimOptions, PORTRAIT_SPEEDS,
};
use vhc_core::vhc::Gains;
use vhc_core::{Mat, Real, Result};

const G: f64 = 9.81;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn c1_circle_symbol() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.3, FRAC_PI_6, -0.4f64] {
        let b = circle_particle(alpha);
        let c = b.constrained();
        let grid = b.grid(32);
        assert_eq!(grid.len(), 32);
        for x in &grid {
            worst = worst.max((c.christoffel::<f64>(x)?[(0, 0, 0)] - alpha.tan()).abs());
        }
    }
    outcome(worst < 1e-9, format!("max |Γ - tan α| = {worst:.2e}"))
}

fn c2_sphere_closed_forms() -> Result<Outcome> {
    let s = sphere_mass();
    let c = s.constrained();
    let grid = Chart::new(vec![false, false], vec![0.0, -PI], vec![PI, PI]).grid(17, 1e-2);
    let (report, lag) = ricci_lagrangian(&c, &grid, 0.25f64.ln(), 1e-6)?;
    let Some(lag) = lag else {
        return outcome(false, format!("no metric reconstructed: {report:?}"));
    };
    let (mut gamma, mut ric, mut nabla, mut omega, mut metric) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in &grid {
        let t = x[0];
        let (sn, cs) = (t.sin(), t.cos());
        let (s2, c2, sin2) = (sn * sn, cs * cs, (2.0 * t).sin());

        let g = c.christoffel::<f64>(x)?;
        let mut expected = [[[0.0; 2]; 2]; 2];
        expected[0][0][0] = -sin2 / (2.0 * (c2 + 1.0));
        expected[0][1][1] = -sin2 / (c2 + 1.0);
        expected[1][0][1] = cs / sn;
        expected[1][1][0] = cs / sn;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    gamma = gamma.max((g[(k, i, j)] - expected[k][i][j]).abs());
                }
            }
        }

        let jet = ricci_jet(&c, x)?;
        let r = Mat::from_rows(&[vec![1.0 / (c2 + 1.0), 0.0], vec![0.0, 2.0 * s2 / (s2 - 2.0).powi(2)]]);
        ric = ric.max((&jet.ric - &r).max_abs());

        let n = total_cov_derivative_02(&c, &RicciField(&c), x)?;
        for (i, j, k) in (0..8).map(|b| (b >> 2 & 1, b >> 1 & 1, b & 1)) {
            let e = match (i, j, k) {
                (0, 0, 0) => 2.0 * sin2 / (c2 + 1.0).powi(2),
                (0, 1, 1) => -4.0 * sin2 * s2 / (s2 - 2.0).powi(3),
                _ => 0.0,
            };
            nabla = nabla.max((n[(i, j, k)] - e).abs());
        }

        omega = omega.max((jet.omega[0] - 2.0 * sin2 / (c2 + 1.0)).abs()).max(jet.omega[1].abs());

        let d = Mat::diag(&[0.5 - s2 / 4.0, s2 / 2.0]);
        metric = metric.max((&lag.metric(x)? - &d).max_abs());
    }
    let worst = gamma.max(ric).max(nabla).max(omega).max(metric);
    outcome(
        worst < 1e-7,
        format!(
            "max errors: Γ {gamma:.1e}, Ric {ric:.1e}, ∇Ric {nabla:.1e}, ω {omega:.1e}, D_C {metric:.1e} (grid {})",
            grid.len()
        ),
    )
}

fn c3_sphere_end_to_end() -> Result<Outcome> {
    let a = analyze(&sphere_mass(), &AnalysisOptions { el_samples: 50, ..Default::default() })?;
    let el = a.report.el_residual.unwrap_or(f64::INFINITY);
    outcome(
        a.report.verdict == Verdict::Lagrangian && el < 1e-6,
        format!("verdict {}, Euler-Lagrange residual {el:.2e} over 50 states", a.report.verdict),
    )
}

fn c4_dpc_flatness() -> Result<Outcome> {
    let mut curv = 0.0f64;
    let mut defect = 0.0f64;
    for case in [DpcCase::A, DpcCase::B] {
        let b = double_pendulum_cart(case, G);
        let c = b.constrained();
        curv = curv.max(flatness_certificate(&c, &b.standard_grid())?);
        defect = defect.max(loop_transport(&c, &b.generators[0], TRANSPORT_TOL)?.distance_from_identity());
    }
    outcome(curv < 1e-8 && defect < 1e-7, format!("max curvature {curv:.2e}, |P - I| = {defect:.2e}"))
}

fn c5_dpc_verdicts() -> Result<Outcome> {
    const FLOOR: f64 = 2.0;
    let rb = analyze(&double_pendulum_cart(DpcCase::B, G), &AnalysisOptions::default())?.report;
    let ra = analyze(&double_pendulum_cart(DpcCase::A, G), &AnalysisOptions::default())?.report;
    let (Some(cb), Some(ca)) = (&rb.cylinder, &ra.cylinder) else {
        return outcome(false, "cylinder search did not run");
    };
    let at_half = cb
        .residual_curve
        .iter()
        .min_by(|p, q| (p.0 + 0.5).abs().total_cmp(&(q.0 + 0.5).abs()))
        .map_or(f64::INFINITY, |p| p.1);
    let b_ok = rb.verdict == Verdict::Lagrangian && at_half < 1e-6;
    let a_ok = ra.verdict == Verdict::NotLagrangian && ca.residual > FLOOR;
    outcome(
        b_ok && a_ok,
        format!(
            "dpc-b: verdict {}, residual at a = -1/2 is {at_half:.3e} (minimizer a = {:.9}, residual {:.2e}); \
             dpc-a: verdict {}, min residual {:.4} vs floor {FLOOR}",
            rb.verdict, cb.a, cb.residual, ra.verdict, ca.residual
        ),
    )
}

fn c6_energy() -> Result<Outcome> {
    let b = double_pendulum_cart(DpcCase::B, G);
    let a = analyze(&b, &AnalysisOptions::default())?;
    let Some(s) = a.structure else {
        return outcome(false, "no Lagrangian structure for dpc-b");
    };
    let c = b.constrained();
    let ics = [
        ([0.0, PI], [0.0, 1.0]),
        ([0.0, 0.5], [0.3, -0.5]),
        ([1.0, 2.0], [0.0, 3.0]),
        ([0.0, PI], [0.0, 6.0]),
        ([-0.5, -1.0], [0.5, 0.2]),
    ];
    let mut worst = 0.0f64;
    for (th, dth) in ics {
        let tr = simulate_constrained(&c, Some(s.as_ref()), &th, &dth, 10.0, &SimOptions::default())?;
        worst = worst.max(tr.energy_drift().unwrap_or(f64::INFINITY));
    }
    outcome(worst < 1e-6, format!("max relative energy drift {worst:.2e} over 5 runs, t in [0, 10]"))
}

fn c7_constraint_enforcement() -> Result<Outcome> {
    let opts = SimOptions { sample_dt: Some(0.01), ..Default::default() };
    let gains = Gains::new(16.0, 8.0);
    let (mut held, mut decayed) = (0.0f64, 0.0f64);
    for case in [DpcCase::A, DpcCase::B] {
        let m = double_pendulum_cart(case, G).model;
        for (th, dth) in [([0.0, 2.5], [0.2, -1.0]), ([1.0, -0.7], [0.0, 3.0])] {
            let (q0, dq0) = on_constraint_state(&m, &th, &dth)?;
            let tr = simulate_full(&m, &m, &q0, &dq0, gains, 10.0, &opts)?;
            held = held.max(tr.max_residual().unwrap_or(f64::INFINITY));
            let mut q1 = q0.clone();
            q1[2] += 0.1;
            let tr = simulate_full(&m, &m, &q1, &dq0, gains, 5.0, &opts)?;
            decayed = decayed.max(*tr.residual.as_ref().and_then(|r| r.last()).unwrap_or(&f64::INFINITY));
        }
    }
    outcome(
        held < 1e-6 && decayed < 1e-4,
        format!("on-constraint max |h| + |dh| = {held:.2e}; from |h(0)| = 0.1, at t = 5: {decayed:.2e}"),
    )
}

fn random_loop(rng: &mut ChaCha8Rng, base: &[f64], lo: &[f64], hi: &[f64]) -> Arc<dyn CurveSampler> {
    let n = rng.gen_range(2..5);
    let mut pts = vec![base.to_vec()];
    for _ in 0..n {
        pts.push((0..base.len()).map(|i| rng.gen_range(lo[i]..hi[i])).collect());
    }
    pts.push(base.to_vec());
    Arc::new(Polyline::new(pts))
}

fn group_law_defects<C: Connection>(c: &C, lo: &[f64], hi: &[f64], seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inv, mut cat) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let base: Vec<f64> = (0..lo.len()).map(|i| rng.gen_range(lo[i]..hi[i])).collect();
        let g1 = random_loop(&mut rng, &base, lo, hi);
        let g2 = random_loop(&mut rng, &base, lo, hi);
        let p1 = transport_matrix(c, g1.as_ref(), TRANSPORT_TOL)?;
        let p2 = transport_matrix(c, g2.as_ref(), TRANSPORT_TOL)?;
        let back = transport_matrix(c, &Reversed(g1.clone()), TRANSPORT_TOL)?;
        inv = inv.max((&(&back * &p1) - &Mat::identity(lo.len())).max_abs());
        let both = transport_matrix(c, &Concat::new(vec![g1, g2]), TRANSPORT_TOL)?;
        cat = cat.max((&both - &(&p2 * &p1)).max_abs());
    }
    Ok((inv, cat))
}

fn c8_group_laws() -> Result<Outcome> {
    let cases: [(ModelBundle, Vec<f64>, Vec<f64>); 4] = [
        (circle_particle(0.3), vec![-3.0], vec![3.0]),
        (sphere_mass(), vec![0.3, -2.5], vec![2.8, 2.5]),
        (double_pendulum_cart(DpcCase::A, G), vec![-3.0, -3.0], vec![3.0, 3.0]),
        (double_pendulum_cart(DpcCase::B, G), vec![-3.0, -3.0], vec![3.0, 3.0]),
    ];
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for (seed, (b, lo, hi)) in cases.into_iter().enumerate() {
        let (inv, cat) = group_law_defects(&b.constrained(), &lo, &hi, seed as u64)?;
        worst = worst.max(inv).max(cat);
        parts.push(format!("{} inverse {inv:.1e} concat {cat:.1e}", b.name));
    }
    outcome(worst < 1e-8, format!("50 loops per model: {}", parts.join("; ")))
}

fn c9_one_dim() -> Result<Outcome> {
    let flat = circle_particle(0.0).constrained();
    let r = lagrangian_1d(move |x| flat.psi(x), true, 1e-10)?;
    let mut dev = 0.0f64;
    for x in circle_particle(0.0).standard_grid() {
        dev = dev.max((r.metric(&x)?[(0, 0)] - 1.0).abs()).max(r.potential(&x)?.abs());
    }
    let tilted = circle_particle(0.3).constrained();
    let t = lagrangian_1d(move |x| tilted.psi(x), true, 1e-10)?;
    let integral = t.int_psi2.unwrap_or(f64::NAN);
    let err = (integral + TAU * 0.3f64.tan()).abs();
    outcome(
        r.lagrangian && dev < 1e-9 && !t.metrizable && err < 1e-9,
        format!("α = 0: Lagrangian {}, max |M - 1|, |P| = {dev:.1e}; α = 0.3: metrizable {}, ∫Ψ₂ = {integral:.12} (error {err:.1e})", r.lagrangian, t.metrizable),
    )
}

/// `e^{2u} G₀` with `u = ½xᵀHx + bᵀx + η sin(kᵀx)`.
struct Conformal {
    g0: [[f64; 2]; 2],
    h: [[f64; 2]; 2],
    b: [f64; 2],
    eta: f64,
    k: [f64; 2],
}

impl Conformal {
    fn u<T: Real>(&self, x: &[T]) -> T {
        let mut q = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                q += x[i] * x[j] * T::c(0.5 * self.h[i][j]);
            }
        }
        q + x[0] * T::c(self.b[0]) + x[1] * T::c(self.b[1])
            + (x[0] * T::c(self.k[0]) + x[1] * T::c(self.k[1])).sin() * T::c(self.eta)
    }

    /// Lower bound of `|Δ_{G₀} u|`; the curvature is `−e^{−2u} Δ_{G₀} u`.
    fn laplacian_margin(&self) -> f64 {
        let [[a, b], [_, d]] = self.g0;
        let det = a * d - b * b;
        let inv = [[d / det, -b / det], [-b / det, a / det]];
        let tr: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| inv[i][j] * self.h[j][i]).sum();
        let kk: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| inv[i][j] * self.k[i] * self.k[j]).sum();
        tr.abs() - self.eta.abs() * kk
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        let l = [[rng.gen_range(0.5..1.5), 0.0], [rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5)]];
        let g0 = [
            [l[0][0] * l[0][0], l[0][0] * l[1][0]],
            [l[0][0] * l[1][0], l[1][0] * l[1][0] + l[1][1] * l[1][1]],
        ];
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (p, q, r) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5), rng.gen_range(-0.3..0.3));
        Conformal {
            g0,
            h: [[sign * p, sign * r], [sign * r, sign * q]],
            b: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            eta: rng.gen_range(-0.05..0.05),
            k: [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
        }
    }
}

impl MatrixField for Conformal {
    fn dim(&self) -> usize {
        2
    }
    fn shape(&self) -> (usize, usize) {
        (2, 2)
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<Mat<T>> {
        let e = (self.u(x) * T::c(2.0)).exp();
        Ok(Mat::from_fn(2, 2, |i, j| e * T::c(self.g0[i][j])))
    }
}

fn c10_round_trip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let chart = Chart::new(vec![false, false], vec![-1.0, -1.0], vec![1.0, 1.0]);
    let grid = chart.grid(9, 0.0);
    let mut worst = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for _ in 0..10 {
        let m = Conformal::random(&mut rng);
        let margin = m.laplacian_margin();
        min_margin = min_margin.min(margin);
        if margin <= 0.0 {
            return outcome(false, format!("curvature certificate failed (margin {margin:.3})"));
        }
        let c = LeviCivita(m);
        let data = recurrence_solve(&c, &grid, RECURRENCE_TOL)?;
        let rec = metric_from_ricci(&data, &c, chart.clone(), vec![0.0, 0.0], 0.0)?;
        let ratios: Vec<f64> = grid
            .iter()
            .map(|x| {
                let (g, h) = (c.0.eval(x)?, rec.metric(x)?);
                Ok((g[(0, 0)] + g[(1, 1)]) / (h[(0, 0)] + h[(1, 1)]))
            })
            .collect::<Result<_>>()?;
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var = ratios.iter().map(|r| (r / mean - 1.0).powi(2)).sum::<f64>() / ratios.len() as f64;
        worst = worst.max(var);
    }
    outcome(
        worst < 1e-6,
        format!("10 metrics, min curvature margin {min_margin:.3}, max normalized ratio variance {worst:.2e}"),
    )
}

fn c11_portrait() -> Result<Outcome> {
    let ics = speed_sweep(&[0.0, PI], 1, &PORTRAIT_SPEEDS);
    let opts = PortraitOptions { coord: 1, t1: 10.0, sim: SimOptions { sample_dt: Some(0.05), ..Default::default() } };
    let mut ok = true;
    let mut parts = Vec::new();
    for case in [DpcCase::A, DpcCase::B] {
        let b = double_pendulum_cart(case, G);
        let orbits = phase_portrait(&b.constrained(), &ics, &opts)?;
        let count = |k: OrbitClass| orbits.iter().filter(|o| o.class == k).count();
        let (rock, rot) = (count(OrbitClass::Rocking), count(OrbitClass::Rotating));
        ok &= rock > 0 && rot > 0;
        parts.push(format!("{}: {rock} rocking, {rot} rotating", b.name));
    }
    outcome(ok, format!("θ₀ = (0, π), rates {PORTRAIT_SPEEDS:?}: {}", parts.join("; ")))
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "circle induced symbol", Duration::from_secs(1), c1_circle_symbol),
        (2, "sphere closed forms", Duration::from_secs(5), c2_sphere_closed_forms),
        (3, "sphere end to end", Duration::from_secs(5), c3_sphere_end_to_end),
        (4, "pendulum-cart flatness and holonomy", Duration::from_secs(5), c4_dpc_flatness),
        (5, "pendulum-cart verdicts", Duration::from_secs(20), c5_dpc_verdicts),
        (6, "energy conservation", Duration::from_secs(10), c6_energy),
        (7, "constraint enforcement", Duration::from_secs(10), c7_constraint_enforcement),
        (8, "transport group laws", Duration::from_secs(60), c8_group_laws),
        (9, "one-dimensional decision", Duration::from_secs(5), c9_one_dim),
        (10, "metrizability round trip", Duration::from_secs(60), c10_round_trip),
        (11, "phase portrait classes", Duration::from_secs(30), c11_portrait),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), budget.as_secs());
        println!("criterion {n:2} {} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
