use std::collections::BTreeMap;

use vhc_core::analysis::{analyze, AnalysisOptions, AnalysisReport, Route, Verdict, SCHEMA_VERSION};
use vhc_core::models::{circle_particle, custom_model, double_pendulum_cart, sphere_mass, DpcCase, ExprModelSpec};

fn run(b: &vhc_core::models::ModelBundle) -> AnalysisReport {
    analyze(b, &AnalysisOptions::default()).unwrap().report
}

#[test]
fn built_in_verdicts() {
    let cases = [
        (circle_particle(0.0), Route::Orthogonal, Verdict::Lagrangian),
        (circle_particle(0.3), Route::OneDim, Verdict::NotLagrangian),
        (sphere_mass(), Route::Curved, Verdict::Lagrangian),
        (double_pendulum_cart(DpcCase::A, 9.81), Route::Flat, Verdict::NotLagrangian),
        (double_pendulum_cart(DpcCase::B, 9.81), Route::Flat, Verdict::Lagrangian),
    ];
    for (b, route, verdict) in cases {
        let r = run(&b);
        assert_eq!((r.route, r.verdict), (route, verdict), "{}", b.name);
        assert_eq!(r.schema_version, SCHEMA_VERSION);
        assert!(r.regularity.regular);
        if verdict == Verdict::Lagrangian {
            assert!(r.el_residual.unwrap() < 1e-6, "{}", b.name);
            assert_eq!(r.samples.len(), 3);
        } else {
            assert!(r.el_residual.is_none() && r.samples.is_empty());
        }
    }
}

#[test]
fn tilted_circle_is_not_metrizable() {
    let r = run(&circle_particle(0.3));
    assert_eq!(r.metrizable, Some(false));
    let one = r.one_dim.unwrap();
    assert!((one.int_psi2.unwrap() + std::f64::consts::TAU * 0.3f64.tan()).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(Verdict::Lagrangian.exit_code(), 0);
    assert_eq!(Verdict::NotLagrangian.exit_code(), 3);
    assert_eq!(Verdict::Unsupported.exit_code(), 2);
    assert_eq!(run(&double_pendulum_cart(DpcCase::A, 9.81)).exit_code(), 3);
}

#[test]
fn summary_and_json_round_trip() {
    let r = run(&double_pendulum_cart(DpcCase::B, 9.81));
    let text = r.summary();
    assert!(text.contains("model: dpc-b") && text.contains("Lagrangian: yes"));
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"verdict\":\"lagrangian\""));
    let back: AnalysisReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn gauge_option_rescales_sphere_metric() {
    let b = sphere_mass();
    let default = run(&b);
    let plain = analyze(&b, &AnalysisOptions { b: Some(0.0), ..Default::default() }).unwrap().report;
    assert_eq!(default.ricci.as_ref().unwrap().b, 0.25f64.ln());
    for (p, q) in default.samples.iter().zip(&plain.samples) {
        assert!((p.metric[0][0] / q.metric[0][0] - 0.25).abs() < 1e-9);
    }
}

#[test]
fn audit_is_seeded() {
    let b = sphere_mass();
    let opts = AnalysisOptions { seed: 7, el_samples: 10, ..Default::default() };
    let a = analyze(&b, &opts).unwrap().report;
    let c = analyze(&b, &opts).unwrap().report;
    assert_eq!(a.el_residual, c.el_residual);
}

fn three_dim_spec() -> ExprModelSpec {
    let s = |v: &str| v.to_string();
    let row = |r: [&str; 4]| r.iter().map(|v| s(v)).collect::<Vec<_>>();
    ExprModelSpec {
        coords: vec![s("x"), s("y"), s("z"), s("w")],
        inertia: vec![row(["1", "0", "0", "0"]), row(["0", "1", "0", "0"]), row(["0", "0", "1", "0"]), row(["0", "0", "0", "1"])],
        potential: s("z"),
        input: vec![vec![s("1")], vec![s("0")], vec![s("0")], vec![s("1")]],
        annihilator: vec![row(["0", "1", "0", "0"]), row(["0", "0", "1", "0"]), row(["1", "0", "0", "-1"])],
        reduced_coords: vec![s("a"), s("b"), s("c")],
        periodic: vec![false, false, false],
        lower: vec![],
        upper: vec![],
        embedding: vec![s("a"), s("b"), s("c"), s("0")],
        constraint: Some(vec![s("w")]),
        constants: BTreeMap::new(),
    }
}

#[test]
fn three_dimensional_constraint_is_unsupported() {
    let b = custom_model("three", three_dim_spec()).unwrap();
    let r = analyze(&b, &AnalysisOptions { grid: Some(3), ..Default::default() }).unwrap().report;
    assert_eq!(r.verdict, Verdict::Unsupported);
    assert_eq!(r.exit_code(), 2);
    assert!(r.diagnostic.is_some());
}
