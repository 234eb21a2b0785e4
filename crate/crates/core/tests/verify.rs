mod common;

use common::*;
use nls_ist_core::closed_form::{example_field_with_g, ExampleCase, ExampleParams, ThirdTerm};
use nls_ist_core::evolution::{CaseATerm, CaseBTerm, SourceSpec, TimeFunction};
use nls_ist_core::pipeline::PipelineConfig;
use nls_ist_core::source_terms::{source_rhs, SourcePair};
use nls_ist_core::verify::*;
use nls_ist_core::UniformGrid;
use num_complex::Complex64 as C;

fn pipeline() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.glm.extrapolate = true;
    cfg.glm.step = 0.02;
    cfg
}

/// NLS residual of the closed-form triple at `t`, step `d` in both x and t.
fn triple_residual(case: &ExampleCase, t: f64, d: f64, scale: f64) -> ResidualReport {
    let p = ExampleParams::new(RHO, NU, CC, 0.0).unwrap();
    let grid = UniformGrid::symmetric(8.0, (16.0 / d).round() as usize).unwrap();
    let xs: Vec<f64> = grid.points().collect();
    let slice = |s: f64| -> Vec<C> {
        let g = case.g(t + s).unwrap();
        xs.iter().map(|&x| dark(x, t + s, g) * scale).collect()
    };
    let g = case.g(t).unwrap();
    let samples: Vec<_> =
        xs.iter().map(|&x| example_field_with_g(&p, case, x, t, g, ThirdTerm::SignFlipped).unwrap()).collect();
    let pair = SourcePair {
        xi: ZETA,
        f: samples.iter().map(|s| s.f).collect(),
        g: samples.iter().map(|s| s.g).collect(),
        alpha: C::new(1.0, 0.0),
        beta: C::new(1.0, 0.0),
    };
    let rhs = source_rhs(&[pair], xs.len()).unwrap();
    pde_residual([&slice(-d), &slice(0.0), &slice(d)], &rhs, d, d).unwrap()
}

#[test]
fn sourced_soliton_residual_is_second_order() {
    let case = ExampleCase::a(TimeFunction::constant(0.3, 0.0));
    let coarse = triple_residual(&case, 0.5, 2e-3, 1.0);
    let fine = triple_residual(&case, 0.5, 1e-3, 1.0).with_rate(&coarse);
    assert!(fine.max_residual <= 1e-4, "{fine:?}");
    let rate = fine.convergence_rate.unwrap();
    assert!((rate - 2.0).abs() <= 0.2, "{rate}");

    let corrupted = triple_residual(&case, 0.5, 1e-3, 1.01);
    assert!(corrupted.max_residual >= 10.0 * fine.max_residual);
}

#[test]
fn invariants_of_the_soliton_pass() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let cfg = pipeline();
    let sd = cfg.direct(&f).unwrap();
    let reports = invariant_suite(&f, &sd, &cfg.zs);
    for r in &reports {
        assert!(r.ok(), "{r:?}");
        if r.threshold.is_some() {
            assert!(r.max_residual <= 1e-8, "{r:?}");
        }
    }
    let small = reports.iter().find(|r| r.name == "small_z_limit").unwrap();
    // a(z) - e^{-i theta} is O(z): here about 2 nu z / rho^2
    assert!(small.max_residual < 5e-3 && small.max_residual > 0.0);
}

#[test]
fn injected_reflection_fails_unitarity() {
    let f = field(20.0, 2000, 0.0, 0.0);
    let mut cfg = pipeline();
    cfg.z_nodes = 400;
    let mut sd = cfg.direct(&f).unwrap();
    let clean = unitarity_report(&sd);
    assert_eq!(clean.passed, Some(true));
    let k = sd.continuous.len() / 3;
    sd.continuous[k].b = sd.continuous[k].a * 1.2;
    let bad = unitarity_report(&sd);
    assert_eq!(bad.passed, Some(false));
    assert!(bad.max_residual >= 10.0 * clean.max_residual.max(1e-12));
}

#[test]
fn round_trip_without_evolution() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let spec = SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(0.0, 0.0))]);
    let oracle = |x: f64| dark(x, 0.0, 0.0);
    let r = roundtrip_check(&f, &spec, 0.0, &pipeline(), Some(&oracle)).unwrap();
    assert!(r.max_residual <= 1e-6, "{r:?}");
}

#[test]
fn round_trip_to_half_time() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let spec = SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(0.0, 0.0))]);
    let oracle = |x: f64| dark(x, 0.5, 0.0);
    let r = roundtrip_check(&f, &spec, 0.5, &pipeline(), Some(&oracle)).unwrap();
    assert!(r.max_residual <= 1e-5, "{r:?}");
}

#[test]
fn real_beta_reduces_case_b_to_sourceless_case_a() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let cfg = pipeline();
    let sd0 = cfg.direct(&f).unwrap();
    let a = SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(0.0, 0.0))]);
    let b = SourceSpec::B(vec![CaseBTerm { constraint: TimeFunction::constant(1.0, 0.0), beta: TimeFunction::constant(0.7, 0.0) }]);
    let ua = cfg.inverse(&cfg.evolve(&sd0, 0.5, &a).unwrap()).unwrap().u;
    let ub = cfg.inverse(&cfg.evolve(&sd0, 0.5, &b).unwrap()).unwrap().u;
    assert!(max_err(&ua, &ub) <= 1e-6);
}

#[test]
fn rescattering_consistency_without_oracle() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let spec = SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(0.3, 0.0))]);
    let r = roundtrip_check(&f, &spec, 0.25, &pipeline(), None).unwrap();
    assert!(r.max_residual <= 1e-5, "{r:?}");
}
