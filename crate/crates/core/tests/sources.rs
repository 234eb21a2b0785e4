mod common;

use common::*;
use nls_ist_core::closed_form::{example_field_with_g, ExampleCase, ExampleParams, ThirdTerm};
use nls_ist_core::evolution::{CaseATerm, CaseBTerm, TimeFunction};
use nls_ist_core::glm::ADotVariable;
use nls_ist_core::source_terms::*;
use nls_ist_core::verify::{interior, linear_system_residual};
use nls_ist_core::zakharov_shabat::*;
use nls_ist_core::{BoundaryData, Error, PotentialField, UniformGrid};
use num_complex::Complex64 as C;

fn params() -> ExampleParams {
    ExampleParams::new(RHO, NU, CC, 0.0).unwrap()
}

/// Largest interior deviation from the closed form, relative to its sup.
fn rel_dev(built: &[Vec2], f: &PotentialField, exact: impl Fn(f64) -> [C; 2]) -> f64 {
    let g = f.grid();
    let (mut dev, mut sup) = (0.0f64, 0.0f64);
    for i in interior(g.n) {
        let e = exact(g.x(i));
        for k in 0..2 {
            dev = dev.max((built[i][k] - e[k]).norm());
            sup = sup.max(e[k].norm());
        }
    }
    dev / sup
}

#[test]
fn case_a_pair_matches_closed_form() {
    let (t, a1) = (0.5, C::new(0.3, 0.1));
    let g = 2.0 * a1.re * t;
    let f = field(20.0, 4000, t, g);
    let mode = eigenmode(&f, ZETA, &ZsConfig::default()).unwrap();
    let gauge = TimeFunction::constant(0.5, -0.2);
    let term = CaseATerm { normalization: TimeFunction::constant(a1.re, a1.im), gauge: gauge.clone() };
    let pair = &build_sources_case_a(&f, &[mode], &[term], t).unwrap()[0];

    assert!((overlap(&pair.g, &pair.f, f.grid().dx) - a1).norm() < 1e-10);
    let case = ExampleCase::A { a1: TimeFunction::constant(a1.re, a1.im), gauge };
    let exact = |x| example_field_with_g(&params(), &case, x, t, g, ThirdTerm::SignFlipped).unwrap();
    assert!(rel_dev(&pair.f, &f, |x| exact(x).f) < 1e-8);
    assert!(rel_dev(&pair.g, &f, |x| exact(x).g) < 1e-8);

    let [rf, rg] = linear_system_residual(pair, f.values(), f.grid().dx).unwrap();
    assert!(rf.max_residual < 1e-4 && rg.max_residual < 1e-4, "{rf:?} {rg:?}");
}

#[test]
fn case_b_pair_matches_sign_corrected_closed_form() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let mode = eigenmode(&f, ZETA, &ZsConfig::default()).unwrap();
    let term = CaseBTerm { constraint: TimeFunction::constant(1.0, 0.0), beta: TimeFunction::constant(0.0, 1.0) };
    let pair = &build_sources_case_b(&f, &[mode], &[term], 0.0, ADotVariable::Xi).unwrap()[0];

    assert!(constraint_drift(pair, 1.0) <= 1e-6);
    let case = ExampleCase::B { beta1: TimeFunction::constant(0.0, 1.0), b1: TimeFunction::constant(1.0, 0.0) };
    let exact = |x, third| example_field_with_g(&params(), &case, x, 0.0, 0.0, third).unwrap();
    assert!(rel_dev(&pair.f, &f, |x| exact(x, ThirdTerm::SignFlipped).f) < 1e-8);
    assert!(rel_dev(&pair.g, &f, |x| exact(x, ThirdTerm::SignFlipped).g) < 1e-6);
    assert!(rel_dev(&pair.g, &f, |x| exact(x, ThirdTerm::PlusSign).g) > 1e-2);
}

#[test]
fn case_b_with_zero_constraint_has_vanishing_f() {
    let f = field(20.0, 4000, 0.0, 0.0);
    let mode = eigenmode(&f, ZETA, &ZsConfig::default()).unwrap();
    let term = CaseBTerm { constraint: TimeFunction::constant(0.0, 0.0), beta: TimeFunction::constant(0.7, 0.0) };
    let pair = &build_sources_case_b(&f, &[mode], &[term], 0.0, ADotVariable::Xi).unwrap()[0];
    assert!(pair.f.iter().all(|v| v[0].norm() == 0.0 && v[1].norm() == 0.0));
    assert!(source_rhs(std::slice::from_ref(pair), f.grid().n).unwrap().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn arity_is_checked() {
    let f = field(20.0, 2000, 0.0, 0.0);
    let mode = eigenmode(&f, ZETA, &ZsConfig::default()).unwrap();
    let err = build_sources_case_a(&f, &[mode], &[], 0.0).unwrap_err();
    assert!(matches!(err, Error::ArityMismatch { expected: 1, found: 0 }));
}

/// Two well separated dark dips; each keeps its own eigenvalue up to
/// exponentially small corrections.
fn two_dip_field() -> (PotentialField, [f64; 2]) {
    let (nu1, nu2) = (0.5_f64, 0.8_f64);
    let jump = |nu: f64| {
        let w = C::new((RHO * RHO - nu * nu).sqrt(), -nu) / RHO;
        (w * w).arg()
    };
    let dip = |x: f64, nu: f64| {
        let (ep, em) = ((nu * x).exp(), (-nu * x).exp());
        (C::from_polar(ep, jump(nu)) + em) / (ep + em)
    };
    let (j1, j2) = (jump(nu1), jump(nu2));
    let b = BoundaryData::new(RHO, 0.0, (j1 + j2).rem_euclid(std::f64::consts::TAU)).unwrap();
    let grid = UniformGrid::symmetric(40.0, 8000).unwrap();
    let f = PotentialField::from_fn(grid, b, 0.0, |x| RHO * dip(x + 9.0, nu1) * dip(x - 9.0, nu2)).unwrap();
    let xi = [(RHO * RHO - nu2 * nu2).sqrt(), (RHO * RHO - nu1 * nu1).sqrt()];
    (f, xi)
}

#[test]
fn case_a_sources_are_orthogonal_to_other_modes() {
    let (f, guess) = two_dip_field();
    let cfg = ZsConfig::default();
    let xi = find_eigenvalues(&f, &cfg).unwrap();
    assert_eq!(xi.len(), 2);
    for (x, g) in xi.iter().zip(guess) {
        assert!((x - g).abs() < 1e-3, "{x} vs {g}");
    }
    let modes: Vec<Eigenmode> = xi.iter().map(|&x| eigenmode(&f, x, &cfg).unwrap()).collect();
    let terms = vec![CaseATerm::new(TimeFunction::constant(0.4, 0.0)), CaseATerm::new(TimeFunction::constant(0.0, 1.0))];
    let pairs = build_sources_case_a(&f, &modes, &terms, 0.0).unwrap();
    let m = orthogonality_matrix(&pairs, &modes, &f);
    for n in 0..2 {
        for (k, entry) in m[n].iter().enumerate() {
            if n != k {
                assert!(entry.norm() <= 1e-5, "({n},{k}) = {:e}", entry.norm());
            }
        }
        // phi_n = c_n psi_n, so the diagonal is A_n c_n
        let want = terms[n].normalization.eval(0.0).unwrap() * modes[n].norming;
        assert!((m[n][n] - want).norm() <= 1e-8 * want.norm(), "{} vs {want}", m[n][n]);
    }
}
