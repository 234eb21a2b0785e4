use nls_ist_core::evolution::{evolve_scattering_data, CaseATerm, CaseBTerm, SourceSpec, TimeFunction};
use nls_ist_core::glm::gmres;
use nls_ist_core::spectral::{from_uniformization, to_uniformization, wrap_phase};
use nls_ist_core::zakharov_shabat::{ContinuousSample, DiscreteSample, ScatteringData};
use nls_ist_core::BoundaryData;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn data(rho: f64, phi: f64, zs: &[(f64, f64, f64)]) -> ScatteringData {
    let b = BoundaryData::new(rho, 0.3, 1.1).unwrap();
    let continuous = zs
        .iter()
        .map(|&(z, br, bi)| {
            let bz = C::new(br, bi);
            // any phase will do for a; its modulus follows from |a|^2 - |b|^2 = 1
            ContinuousSample { z, weight: 0.1, a: C::from_polar((1.0 + bz.norm_sqr()).sqrt(), 0.4), b: bz }
        })
        .collect();
    let z = C::from_polar(rho, phi);
    let d = DiscreteSample { xi: z.re, z, norming: C::new(0.2, -0.7), a_dot_xi: C::new(1.0, 0.0), a_dot_z: C::new(0.0, 1.0) };
    ScatteringData { boundary: b, time: 0.0, continuous, discrete: vec![d] }
}

fn spectral_z() -> impl Strategy<Value = f64> {
    prop_oneof![0.05f64..20.0, -20.0f64..-0.05]
}

proptest! {
    #[test]
    fn uniformization_round_trip(re in -5.0f64..5.0, im in 0.01f64..5.0, rho in 0.2f64..3.0) {
        let b = BoundaryData::new(rho, 0.0, 0.0).unwrap();
        let z = C::new(re, im);
        let (xi, p) = from_uniformization(z, &b).unwrap();
        prop_assert!((p * p - (xi * xi - rho * rho)).norm() <= 1e-10 * (1.0 + xi.norm_sqr()));
        let back = to_uniformization(xi, p, &b).unwrap();
        prop_assert!((back - z).norm() <= 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn wrapped_phases_stay_in_range(a in -100.0f64..100.0) {
        let w = wrap_phase(a);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        prop_assert!(((a - w) / std::f64::consts::TAU - ((a - w) / std::f64::consts::TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn evolution_keeps_a_and_the_modulus_of_b(
        zs in prop::collection::vec((spectral_z(), -2.0f64..2.0, -2.0f64..2.0), 1..20),
        phi in 0.1f64..3.0,
        t in -2.0f64..2.0,
    ) {
        let sd = data(1.3, phi, &zs);
        let spec = SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(0.0, 0.0))]);
        let ev = evolve_scattering_data(&sd, t, &spec).unwrap();
        for (s, e) in sd.continuous.iter().zip(&ev.continuous) {
            prop_assert_eq!(s.a, e.a);
            prop_assert!((s.b.norm() - e.b.norm()).abs() <= 1e-12 * (1.0 + s.b.norm()));
            prop_assert!((e.a.norm_sqr() - e.b.norm_sqr() - 1.0).abs() <= 1e-10 * (1.0 + e.b.norm_sqr()));
        }
        prop_assert_eq!(ev.eigenvalues(), sd.eigenvalues());
    }

    #[test]
    fn evolution_composes(
        phi in 0.1f64..3.0,
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
        a_re in -1.0f64..1.0,
        beta_im in -1.0f64..1.0,
        case_b in any::<bool>(),
    ) {
        let sd = data(0.9, phi, &[(1.5, 0.3, -0.2), (-0.4, 0.1, 0.5)]);
        let spec = if case_b {
            SourceSpec::B(vec![CaseBTerm { constraint: TimeFunction::constant(0.8, 0.0), beta: TimeFunction::constant(0.2, beta_im) }])
        } else {
            SourceSpec::A(vec![CaseATerm::new(TimeFunction::constant(a_re, 0.5))])
        };
        let direct = evolve_scattering_data(&sd, t1 + t2, &spec).unwrap();
        let mid = evolve_scattering_data(&sd, t1, &spec).unwrap();
        let stepped = evolve_scattering_data(&mid, t1 + t2, &spec).unwrap();
        for (x, y) in direct.continuous.iter().zip(&stepped.continuous) {
            prop_assert!((x.b - y.b).norm() <= 1e-10 * (1.0 + x.b.norm()));
        }
        let (x, y) = (direct.discrete[0].norming, stepped.discrete[0].norming);
        prop_assert!((x - y).norm() <= 1e-9 * x.norm());
    }

    #[test]
    fn tables_reproduce_their_samples(vals in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..12)) {
        let samples: Vec<(f64, C)> = vals.iter().enumerate().map(|(k, &(r, i))| (0.1 * k as f64, C::new(r, i))).collect();
        let f = TimeFunction::table(samples.clone()).unwrap();
        for (t, v) in &samples {
            prop_assert!((f.eval(*t).unwrap() - v).norm() < 1e-12);
        }
    }

    #[test]
    fn gmres_solves_diagonally_dominant_systems(
        seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        rhs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
    ) {
        let n = 8;
        let m: Vec<C> = seed.iter().map(|&(r, i)| C::new(r, i) * 0.1).collect();
        let apply = |v: &[C]| -> Vec<C> {
            (0..n).map(|i| v[i] * 2.0 + (0..n).map(|j| m[i * n + j] * v[j]).sum::<C>()).collect()
        };
        let b: Vec<C> = rhs.iter().map(|&(r, i)| C::new(r, i)).collect();
        let out = gmres(apply, &b, 8, 4, 1e-13);
        let ax = apply(&out.x);
        let scale = b.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        for (l, r) in ax.iter().zip(&b) {
            prop_assert!((l - r).norm() <= 1e-10 * scale.max(1.0));
        }
    }
}
