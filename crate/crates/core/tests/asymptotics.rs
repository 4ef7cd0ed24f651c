use maxsurf::asymptotics::{
    blow_scale, classify_limit, log_radii, rotation_of_gauss, tau_measures, Annulus, LimitKind, Rotation,
    RotationConfig, Wedge,
};
use maxsurf::catalog::GraphFixture;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use std::f64::consts::TAU;

#[test]
fn catenoid_blow_up_and_down() {
    let cat = GraphFixture::Catenoid { center: [0.0, 0.0] };
    let region = Annulus::new(1.0, 2.0);
    let up = classify_limit(&blow_scale(&cat, &[1.0, 10.0, 100.0, 1000.0], &region).unwrap(), &region).unwrap();
    assert_eq!(up.kind, LimitKind::LightConeUpper);
    assert!(up.residual < 0.01);

    let seq_a = [1.0, 0.1, 0.01, 0.001];
    let seq_b = [0.5, 0.03, 0.002, 0.001];
    let a = classify_limit(&blow_scale(&cat, &seq_a, &region).unwrap(), &region).unwrap();
    let b = classify_limit(&blow_scale(&cat, &seq_b, &region).unwrap(), &region).unwrap();
    for fit in [a, b] {
        assert_eq!(fit.kind, LimitKind::SpacelikePlane);
        assert!(fit.residual < 0.01);
        // The plane {t = 0}.
        assert!((fit.normal.unwrap().t - 1.0).abs() < 1e-3);
    }
    assert!((a.normal.unwrap() - b.normal.unwrap()).euclid_norm() < 1e-3);

    // A different second sequence that does not end at the same scale.
    let c = classify_limit(&blow_scale(&cat, &[0.2, 0.004, 0.0005], &region).unwrap(), &region).unwrap();
    assert!((a.normal.unwrap() - c.normal.unwrap()).euclid_norm() < 1e-3);
}

#[test]
fn tau_exact_values_and_catenoid_tail() {
    let radii = log_radii(1.0, 1000.0, 16);
    let cone = tau_measures(&GraphFixture::LightCone { center: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
    assert_eq!(cone.tau_plus, 0.0);
    let plane = tau_measures(&GraphFixture::Plane { slope: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
    assert_eq!(plane.tau_plus, 1.0);
    let cat = tau_measures(&GraphFixture::Catenoid { center: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
    assert_eq!(cat.largest_radius, 1000.0);
    // 1 − asinh(r)/r at r = 1000 is about 0.9924.
    assert!((cat.tau_plus - 1.0).abs() < 0.02);
}

#[test]
fn tau_is_monotone_under_sub_wedges() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let radii = log_radii(1.0, 500.0, 12);
    let graphs = [GraphFixture::Enneper2, GraphFixture::Catenoid { center: [0.3, -0.2] }];
    for _ in 0..20 {
        let a = rng.gen_range(0.0..TAU);
        let b = a + rng.gen_range(0.5..TAU);
        let c = rng.gen_range(a..b);
        let d = rng.gen_range(c..b);
        let (outer, inner) = (Wedge::Arc { start: a, end: b }, Wedge::Arc { start: c, end: d });
        for g in &graphs {
            let big = tau_measures(g, &radii, outer, 720).unwrap();
            let Ok(small) = tau_measures(g, &radii, inner, 720) else { continue };
            assert!(small.tau_plus <= big.tau_plus && small.tau_minus <= big.tau_minus);
            assert!(small.tau0_plus <= big.tau0_plus && small.tau0_minus <= big.tau0_minus);
        }
    }
}

#[test]
fn rotation_numbers() {
    let i = Complex64::new(0.0, 1.0);
    let e1 = |x: f64| (Complex64::new(x, 0.0) - i) / (Complex64::new(x, 0.0) + i);
    let r = rotation_of_gauss(e1, (-1000.0, 1000.0), 200_001, &RotationConfig::default()).unwrap();
    match r.rotation {
        Rotation::Finite { value, .. } => assert!((value - TAU).abs() < 1e-3, "{value}"),
        other => panic!("{other:?}"),
    }
    let hel = |s: f64| Complex64::new(0.0, s).exp();
    let r = rotation_of_gauss(hel, (-50.0, 50.0), 10_001, &RotationConfig::default()).unwrap();
    match r.rotation {
        Rotation::Divergent { rate, .. } => assert!((rate - 1.0).abs() < 1e-6, "{rate}"),
        other => panic!("{other:?}"),
    }
}
