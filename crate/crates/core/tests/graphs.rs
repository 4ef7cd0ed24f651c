use maxsurf::catalog::GraphFixture;
use maxsurf::maxgraph::{
    area, detect_singular, hull_violation, li_wang_bound, solve_plateau, BoundaryData, GridGraph, SolverConfig,
};
use std::f64::consts::PI;

/// The catenoid t = asinh |x − (3, 0)|, written out independently of the catalog.
fn shifted_catenoid(x: [f64; 2]) -> f64 {
    ((x[0] - 3.0).powi(2) + x[1] * x[1]).sqrt().asinh()
}

#[test]
fn plateau_converges_at_second_order() {
    let mut errors = vec![];
    for n in [32, 64, 128] {
        let h = 1.0 / n as f64;
        let domain = GridGraph::disc(1.0, h);
        let bd = BoundaryData::from_fn(&domain, shifted_catenoid);
        let start = std::time::Instant::now();
        let sol = solve_plateau(&bd, &domain, &SolverConfig::default()).unwrap();
        assert!(start.elapsed().as_secs_f64() < 60.0);
        assert!(sol.stats.residual <= 1e-10);
        let err = (0..domain.len())
            .filter(|&k| domain.mask[k])
            .map(|k| (sol.graph.u[k] - shifted_catenoid(domain.xy(k))).abs())
            .fold(0.0, f64::max);
        let hull = hull_violation(&sol.graph, &bd);
        assert!(hull.maximum_principle <= 0.0 && hull.convex_hull <= 1e-12, "{hull:?}");
        errors.push(err);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "{errors:?}");
    }
    // Error constant: err ≤ C h² with a modest C.
    assert!(errors[2] * 128.0 * 128.0 < 10.0);
}

#[test]
fn enneper2_graph_has_one_lightlike_singular_ray() {
    let h = 1.0 / 32.0;
    let g = GraphFixture::Enneper2.sample_grid(129, 129, [-2.0, -2.0], h);
    let rep = detect_singular(&g, 1e-9);
    assert_eq!(rep.segments.len(), 1, "{:?}", rep.segments);
    assert!(rep.points.is_empty());
    let seg = &rep.segments[0];
    for &k in &seg.nodes {
        let [x1, x2] = g.xy(k);
        assert!(x1.abs() <= h + 1e-12 && x2 >= -h - 1e-12, "node at ({x1}, {x2})");
    }
    assert!(seg.lightlike_defect < 1e-3, "{}", seg.lightlike_defect);
}

#[test]
fn area_estimate_for_catalog_graphs() {
    let fixtures = [
        GraphFixture::Catenoid { center: [0.0, 0.0] },
        GraphFixture::Catenoid { center: [0.5, -0.25] },
        GraphFixture::Enneper2,
        GraphFixture::LightCone { center: [0.0, 0.0] },
        GraphFixture::Plane { slope: [0.3, -0.4] },
        GraphFixture::Plane { slope: [0.0, 0.0] },
    ];
    for r in [0.5, 1.0, 2.0, 4.0] {
        let h = r / 64.0;
        for f in &fixtures {
            let g = f.sample_grid(129, 129, [-r, -r], h);
            let a = area(&g, r);
            assert!(a <= PI * r * r + 10.0 * h, "{f:?} R = {r}: {a}");
            if matches!(f, GraphFixture::LightCone { .. }) {
                assert!(a < 10.0 * h, "cone area {a}");
            }
        }
    }
}

#[test]
fn li_wang_values() {
    assert_eq!(li_wang_bound(1.0).unwrap().value, 8.0);
    let values: Vec<f64> = (1..=100).map(|k| li_wang_bound(k as f64 / 100.0).unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    // 8 / (ε (2 − ε)) evaluated by hand at ε = 1/2.
    assert!((li_wang_bound(0.5).unwrap().value - 32.0 / 3.0).abs() < 1e-12);
}
