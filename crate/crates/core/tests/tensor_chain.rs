mod common;

use common::*;
use finsler_core::lie::bracket_identity_defects;
use finsler_core::sampling::sample_fiber_points;
use finsler_core::{
    curvature_bundle, fundamental_tensor, metric_compatibility_check, riemann_curvature, spray_coefficients,
    validate_metric, Expr, MetricSpec,
};

fn families() -> Vec<(&'static str, MetricSpec<f64>)> {
    vec![("flat", flat()), ("warped", warped()), ("randers", randers()), ("quartic", quartic())]
}

#[test]
fn every_family_satisfies_the_norm_axioms() {
    for (name, m) in families() {
        let r = validate_metric(&m, &torus(), 64, 11).unwrap();
        assert!(r.passed(1e-9), "{name}: {r:?}");
    }
}

#[test]
fn fundamental_tensor_matches_finite_differences() {
    for (name, m) in families() {
        for p in sample_fiber_points(&torus(), 16, 5) {
            let g = fundamental_tensor(&m, &p).unwrap().g;
            let fd = fd_fundamental_tensor(&m, &p.x, &p.y);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((g[(i, j)] - fd[i][j]).abs() < 1e-7, "{name} g[{i}{j}] {} vs {}", g[(i, j)], fd[i][j]);
                }
            }
        }
    }
}

#[test]
fn spray_matches_finite_differences() {
    for (name, m) in families() {
        for p in sample_fiber_points(&torus(), 16, 6) {
            let g = spray_coefficients(&m, &p).unwrap();
            let fd = fd_spray(&m, &p.x, &p.y);
            let f2 = m.norm(&p.x, &p.y).powi(2);
            for i in 0..2 {
                assert!((g[i] - fd[i]).abs() < 1e-6 * f2, "{name} G[{i}] {} vs {}", g[i], fd[i]);
            }
        }
    }
}

fn assert_constant_curvature(m: &MetricSpec<f64>, k: impl Fn(&[f64]) -> f64, points: &[finsler_core::Point]) {
    for p in points {
        let b = curvature_bundle(m, p).unwrap();
        let gy = b.g.mul_vec(&p.y);
        let f2 = b.f * b.f;
        let kk = k(&p.x);
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                let expect = kk * (f2 * delta - p.y[i] * gy[j]);
                assert!((b.riemann[(i, j)] - expect).abs() < 1e-6 * f2, "R[{i}{j}] {} vs {expect} at {p:?}", b.riemann[(i, j)]);
            }
        }
    }
}

#[test]
fn round_sphere_curvature_is_isotropic() {
    let (m, d) = sphere_chart();
    assert_constant_curvature(&m, |_| 1.0, &sample_fiber_points(&d, 64, 21));
}

#[test]
fn warped_torus_curvature_matches_gauss_curvature() {
    assert_constant_curvature(&warped(), |x| warped_curvature(x[0]), &sample_fiber_points(&torus(), 64, 22));
}

#[test]
fn constant_coefficient_metrics_are_flat() {
    let quartic_minkowski =
        MetricSpec::custom(2, Expr::parse("sqrt(y1^2 + y2^2 + 0.2*(y1^4 + y2^4)/(y1^2 + y2^2))").unwrap()).unwrap();
    for m in [flat(), constant_randers(0.5, 0.0), constant_randers(0.1, -0.3), quartic_minkowski] {
        assert!(m.is_constant_coefficient());
        for p in sample_fiber_points(&torus(), 64, 23) {
            assert!(riemann_curvature(&m, &p).unwrap().max_abs() < 1e-10);
        }
    }
}

#[test]
fn curvature_is_radial_and_self_adjoint() {
    for (name, m) in families() {
        for p in sample_fiber_points(&torus(), 32, 24) {
            let b = curvature_bundle(&m, &p).unwrap();
            assert!(b.radial_defect(&p.y) < 1e-10, "{name}");
            assert!(b.self_adjointness_defect() < 1e-10, "{name}");
        }
    }
}

#[test]
fn bracket_identities_hold_on_every_family() {
    let (sphere, d) = sphere_chart();
    let mut cases: Vec<_> = families().into_iter().map(|(n, m)| (n, m, torus())).collect();
    cases.push(("sphere", sphere, d));
    for (name, m, dom) in cases {
        for p in sample_fiber_points(&dom, 64, 25) {
            let w = bracket_identity_defects(&m, &p).unwrap().worst();
            assert!(w < 1e-7, "{name}: {w:e}");
        }
    }
}

#[test]
fn dynamical_derivative_of_g_vanishes() {
    for (name, m) in families() {
        for p in sample_fiber_points(&torus(), 16, 26) {
            let f = m.norm(&p.x, &p.y);
            assert!(metric_compatibility_check(&m, &p).unwrap().max_abs() < 1e-10 * f, "{name}");
        }
    }
}
