mod common;

use common::*;
use finsler_core::sampling::sample_fiber_points;
use finsler_core::{
    affine_diagnostics, affine_transformation_defect, bracket_residual, complete_lift, flow_point, flow_with_differential,
    integrate_geodesic, jacobi_residual, lifted_flow, spray_coefficients, FiberPoint, FlowMap, MetricSpec, VectorFieldDef,
};

fn pt(x: &[f64], y: &[f64]) -> FiberPoint<f64> {
    FiberPoint::new(x.to_vec(), y.to_vec()).unwrap()
}

#[test]
fn sphere_geodesic_conserves_norm() {
    let (m, d) = sphere_chart();
    let tr = integrate_geodesic(&m, &d, &pt(&[0.0, 0.0], &[0.8, 0.6]), 1.0, 1000).unwrap();
    assert!(tr.norm_drift(&m) < 1e-9, "{:e}", tr.norm_drift(&m));
    assert!(tr.equation_residual(&m) < 1e-8);
}

#[test]
fn sphere_geodesic_is_fourth_order() {
    let (m, d) = sphere_chart();
    let p = pt(&[0.1, -0.2], &[0.9, 0.5]);
    let end = |steps| integrate_geodesic(&m, &d, &p, 1.0, steps).unwrap().end().x.clone();
    let (a, b, c) = (end(10), end(20), end(40));
    let e1 = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let e2 = ((b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).sqrt();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn riemannian_geodesics_retrace_backwards() {
    let m = warped();
    let p = pt(&[0.3, 1.0], &[0.7, -0.4]);
    let fwd = integrate_geodesic(&m, &torus(), &p, 1.0, 500).unwrap();
    let e = fwd.end();
    let back_start = pt(&e.x, &e.velocity.iter().map(|v| -v).collect::<Vec<_>>());
    let back = integrate_geodesic(&m, &torus(), &back_start, 1.0, 500).unwrap();
    for k in 0..2 {
        assert!((back.end().x[k] - p.x[k]).abs() < 1e-10);
        assert!((back.end().velocity[k] + p.y[k]).abs() < 1e-10);
    }
}

#[test]
fn flow_is_a_one_parameter_group() {
    let v = shear();
    let x = [0.9, 0.2];
    let d = torus();
    let a = flow_point(&FlowMap::new(&v, 0.7, 0.01), &d, &x).unwrap();
    let b = flow_point(&FlowMap::new(&v, 0.3, 0.01), &d, &a).unwrap();
    let c = flow_point(&FlowMap::new(&v, 1.0, 0.01), &d, &x).unwrap();
    assert!((b[0] - c[0]).abs() < 1e-8 && (b[1] - c[1]).abs() < 1e-8);
    let r = rotation();
    let a = flow_point(&FlowMap::new(&r, 0.7, 0.01), &d, &[0.4, 0.3]).unwrap();
    let b = flow_point(&FlowMap::new(&r, 0.3, 0.01), &d, &a).unwrap();
    let c = flow_point(&FlowMap::new(&r, 1.0, 0.01), &d, &[0.4, 0.3]).unwrap();
    assert!((b[0] - c[0]).abs() < 1e-8 && (b[1] - c[1]).abs() < 1e-8);
}

#[test]
fn variational_differential_matches_finite_differences() {
    let v = VectorFieldDef::parse(&["0.3*cos(x2)", "sin(x1) + 0.2*sin(x2)"]).unwrap();
    let d = torus();
    let flow = FlowMap::new(&v, 0.8, 0.005);
    let x = [0.5, 1.3];
    let (_, jac) = flow_with_differential(&flow, &d, &x, true).unwrap();
    let jac = jac.unwrap();
    for i in 0..2 {
        for k in 0..2 {
            let fd = partial(&|z: &[f64]| flow_point(&flow, &d, z).unwrap()[i], &x, k, 1e-3);
            assert!((jac[i * 2 + k] - fd).abs() < 1e-6, "D[{i}{k}] {} vs {fd}", jac[i * 2 + k]);
        }
    }
}

#[test]
fn lifted_flow_at_time_zero_is_identity() {
    let v = shear();
    let p = pt(&[0.5, 1.0], &[0.3, -0.7]);
    assert_eq!(lifted_flow(&FlowMap::new(&v, 0.0, 0.1), &torus(), &p).unwrap(), p);
}

#[test]
fn flat_translations_are_affine_for_all_times() {
    let m = flat();
    let d = torus();
    for c in [[1.0, 0.0], [0.3, -0.8], [2.0, 1.5]] {
        let v = VectorFieldDef::constant(&c);
        for t in [0.0, 0.25, 0.5, 1.0] {
            for p in sample_fiber_points(&d, 4, 31) {
                let defect = affine_transformation_defect(&m, &d, &FlowMap::new(&v, t, 0.01), &p, 1.0, 200).unwrap();
                assert!(defect < 1e-7, "{defect:e}");
            }
        }
    }
}

#[test]
fn shear_flow_bends_transverse_geodesics() {
    let m = flat();
    let d = torus();
    let p = pt(&[0.0, 0.0], &[1.0, 0.0]);
    let defect = affine_transformation_defect(&m, &d, &FlowMap::new(&shear(), 0.5, 0.01), &p, 1.0, 200).unwrap();
    assert!(defect > 1e-2, "{defect}");
    let zero = affine_transformation_defect(&m, &d, &FlowMap::new(&shear(), 0.0, 0.01), &p, 1.0, 200).unwrap();
    assert!(zero < 1e-10);
}

#[test]
fn sphere_rotation_is_affine_at_flow_and_jacobi_level() {
    let (m, d) = sphere_chart();
    let v = rotation();
    let samples = sample_fiber_points(&d, 64, 32);
    let diag = affine_diagnostics(&m, &v, &samples).unwrap();
    assert!(diag.max_jacobi < 1e-10, "{:e}", diag.max_jacobi);
    assert!(diag.parallel_residual > 0.1);
    for p in samples.iter().take(4) {
        let small = FiberPoint::new(p.x.iter().map(|v| v * 0.5).collect(), p.y.clone()).unwrap();
        for t in [0.25, 0.5, 1.0] {
            let defect = affine_transformation_defect(&m, &d, &FlowMap::new(&v, t, 0.01), &small, 0.5, 200).unwrap();
            assert!(defect < 1e-6, "t={t}: {defect:e}");
        }
    }
}

/// Along a geodesic, `J = V∘γ` satisfies
/// `J̈ⁱ + 2 ∂Gⁱ/∂xᵏ Jᵏ + 2 Nⁱ_k J̇ᵏ = Vⁱ_{|0|0} + Vᵏ Rⁱ_k`. The left side is
/// built from finite differences only. Returns the worst mismatch and the
/// worst magnitude of the left side.
fn discrete_jacobi(m: &MetricSpec<f64>, v: &VectorFieldDef<f64>, p: &FiberPoint<f64>) -> (f64, f64) {
    let d = torus();
    let h = 1e-2;
    let tr = integrate_geodesic(m, &d, p, 1.0, 100).unwrap();
    let field: Vec<Vec<f64>> = tr.samples.iter().map(|s| v.eval(&s.x)).collect();
    let (mut mismatch, mut size): (f64, f64) = (0.0, 0.0);
    for k in 2..field.len() - 2 {
        let s = &tr.samples[k];
        let z: Vec<f64> = s.x.iter().chain(&s.velocity).copied().collect();
        let gi = |i: usize| move |w: &[f64]| spray_coefficients(m, &FiberPoint::new(w[..2].to_vec(), w[2..].to_vec()).unwrap()).unwrap()[i];
        let exact = jacobi_residual(m, v, &FiberPoint::new(s.x.clone(), s.velocity.clone()).unwrap()).unwrap();
        for i in 0..2 {
            let mut r = (-field[k + 2][i] + 16.0 * field[k + 1][i] - 30.0 * field[k][i] + 16.0 * field[k - 1][i] - field[k - 2][i]) / (12.0 * h * h);
            for kk in 0..2 {
                let jd = (field[k - 2][kk] - field[k + 2][kk] + 8.0 * (field[k + 1][kk] - field[k - 1][kk])) / (12.0 * h);
                r += 2.0 * partial(&gi(i), &z, kk, 1e-3) * field[k][kk];
                r += 2.0 * partial(&gi(i), &z, 2 + kk, 1e-3) * jd;
            }
            mismatch = mismatch.max((r - exact[i]).abs());
            size = size.max(r.abs());
        }
    }
    (mismatch, size)
}

#[test]
fn jacobi_residual_agrees_with_discrete_transport() {
    let p = pt(&[0.0, 0.5], &[1.0, 0.2]);
    let (mismatch, size) = discrete_jacobi(&flat(), &VectorFieldDef::constant(&[0.4, 1.0]), &p);
    assert!(mismatch < 1e-8 && size < 1e-8);
    let (mismatch, size) = discrete_jacobi(&constant_randers(0.2, 0.1), &VectorFieldDef::constant(&[0.4, 1.0]), &p);
    assert!(mismatch < 1e-6 && size < 1e-6);
    let (mismatch, size) = discrete_jacobi(&flat(), &shear(), &p);
    assert!(size > 0.5 && mismatch < 1e-6, "{mismatch:e} {size}");
    // x² translations are isometries of this Randers torus; x¹ translations are not
    let (mismatch, size) = discrete_jacobi(&randers(), &VectorFieldDef::parse(&["0", "1"]).unwrap(), &p);
    assert!(size < 1e-6 && mismatch < 1e-6, "{mismatch:e} {size}");
    let (mismatch, size) = discrete_jacobi(&randers(), &VectorFieldDef::parse(&["1", "0"]).unwrap(), &p);
    assert!(size > 1e-3 && mismatch < 1e-6, "{mismatch:e} {size}");
    let (mismatch, _) = discrete_jacobi(&warped(), &VectorFieldDef::parse(&["cos(x2)", "sin(x1)"]).unwrap(), &p);
    assert!(mismatch < 1e-6, "{mismatch:e}");
}

#[test]
fn complete_lift_basis_change_on_randers_torus() {
    let m = randers();
    for p in sample_fiber_points(&torus(), 64, 33) {
        let l = complete_lift(&m, &shear(), &p).unwrap();
        assert!(l.basis_change_defect < 1e-9);
    }
}

#[test]
fn jacobi_and_bracket_residuals_agree() {
    let cases = [
        (flat(), shear()),
        (randers(), VectorFieldDef::parse(&["0", "1"]).unwrap()),
        (warped(), VectorFieldDef::parse(&["cos(x2)", "sin(x1)"]).unwrap()),
        (quartic(), VectorFieldDef::parse(&["1", "0.5*cos(x1)"]).unwrap()),
    ];
    for (m, v) in &cases {
        let samples = sample_fiber_points(&torus(), 256, 34);
        let d = affine_diagnostics(m, v, &samples).unwrap();
        assert!(d.max_cross_check < 1e-7, "{:e}", d.max_cross_check);
        assert!(d.max_horizontal_leak < 1e-8);
        for p in samples.iter().take(8) {
            let j = jacobi_residual(m, v, p).unwrap();
            let b = bracket_residual(m, v, p).unwrap();
            let f2 = m.norm(&p.x, &p.y).powi(2);
            assert!(j.iter().zip(&b).all(|(a, c)| (a - c).abs() < 1e-9 * f2.max(1.0)));
        }
    }
}
