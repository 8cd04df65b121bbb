mod common;

use common::*;
use finsler_core::sampling::sample_fiber_points;
use finsler_core::{
    hilbert_form, rigidity_identity_check, volume_density, MetricSpec, SMChartPoint, SMGrid, ScalarFieldDef, VectorFieldDef,
};
use std::f64::consts::PI;

fn vol() -> f64 {
    8.0 * PI.powi(3)
}

#[test]
fn contact_identities_at_every_node() {
    for m in [flat(), randers(), warped(), quartic()] {
        let grid = SMGrid::new(&m, &torus(), [12, 12], 12, 0.1).unwrap();
        let r = grid.contact_report().unwrap();
        assert_eq!(r.nodes, 12 * 12 * 12);
        assert!(r.omega_of_xi < 1e-9 && r.d_omega_of_xi < 1e-8, "{r:?}");
        assert!(r.tangency < 1e-10 && r.form_mismatch < 1e-10, "{r:?}");
    }
}

#[test]
fn flat_hilbert_form_closed_form() {
    let m = flat();
    for theta in [0.0, 0.4, 2.0, 5.5] {
        let h = hilbert_form(&m, &SMChartPoint::new(&m, vec![1.0, 2.0], vec![theta]).unwrap()).unwrap();
        let expect = [theta.cos(), theta.sin()];
        for i in 0..2 {
            assert!((h.omega[i] - expect[i]).abs() < 1e-15 && (h.xi[i] - expect[i]).abs() < 1e-15);
        }
        assert!(h.xi[2].abs() < 1e-15);
    }
}

/// `ρ = ω₂ ∂_θ ω₁ − ω₁ ∂_θ ω₂` with `ω = F_y(u(θ))`, every derivative by
/// finite differences. Valid for constant-coefficient metrics.
fn fd_density(m: &MetricSpec<f64>, theta: f64) -> f64 {
    let omega = |t: f64, i: usize| {
        let u = [t.cos(), t.sin()];
        partial(&|w: &[f64]| m.norm(&[0.0, 0.0], w), &u, i, 1e-3)
    };
    let dtheta = |i: usize| partial(&|t: &[f64]| omega(t[0], i), &[theta], 0, 1e-3);
    omega(theta, 1) * dtheta(0) - omega(theta, 0) * dtheta(1)
}

#[test]
fn density_matches_finite_difference_wedge() {
    let quartic_minkowski = MetricSpec::custom(
        2,
        finsler_core::Expr::parse("sqrt(y1^2 + y2^2 + 0.2*(y1^4 + y2^4)/(y1^2 + y2^2))").unwrap(),
    )
    .unwrap();
    for m in [constant_randers(0.3, -0.2), constant_randers(0.6, 0.1), quartic_minkowski] {
        for theta in [0.0, 0.7, 1.9, 3.3, 5.0] {
            let q = SMChartPoint::new(&m, vec![0.0, 0.0], vec![theta]).unwrap();
            let rho = volume_density(&m, &q).unwrap();
            assert!((rho - fd_density(&m, theta)).abs() < 1e-6, "{rho} vs {}", fd_density(&m, theta));
        }
    }
}

#[test]
fn euclidean_volume_is_eight_pi_cubed() {
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [32, 32], 32, 0.0).unwrap();
    assert!((grid.volume() - vol()).abs() / vol() < 1e-10);
    assert_eq!(grid.sign(), -1);
    assert!(grid.nodes().iter().all(|n| n.density < 0.0));
}

#[test]
fn riemannian_volume_is_area_times_two_pi() {
    let m = warped();
    let grid = SMGrid::new(&m, &torus(), [32, 32], 32, 0.0).unwrap();
    assert!((grid.volume() - vol()).abs() / vol() < 1e-10);
}

#[test]
fn odd_integrands_vanish() {
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [16, 16], 16, 0.0).unwrap();
    let f = ScalarFieldDef::parse(2, "sin(x1)*y1").unwrap();
    assert!(grid.integrate_sm(&f).abs() < 1e-12);
}

#[test]
fn start_angle_does_not_matter() {
    let m = randers();
    let f = ScalarFieldDef::parse(2, "cos(x1)^2*y1^2 + y2").unwrap();
    let a = SMGrid::new(&m, &torus(), [16, 16], 24, 0.0).unwrap().integrate_sm(&f);
    let b = SMGrid::new(&m, &torus(), [16, 16], 24, 0.37).unwrap().integrate_sm(&f);
    assert!((a - b).abs() / a.abs() < 1e-10, "{a} {b}");
}

#[test]
fn reeb_integrals_vanish_on_flat_torus() {
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [16, 16], 16, 0.0).unwrap();
    assert!(grid.stokes_defect(&ScalarFieldDef::parse(2, "sin(x1)").unwrap()) < 1e-12);
    assert_eq!(grid.stokes_defect(&ScalarFieldDef::parse(2, "1").unwrap()), 0.0);
}

/// Below this, `|∫ ḟ dν|` is rounding noise of a sum of order `vol(SM)`.
const ROUNDOFF_FLOOR: f64 = 1e-12;

pub const STOKES_TEST_FUNCTIONS: [&str; 3] = [
    "exp(sin(x2 + 0.7) + 0.8*cos(x1))*(y1 + 0.3*y2)^3/sqrt(y1^2 + y2^2)^3",
    "exp(0.8*sin(x1 + 0.5) + cos(x2))*y1*y2^2/sqrt(y1^2 + y2^2)^3",
    "exp(0.6*cos(x1 - 0.3))*(y1^3 + y2^3)/sqrt(y1^2 + y2^2)^3",
];

#[test]
fn reeb_integrals_on_randers_torus_converge_to_zero() {
    let m = randers();
    let grids: Vec<SMGrid<f64>> = [6, 12, 24, 48].iter().map(|&n| SMGrid::new(&m, &torus(), [n, n], n, 0.0).unwrap()).collect();
    for src in STOKES_TEST_FUNCTIONS {
        let f = ScalarFieldDef::parse(2, src).unwrap();
        let values: Vec<f64> = grids.iter().map(|g| g.stokes_defect(&f)).collect();
        assert!(values[0] > 1e-6, "{src}: coarse value {:e} shows no quadrature error to resolve", values[0]);
        for w in values.windows(2) {
            assert!(w[1] < w[0] || w[1] < ROUNDOFF_FLOOR, "{src}: {values:?}");
        }
        assert!(values[3] < 1e-8, "{src}: {values:?}");
    }
}

#[test]
fn total_ricci_of_flat_torus_vanishes() {
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [12, 12], 12, 0.0).unwrap();
    assert!(grid.total_ricci(&shear()).unwrap().abs() < 1e-12);
}

#[test]
fn total_ricci_of_warped_torus_closed_form() {
    // π ∫ K |V|² dA with K = −φ''/φ, |∂₂|² = φ²
    let m = warped();
    let grid = SMGrid::new(&m, &torus(), [32, 32], 32, 0.0).unwrap();
    let t = grid.total_ricci(&VectorFieldDef::parse(&["0", "1"]).unwrap()).unwrap();
    assert!((t - 0.36 * PI.powi(3)).abs() < 1e-9, "{t}");
    let t1 = grid.total_ricci(&VectorFieldDef::parse(&["1", "0"]).unwrap()).unwrap();
    assert!(t1.abs() < 1e-9, "{t1}");
}

#[test]
fn total_ricci_on_randers_torus_is_stable_and_quadratic() {
    let m = randers();
    let v = VectorFieldDef::parse(&["1", "0"]).unwrap();
    let a = SMGrid::new(&m, &torus(), [24, 24], 24, 0.0).unwrap().total_ricci(&v).unwrap();
    let grid = SMGrid::new(&m, &torus(), [48, 48], 48, 0.0).unwrap();
    let b = grid.total_ricci(&v).unwrap();
    assert!((a - b).abs() < 1e-6, "{a} {b}");
    let two = VectorFieldDef::constant(&[2.0, 0.0]);
    assert!((grid.total_ricci(&two).unwrap() - 4.0 * b).abs() < 1e-10 * b.abs().max(1.0));
}

#[test]
fn global_norm_closed_form_and_scaling() {
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [16, 16], 16, 0.0).unwrap();
    let e1 = VectorFieldDef::constant(&[1.0, 0.0]);
    assert!((grid.global_norm(&e1).unwrap() - vol()).abs() / vol() < 1e-12);
    assert_eq!(grid.global_norm(&VectorFieldDef::constant(&[0.0, 0.0])).unwrap(), 0.0);
    let r = randers();
    let rgrid = SMGrid::new(&r, &torus(), [16, 16], 16, 0.0).unwrap();
    let v = shear();
    let w = v.combine(3.0, &v, 0.0).unwrap();
    let (a, b) = (rgrid.global_norm(&v).unwrap(), rgrid.global_norm(&w).unwrap());
    assert!((b - 9.0 * a).abs() / b < 1e-12);
}

#[test]
fn pointwise_rigidity_identity() {
    let (sphere, sd) = sphere_chart();
    let cases: Vec<(MetricSpec<f64>, finsler_core::ChartDomain<f64>, VectorFieldDef<f64>)> = vec![
        (flat(), torus(), shear()),
        (randers(), torus(), VectorFieldDef::parse(&["0", "1"]).unwrap()),
        (randers(), torus(), shear()),
        (warped(), torus(), VectorFieldDef::parse(&["cos(x2)", "sin(x1)"]).unwrap()),
        (quartic(), torus(), VectorFieldDef::parse(&["1", "0.5*cos(x1)"]).unwrap()),
        (sphere, sd, rotation()),
    ];
    for (m, d, v) in &cases {
        for p in sample_fiber_points(d, 256, 41) {
            let r = rigidity_identity_check(m, v, &p).unwrap();
            assert!(r.product_rule < 1e-8, "{:e}", r.product_rule);
            assert!((r.curvature_form - r.jacobi_term.abs()).abs() < 1e-8);
        }
    }
}

#[test]
fn rigidity_balance_closes() {
    for (m, v) in [(flat(), VectorFieldDef::constant(&[1.0, 0.5])), (flat(), shear()), (randers(), shear()), (warped(), VectorFieldDef::parse(&["cos(x2)", "sin(x1)"]).unwrap())] {
        let grid = SMGrid::new(&m, &torus(), [24, 24], 24, 0.0).unwrap();
        let b = grid.rigidity_balance(&v).unwrap();
        assert!(b.closure < 1e-9 * b.energy.abs().max(1.0), "{b:?}");
        assert!(b.flux.abs() < 1e-6, "{b:?}");
    }
    let m = flat();
    let grid = SMGrid::new(&m, &torus(), [16, 16], 16, 0.0).unwrap();
    let b = grid.rigidity_balance(&VectorFieldDef::constant(&[1.0, 0.5])).unwrap();
    assert_eq!((b.energy, b.total_ricci), (0.0, 0.0));
}
