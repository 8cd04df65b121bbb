//! Independent finite-difference oracles and shared fixtures. Nothing here
//! calls into the jet machinery: every derivative is a Richardson-extrapolated
//! central difference of plain `f64` evaluations of `F`.
#![allow(dead_code)]

use finsler_core::{ChartDomain, Expr, MetricSpec, VectorFieldDef};
use std::f64::consts::TAU;

pub const H: f64 = 1e-3;

/// `∂f/∂z_k` by central differences with one Richardson step (error O(h⁴)).
pub fn partial(f: &dyn Fn(&[f64]) -> f64, z: &[f64], k: usize, h: f64) -> f64 {
    let d = |h: f64| {
        let mut p = z.to_vec();
        let mut m = z.to_vec();
        p[k] += h;
        m[k] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Second partial `∂²f/∂z_j∂z_k` by nesting [`partial`].
pub fn second_partial(f: &dyn Fn(&[f64]) -> f64, z: &[f64], j: usize, k: usize, h: f64) -> f64 {
    partial(&|w: &[f64]| partial(f, w, k, h), z, j, h)
}

fn join(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().chain(y).copied().collect()
}

/// `g_ij = ½ ∂²F²/∂yⁱ∂yʲ`.
pub fn fd_fundamental_tensor(m: &MetricSpec<f64>, x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let x0 = x.to_vec();
    let f2 = move |w: &[f64]| {
        let v = m.norm(&x0, w);
        v * v
    };
    (0..n).map(|i| (0..n).map(|j| 0.5 * second_partial(&f2, y, i, j, H)).collect()).collect()
}

pub fn invert2(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    vec![vec![a[1][1] / det, -a[0][1] / det], vec![-a[1][0] / det, a[0][0] / det]]
}

/// `Gⁱ = ¼ g^{il}([F²]_{xᵏyˡ} yᵏ − [F²]_{xˡ})` for `n = 2`.
pub fn fd_spray(m: &MetricSpec<f64>, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let f2 = |z: &[f64]| {
        let v = m.norm(&z[..n], &z[n..]);
        v * v
    };
    let z = join(x, y);
    let ginv = invert2(&fd_fundamental_tensor(m, x, y));
    let b: Vec<f64> = (0..n)
        .map(|l| {
            let mixed: f64 = (0..n).map(|k| second_partial(&f2, &z, k, n + l, H) * y[k]).sum();
            mixed - partial(&f2, &z, l, H)
        })
        .collect();
    (0..n).map(|i| 0.25 * (0..n).map(|l| ginv[i][l] * b[l]).sum::<f64>()).collect()
}

pub fn torus() -> ChartDomain<f64> {
    ChartDomain::torus(2, TAU).unwrap()
}

pub fn flat() -> MetricSpec<f64> {
    MetricSpec::euclidean(2)
}

/// Randers metric over the flat torus with `b = (0, 0.3 sin x¹)`.
pub fn randers() -> MetricSpec<f64> {
    MetricSpec::randers_over_euclidean(vec![Expr::constant(0.0), Expr::parse("0.3*sin(x1)").unwrap()]).unwrap()
}

pub fn constant_randers(b1: f64, b2: f64) -> MetricSpec<f64> {
    MetricSpec::randers_over_euclidean(vec![Expr::constant(b1), Expr::constant(b2)]).unwrap()
}

/// Warped torus `dx¹² + φ(x¹)² dx²²` with `φ = 1 + 0.3 sin x¹`, Gaussian
/// curvature `−φ''/φ`.
pub fn warped() -> MetricSpec<f64> {
    let a = ["1", "0", "0", "(1 + 0.3*sin(x1))^2"].iter().map(|s| Expr::parse(s).unwrap()).collect();
    MetricSpec::riemannian(2, a).unwrap()
}

pub fn warped_curvature(x1: f64) -> f64 {
    0.3 * x1.sin() / (1.0 + 0.3 * x1.sin())
}

/// A non-Riemannian, non-Randers norm given as an expression.
pub fn quartic() -> MetricSpec<f64> {
    let e = Expr::parse("(1 + 0.1*cos(x2))*sqrt(y1^2 + y2^2 + 0.2*(y1^4 + y2^4)/(y1^2 + y2^2))").unwrap();
    MetricSpec::custom(2, e).unwrap()
}

pub fn shear() -> VectorFieldDef<f64> {
    VectorFieldDef::parse(&["0", "sin(x1)"]).unwrap()
}

/// Rotation of the stereographic chart; a Killing field of the round sphere.
pub fn rotation() -> VectorFieldDef<f64> {
    VectorFieldDef::parse(&["-x2", "x1"]).unwrap()
}

pub fn sphere_chart() -> (MetricSpec<f64>, ChartDomain<f64>) {
    let m = MetricSpec::round_sphere_chart(2);
    let d = ChartDomain::new(vec![
        finsler_core::Axis::Open { lo: -1.5, hi: 1.5 },
        finsler_core::Axis::Open { lo: -1.5, hi: 1.5 },
    ])
    .unwrap();
    (m, d)
}
