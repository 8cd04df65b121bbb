//! Affine vector fields: the complete lift, the Jacobi-type residual
//! `V_{|0|0} + R(V)`, the same quantity as the vertical part of `[G, V̂]`,
//! and the parallelness and reversibility diagnostics.

use rayon::prelude::*;

use crate::error::{GeometryError, Result};
use crate::field::VectorFieldDef;
use crate::lie::{lie_bracket, to_adapted_frame, AdaptedComponents, CompleteLiftField, SprayField};
use crate::linalg::{euclidean_norm, Matrix};
use crate::metric::{fundamental_tensor_at, ChartDomain, FiberPoint, MetricSpec};
use crate::scalar::Real;
use crate::spray::{admissible, check_field, covariant_section_derivative_at, riemann_at, section_derivatives_at};

/// `V̂` in the adapted frame, with the mismatch against the coordinate form
/// `Vⁱ ∂/∂xⁱ + yʲ ∂Vⁱ/∂xʲ ∂/∂yⁱ` after the basis change.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteLift<T> {
    pub horizontal: Vec<T>,
    pub vertical: Vec<T>,
    pub basis_change_defect: T,
}

pub fn complete_lift<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, p: &FiberPoint<T>) -> Result<CompleteLift<T>> {
    admissible(metric, p)?;
    check_field(metric, field)?;
    let horizontal = field.eval(&p.x);
    let vertical = covariant_section_derivative_at(metric, field, &p.x, &p.y);
    let mut coords = horizontal.clone();
    coords.extend(field.directional(&p.x, &p.y));
    let AdaptedComponents { horizontal: h, vertical: v } = to_adapted_frame(metric, &p.x, &p.y, &coords);
    let defect = h
        .iter()
        .zip(&horizontal)
        .chain(v.iter().zip(&vertical))
        .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
    Ok(CompleteLift { horizontal, vertical, basis_change_defect: defect })
}

fn jacobi_at<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, x: &[T], y: &[T]) -> Vec<T> {
    let sd = section_derivatives_at(metric, field, x, y);
    let (_, _, r) = riemann_at(metric, x, y);
    let rv = r.mul_vec(&field.eval(x));
    sd.second.into_iter().zip(rv).map(|(a, b)| a + b).collect()
}

/// `Vⁱ_{|0|0} + Vᵏ Rⁱ_k`.
pub fn jacobi_residual<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, p: &FiberPoint<T>) -> Result<Vec<T>> {
    admissible(metric, p)?;
    check_field(metric, field)?;
    Ok(jacobi_at(metric, field, &p.x, &p.y))
}

/// `[G, V̂]` from coordinate Jacobians, split in the adapted frame.
fn bracket_at<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, x: &[T], y: &[T]) -> AdaptedComponents<T> {
    let coords = lie_bracket(&SprayField(metric), &CompleteLiftField(field), x, y);
    to_adapted_frame(metric, x, y, &coords)
}

fn g_norm<T: Real>(g: &Matrix<T>, v: &[T]) -> T {
    g.bilinear(v, v).max(T::zero()).sqrt()
}

/// Vertical components of `[G, V̂]`; fails with `HorizontalLeak` when the
/// horizontal part exceeds `1e-8 · F · max(1, |V|_g)`.
pub fn bracket_residual<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, p: &FiberPoint<T>) -> Result<Vec<T>> {
    let f = admissible(metric, p)?;
    check_field(metric, field)?;
    let b = bracket_at(metric, field, &p.x, &p.y);
    let g = fundamental_tensor_at(metric, &p.x, &p.y);
    let scale = f * T::one().max(g_norm(&g, &field.eval(&p.x)));
    let leak = euclidean_norm(&b.horizontal);
    if leak > T::lit(1e-8) * scale {
        return Err(GeometryError::HorizontalLeak { value: (leak / scale).to_f64_lossy() });
    }
    Ok(b.vertical)
}

/// Every residual at one fiber point, scale-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDiagnostics<T> {
    pub jacobi: Vec<T>,
    pub bracket: Vec<T>,
    pub first: Vec<T>,
    pub f: T,
    /// `|V|_g`
    pub field_norm: T,
    /// `|J|_g / (F² max(1, |V|_g))`
    pub jacobi_norm: T,
    /// `|J − B|_∞ / (F² max(1, |V|_g))`
    pub cross_check: T,
    /// `|[G, V̂]^h|_∞ / (F max(1, |V|_g))`
    pub horizontal_leak: T,
    /// `|V_{|0}|_g / F`
    pub parallel_norm: T,
}

pub fn point_diagnostics<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    p: &FiberPoint<T>,
) -> Result<PointDiagnostics<T>> {
    let f = admissible(metric, p)?;
    check_field(metric, field)?;
    let (x, y) = (&p.x[..], &p.y[..]);
    let g = fundamental_tensor_at(metric, x, y);
    let v = field.eval(x);
    let sd = section_derivatives_at(metric, field, x, y);
    let (_, _, r) = riemann_at(metric, x, y);
    let jacobi: Vec<T> = sd.second.iter().zip(r.mul_vec(&v)).map(|(&a, b)| a + b).collect();
    let b = bracket_at(metric, field, x, y);
    let field_norm = g_norm(&g, &v);
    let s = T::one().max(field_norm);
    let diff: Vec<T> = jacobi.iter().zip(&b.vertical).map(|(&a, &c)| a - c).collect();
    Ok(PointDiagnostics {
        jacobi_norm: g_norm(&g, &jacobi) / (f * f * s),
        cross_check: crate::linalg::max_abs(&diff) / (f * f * s),
        horizontal_leak: crate::linalg::max_abs(&b.horizontal) / (f * s),
        parallel_norm: g_norm(&g, &sd.first) / f,
        jacobi,
        bracket: b.vertical,
        first: sd.first,
        f,
        field_norm,
    })
}

/// Worst-case residuals of one field over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDiagnostics<T> {
    pub samples: usize,
    pub max_jacobi: T,
    pub max_cross_check: T,
    pub max_horizontal_leak: T,
    /// `max |V_{|0}|_g/F` over `max |V|_g`; zero for `V ≡ 0`.
    pub parallel_residual: T,
    /// Index of the sample with the largest Jacobi residual.
    pub worst_sample: usize,
}

impl<T: Real> AffineDiagnostics<T> {
    /// Sampled evidence only: the Jacobi residual stays below `tolerance`.
    pub fn certified_affine(&self, tolerance: T) -> bool {
        self.max_jacobi < tolerance
    }
}

pub fn affine_diagnostics<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    samples: &[FiberPoint<T>],
) -> Result<AffineDiagnostics<T>> {
    if samples.is_empty() {
        return Err(GeometryError::InvalidInput("empty sample set".into()));
    }
    let points: Vec<PointDiagnostics<T>> =
        samples.par_iter().map(|p| point_diagnostics(metric, field, p)).collect::<Result<_>>()?;
    let mut d = AffineDiagnostics {
        samples: points.len(),
        max_jacobi: T::zero(),
        max_cross_check: T::zero(),
        max_horizontal_leak: T::zero(),
        parallel_residual: T::zero(),
        worst_sample: 0,
    };
    let (mut top, mut bottom) = (T::zero(), T::zero());
    for (k, p) in points.iter().enumerate() {
        if p.jacobi_norm > d.max_jacobi {
            d.max_jacobi = p.jacobi_norm;
            d.worst_sample = k;
        }
        d.max_cross_check = d.max_cross_check.max(p.cross_check);
        d.max_horizontal_leak = d.max_horizontal_leak.max(p.horizontal_leak);
        top = top.max(p.parallel_norm);
        bottom = bottom.max(p.field_norm);
    }
    if bottom > T::zero() {
        d.parallel_residual = top / bottom;
    }
    Ok(d)
}

/// `max |V_{|0}|_g/F` over `max |V|_g` on the samples.
pub fn parallel_residual<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, samples: &[FiberPoint<T>]) -> Result<T> {
    Ok(affine_diagnostics(metric, field, samples)?.parallel_residual)
}

/// `λ(F) = sup F(x, −y)/F(x, y)` over a base grid with `resolution` nodes
/// per axis and `angular_resolution` directions per angle.
pub fn reversibility<T: Real>(
    metric: &MetricSpec<T>,
    domain: &ChartDomain<T>,
    resolution: usize,
    angular_resolution: usize,
) -> Result<T> {
    let n = metric.dim();
    if domain.dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: domain.dim() });
    }
    if resolution < 8 || angular_resolution < 8 {
        return Err(GeometryError::InvalidInput("reversibility needs at least 8 nodes per axis".into()));
    }
    let directions = crate::sphere::direction_grid::<T>(n, angular_resolution);
    let base = crate::sphere::base_grid(domain, resolution);
    let worst = base
        .par_iter()
        .map(|x| {
            let mut m = T::zero();
            for u in &directions {
                let fwd = metric.norm(x, u);
                let minus: Vec<T> = u.iter().map(|&v| -v).collect();
                let back = metric.norm(x, &minus);
                if !(fwd > T::zero() && back > T::zero()) {
                    return Err(GeometryError::NonPositiveNorm { value: fwd.min(back).to_f64_lossy() });
                }
                m = m.max(back / fwd);
            }
            Ok(m)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(worst.into_iter().fold(T::one(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn pt(x: &[f64], y: &[f64]) -> FiberPoint<f64> {
        FiberPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn shear() -> VectorFieldDef<f64> {
        VectorFieldDef::parse(&["0", "sin(x1)"]).unwrap()
    }

    #[test]
    fn lift_of_shear_on_flat_torus() {
        let m = MetricSpec::euclidean(2);
        let l = complete_lift(&m, &shear(), &pt(&[0.4, 0.0], &[2.0, 1.0])).unwrap();
        assert_eq!(l.horizontal, vec![0.0, 0.4f64.sin()]);
        assert_eq!(l.vertical, vec![0.0, 2.0 * 0.4f64.cos()]);
        assert_eq!(l.basis_change_defect, 0.0);
    }

    #[test]
    fn jacobi_residual_of_shear() {
        let m = MetricSpec::euclidean(2);
        let j = jacobi_residual(&m, &shear(), &pt(&[FRAC_PI_2, 0.3], &[1.0, 0.0])).unwrap();
        assert!(j[0].abs() < 1e-15 && (j[1] + 1.0).abs() < 1e-15);
        let b = bracket_residual(&m, &shear(), &pt(&[FRAC_PI_2, 0.3], &[1.0, 0.0])).unwrap();
        assert!((b[1] - j[1]).abs() < 1e-12);
    }

    #[test]
    fn randers_cross_check() {
        let m = MetricSpec::randers_over_euclidean(vec![Expr::constant(0.0), Expr::parse("0.3*sin(x1)").unwrap()]).unwrap();
        let v = VectorFieldDef::parse(&["0", "1"]).unwrap();
        let d = point_diagnostics(&m, &v, &pt(&[0.7, 1.1], &[0.4, -0.9])).unwrap();
        assert!(d.cross_check < 1e-10, "{}", d.cross_check);
        assert!(d.horizontal_leak < 1e-12);
    }

    #[test]
    fn parallel_residual_separates_constant_and_shear() {
        let m = MetricSpec::euclidean(2);
        let d = ChartDomain::torus(2, TAU).unwrap();
        let s = crate::sampling::sample_fiber_points(&d, 32, 9);
        assert_eq!(parallel_residual(&m, &VectorFieldDef::constant(&[1.0, 2.0]), &s).unwrap(), 0.0);
        assert!(parallel_residual(&m, &shear(), &s).unwrap() > 0.1);
    }

    #[test]
    fn reversibility_closed_forms() {
        let d = ChartDomain::torus(2, TAU).unwrap();
        assert_eq!(reversibility(&MetricSpec::euclidean(2), &d, 8, 64).unwrap(), 1.0);
        let r = MetricSpec::randers_over_euclidean(vec![Expr::constant(0.5), Expr::constant(0.0)]).unwrap();
        assert!((reversibility(&r, &d, 8, 64).unwrap() - 3.0).abs() < 1e-12);
    }
}
