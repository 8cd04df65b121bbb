//! Geodesics `γ̈ⁱ + 2Gⁱ(γ, γ̇) = 0`, flows of base vector fields and their
//! lifts to the tangent bundle, all with fixed-step classical RK4.

use crate::error::{GeometryError, Result};
use crate::field::VectorFieldDef;
use crate::linalg::euclidean_norm;
use crate::metric::{ChartDomain, FiberPoint, MetricSpec};
use crate::scalar::Real;
use crate::spray::spray_at;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample<T> {
    pub t: T,
    /// Base point, reduced modulo the periods of a torus chart.
    pub x: Vec<T>,
    pub velocity: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory<T> {
    pub samples: Vec<GeodesicSample<T>>,
    pub step: T,
}

fn axpy<T: Real>(a: T, x: &[T], y: &[T]) -> Vec<T> {
    y.iter().zip(x).map(|(&yi, &xi)| yi + a * xi).collect()
}

/// One classical RK4 step for `z' = f(z)`.
fn rk4_step<T: Real>(z: &[T], h: T, f: &impl Fn(&[T]) -> Vec<T>) -> Vec<T> {
    let half = h * T::lit(0.5);
    let k1 = f(z);
    let k2 = f(&axpy(half, &k1, z));
    let k3 = f(&axpy(half, &k2, z));
    let k4 = f(&axpy(h, &k3, z));
    let sixth = h / T::lit(6.0);
    (0..z.len())
        .map(|i| z[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]))
        .collect()
}

/// Integrates the geodesic through `p0` on `[0, t_end]` with `steps` RK4 steps.
pub fn integrate_geodesic<T: Real>(
    metric: &MetricSpec<T>,
    domain: &ChartDomain<T>,
    p0: &FiberPoint<T>,
    t_end: T,
    steps: usize,
) -> Result<GeodesicTrajectory<T>> {
    let n = metric.dim();
    if p0.dim() != n || domain.dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: p0.dim() });
    }
    if steps == 0 {
        return Err(GeometryError::InvalidInput("steps must be positive".into()));
    }
    let h = t_end / T::lit(steps as f64);
    let rhs = |z: &[T]| -> Vec<T> {
        let (x, v) = z.split_at(n);
        let sp = spray_at(metric, x, v);
        v.iter().copied().chain(sp.iter().map(|&g| -(g + g))).collect()
    };
    let mut z: Vec<T> = p0.x.iter().chain(&p0.y).copied().collect();
    domain.wrap(&mut z[..n])?;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(GeodesicSample { t: T::zero(), x: z[..n].to_vec(), velocity: z[n..].to_vec() });
    for k in 1..=steps {
        z = rk4_step(&z, h, &rhs);
        domain.wrap(&mut z[..n])?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidInput("geodesic integration diverged".into()));
        }
        samples.push(GeodesicSample { t: h * T::lit(k as f64), x: z[..n].to_vec(), velocity: z[n..].to_vec() });
    }
    Ok(GeodesicTrajectory { samples, step: h })
}

impl<T: Real> GeodesicTrajectory<T> {
    pub fn end(&self) -> &GeodesicSample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// `max_t |F(γ, γ̇) − F₀| / F₀`.
    pub fn norm_drift(&self, metric: &MetricSpec<T>) -> T {
        let f0 = metric.norm(&self.samples[0].x, &self.samples[0].velocity);
        self.samples
            .iter()
            .map(|s| (metric.norm(&s.x, &s.velocity) - f0).abs() / f0)
            .fold(T::zero(), T::max)
    }

    /// Largest residual of the geodesic equation over interior samples, with
    /// `γ̈` from a fourth-order central difference of the stored velocities.
    pub fn equation_residual(&self, metric: &MetricSpec<T>) -> T {
        let vel: Vec<&[T]> = self.samples.iter().map(|s| s.velocity.as_slice()).collect();
        let pos: Vec<&[T]> = self.samples.iter().map(|s| s.x.as_slice()).collect();
        curve_residual(metric, &pos, &vel, self.step)
    }
}

/// `max_k |ẇ_k + 2G(z_k, w_k)|` for a sampled curve `(z, w)` with uniform
/// parameter step `h`, using the five-point derivative stencil.
pub(crate) fn curve_residual<T: Real, P: AsRef<[T]>, V: AsRef<[T]>>(
    metric: &MetricSpec<T>,
    pos: &[P],
    vel: &[V],
    h: T,
) -> T {
    let mut worst = T::zero();
    if vel.len() < 5 {
        return worst;
    }
    let c = T::one() / (T::lit(12.0) * h);
    let eight = T::lit(8.0);
    for k in 2..vel.len() - 2 {
        let w = vel[k].as_ref();
        let sp = spray_at(metric, pos[k].as_ref(), w);
        let r: Vec<T> = (0..w.len())
            .map(|i| {
                let d = (vel[k - 2].as_ref()[i] - vel[k + 2].as_ref()[i]
                    + eight * (vel[k + 1].as_ref()[i] - vel[k - 1].as_ref()[i]))
                    * c;
                d + sp[i] + sp[i]
            })
            .collect();
        worst = worst.max(euclidean_norm(&r));
    }
    worst
}

/// The time-`time` flow of a base vector field.
#[derive(Debug, Clone)]
pub struct FlowMap<'a, T> {
    pub generator: &'a VectorFieldDef<T>,
    pub time: T,
    /// Largest RK4 step; the actual step divides `time` evenly.
    pub max_step: T,
}

impl<'a, T: Real> FlowMap<'a, T> {
    pub fn new(generator: &'a VectorFieldDef<T>, time: T, max_step: T) -> Self {
        FlowMap { generator, time, max_step }
    }

    fn steps(&self) -> usize {
        let s = (self.time.abs() / self.max_step).to_f64_lossy().ceil();
        s.max(1.0) as usize
    }
}

/// `φ_t(x)`.
pub fn flow_point<T: Real>(flow: &FlowMap<'_, T>, domain: &ChartDomain<T>, x: &[T]) -> Result<Vec<T>> {
    Ok(flow_with_differential(flow, domain, x, false)?.0)
}

/// `φ_t(x)` and, when requested, `Dφ_t(x)` from the variational equation
/// `J' = DV(φ) J`, `J(0) = I` (row-major `n × n`).
pub fn flow_with_differential<T: Real>(
    flow: &FlowMap<'_, T>,
    domain: &ChartDomain<T>,
    x: &[T],
    with_differential: bool,
) -> Result<(Vec<T>, Option<Vec<T>>)> {
    let n = flow.generator.dim();
    if x.len() != n || domain.dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: x.len() });
    }
    let steps = flow.steps();
    let h = flow.time / T::lit(steps as f64);
    let mut z: Vec<T> = x.to_vec();
    if with_differential {
        for i in 0..n {
            for j in 0..n {
                z.push(if i == j { T::one() } else { T::zero() });
            }
        }
    }
    let rhs = |z: &[T]| -> Vec<T> {
        let pos = &z[..n];
        let mut out = flow.generator.eval(pos);
        if with_differential {
            let dv = flow.generator.jacobian(pos);
            let jm = &z[n..];
            for i in 0..n {
                for j in 0..n {
                    out.push((0..n).fold(T::zero(), |acc, k| acc + dv[i][k] * jm[k * n + j]));
                }
            }
        }
        out
    };
    for _ in 0..steps {
        z = rk4_step(&z, h, &rhs);
        domain.wrap(&mut z[..n])?;
    }
    let jac = with_differential.then(|| z[n..].to_vec());
    z.truncate(n);
    Ok((z, jac))
}

/// `φ̂_t(x, y) = (φ_t(x), Dφ_t(x) y)`.
pub fn lifted_flow<T: Real>(flow: &FlowMap<'_, T>, domain: &ChartDomain<T>, p: &FiberPoint<T>) -> Result<FiberPoint<T>> {
    let (x, jac) = flow_with_differential(flow, domain, &p.x, true)?;
    let y = apply(&jac.expect("differential requested"), &p.y);
    FiberPoint::new(x, y)
}

fn apply<T: Real>(jac: &[T], y: &[T]) -> Vec<T> {
    let n = y.len();
    (0..n).map(|i| (0..n).fold(T::zero(), |acc, k| acc + jac[i * n + k] * y[k])).collect()
}

/// Maps the geodesic from `p` (on `[0, t_end]`, `steps` steps) through the
/// lifted flow and returns the largest residual of the geodesic equation
/// along the image curve. Vanishes (to discretization error) iff the flow
/// maps this geodesic to a geodesic.
pub fn affine_transformation_defect<T: Real>(
    metric: &MetricSpec<T>,
    domain: &ChartDomain<T>,
    flow: &FlowMap<'_, T>,
    p: &FiberPoint<T>,
    t_end: T,
    steps: usize,
) -> Result<T> {
    let traj = integrate_geodesic(metric, domain, p, t_end, steps)?;
    let mut pos = Vec::with_capacity(traj.samples.len());
    let mut vel = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let (z, jac) = flow_with_differential(flow, domain, &s.x, true)?;
        vel.push(apply(&jac.expect("differential requested"), &s.velocity));
        pos.push(z);
    }
    Ok(curve_residual(metric, &pos, &vel, traj.step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn torus() -> ChartDomain<f64> {
        ChartDomain::torus(2, TAU).unwrap()
    }

    #[test]
    fn flat_geodesic_is_a_straight_line() {
        let m = MetricSpec::euclidean(2);
        let p = FiberPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let tr = integrate_geodesic(&m, &torus(), &p, 1.0, 100).unwrap();
        let end = tr.end();
        assert!((end.x[0] - 1.0).abs() < 1e-14 && end.x[1].abs() < 1e-15);
        assert!((end.t - 1.0).abs() < 1e-14);
        assert_eq!(tr.norm_drift(&m), 0.0);
    }

    #[test]
    fn geodesic_leaving_an_open_chart_errors() {
        let d = ChartDomain::new(vec![
            crate::metric::Axis::Open { lo: -1.0, hi: 1.0 },
            crate::metric::Axis::Open { lo: -1.0, hi: 1.0 },
        ])
        .unwrap();
        let p = FiberPoint::new(vec![0.0, 0.0], vec![2.0, 0.0]).unwrap();
        let err = integrate_geodesic(&MetricSpec::euclidean(2), &d, &p, 1.0, 10).unwrap_err();
        assert!(matches!(err, GeometryError::LeftChart { axis: 0, .. }));
    }

    #[test]
    fn constant_flow_translates_and_wraps() {
        let v = VectorFieldDef::constant(&[1.0, 7.0]);
        let f = FlowMap::new(&v, 1.0, 0.1);
        let x = flow_point(&f, &torus(), &[0.5, 0.5]).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-14);
        assert!((x[1] - (7.5 - TAU)).abs() < 1e-13);
        let z = FlowMap::new(&v, 0.0, 0.1);
        assert_eq!(flow_point(&z, &torus(), &[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn lifted_flow_of_translation_keeps_y() {
        let v = VectorFieldDef::constant(&[0.3, -0.2]);
        let f = FlowMap::new(&v, 0.8, 0.05);
        let p = FiberPoint::new(vec![1.0, 2.0], vec![0.6, -1.1]).unwrap();
        let q = lifted_flow(&f, &torus(), &p).unwrap();
        assert_eq!(q.y, p.y);
    }

    #[test]
    fn shear_flow_differential() {
        // φ_t(x) = (x1, x2 + t sin x1), Dφ = [[1, 0], [t cos x1, 1]]
        let v = VectorFieldDef::parse(&["0", "sin(x1)"]).unwrap();
        let f = FlowMap::new(&v, 0.5, 0.01);
        let (x, j) = flow_with_differential(&f, &torus(), &[0.4, 1.0], true).unwrap();
        let j = j.unwrap();
        assert!((x[1] - (1.0 + 0.5 * 0.4f64.sin())).abs() < 1e-14);
        assert!((j[2] - 0.5 * 0.4f64.cos()).abs() < 1e-14);
        assert_eq!((j[0], j[1], j[3]), (1.0, 0.0, 1.0));
    }

    #[test]
    fn translations_of_flat_torus_are_affine() {
        let m = MetricSpec::euclidean(2);
        let v = VectorFieldDef::constant(&[0.5, 0.25]);
        let f = FlowMap::new(&v, 1.0, 0.01);
        let p = FiberPoint::new(vec![0.0, 1.0], vec![0.3, 0.9]).unwrap();
        assert!(affine_transformation_defect(&m, &torus(), &f, &p, 1.0, 200).unwrap() < 1e-10);
    }

    #[test]
    fn shear_is_not_affine() {
        let m = MetricSpec::euclidean(2);
        let v = VectorFieldDef::parse(&["0", "sin(x1)"]).unwrap();
        let f = FlowMap::new(&v, 0.5, 0.01);
        let p = FiberPoint::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let d = affine_transformation_defect(&m, &torus(), &f, &p, 1.0, 200).unwrap();
        // |d/ds (1, t cos s)| = t |sin s|, largest near s = 1
        assert!((d - 0.5 * (1.0f64 - 0.01).sin()).abs() < 1e-6, "defect {d}");
    }
}
