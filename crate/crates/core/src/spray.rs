//! Spray coefficients, nonlinear connection, Berwald coefficients, Riemann
//! curvature and dynamical derivatives.
//!
//! Index conventions: `N[(i, j)] = Nⁱ_j = ∂Gⁱ/∂yʲ`,
//! `berwald[i][(j, k)] = Γⁱ_jk = ∂²Gⁱ/∂yʲ∂yᵏ` and `R[(j, i)] = Rʲ_i`, so that
//! `R_y(V)ʲ = Σ_i R[(j, i)] Vⁱ`.
//!
//! Every routine with an `_at` suffix is generic over the scalar type so it
//! can itself be differentiated by seeding a higher jet level.

use crate::error::{GeometryError, Result};
use crate::field::{FiberFunction, VectorFieldDef};
use crate::jet::{lift, seed, seed_along, tangents, values, Dual};
use crate::linalg::Matrix;
use crate::metric::{eval_f, fundamental_tensor, fundamental_tensor_at, FiberPoint, MetricSpec};
use crate::scalar::{Real, Scalar};

fn inverse_or_nan<S: Scalar>(g: &Matrix<S>) -> Matrix<S> {
    g.inverse().unwrap_or_else(|_| Matrix::from_fn(g.dim(), |_, _| S::lit(f64::NAN)))
}

/// `Gⁱ = ¼ gⁱˡ ([g_jl]_{xᵏ} + [g_lk]_{xʲ} − [g_jk]_{xˡ}) yʲ yᵏ`.
pub fn spray_at<S: Scalar>(metric: &MetricSpec<S::Base>, x: &[S], y: &[S]) -> Vec<S> {
    let n = metric.dim();
    let yl = lift(y);
    let mut g = Matrix::zeros(n);
    // dg[k][(j, l)] = ∂g_jl/∂xᵏ
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let gk = fundamental_tensor_at(metric, &seed(x, k), &yl);
        if k == 0 {
            g = gk.map(|d| d.re);
        }
        dg.push(gk.map(|d| d.eps));
    }
    let mut t = vec![S::zero(); n];
    for (l, tl) in t.iter_mut().enumerate() {
        for j in 0..n {
            for k in 0..n {
                let c = dg[k][(j, l)] + dg[j][(l, k)] - dg[l][(j, k)];
                *tl += c * y[j] * y[k];
            }
        }
    }
    inverse_or_nan(&g)
        .mul_vec(&t)
        .into_iter()
        .map(|v| v.scale(S::Base::lit(0.25)))
        .collect()
}

/// Spray coefficients together with `Nⁱ_j = ∂Gⁱ/∂yʲ`.
pub fn connection_at<S: Scalar>(metric: &MetricSpec<S::Base>, x: &[S], y: &[S]) -> (Vec<S>, Matrix<S>) {
    let n = metric.dim();
    let xl = lift(x);
    let mut spray = Vec::new();
    let mut conn = Matrix::zeros(n);
    for j in 0..n {
        let sp: Vec<Dual<S>> = spray_at(metric, &xl, &seed(y, j));
        if j == 0 {
            spray = values(&sp);
        }
        for (i, d) in sp.iter().enumerate() {
            conn[(i, j)] = d.eps;
        }
    }
    (spray, conn)
}

/// Components `(yⁱ, −2Gⁱ)` of the spray vector field on `TM₀`.
pub fn spray_vector<S: Scalar>(y: &[S], spray: &[S]) -> Vec<S> {
    y.iter().copied().chain(spray.iter().map(|&g| -(g + g))).collect()
}

/// Derivative along the spray `G = yⁱ∂/∂xⁱ − 2Gⁱ∂/∂yⁱ` of anything computed
/// by `f` from `(x, y)`: `f` is evaluated once, one jet level up.
fn along_spray<T: Real, R>(x: &[T], y: &[T], spray: &[T], f: impl FnOnce(&[Dual<T>], &[Dual<T>]) -> R) -> R {
    let dy: Vec<T> = spray.iter().map(|&g| -(g + g)).collect();
    f(&seed_along(x, y), &seed_along(y, &dy))
}

/// Validates the fiber point: dimension, `F > 0`, `g` positive definite.
pub(crate) fn admissible<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<T> {
    let f = eval_f(metric, p)?;
    fundamental_tensor(metric, p)?;
    Ok(f)
}

pub fn spray_coefficients<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<Vec<T>> {
    admissible(metric, p)?;
    Ok(spray_at(metric, &p.x, &p.y))
}

pub fn connection_coefficients<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<Matrix<T>> {
    admissible(metric, p)?;
    Ok(connection_at(metric, &p.x, &p.y).1)
}

/// `Γⁱ_jk = ∂²Gⁱ/∂yʲ∂yᵏ`, returned as one matrix `(j, k)` per upper index `i`.
pub fn berwald_coefficients<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<Vec<Matrix<T>>> {
    admissible(metric, p)?;
    Ok(berwald_at(metric, &p.x, &p.y))
}

fn berwald_at<T: Real>(metric: &MetricSpec<T>, x: &[T], y: &[T]) -> Vec<Matrix<T>> {
    let n = metric.dim();
    let mut gamma = vec![Matrix::zeros(n); n];
    let xl = lift(x);
    for k in 0..n {
        let (_, dn) = connection_at(metric, &xl, &seed(y, k));
        for (i, gi) in gamma.iter_mut().enumerate() {
            for j in 0..n {
                gi[(j, k)] = dn[(i, j)].eps;
            }
        }
    }
    gamma
}

/// `Rʲ_i = 2[Gʲ]_{xⁱ} − G(Nʲ_i) − Nʲ_k Nᵏ_i`.
pub(crate) fn riemann_at<T: Real>(metric: &MetricSpec<T>, x: &[T], y: &[T]) -> (Vec<T>, Matrix<T>, Matrix<T>) {
    let n = metric.dim();
    let (spray, conn) = connection_at(metric, x, y);
    let yl = lift(y);
    let mut dgx = Matrix::zeros(n);
    for i in 0..n {
        let sp = spray_at(metric, &seed(x, i), &yl);
        for (j, d) in sp.iter().enumerate() {
            dgx[(j, i)] = d.eps;
        }
    }
    let (_, conn_d) = along_spray(x, y, &spray, |xd, yd| connection_at(metric, xd, yd));
    let nn = conn.matmul(&conn);
    let r = Matrix::from_fn(n, |j, i| {
        let two = T::lit(2.0);
        two * dgx[(j, i)] - conn_d[(j, i)].eps - nn[(j, i)]
    });
    (spray, conn, r)
}

pub fn riemann_curvature<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<Matrix<T>> {
    admissible(metric, p)?;
    Ok(riemann_at(metric, &p.x, &p.y).2)
}

/// Every pointwise tensor at one fiber point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle<T> {
    pub f: T,
    pub g: Matrix<T>,
    pub g_inv: Matrix<T>,
    pub spray: Vec<T>,
    pub connection: Matrix<T>,
    pub berwald: Vec<Matrix<T>>,
    pub riemann: Matrix<T>,
}

pub fn curvature_bundle<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<CurvatureBundle<T>> {
    let f = eval_f(metric, p)?;
    let ft = fundamental_tensor(metric, p)?;
    let (spray, connection, riemann) = riemann_at(metric, &p.x, &p.y);
    Ok(CurvatureBundle {
        f,
        g: ft.g,
        g_inv: ft.g_inv,
        spray,
        connection,
        berwald: berwald_at(metric, &p.x, &p.y),
        riemann,
    })
}

impl<T: Real> CurvatureBundle<T> {
    /// `|Rⁱ_k yᵏ|_∞ / F²`.
    pub fn radial_defect(&self, y: &[T]) -> T {
        let ry = self.riemann.mul_vec(y);
        crate::linalg::max_abs(&ry) / (self.f * self.f)
    }

    /// Asymmetry of `g_il Rˡ_k`, relative to `F² |g|`.
    pub fn self_adjointness_defect(&self) -> T {
        self.g.matmul(&self.riemann).asymmetry() / (self.f * self.f * self.g.max_abs())
    }
}

/// `f_{|0} = G(f) = yⁱ ∂f/∂xⁱ − 2Gⁱ ∂f/∂yⁱ`.
pub fn dynamical_derivative_scalar<T: Real, F: FiberFunction<T>>(
    metric: &MetricSpec<T>,
    f: &F,
    p: &FiberPoint<T>,
) -> Result<T> {
    admissible(metric, p)?;
    Ok(dynamical_derivative_scalar_at(metric, f, &p.x, &p.y))
}

pub(crate) fn dynamical_derivative_scalar_at<T: Real, F: FiberFunction<T>>(
    metric: &MetricSpec<T>,
    f: &F,
    x: &[T],
    y: &[T],
) -> T {
    let spray = spray_at(metric, x, y);
    along_spray(x, y, &spray, |xd, yd| f.eval(xd, yd)).eps
}

/// `ḟ = ξ(f) = G(f)/F`, the derivative along the unit-speed geodesic flow.
pub fn dot_derivative_scalar<T: Real, F: FiberFunction<T>>(
    metric: &MetricSpec<T>,
    f: &F,
    p: &FiberPoint<T>,
) -> Result<T> {
    let norm = admissible(metric, p)?;
    Ok(dynamical_derivative_scalar_at(metric, f, &p.x, &p.y) / norm)
}

/// `Vⁱ_{|0} = yʲ ∂Vⁱ/∂xʲ + Vᵏ Nⁱ_k`.
pub fn covariant_section_derivative_at<S: Scalar>(
    metric: &MetricSpec<S::Base>,
    field: &VectorFieldDef<S::Base>,
    x: &[S],
    y: &[S],
) -> Vec<S> {
    let (_, conn) = connection_at(metric, x, y);
    let v = field.eval(x);
    let dv = field.directional(x, y);
    let nv = conn.mul_vec(&v);
    dv.into_iter().zip(nv).map(|(a, b)| a + b).collect()
}

pub fn covariant_section_derivative<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    p: &FiberPoint<T>,
) -> Result<Vec<T>> {
    admissible(metric, p)?;
    check_field(metric, field)?;
    Ok(covariant_section_derivative_at(metric, field, &p.x, &p.y))
}

pub(crate) fn check_field<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>) -> Result<()> {
    if field.dim() != metric.dim() {
        return Err(GeometryError::DimensionMismatch { expected: metric.dim(), got: field.dim() });
    }
    Ok(())
}

/// First and second dynamical derivatives of a base field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionDerivatives<T> {
    pub spray: Vec<T>,
    pub connection: Matrix<T>,
    /// `V_{|0}`
    pub first: Vec<T>,
    /// `V_{|0|0}`
    pub second: Vec<T>,
}

/// `Wⁱ_{|0} = G(Wⁱ) + Wᵏ Nⁱ_k` applied to `W = V_{|0}`.
pub(crate) fn section_derivatives_at<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    x: &[T],
    y: &[T],
) -> SectionDerivatives<T> {
    let (spray, conn) = connection_at(metric, x, y);
    let wd = along_spray(x, y, &spray, |xd, yd| covariant_section_derivative_at(metric, field, xd, yd));
    let first = values(&wd);
    let nw = conn.mul_vec(&first);
    let second = tangents(&wd).into_iter().zip(nw).map(|(a, b)| a + b).collect();
    SectionDerivatives { spray, connection: conn, first, second }
}

pub fn second_dynamical_derivative<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    p: &FiberPoint<T>,
) -> Result<Vec<T>> {
    admissible(metric, p)?;
    check_field(metric, field)?;
    Ok(section_derivatives_at(metric, field, &p.x, &p.y).second)
}

/// `g_{ij|0} = G(g_ij) − g_kj Nᵏ_i − g_ik Nᵏ_j`, which vanishes identically.
pub fn metric_compatibility_check<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<Matrix<T>> {
    admissible(metric, p)?;
    let (spray, conn) = connection_at(metric, &p.x, &p.y);
    let gd = along_spray(&p.x, &p.y, &spray, |xd, yd| fundamental_tensor_at(metric, xd, yd));
    let g = gd.map(|d| d.re);
    let n = metric.dim();
    Ok(Matrix::from_fn(n, |i, j| {
        let mut v = gd[(i, j)].eps;
        for k in 0..n {
            v -= g[(k, j)] * conn[(k, i)] + g[(i, k)] * conn[(k, j)];
        }
        v
    }))
}
