//! Vector fields on `TM₀` in the coordinate frame `(∂/∂x, ∂/∂y)` and their
//! Lie brackets, computed from full coordinate Jacobians.
//!
//! This is deliberately a second route to the curvature: it never calls the
//! closed formulas of [`crate::spray`] for `R` or `V_{|0|0}`, only the spray
//! and connection coefficients themselves.

use crate::error::Result;
use crate::field::VectorFieldDef;
use crate::jet::{lift, Dual};
use crate::metric::{FiberPoint, MetricSpec};
use crate::scalar::{Real, Scalar};
use crate::spray::{connection_at, curvature_bundle, spray_at, spray_vector};

/// A vector field on `TM₀`; `eval` returns `2n` coordinate components
/// (the `∂/∂x` part first).
pub trait TangentField<T: Real>: Sync {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> Vec<S>;
}

/// `G = yⁱ ∂/∂xⁱ − 2Gⁱ ∂/∂yⁱ`.
pub struct SprayField<'a, T>(pub &'a MetricSpec<T>);

impl<T: Real> TangentField<T> for SprayField<'_, T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> Vec<S> {
        spray_vector(y, &spray_at(self.0, x, y))
    }
}

/// `δ/δxⁱ = ∂/∂xⁱ − Nʲ_i ∂/∂yʲ`.
pub struct HorizontalBasis<'a, T> {
    pub metric: &'a MetricSpec<T>,
    pub index: usize,
}

impl<T: Real> TangentField<T> for HorizontalBasis<'_, T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let n = self.metric.dim();
        let (_, conn) = connection_at(self.metric, x, y);
        let mut v = vec![S::zero(); 2 * n];
        v[self.index] = S::one();
        for j in 0..n {
            v[n + j] = -conn[(j, self.index)];
        }
        v
    }
}

/// `∂/∂yⁱ`.
pub struct VerticalBasis {
    pub dim: usize,
    pub index: usize,
}

impl<T: Real> TangentField<T> for VerticalBasis {
    fn eval<S: Scalar<Base = T>>(&self, _x: &[S], _y: &[S]) -> Vec<S> {
        let mut v = vec![S::zero(); 2 * self.dim];
        v[self.dim + self.index] = S::one();
        v
    }
}

/// Complete lift `V̂ = Vⁱ ∂/∂xⁱ + yʲ ∂Vⁱ/∂xʲ ∂/∂yⁱ` in coordinate form.
pub struct CompleteLiftField<'a, T>(pub &'a VectorFieldDef<T>);

impl<T: Real> TangentField<T> for CompleteLiftField<'_, T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut v = self.0.eval(x);
        v.extend(self.0.directional(x, y));
        v
    }
}

/// Value and coordinate Jacobian `jac[a][b] = ∂Xᵃ/∂zᵇ`, `z = (x, y)`.
pub fn jacobian<T: Real, X: TangentField<T>>(field: &X, x: &[T], y: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = x.len();
    let mut jac = vec![vec![T::zero(); 2 * n]; 2 * n];
    let mut value = Vec::new();
    for b in 0..2 * n {
        let mut xs: Vec<Dual<T>> = lift(x);
        let mut ys: Vec<Dual<T>> = lift(y);
        if b < n {
            xs[b].eps = T::one();
        } else {
            ys[b - n].eps = T::one();
        }
        let out = field.eval(&xs, &ys);
        if b == 0 {
            value = out.iter().map(|d| d.re).collect();
        }
        for (a, d) in out.iter().enumerate() {
            jac[a][b] = d.eps;
        }
    }
    (value, jac)
}

/// Coordinate components of `[A, B] = A(B) − B(A)`.
pub fn lie_bracket<T: Real, A: TangentField<T>, B: TangentField<T>>(a: &A, b: &B, x: &[T], y: &[T]) -> Vec<T> {
    let (va, ja) = jacobian(a, x, y);
    let (vb, jb) = jacobian(b, x, y);
    (0..va.len())
        .map(|c| {
            (0..va.len()).fold(T::zero(), |acc, d| acc + va[d] * jb[c][d] - vb[d] * ja[c][d])
        })
        .collect()
}

/// Components in the adapted frame `(δ/δxⁱ, ∂/∂yⁱ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedComponents<T> {
    pub horizontal: Vec<T>,
    pub vertical: Vec<T>,
}

/// Converts coordinate components `(h, v)` to the adapted frame:
/// `hⁱ ∂/∂xⁱ + vⁱ ∂/∂yⁱ = hⁱ δ/δxⁱ + (vʲ + Nʲ_i hⁱ) ∂/∂yʲ`.
pub fn to_adapted_frame<T: Real>(metric: &MetricSpec<T>, x: &[T], y: &[T], coords: &[T]) -> AdaptedComponents<T> {
    let n = metric.dim();
    let (_, conn) = connection_at(metric, x, y);
    let horizontal = coords[..n].to_vec();
    let nh = conn.mul_vec(&horizontal);
    let vertical = coords[n..].iter().zip(nh).map(|(&v, w)| v + w).collect();
    AdaptedComponents { horizontal, vertical }
}

/// Worst componentwise defects of the bracket identities
/// `[G, ∂/∂yⁱ] = −δ/δxⁱ + Nʲ_i ∂/∂yʲ` and `[G, δ/δxⁱ] = Rʲ_i ∂/∂yʲ + Nʲ_i δ/δxʲ`,
/// each normalized by the natural power of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketIdentityDefects<T> {
    /// `[G, ∂/∂yⁱ]`, horizontal part vs `−δⁱ` (absolute).
    pub vertical_horizontal: T,
    /// `[G, ∂/∂yⁱ]`, vertical part vs `N·_i`, divided by `F`.
    pub vertical_vertical: T,
    /// `[G, δ/δxⁱ]`, horizontal part vs `N·_i`, divided by `F`.
    pub horizontal_horizontal: T,
    /// `[G, δ/δxⁱ]`, vertical part vs `R·_i`, divided by `F²`.
    pub horizontal_vertical: T,
}

impl<T: Real> BracketIdentityDefects<T> {
    pub fn worst(&self) -> T {
        self.vertical_horizontal
            .max(self.vertical_vertical)
            .max(self.horizontal_horizontal)
            .max(self.horizontal_vertical)
    }
}

pub fn bracket_identity_defects<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<BracketIdentityDefects<T>> {
    let bundle = curvature_bundle(metric, p)?;
    let n = metric.dim();
    let (f, f2) = (bundle.f, bundle.f * bundle.f);
    let spray = SprayField(metric);
    let mut d = BracketIdentityDefects {
        vertical_horizontal: T::zero(),
        vertical_vertical: T::zero(),
        horizontal_horizontal: T::zero(),
        horizontal_vertical: T::zero(),
    };
    for i in 0..n {
        let b2 = lie_bracket(&spray, &VerticalBasis { dim: n, index: i }, &p.x, &p.y);
        let b2 = to_adapted_frame(metric, &p.x, &p.y, &b2);
        let b3 = lie_bracket(&spray, &HorizontalBasis { metric, index: i }, &p.x, &p.y);
        let b3 = to_adapted_frame(metric, &p.x, &p.y, &b3);
        for j in 0..n {
            let delta = if i == j { T::one() } else { T::zero() };
            let conn = bundle.connection[(j, i)];
            d.vertical_horizontal = d.vertical_horizontal.max((b2.horizontal[j] + delta).abs());
            d.vertical_vertical = d.vertical_vertical.max((b2.vertical[j] - conn).abs() / f);
            d.horizontal_horizontal = d.horizontal_horizontal.max((b3.horizontal[j] - conn).abs() / f);
            d.horizontal_vertical = d.horizontal_vertical.max((b3.vertical[j] - bundle.riemann[(j, i)]).abs() / f2);
        }
    }
    Ok(d)
}
