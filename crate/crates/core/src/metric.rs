//! Finsler metric families on a single chart, the fundamental tensor, and
//! Minkowski-norm validation.

use rand::Rng;

use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::jet::{lift, Dual};
use crate::linalg::Matrix;
use crate::sampling::Sampler;
use crate::scalar::{Real, Scalar};

/// One coordinate axis of a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis<T> {
    /// Coordinate identified modulo `period`; nodes live in `[0, period)`.
    Periodic { period: T },
    /// Open interval; bounds may be infinite.
    Open { lo: T, hi: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain<T> {
    axes: Vec<Axis<T>>,
}

impl<T: Real> ChartDomain<T> {
    pub fn new(axes: Vec<Axis<T>>) -> Result<Self> {
        if axes.len() < 2 {
            return Err(GeometryError::InvalidInput(format!("dimension must be at least 2, got {}", axes.len())));
        }
        for (k, a) in axes.iter().enumerate() {
            match *a {
                Axis::Periodic { period } if !(period > T::zero()) || !period.is_finite() => {
                    return Err(GeometryError::InvalidInput(format!("axis {k}: period must be positive")));
                }
                Axis::Open { lo, hi } if !(lo < hi) => {
                    return Err(GeometryError::InvalidInput(format!("axis {k}: empty interval")));
                }
                _ => {}
            }
        }
        Ok(ChartDomain { axes })
    }

    /// The flat n-torus with the given period on every axis.
    pub fn torus(dim: usize, period: T) -> Result<Self> {
        Self::new(vec![Axis::Periodic { period }; dim])
    }

    /// `(−∞, ∞)ⁿ`.
    pub fn plane(dim: usize) -> Result<Self> {
        Self::new(vec![Axis::Open { lo: T::lit(f64::NEG_INFINITY), hi: T::lit(f64::INFINITY) }; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn is_torus(&self) -> bool {
        self.axes.iter().all(|a| matches!(a, Axis::Periodic { .. }))
    }

    /// Reduces periodic coordinates into `[0, period)` and rejects points
    /// outside open axes.
    pub fn wrap(&self, x: &mut [T]) -> Result<()> {
        for (k, (xi, axis)) in x.iter_mut().zip(&self.axes).enumerate() {
            match *axis {
                Axis::Periodic { period } => {
                    *xi -= period * (*xi / period).floor();
                }
                Axis::Open { lo, hi } => {
                    if !(*xi > lo && *xi < hi) {
                        return Err(GeometryError::LeftChart { axis: k, value: xi.to_f64_lossy() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Finite sampling interval of an axis. Infinite open bounds are
    /// replaced by `[-1, 1]` on that side.
    pub fn sample_interval(&self, k: usize) -> (T, T) {
        match self.axes[k] {
            Axis::Periodic { period } => (T::zero(), period),
            Axis::Open { lo, hi } => {
                let lo = if lo.is_finite() { lo } else { -T::one() };
                let hi = if hi.is_finite() { hi } else { T::one() };
                (lo, hi)
            }
        }
    }
}

/// A point of the punctured tangent bundle: base point `x`, direction `y ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> FiberPoint<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(GeometryError::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        if y.iter().all(|v| *v == T::zero()) {
            return Err(GeometryError::ZeroVector);
        }
        Ok(FiberPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The same base point with `y` scaled by `lambda > 0`.
    pub fn scaled(&self, lambda: T) -> Self {
        FiberPoint { x: self.x.clone(), y: self.y.iter().map(|&v| v * lambda).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricFamily<T> {
    /// `F = sqrt(yᵀ A y)` with a constant positive-definite `A`.
    EuclideanQuadratic { matrix: Matrix<T> },
    /// `F = sqrt(a_ij(x) yⁱ yʲ)`; entries stored row-major.
    Riemannian { a: Vec<Expr<T>> },
    /// `F = sqrt(a_ij(x) yⁱ yʲ) + b_i(x) yⁱ`.
    Randers { a: Vec<Expr<T>>, b: Vec<Expr<T>> },
    /// Any positively 1-homogeneous expression in `(x, y)`.
    CustomAnalytic { norm: Expr<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec<T> {
    dim: usize,
    family: MetricFamily<T>,
}

impl<T: Real> MetricSpec<T> {
    pub fn new(dim: usize, family: MetricFamily<T>) -> Result<Self> {
        let check_x = |e: &Expr<T>, what: &str| -> Result<()> {
            if e.max_x_index() > dim {
                return Err(GeometryError::InvalidInput(format!("{what} references x{} beyond dimension {dim}", e.max_x_index())));
            }
            if e.max_y_index() > 0 {
                return Err(GeometryError::InvalidInput(format!("{what} must not depend on y")));
            }
            Ok(())
        };
        match &family {
            MetricFamily::EuclideanQuadratic { matrix } => {
                if matrix.dim() != dim {
                    return Err(GeometryError::DimensionMismatch { expected: dim, got: matrix.dim() });
                }
                if matrix.asymmetry() > T::zero() {
                    return Err(GeometryError::InvalidInput("matrix must be symmetric".into()));
                }
            }
            MetricFamily::Riemannian { a } => {
                if a.len() != dim * dim {
                    return Err(GeometryError::DimensionMismatch { expected: dim * dim, got: a.len() });
                }
                for e in a {
                    check_x(e, "metric coefficient")?;
                }
            }
            MetricFamily::Randers { a, b } => {
                if a.len() != dim * dim {
                    return Err(GeometryError::DimensionMismatch { expected: dim * dim, got: a.len() });
                }
                if b.len() != dim {
                    return Err(GeometryError::DimensionMismatch { expected: dim, got: b.len() });
                }
                for e in a.iter().chain(b) {
                    check_x(e, "Randers coefficient")?;
                }
            }
            MetricFamily::CustomAnalytic { norm } => {
                if norm.max_x_index() > dim || norm.max_y_index() > dim {
                    return Err(GeometryError::InvalidInput(format!("norm expression references variables beyond dimension {dim}")));
                }
            }
        }
        Ok(MetricSpec { dim, family })
    }

    /// Standard Euclidean metric `F = |y|`.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, MetricFamily::EuclideanQuadratic { matrix: Matrix::identity(dim) }).expect("identity is valid")
    }

    /// Riemannian metric from row-major coefficient expressions `a_ij(x)`.
    pub fn riemannian(dim: usize, a: Vec<Expr<T>>) -> Result<Self> {
        Self::new(dim, MetricFamily::Riemannian { a })
    }

    /// Round unit sphere in stereographic coordinates:
    /// `a_ij = 4 δ_ij / (1 + |x|²)²`.
    pub fn round_sphere_chart(dim: usize) -> Self {
        let r2 = (1..=dim).map(|k| format!("x{k}^2")).collect::<Vec<_>>().join(" + ");
        let diag = Expr::parse(&format!("4 / (1 + {r2})^2")).expect("valid expression");
        let a = (0..dim * dim)
            .map(|k| if k / dim == k % dim { diag.clone() } else { Expr::constant(T::zero()) })
            .collect();
        Self::new(dim, MetricFamily::Riemannian { a }).expect("valid sphere chart")
    }

    /// Randers metric `|y| + b_i(x) yⁱ` over the Euclidean metric.
    pub fn randers_over_euclidean(b: Vec<Expr<T>>) -> Result<Self> {
        let dim = b.len();
        let a = (0..dim * dim)
            .map(|k| Expr::constant(if k / dim == k % dim { T::one() } else { T::zero() }))
            .collect();
        Self::new(dim, MetricFamily::Randers { a, b })
    }

    pub fn custom(dim: usize, norm: Expr<T>) -> Result<Self> {
        Self::new(dim, MetricFamily::CustomAnalytic { norm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &MetricFamily<T> {
        &self.family
    }

    /// `true` when `F` has no base-point dependence (locally Minkowski).
    pub fn is_constant_coefficient(&self) -> bool {
        match &self.family {
            MetricFamily::EuclideanQuadratic { .. } => true,
            MetricFamily::Riemannian { a } => a.iter().all(|e| e.max_x_index() == 0),
            MetricFamily::Randers { a, b } => a.iter().chain(b).all(|e| e.max_x_index() == 0),
            MetricFamily::CustomAnalytic { norm } => norm.max_x_index() == 0,
        }
    }

    /// `true` when `F(x, y)² ` is quadratic in `y`.
    pub fn is_riemannian(&self) -> bool {
        matches!(self.family, MetricFamily::EuclideanQuadratic { .. } | MetricFamily::Riemannian { .. })
    }

    fn quadratic_form<S: Scalar<Base = T>>(&self, a: &[Expr<T>], x: &[S], y: &[S]) -> S {
        let n = self.dim;
        let mut q = S::zero();
        for i in 0..n {
            for j in 0..n {
                let c = &a[i * n + j];
                if let Some(v) = c.as_constant() {
                    if v != T::zero() {
                        q += (y[i] * y[j]).scale(v);
                    }
                } else {
                    q += c.eval_x(x) * y[i] * y[j];
                }
            }
        }
        q
    }

    /// `F(x, y)` at any scalar type.
    pub fn norm<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        match &self.family {
            MetricFamily::CustomAnalytic { norm } => norm.eval(x, y),
            MetricFamily::Randers { a, b } => {
                let beta = b.iter().zip(y).fold(S::zero(), |acc, (bi, &yi)| acc + bi.eval_x(x) * yi);
                self.quadratic_form(a, x, y).sqrt() + beta
            }
            _ => self.norm_sq(x, y).sqrt(),
        }
    }

    /// `F(x, y)²` at any scalar type; avoids the square root for quadratic families.
    pub fn norm_sq<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        match &self.family {
            MetricFamily::EuclideanQuadratic { matrix } => {
                let n = self.dim;
                let mut q = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        q += (y[i] * y[j]).scale(matrix[(i, j)]);
                    }
                }
                q
            }
            MetricFamily::Riemannian { a } => self.quadratic_form(a, x, y),
            _ => {
                let f = self.norm(x, y);
                f * f
            }
        }
    }

    /// Evaluates the coefficient matrix `a_ij(x)` of the quadratic part, if any.
    pub fn riemannian_part(&self, x: &[T]) -> Option<Matrix<T>> {
        let n = self.dim;
        match &self.family {
            MetricFamily::EuclideanQuadratic { matrix } => Some(matrix.clone()),
            MetricFamily::Riemannian { a } | MetricFamily::Randers { a, .. } => {
                Some(Matrix::from_fn(n, |i, j| a[i * n + j].eval_x(x)))
            }
            MetricFamily::CustomAnalytic { .. } => None,
        }
    }

    /// Randers one-form `b_i(x)`, if this is a Randers metric.
    pub fn randers_form(&self, x: &[T]) -> Option<Vec<T>> {
        match &self.family {
            MetricFamily::Randers { b, .. } => Some(b.iter().map(|e| e.eval_x(x)).collect()),
            _ => None,
        }
    }
}

/// `F(x, y)`; rejects `y = 0` and non-positive values.
pub fn eval_f<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<T> {
    check_dim(metric, p)?;
    let f = metric.norm(&p.x, &p.y);
    if !(f > T::zero()) {
        return Err(GeometryError::NonPositiveNorm { value: f.to_f64_lossy() });
    }
    Ok(f)
}

pub(crate) fn check_dim<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<()> {
    if p.dim() != metric.dim() {
        return Err(GeometryError::DimensionMismatch { expected: metric.dim(), got: p.dim() });
    }
    Ok(())
}

/// `g_ij = ½ ∂²F²/∂yⁱ∂yʲ` at any scalar type (no definiteness check).
pub fn fundamental_tensor_at<S: Scalar>(metric: &MetricSpec<S::Base>, x: &[S], y: &[S]) -> Matrix<S> {
    let n = metric.dim();
    let xx: Vec<Dual<Dual<S>>> = lift(&lift(x));
    let mut g = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            // outer infinitesimal along y^i, inner along y^j
            let yy: Vec<Dual<Dual<S>>> = (0..n)
                .map(|m| {
                    let inner = Dual::new(y[m], if m == j { S::one() } else { S::zero() });
                    Dual::new(inner, Dual::constant(if m == i { S::one() } else { S::zero() }))
                })
                .collect();
            let h = metric.norm_sq(&xx, &yy).eps.eps.scale(S::Base::lit(0.5));
            g[(i, j)] = h;
            g[(j, i)] = h;
        }
    }
    g
}

/// The fundamental tensor with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor<T> {
    pub g: Matrix<T>,
    pub g_inv: Matrix<T>,
}

pub fn fundamental_tensor<T: Real>(metric: &MetricSpec<T>, p: &FiberPoint<T>) -> Result<FundamentalTensor<T>> {
    check_dim(metric, p)?;
    let g = fundamental_tensor_at(metric, &p.x, &p.y);
    if !g.is_positive_definite() {
        return Err(GeometryError::NotPositiveDefinite);
    }
    let g_inv = g.inverse().map_err(|_| GeometryError::NotPositiveDefinite)?;
    Ok(FundamentalTensor { g, g_inv })
}

/// Worst observed violations of the Minkowski-norm axioms on random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T> {
    pub samples: usize,
    /// max |F(x, λy) − λF(x, y)| / (λF) over λ ∈ {0.5, 2, 7}
    pub homogeneity_error: T,
    /// max |g_ij yⁱ yʲ − F²| / F²
    pub euler_error: T,
    /// max |g(x, λy) − g(x, y)| / |g| over λ ∈ {0.5, 2}
    pub tensor_homogeneity_error: T,
    pub positivity_failures: usize,
    pub definiteness_failures: usize,
    pub min_norm: T,
    /// Sample attaining the worst relative error among the three above.
    pub worst_point: Option<FiberPoint<T>>,
    pub first_failure: Option<FiberPoint<T>>,
}

impl<T: Real> ValidationReport<T> {
    pub fn worst_error(&self) -> T {
        self.homogeneity_error.max(self.euler_error).max(self.tensor_homogeneity_error)
    }

    pub fn passed(&self, tolerance: T) -> bool {
        self.positivity_failures == 0 && self.definiteness_failures == 0 && self.worst_error() <= tolerance
    }
}

pub const HOMOGENEITY_FACTORS: [f64; 3] = [0.5, 2.0, 7.0];

/// Checks homogeneity, the Euler relation, 0-homogeneity of `g`, positivity
/// of `F` and definiteness of `g` at `sample_count` seeded random fiber points.
pub fn validate_metric<T: Real>(
    metric: &MetricSpec<T>,
    domain: &ChartDomain<T>,
    sample_count: usize,
    seed: u64,
) -> Result<ValidationReport<T>> {
    if sample_count == 0 {
        return Err(GeometryError::InvalidInput("sample_count must be at least 1".into()));
    }
    if domain.dim() != metric.dim() {
        return Err(GeometryError::DimensionMismatch { expected: metric.dim(), got: domain.dim() });
    }
    let mut sampler = Sampler::new(domain, seed);
    let mut report = ValidationReport {
        samples: sample_count,
        homogeneity_error: T::zero(),
        euler_error: T::zero(),
        tensor_homogeneity_error: T::zero(),
        positivity_failures: 0,
        definiteness_failures: 0,
        min_norm: T::lit(f64::INFINITY),
        worst_point: None,
        first_failure: None,
    };
    let mut worst = T::zero();
    for _ in 0..sample_count {
        let p = sampler.fiber_point();
        let f = metric.norm(&p.x, &p.y);
        report.min_norm = report.min_norm.min(f);
        if !(f > T::zero()) {
            report.positivity_failures += 1;
            report.first_failure.get_or_insert_with(|| p.clone());
            continue;
        }
        let mut local = T::zero();
        for lambda in HOMOGENEITY_FACTORS.map(T::lit) {
            let fl = metric.norm(&p.x, &p.scaled(lambda).y);
            let e = (fl - lambda * f).abs() / (lambda * f);
            report.homogeneity_error = report.homogeneity_error.max(e);
            local = local.max(e);
        }
        let g = fundamental_tensor_at(metric, &p.x, &p.y);
        if !g.is_positive_definite() {
            report.definiteness_failures += 1;
            report.first_failure.get_or_insert_with(|| p.clone());
        }
        let euler = ((g.bilinear(&p.y, &p.y) - f * f) / (f * f)).abs();
        report.euler_error = report.euler_error.max(euler);
        local = local.max(euler);
        let gscale = g.max_abs();
        for lambda in [0.5, 2.0].map(T::lit) {
            let gl = fundamental_tensor_at(metric, &p.x, &p.scaled(lambda).y);
            let mut d = T::zero();
            for i in 0..metric.dim() {
                for j in 0..metric.dim() {
                    d = d.max((gl[(i, j)] - g[(i, j)]).abs());
                }
            }
            let e = d / gscale;
            report.tensor_homogeneity_error = report.tensor_homogeneity_error.max(e);
            local = local.max(e);
        }
        if local >= worst {
            worst = local;
            report.worst_point = Some(p);
        }
    }
    Ok(report)
}

/// Draws a random direction uniformly on the Euclidean unit sphere.
pub(crate) fn random_direction<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|a| a * a).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|a| T::lit(a / r)).collect();
        }
    }
}
