//! The unit sphere bundle `SM = {F = 1}`: Hilbert form `ω = F_{yⁱ} dxⁱ`,
//! Reeb field `ξ`, contact volume `dν = c_n ω∧(dω)^{n−1}`, and periodic
//! trapezoidal quadrature over `SM` of a 2-torus.
//!
//! Chart on `SM`: `(x, θ) ↦ (x, u(θ)/F(x, u(θ)))` with `u(θ)` the standard
//! hyperspherical parametrization of the Euclidean unit sphere. Pointwise
//! quantities work in any dimension; [`SMGrid`] requires `n = 2`.

use rayon::prelude::*;

use crate::error::{GeometryError, Result};
use crate::field::{FiberFunction, VectorFieldDef};
use crate::jet::{lift, seed, Dual};
use crate::linalg::{max_abs, Matrix};
use crate::metric::{fundamental_tensor_at, Axis, ChartDomain, MetricSpec};
use crate::scalar::{Real, Scalar};
use crate::spray::{covariant_section_derivative_at, dynamical_derivative_scalar_at, riemann_at, section_derivatives_at, spray_at};

/// `c_n = (−1)^{n(n+1)/2 − 1} / (n − 1)!`.
pub fn contact_constant(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    let e = n * (n + 1) / 2 - 1;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    if e % 2 == 0 {
        1.0 / fact
    } else {
        -1.0 / fact
    }
}

/// `u(θ) = (cos θ₁, sin θ₁ cos θ₂, …, sin θ₁⋯sin θ_{n−1})`.
pub fn indicatrix_direction<S: Scalar>(theta: &[S]) -> Vec<S> {
    let mut u = Vec::with_capacity(theta.len() + 1);
    let mut prod = S::one();
    for &t in theta {
        u.push(prod * t.cos());
        prod *= t.sin();
    }
    u.push(prod);
    u
}

/// `u(θ)/F(x, u(θ))`.
fn chart_y<S: Scalar>(metric: &MetricSpec<S::Base>, x: &[S], theta: &[S]) -> Vec<S> {
    let u = indicatrix_direction(theta);
    let f = metric.norm(x, &u);
    u.into_iter().map(|v| v / f).collect()
}

/// `ω_b(x, θ) = F_{y^b}(x, u(θ))`, using 0-homogeneity of `F_y`.
fn omega_components<S: Scalar>(metric: &MetricSpec<S::Base>, x: &[S], theta: &[S]) -> Vec<S> {
    let u = indicatrix_direction(theta);
    let xl = lift(x);
    (0..u.len()).map(|b| metric.norm(&xl, &seed(&u, b)).eps).collect()
}

/// A point of `SM` in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SMChartPoint<T> {
    pub x: Vec<T>,
    pub theta: Vec<T>,
    /// The unit vector `u(θ)/F(x, u(θ))`.
    pub y: Vec<T>,
}

impl<T: Real> SMChartPoint<T> {
    pub fn new(metric: &MetricSpec<T>, x: Vec<T>, theta: Vec<T>) -> Result<Self> {
        let n = metric.dim();
        if x.len() != n || theta.len() + 1 != n {
            return Err(GeometryError::DimensionMismatch { expected: n, got: x.len() });
        }
        let f = metric.norm(&x, &indicatrix_direction(&theta));
        if !(f > T::zero()) {
            return Err(GeometryError::NonPositiveNorm { value: f.to_f64_lossy() });
        }
        let y = chart_y(metric, &x, &theta);
        Ok(SMChartPoint { x, theta, y })
    }

    fn chart(&self) -> Vec<T> {
        self.x.iter().chain(&self.theta).copied().collect()
    }
}

/// Hilbert form and Reeb field at one chart point. Chart components are in
/// the order `(x¹, …, xⁿ, θ¹, …, θ^{n−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertFormData<T> {
    /// `F_{yⁱ}`
    pub omega: Vec<T>,
    /// `g_ij yʲ / F`
    pub omega_metric: Vec<T>,
    pub omega_chart: Vec<T>,
    /// `dω = Σ_{a<b} η_ab dz^a∧dz^b`, full antisymmetric array.
    pub d_omega: Vec<Vec<T>>,
    pub xi: Vec<T>,
    /// Residual of the least-squares solve for the θ-components of `ξ`.
    pub tangency_defect: T,
    pub omega_of_xi: T,
    /// `dω(ξ, e_a)` for every chart basis vector.
    pub d_omega_of_xi: Vec<T>,
    /// Coefficient of `dx¹∧…∧dxⁿ∧dθ¹∧…∧dθ^{n−1}` in `c_n ω∧(dω)^{n−1}`.
    pub density: T,
}

impl<T: Real> HilbertFormData<T> {
    /// `max |F_y − g y/F|`.
    pub fn form_mismatch(&self) -> T {
        self.omega.iter().zip(&self.omega_metric).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Chart Jacobian `jac[a][b] = ∂v_b/∂z^a` of a chart-valued map.
fn chart_jacobian<T: Real>(z: &[T], n: usize, map: impl Fn(&[Dual<T>], &[Dual<T>]) -> Vec<Dual<T>>) -> Vec<Vec<T>> {
    (0..z.len())
        .map(|a| {
            let zd = seed(z, a);
            map(&zd[..n], &zd[n..]).iter().map(|d| d.eps).collect()
        })
        .collect()
}

pub fn hilbert_form<T: Real>(metric: &MetricSpec<T>, q: &SMChartPoint<T>) -> Result<HilbertFormData<T>> {
    let n = metric.dim();
    let m = 2 * n - 1;
    let (x, y) = (&q.x[..], &q.y[..]);
    let z = q.chart();
    let omega = omega_components(metric, x, &q.theta);
    let f = metric.norm(x, y);
    let g = fundamental_tensor_at(metric, x, y);
    let omega_metric: Vec<T> = g.mul_vec(y).into_iter().map(|v| v / f).collect();

    let mut omega_chart = omega.clone();
    omega_chart.resize(m, T::zero());
    let jw = chart_jacobian(&z, n, |xd, td| omega_components(metric, xd, td));
    let d_omega: Vec<Vec<T>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let dab = if b < n { jw[a][b] } else { T::zero() };
                    let dba = if a < n { jw[b][a] } else { T::zero() };
                    dab - dba
                })
                .collect()
        })
        .collect();

    // ξ = yⁱ ∂/∂xⁱ − 2Gⁱ ∂/∂yⁱ pulled back: x-part is y, θ-part solves
    // (∂y/∂θ) c = −2G − (∂y/∂x) y in the least-squares sense.
    let jy = chart_jacobian(&z, n, |xd, td| chart_y(metric, xd, td));
    let spray = spray_at(metric, x, y);
    let rhs: Vec<T> = (0..n)
        .map(|i| {
            let transport = (0..n).fold(T::zero(), |acc, k| acc + jy[k][i] * y[k]);
            -(spray[i] + spray[i]) - transport
        })
        .collect();
    let a = |i: usize, c: usize| jy[n + c][i];
    let normal = Matrix::from_fn(n - 1, |c, d| (0..n).fold(T::zero(), |acc, i| acc + a(i, c) * a(i, d)));
    let atb: Vec<T> = (0..n - 1).map(|c| (0..n).fold(T::zero(), |acc, i| acc + a(i, c) * rhs[i])).collect();
    let c_theta = normal
        .inverse()
        .map_err(|_| GeometryError::DegenerateDensity { value: 0.0 })?
        .mul_vec(&atb);
    let residual: Vec<T> = (0..n)
        .map(|i| (0..n - 1).fold(T::zero(), |acc, c| acc + a(i, c) * c_theta[c]) - rhs[i])
        .collect();
    let mut xi = y.to_vec();
    xi.extend(c_theta);

    let omega_of_xi = omega_chart.iter().zip(&xi).fold(T::zero(), |acc, (&w, &v)| acc + w * v);
    let d_omega_of_xi = (0..m).map(|e| (0..m).fold(T::zero(), |acc, b| acc + xi[b] * d_omega[b][e])).collect();
    let density = T::lit(contact_constant(n)) * top_coefficient(&omega_chart, &d_omega);
    Ok(HilbertFormData {
        omega,
        omega_metric,
        omega_chart,
        d_omega,
        xi,
        tangency_defect: max_abs(&residual),
        omega_of_xi,
        d_omega_of_xi,
        density,
    })
}

/// Coefficient of `dz¹∧…∧dz^m` in `ω∧(dω)^k`, `m = 2k + 1`:
/// `2^{−k} Σ_σ sgn σ · ω_{σ0} η_{σ1σ2} ⋯ η_{σ(m−2)σ(m−1)}`.
pub fn top_coefficient<T: Real>(omega: &[T], eta: &[Vec<T>]) -> T {
    fn walk<T: Real>(pos: usize, perm: &mut Vec<usize>, sign: T, omega: &[T], eta: &[Vec<T>], acc: &mut T) {
        let m = perm.len();
        if pos == m {
            let mut term = sign * omega[perm[0]];
            for p in (1..m).step_by(2) {
                term *= eta[perm[p]][perm[p + 1]];
            }
            *acc += term;
            return;
        }
        for i in pos..m {
            perm.swap(pos, i);
            let s = if i == pos { sign } else { -sign };
            walk(pos + 1, perm, s, omega, eta, acc);
            perm.swap(pos, i);
        }
    }
    let m = omega.len();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut acc = T::zero();
    walk(0, &mut perm, T::one(), omega, eta, &mut acc);
    acc / T::lit(2f64.powi(((m - 1) / 2) as i32))
}

/// `ρ_ν` at a chart point; `DegenerateDensity` below `1e-12` in magnitude.
pub fn volume_density<T: Real>(metric: &MetricSpec<T>, q: &SMChartPoint<T>) -> Result<T> {
    let rho = hilbert_form(metric, q)?.density;
    if !(rho.abs() >= T::lit(1e-12)) {
        return Err(GeometryError::DegenerateDensity { value: rho.to_f64_lossy() });
    }
    Ok(rho)
}

/// Sum in a fixed binary-tree order, independent of how the terms were
/// produced.
pub fn pairwise_sum<T: Real>(v: &[T]) -> T {
    if v.len() <= 8 {
        return v.iter().fold(T::zero(), |a, &b| a + b);
    }
    let (l, r) = v.split_at(v.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Tensor-product base nodes: uniform from 0 on periodic axes, cell
/// midpoints of the sampling interval on open axes. Last axis varies fastest.
pub fn base_grid<T: Real>(domain: &ChartDomain<T>, resolution: usize) -> Vec<Vec<T>> {
    let axes: Vec<Vec<T>> = (0..domain.dim())
        .map(|k| {
            let (lo, hi) = domain.sample_interval(k);
            let h = (hi - lo) / T::lit(resolution as f64);
            let offset = match domain.axes()[k] {
                Axis::Periodic { .. } => T::zero(),
                Axis::Open { .. } => T::lit(0.5),
            };
            (0..resolution).map(|i| lo + (T::lit(i as f64) + offset) * h).collect()
        })
        .collect();
    tensor_product(&axes)
}

fn tensor_product<T: Real>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Unit directions `u(θ)`: `resolution` uniform angles on the last
/// (azimuthal) angle, `resolution/2` midpoint angles on each polar angle.
pub fn direction_grid<T: Real>(n: usize, resolution: usize) -> Vec<Vec<T>> {
    let pi = T::PI();
    let mut axes: Vec<Vec<T>> = (0..n.saturating_sub(2))
        .map(|_| {
            let k = (resolution / 2).max(1);
            (0..k).map(|i| (T::lit(i as f64) + T::lit(0.5)) * pi / T::lit(k as f64)).collect()
        })
        .collect();
    axes.push((0..resolution).map(|i| T::lit(i as f64) * (pi + pi) / T::lit(resolution as f64)).collect());
    tensor_product(&axes).iter().map(|t| indicatrix_direction(t)).collect()
}

/// A quadrature node of [`SMGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridNode<T> {
    pub point: SMChartPoint<T>,
    /// Signed density `ρ_ν`.
    pub density: T,
    /// Trapezoid weight times `|ρ_ν|`.
    pub weight: T,
}

/// Periodic trapezoidal grid on `SM` of a 2-torus, integrating against
/// `|ρ_ν|`; the common sign of `ρ_ν` is recorded in [`SMGrid::sign`].
#[derive(Debug, Clone)]
pub struct SMGrid<'a, T> {
    metric: &'a MetricSpec<T>,
    counts: [usize; 3],
    nodes: Vec<GridNode<T>>,
    sign: i8,
}

impl<'a, T: Real> SMGrid<'a, T> {
    pub fn new(metric: &'a MetricSpec<T>, domain: &ChartDomain<T>, base: [usize; 2], angular: usize, theta0: T) -> Result<Self> {
        if metric.dim() != 2 || domain.dim() != 2 {
            return Err(GeometryError::Unsupported("sphere-bundle quadrature is implemented for n = 2".into()));
        }
        let periods = domain
            .axes()
            .iter()
            .map(|a| match *a {
                Axis::Periodic { period } => Ok(period),
                Axis::Open { .. } => Err(GeometryError::Unsupported("sphere-bundle quadrature needs a torus".into())),
            })
            .collect::<Result<Vec<T>>>()?;
        if base.iter().chain(std::iter::once(&angular)).any(|&c| c < 2) {
            return Err(GeometryError::InvalidInput("grid needs at least 2 nodes per axis".into()));
        }
        let counts = [base[0], base[1], angular];
        let step = [
            periods[0] / T::lit(counts[0] as f64),
            periods[1] / T::lit(counts[1] as f64),
            (T::PI() + T::PI()) / T::lit(counts[2] as f64),
        ];
        let cell = step[0] * step[1] * step[2];
        let total = counts[0] * counts[1] * counts[2];
        let nodes = (0..total)
            .into_par_iter()
            .map(|idx| {
                let k = idx % counts[2];
                let j = (idx / counts[2]) % counts[1];
                let i = idx / (counts[1] * counts[2]);
                let x = vec![T::lit(i as f64) * step[0], T::lit(j as f64) * step[1]];
                let theta = vec![theta0 + T::lit(k as f64) * step[2]];
                let point = SMChartPoint::new(metric, x, theta)?;
                let density = volume_density(metric, &point)?;
                Ok(GridNode { point, density, weight: cell * density.abs() })
            })
            .collect::<Result<Vec<_>>>()?;
        let positive = nodes[0].density > T::zero();
        if nodes.iter().any(|nd| (nd.density > T::zero()) != positive) {
            return Err(GeometryError::DensitySignChange);
        }
        Ok(SMGrid { metric, counts, nodes, sign: if positive { 1 } else { -1 } })
    }

    pub fn metric(&self) -> &MetricSpec<T> {
        self.metric
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn nodes(&self) -> &[GridNode<T>] {
        &self.nodes
    }

    /// Common sign of `ρ_ν` in chart order `(x¹, x², θ)`.
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `∫_{SM} f dν` for a function of the node.
    pub fn integrate(&self, f: impl Fn(&GridNode<T>) -> T + Sync) -> T {
        let terms: Vec<T> = self.nodes.par_iter().map(|nd| f(nd) * nd.weight).collect();
        pairwise_sum(&terms)
    }

    /// Several integrals in one pass over the nodes.
    pub fn integrate_many<const K: usize>(&self, f: impl Fn(&GridNode<T>) -> [T; K] + Sync) -> [T; K] {
        let terms: Vec<[T; K]> = self.nodes.par_iter().map(|nd| f(nd).map(|v| v * nd.weight)).collect();
        std::array::from_fn(|c| pairwise_sum(&terms.iter().map(|t| t[c]).collect::<Vec<T>>()))
    }

    /// `vol(SM) = ∫ dν`.
    pub fn volume(&self) -> T {
        self.integrate(|_| T::one())
    }

    /// `∫_{SM} f dν` for a function on `TM₀` restricted to `SM`.
    pub fn integrate_sm<F: FiberFunction<T>>(&self, f: &F) -> T {
        self.integrate(|nd| f.eval(&nd.point.x, &nd.point.y))
    }

    /// `∫_{SM} ḟ dν` with `ḟ = ξ(f)`.
    pub fn reeb_derivative_integral<F: FiberFunction<T>>(&self, f: &F) -> T {
        self.integrate(|nd| {
            let (x, y) = (&nd.point.x, &nd.point.y);
            dynamical_derivative_scalar_at(self.metric, f, x, y) / self.metric.norm(x, y)
        })
    }

    /// `|∫_{SM} ḟ dν|`.
    pub fn stokes_defect<F: FiberFunction<T>>(&self, f: &F) -> T {
        self.reeb_derivative_integral(f).abs()
    }

    /// `𝒯(V) = ∫_{SM} g_y(R_y V, V)/F² dν`. Fails if the integrand is not
    /// 0-homogeneous at the first node.
    pub fn total_ricci(&self, field: &VectorFieldDef<T>) -> Result<T> {
        self.check_field(field)?;
        let nd = &self.nodes[0].point;
        let y2: Vec<T> = nd.y.iter().map(|&v| v + v).collect();
        let (a, b) = (ricci_integrand(self.metric, field, &nd.x, &nd.y), ricci_integrand(self.metric, field, &nd.x, &y2));
        if (a - b).abs() > T::lit(1e-8) * T::one().max(a.abs()) {
            return Err(GeometryError::InvalidInput("total Ricci integrand is not 0-homogeneous".into()));
        }
        Ok(self.integrate(|nd| ricci_integrand(self.metric, field, &nd.point.x, &nd.point.y)))
    }

    /// `∫_{SM} g_y(V, V) dν`.
    pub fn global_norm(&self, field: &VectorFieldDef<T>) -> Result<T> {
        self.check_field(field)?;
        Ok(self.integrate(|nd| {
            let (x, y) = (&nd.point.x, &nd.point.y);
            let v = field.eval(x);
            fundamental_tensor_at(self.metric, x, y).bilinear(&v, &v)
        }))
    }

    /// Worst contact-structure residuals over all nodes.
    pub fn contact_report(&self) -> Result<ContactReport<T>> {
        let per: Vec<HilbertFormData<T>> =
            self.nodes.par_iter().map(|nd| hilbert_form(self.metric, &nd.point)).collect::<Result<_>>()?;
        let mut r = ContactReport::<T>::default();
        for h in &per {
            r.omega_of_xi = r.omega_of_xi.max((h.omega_of_xi - T::one()).abs());
            r.d_omega_of_xi = r.d_omega_of_xi.max(max_abs(&h.d_omega_of_xi));
            r.tangency = r.tangency.max(h.tangency_defect);
            r.form_mismatch = r.form_mismatch.max(h.form_mismatch());
        }
        r.nodes = per.len();
        Ok(r)
    }

    /// Integrated form of the rigidity identity for `V`.
    pub fn rigidity_balance(&self, field: &VectorFieldDef<T>) -> Result<RigidityBalance<T>> {
        self.check_field(field)?;
        let pairing = HilbertPairing { metric: self.metric, field };
        let [energy, ricci, flux, jacobi] = self.integrate_many(|nd| {
            let t = identity_terms(self.metric, field, &pairing, &nd.point.x, &nd.point.y);
            [t.energy, t.ricci, t.fdot, t.jacobi]
        });
        Ok(RigidityBalance {
            energy,
            total_ricci: ricci,
            flux,
            jacobi_term: jacobi,
            closure: (energy - (ricci + flux - jacobi)).abs(),
        })
    }

    fn check_field(&self, field: &VectorFieldDef<T>) -> Result<()> {
        if field.dim() != 2 {
            return Err(GeometryError::DimensionMismatch { expected: 2, got: field.dim() });
        }
        Ok(())
    }
}

/// Worst residuals of `ω(ξ) = 1`, `dω(ξ, ·) = 0`, the tangency of `ξ` to
/// `SM` and `F_y = g y/F` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactReport<T> {
    pub nodes: usize,
    pub omega_of_xi: T,
    pub d_omega_of_xi: T,
    pub tangency: T,
    pub form_mismatch: T,
}

/// `∫ g(V̇, V̇)`, `𝒯(V)`, `∫ ḟ` and `∫ g(V, J)/F²` with `J` the Jacobi
/// residual; `closure` is the defect of `energy = 𝒯 + ∫ḟ − ∫g(V,J)/F²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityBalance<T> {
    pub energy: T,
    pub total_ricci: T,
    pub flux: T,
    pub jacobi_term: T,
    pub closure: T,
}

fn ricci_integrand<T: Real>(metric: &MetricSpec<T>, field: &VectorFieldDef<T>, x: &[T], y: &[T]) -> T {
    let v = field.eval(x);
    let (_, _, r) = riemann_at(metric, x, y);
    let f = metric.norm(x, y);
    fundamental_tensor_at(metric, x, y).bilinear(&r.mul_vec(&v), &v) / (f * f)
}

/// `f = g_ij Vⁱ Vʲ_{|0} / F`, 0-homogeneous on `TM₀`.
pub struct HilbertPairing<'a, T> {
    pub metric: &'a MetricSpec<T>,
    pub field: &'a VectorFieldDef<T>,
}

impl<T: Real> FiberFunction<T> for HilbertPairing<'_, T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        let w = covariant_section_derivative_at(self.metric, self.field, x, y);
        let v = self.field.eval(x);
        fundamental_tensor_at(self.metric, x, y).bilinear(&v, &w) / self.metric.norm(x, y)
    }
}

struct IdentityTerms<T> {
    fdot: T,
    /// `g(V_{|0}, V_{|0})/F² + g(V, V_{|0|0})/F²`
    product: T,
    /// `g(V̇, V̇)`
    energy: T,
    /// `g(R V, V)/F²`
    ricci: T,
    /// `g(V, J)/F²`
    jacobi: T,
    scale: T,
}

fn identity_terms<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    pairing: &HilbertPairing<'_, T>,
    x: &[T],
    y: &[T],
) -> IdentityTerms<T> {
    let f = metric.norm(x, y);
    let f2 = f * f;
    let g = fundamental_tensor_at(metric, x, y);
    let v = field.eval(x);
    let sd = section_derivatives_at(metric, field, x, y);
    let (_, _, r) = riemann_at(metric, x, y);
    let rv = r.mul_vec(&v);
    let jac: Vec<T> = sd.second.iter().zip(&rv).map(|(&a, &b)| a + b).collect();
    let energy = g.bilinear(&sd.first, &sd.first) / f2;
    IdentityTerms {
        fdot: dynamical_derivative_scalar_at(metric, pairing, x, y) / f,
        product: energy + g.bilinear(&v, &sd.second) / f2,
        energy,
        ricci: g.bilinear(&rv, &v) / f2,
        jacobi: g.bilinear(&v, &jac) / f2,
        scale: T::one().max(g.bilinear(&v, &v)),
    }
}

/// Pointwise defects of `ḟ = g(V̇,V̇) + g(V, V_{|0|0})/F²` (product rule) and
/// of `ḟ = g(V̇,V̇) − g(R V, V)/F²` (curvature form), relative to
/// `max(1, g(V,V))`. The curvature form differs from the product rule by
/// `jacobi_term`, which vanishes for affine fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityDefects<T> {
    pub fdot: T,
    pub product_rule: T,
    pub curvature_form: T,
    pub jacobi_term: T,
}

pub fn rigidity_identity_check<T: Real>(
    metric: &MetricSpec<T>,
    field: &VectorFieldDef<T>,
    p: &crate::metric::FiberPoint<T>,
) -> Result<IdentityDefects<T>> {
    crate::spray::admissible(metric, p)?;
    crate::spray::check_field(metric, field)?;
    let pairing = HilbertPairing { metric, field };
    let t = identity_terms(metric, field, &pairing, &p.x, &p.y);
    Ok(IdentityDefects {
        fdot: t.fdot,
        product_rule: (t.fdot - t.product).abs() / t.scale,
        curvature_form: (t.fdot - t.energy + t.ricci).abs() / t.scale,
        jacobi_term: t.jacobi / t.scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn contact_constants() {
        assert_eq!(contact_constant(2), 1.0);
        assert_eq!(contact_constant(3), -0.5);
        assert_eq!(contact_constant(1), 1.0);
    }

    #[test]
    fn flat_hilbert_form() {
        let m = MetricSpec::euclidean(2);
        let q = SMChartPoint::new(&m, vec![0.3, 0.1], vec![0.7]).unwrap();
        let h = hilbert_form(&m, &q).unwrap();
        assert!((h.omega[0] - 0.7f64.cos()).abs() < 1e-15 && (h.omega[1] - 0.7f64.sin()).abs() < 1e-15);
        assert!((h.xi[0] - 0.7f64.cos()).abs() < 1e-15 && h.xi[2].abs() < 1e-15);
        assert!((h.omega_of_xi - 1.0).abs() < 1e-15);
        assert!((h.density + 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_density_is_finite() {
        let m = MetricSpec::euclidean(3);
        let q = SMChartPoint::new(&m, vec![0.0; 3], vec![1.0, 0.4]).unwrap();
        let h = hilbert_form(&m, &q).unwrap();
        assert!(h.density.abs() > 1e-3);
        assert!(max_abs(&h.d_omega_of_xi) < 1e-14);
    }

    #[test]
    fn pairwise_sum_matches_sequential_on_integers() {
        let v: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }

    #[test]
    fn flat_volume() {
        let m = MetricSpec::euclidean(2);
        let d = ChartDomain::torus(2, TAU).unwrap();
        let grid = SMGrid::new(&m, &d, [8, 8], 8, 0.0).unwrap();
        assert_eq!(grid.sign(), -1);
        assert!((grid.volume() - 8.0 * PI.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn randers_density_is_minus_one_minus_b_dot_u() {
        let m = MetricSpec::randers_over_euclidean(vec![Expr::constant(0.3), Expr::constant(-0.2)]).unwrap();
        let q = SMChartPoint::new(&m, vec![0.0, 0.0], vec![1.2]).unwrap();
        let rho = volume_density(&m, &q).unwrap();
        assert!((rho - (-1.0 - 0.3 * 1.2f64.cos() + 0.2 * 1.2f64.sin())).abs() < 1e-14);
    }
}
