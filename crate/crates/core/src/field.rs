//! Vector fields on the base and scalar functions on the tangent bundle.

use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::jet::{lift, seed_along, tangents};
use crate::metric::{ChartDomain, MetricSpec};
use crate::scalar::{Real, Scalar};

/// A smooth function on `TM₀` that can be evaluated at any scalar type,
/// which is what lets jets differentiate it.
pub trait FiberFunction<T: Real>: Sync {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S;
}

/// Scalar function on `TM₀` given by an expression in `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldDef<T> {
    expr: Expr<T>,
}

impl<T: Real> ScalarFieldDef<T> {
    pub fn new(dim: usize, expr: Expr<T>) -> Result<Self> {
        if expr.max_x_index() > dim || expr.max_y_index() > dim {
            return Err(GeometryError::InvalidInput(format!("function references variables beyond dimension {dim}")));
        }
        Ok(ScalarFieldDef { expr })
    }

    pub fn parse(dim: usize, src: &str) -> Result<Self> {
        let expr = Expr::parse(src).map_err(|e| GeometryError::InvalidInput(e.to_string()))?;
        Self::new(dim, expr)
    }
}

impl<T: Real> FiberFunction<T> for ScalarFieldDef<T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        self.expr.eval(x, y)
    }
}

/// The Finsler function itself as a fiber function.
pub struct FinslerNorm<'a, T>(pub &'a MetricSpec<T>);

impl<T: Real> FiberFunction<T> for FinslerNorm<'_, T> {
    fn eval<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> S {
        self.0.norm(x, y)
    }
}

/// A vector field `V = Vⁱ(x) ∂/∂xⁱ` on the base chart.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldDef<T> {
    components: Vec<Expr<T>>,
}

impl<T: Real> VectorFieldDef<T> {
    pub fn new(components: Vec<Expr<T>>) -> Result<Self> {
        let n = components.len();
        for (i, c) in components.iter().enumerate() {
            if c.max_y_index() > 0 {
                return Err(GeometryError::InvalidInput(format!("component {} of a base vector field depends on y", i + 1)));
            }
            if c.max_x_index() > n {
                return Err(GeometryError::InvalidInput(format!("component {} references x{} beyond dimension {n}", i + 1, c.max_x_index())));
            }
        }
        Ok(VectorFieldDef { components })
    }

    pub fn parse(components: &[&str]) -> Result<Self> {
        let exprs = components
            .iter()
            .map(|s| Expr::parse(s).map_err(|e| GeometryError::InvalidInput(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(exprs)
    }

    pub fn constant(values: &[T]) -> Self {
        VectorFieldDef { components: values.iter().map(|&v| Expr::constant(v)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval<S: Scalar<Base = T>>(&self, x: &[S]) -> Vec<S> {
        self.components.iter().map(|c| c.eval_x(x)).collect()
    }

    /// `yʲ ∂Vⁱ/∂xʲ`, the derivative of `V` along `y`.
    pub fn directional<S: Scalar<Base = T>>(&self, x: &[S], y: &[S]) -> Vec<S> {
        tangents(&self.eval(&seed_along(x, y)))
    }

    /// Jacobian `∂Vⁱ/∂xʲ` as rows indexed by `i`.
    pub fn jacobian<S: Scalar<Base = T>>(&self, x: &[S]) -> Vec<Vec<S>> {
        let n = self.dim();
        let mut jac = vec![vec![S::zero(); n]; n];
        for j in 0..n {
            let mut xs = lift(x);
            xs[j].eps = S::one();
            for (i, v) in self.eval(&xs).into_iter().enumerate() {
                jac[i][j] = v.eps;
            }
        }
        jac
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(u, v)| {
                Expr::Add(
                    Box::new(Expr::Mul(Box::new(Expr::Const(a)), Box::new(u.clone()))),
                    Box::new(Expr::Mul(Box::new(Expr::Const(b)), Box::new(v.clone()))),
                )
            })
            .collect();
        Ok(VectorFieldDef { components })
    }

    /// Largest mismatch `|V(x + period e_k) − V(x)|` over sampled base points
    /// of a torus; open axes are skipped.
    pub fn periodicity_defect(&self, domain: &ChartDomain<T>, samples: usize, seed: u64) -> T {
        use crate::metric::Axis;
        let mut sampler = crate::sampling::Sampler::new(domain, seed);
        let mut worst = T::zero();
        for _ in 0..samples {
            let x = sampler.base_point();
            let v = self.eval(&x);
            for (k, axis) in domain.axes().iter().enumerate() {
                if let Axis::Periodic { period } = *axis {
                    let mut shifted = x.clone();
                    shifted[k] += period;
                    for (a, b) in self.eval(&shifted).iter().zip(&v) {
                        worst = worst.max((*a - *b).abs());
                    }
                }
            }
        }
        worst
    }
}
