//! Numerical Finsler geometry.
//!
//! The tensor chain runs from a metric `F(x, y)` through the fundamental
//! tensor, spray coefficients, nonlinear connection and Berwald coefficients
//! to the Riemann curvature and the dynamical derivatives of vector fields.
//! On top of that sit geodesic and flow integration, the affine-field
//! criteria, and quadrature over the unit sphere bundle of a 2-torus with the
//! contact volume form.
//!
//! All numerics are generic over the floating point type ([`Real`], i.e.
//! `f32` or `f64`); derivatives come from nested dual numbers ([`Dual`]),
//! never from finite differences. The aliases at the crate root fix the
//! common `f64` instantiation.

pub mod affine;
pub mod error;
pub mod expr;
pub mod field;
pub mod geodesic;
pub mod jet;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod sampling;
pub mod scalar;
pub mod sphere;
pub mod spray;

pub use affine::{
    affine_diagnostics, bracket_residual, complete_lift, jacobi_residual, parallel_residual, point_diagnostics, reversibility,
    AffineDiagnostics, CompleteLift, PointDiagnostics,
};
pub use error::{GeometryError, Result};
pub use expr::{Expr, ExprError};
pub use field::{FiberFunction, FinslerNorm, ScalarFieldDef, VectorFieldDef};
pub use geodesic::{
    affine_transformation_defect, flow_point, flow_with_differential, integrate_geodesic, lifted_flow, FlowMap,
    GeodesicSample, GeodesicTrajectory,
};
pub use jet::Dual;
pub use linalg::Matrix;
pub use metric::{
    eval_f, fundamental_tensor, validate_metric, Axis, ChartDomain, FiberPoint, FundamentalTensor,
    MetricFamily, MetricSpec, ValidationReport,
};
pub use scalar::{Real, Scalar};
pub use sphere::{
    contact_constant, hilbert_form, rigidity_identity_check, volume_density, ContactReport, HilbertFormData, HilbertPairing,
    IdentityDefects, RigidityBalance, SMChartPoint, SMGrid,
};
pub use spray::{
    berwald_coefficients, connection_coefficients, covariant_section_derivative, curvature_bundle,
    dot_derivative_scalar, dynamical_derivative_scalar, metric_compatibility_check, riemann_curvature,
    second_dynamical_derivative, spray_coefficients, CurvatureBundle,
};

pub type Metric = MetricSpec<f64>;
pub type Domain = ChartDomain<f64>;
pub type Point = FiberPoint<f64>;
pub type VectorField = VectorFieldDef<f64>;
pub type ScalarField = ScalarFieldDef<f64>;
