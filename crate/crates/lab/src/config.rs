//! Scenario files: JSON describing a chart, a metric, named vector fields and
//! functions, and the checks to run against them.

use std::collections::BTreeMap;
use std::path::Path;

use finsler_core::{Axis, ChartDomain, Expr, Matrix, MetricFamily, MetricSpec, ScalarFieldDef, VectorFieldDef};
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
}

fn invalid(context: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { context: context.into(), message: message.into() }
}

/// A number given either literally or as a constant expression (`"2*pi"`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Value(f64),
    Expr(String),
}

impl Num {
    pub fn resolve(&self, context: &str) -> Result<f64, ConfigError> {
        match self {
            Num::Value(v) => Ok(*v),
            Num::Expr(s) => {
                let e: Expr<f64> = Expr::parse(s).map_err(|e| invalid(context, e.to_string()))?;
                e.as_constant().ok_or_else(|| invalid(context, format!("'{s}' is not a constant expression")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub domain: DomainConfig,
    pub metric: MetricConfig,
    #[serde(default)]
    pub fields: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AxisConfig {
    Periodic { period: Num },
    Open { lo: Option<Num>, hi: Option<Num> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    Euclidean { dim: usize, matrix: Option<Vec<Vec<Num>>> },
    Riemannian { a: Vec<Vec<String>> },
    Randers { a: Option<Vec<Vec<String>>>, b: Vec<String> },
    Custom { dim: usize, norm: String },
    RoundSphereChart { dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Validate,
    CurvatureOracle,
    Brackets,
    Affine,
    Parallel,
    FlowAffinity,
    Geodesic,
    Contact,
    Volume,
    Stokes,
    TotalRicci,
    GlobalNorm,
    Reversibility,
    Identity,
    Rigidity,
    Convergence,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Validate => "validate",
            CheckKind::CurvatureOracle => "curvature-oracle",
            CheckKind::Brackets => "brackets",
            CheckKind::Affine => "affine",
            CheckKind::Parallel => "parallel",
            CheckKind::FlowAffinity => "flow-affinity",
            CheckKind::Geodesic => "geodesic",
            CheckKind::Contact => "contact",
            CheckKind::Volume => "volume",
            CheckKind::Stokes => "stokes",
            CheckKind::TotalRicci => "total-ricci",
            CheckKind::GlobalNorm => "global-norm",
            CheckKind::Reversibility => "reversibility",
            CheckKind::Identity => "identity",
            CheckKind::Rigidity => "rigidity",
            CheckKind::Convergence => "convergence",
        }
    }

    /// Checks whose value depends on a grid or step count.
    pub fn is_refinable(self) -> bool {
        matches!(
            self,
            CheckKind::Geodesic
                | CheckKind::Contact
                | CheckKind::Volume
                | CheckKind::Stokes
                | CheckKind::TotalRicci
                | CheckKind::GlobalNorm
                | CheckKind::Rigidity
                | CheckKind::FlowAffinity
        )
    }

    fn uses_sphere_grid(self) -> bool {
        matches!(
            self,
            CheckKind::Contact | CheckKind::Volume | CheckKind::Stokes | CheckKind::TotalRicci | CheckKind::GlobalNorm | CheckKind::Rigidity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureOracle {
    Flat,
    ConstantCurvature,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl Resolution {
    pub fn scaled(&self, factor: usize) -> Resolution {
        match self {
            Resolution::Uniform(n) => Resolution::Uniform(n * factor),
            Resolution::PerAxis(v) => Resolution::PerAxis(v.iter().map(|n| n * factor).collect()),
        }
    }

    /// `[n_x1, n_x2, n_θ]`.
    pub fn grid(&self) -> [usize; 3] {
        match self {
            Resolution::Uniform(n) => [*n; 3],
            Resolution::PerAxis(v) => [v[0], v[1], v[2]],
        }
    }

    pub fn label(&self) -> String {
        match self {
            Resolution::Uniform(n) => n.to_string(),
            Resolution::PerAxis(v) => v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub x: Vec<Num>,
    pub y: Vec<Num>,
}

/// One check. Which keys are required depends on `kind`; see the README.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub kind: CheckKind,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub resolution: Option<Resolution>,
    pub angular_resolution: Option<usize>,
    pub theta0: Option<Num>,
    pub field: Option<String>,
    pub fields: Option<Vec<String>>,
    pub function: Option<String>,
    pub functions: Option<Vec<String>>,
    pub start: Option<StartConfig>,
    pub t_end: Option<Num>,
    pub steps: Option<usize>,
    pub order_steps: Option<usize>,
    pub times: Option<Vec<Num>>,
    pub flow_step: Option<Num>,
    pub geodesics: Option<usize>,
    pub oracle: Option<CurvatureOracle>,
    pub curvature: Option<Num>,
    pub target: Option<String>,
    pub factors: Option<Vec<usize>>,
    pub expect: Option<Num>,
    pub tolerance: Option<f64>,
    pub relative: Option<bool>,
    pub expect_below: Option<f64>,
    pub expect_above: Option<f64>,
    pub energy_below: Option<f64>,
    pub d_omega_tolerance: Option<f64>,
}

impl CheckConfig {
    /// Every field name the check refers to, `field` first.
    pub fn field_names(&self) -> Vec<String> {
        self.field.iter().chain(self.fields.iter().flatten()).cloned().collect()
    }

    pub fn function_names(&self) -> Vec<String> {
        self.function.iter().chain(self.functions.iter().flatten()).cloned().collect()
    }
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub domain: ChartDomain<f64>,
    pub metric: MetricSpec<f64>,
    pub metric_family: &'static str,
    pub fields: BTreeMap<String, VectorFieldDef<f64>>,
    pub functions: BTreeMap<String, ScalarFieldDef<f64>>,
    pub checks: Vec<NamedCheck>,
}

#[derive(Debug, Clone)]
pub struct NamedCheck {
    pub name: String,
    pub config: CheckConfig,
    /// The check object exactly as written.
    pub raw: Value,
}

impl NamedCheck {
    /// A `validate` check with default sample count.
    pub fn validate_default() -> NamedCheck {
        let raw = serde_json::json!({"kind": "validate"});
        let config = serde_json::from_value(raw.clone()).expect("minimal check parses");
        NamedCheck { name: "validate".into(), config, raw }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&src)
}

pub fn parse_scenario(src: &str) -> Result<Scenario, ConfigError> {
    let parse_err = |e: serde_json::Error| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() };
    let config: ScenarioConfig = serde_json::from_str(src).map_err(parse_err)?;
    let raw: Value = serde_json::from_str(src).map_err(parse_err)?;
    let raw_checks = raw.get("checks").and_then(Value::as_array).cloned().unwrap_or_default();
    build(config, raw_checks)
}

fn parse_expr(context: &str, src: &str) -> Result<Expr<f64>, ConfigError> {
    Expr::parse(src).map_err(|e| invalid(context, e.to_string()))
}

fn build_domain(cfg: &DomainConfig) -> Result<ChartDomain<f64>, ConfigError> {
    let axes = cfg
        .axes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let ctx = format!("domain.axes[{k}]");
            Ok(match a {
                AxisConfig::Periodic { period } => Axis::Periodic { period: period.resolve(&ctx)? },
                AxisConfig::Open { lo, hi } => Axis::Open {
                    lo: lo.as_ref().map(|v| v.resolve(&ctx)).transpose()?.unwrap_or(f64::NEG_INFINITY),
                    hi: hi.as_ref().map(|v| v.resolve(&ctx)).transpose()?.unwrap_or(f64::INFINITY),
                },
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    ChartDomain::new(axes).map_err(|e| invalid("domain", e.to_string()))
}

fn square_exprs(rows: &[Vec<String>], what: &str) -> Result<(usize, Vec<Expr<f64>>), ConfigError> {
    let n = rows.len();
    let mut out = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(invalid(format!("metric.{what}[{i}]"), format!("expected {n} entries, got {}", row.len())));
        }
        for (j, s) in row.iter().enumerate() {
            out.push(parse_expr(&format!("metric.{what}[{i}][{j}]"), s)?);
        }
    }
    Ok((n, out))
}

fn build_metric(cfg: &MetricConfig) -> Result<(MetricSpec<f64>, &'static str), ConfigError> {
    let wrap = |r: finsler_core::Result<MetricSpec<f64>>| r.map_err(|e| invalid("metric", e.to_string()));
    Ok(match cfg {
        MetricConfig::Euclidean { dim, matrix } => {
            let spec = match matrix {
                None => MetricSpec::euclidean(*dim),
                Some(rows) => {
                    let vals = rows
                        .iter()
                        .enumerate()
                        .map(|(i, r)| r.iter().map(|v| v.resolve(&format!("metric.matrix[{i}]"))).collect::<Result<Vec<f64>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    let m = Matrix::from_rows(&vals).map_err(|e| invalid("metric.matrix", e.to_string()))?;
                    if !m.is_positive_definite() {
                        return Err(invalid("metric.matrix", "matrix is not positive definite"));
                    }
                    wrap(MetricSpec::new(*dim, MetricFamily::EuclideanQuadratic { matrix: m }))?
                }
            };
            (spec, "euclidean")
        }
        MetricConfig::Riemannian { a } => {
            let (n, a) = square_exprs(a, "a")?;
            (wrap(MetricSpec::riemannian(n, a))?, "riemannian")
        }
        MetricConfig::Randers { a, b } => {
            let n = b.len();
            let b = b.iter().enumerate().map(|(i, s)| parse_expr(&format!("metric.b[{i}]"), s)).collect::<Result<Vec<_>, _>>()?;
            let spec = match a {
                None => wrap(MetricSpec::randers_over_euclidean(b))?,
                Some(rows) => {
                    let (na, a) = square_exprs(rows, "a")?;
                    if na != n {
                        return Err(invalid("metric.a", format!("dimension {na} does not match b ({n})")));
                    }
                    wrap(MetricSpec::new(n, MetricFamily::Randers { a, b }))?
                }
            };
            (spec, "randers")
        }
        MetricConfig::Custom { dim, norm } => (wrap(MetricSpec::custom(*dim, parse_expr("metric.norm", norm)?))?, "custom"),
        MetricConfig::RoundSphereChart { dim } => {
            if *dim < 2 {
                return Err(invalid("metric.dim", "dimension must be at least 2"));
            }
            (MetricSpec::round_sphere_chart(*dim), "round-sphere-chart")
        }
    })
}

fn build(config: ScenarioConfig, raw_checks: Vec<Value>) -> Result<Scenario, ConfigError> {
    let domain = build_domain(&config.domain)?;
    let (metric, metric_family) = build_metric(&config.metric)?;
    if metric.dim() != domain.dim() {
        return Err(invalid("metric", format!("dimension {} does not match the domain ({})", metric.dim(), domain.dim())));
    }
    let mut fields = BTreeMap::new();
    for (name, comps) in &config.fields {
        let ctx = format!("fields.{name}");
        if comps.len() != metric.dim() {
            return Err(invalid(ctx, format!("expected {} components, got {}", metric.dim(), comps.len())));
        }
        let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
        fields.insert(name.clone(), VectorFieldDef::parse(&refs).map_err(|e| invalid(ctx, e.to_string()))?);
    }
    let mut functions = BTreeMap::new();
    for (name, src) in &config.functions {
        let ctx = format!("functions.{name}");
        functions.insert(name.clone(), ScalarFieldDef::parse(metric.dim(), src).map_err(|e| invalid(ctx, e.to_string()))?);
    }
    let mut checks: Vec<NamedCheck> = Vec::new();
    for (k, c) in config.checks.into_iter().enumerate() {
        let name = c.name.clone().unwrap_or_else(|| format!("{}-{k}", c.kind.as_str()));
        if checks.iter().any(|o| o.name == name) {
            return Err(invalid(format!("checks[{k}].name"), format!("duplicate check name '{name}'")));
        }
        checks.push(NamedCheck { name, config: c, raw: raw_checks.get(k).cloned().unwrap_or(Value::Null) });
    }
    let scenario = Scenario {
        name: config.name,
        seed: config.seed,
        domain,
        metric,
        metric_family,
        fields,
        functions,
        checks,
    };
    for (k, c) in scenario.checks.iter().enumerate() {
        validate_check(&scenario, k, &c.config)?;
    }
    Ok(scenario)
}

fn validate_check(s: &Scenario, k: usize, c: &CheckConfig) -> Result<(), ConfigError> {
    let ctx = |key: &str| format!("checks[{k}].{key}");
    let require = |present: bool, key: &str| -> Result<(), ConfigError> {
        if present {
            Ok(())
        } else {
            Err(invalid(ctx(key), format!("required for kind '{}'", c.kind.as_str())))
        }
    };
    for f in c.field_names() {
        if !s.fields.contains_key(&f) {
            return Err(invalid(ctx("field"), format!("unknown field name '{f}'")));
        }
    }
    for f in c.function_names() {
        if !s.functions.contains_key(&f) {
            return Err(invalid(ctx("function"), format!("unknown function name '{f}'")));
        }
    }
    if let Some(r) = &c.resolution {
        let counts = match r {
            Resolution::Uniform(n) => vec![*n],
            Resolution::PerAxis(v) => {
                if v.len() != 3 {
                    return Err(invalid(ctx("resolution"), "expected one count or three counts [x1, x2, theta]"));
                }
                v.clone()
            }
        };
        if counts.iter().any(|&n| n < 8) {
            return Err(invalid(ctx("resolution"), "resolutions must be at least 8"));
        }
    }
    if let Some(a) = c.angular_resolution {
        if a < 8 {
            return Err(invalid(ctx("angular_resolution"), "resolutions must be at least 8"));
        }
    }
    if c.expect.is_some() && (c.expect_below.is_some() || c.expect_above.is_some()) {
        return Err(invalid(ctx("expect"), "use either expect or expect_below/expect_above"));
    }
    let has_field = !c.field_names().is_empty();
    match c.kind {
        CheckKind::Affine | CheckKind::Parallel | CheckKind::Identity => require(has_field, "field")?,
        CheckKind::FlowAffinity | CheckKind::TotalRicci | CheckKind::GlobalNorm | CheckKind::Rigidity => {
            require(c.field.is_some(), "field")?
        }
        CheckKind::Stokes => require(!c.function_names().is_empty(), "function")?,
        CheckKind::Geodesic => require(c.start.is_some(), "start")?,
        CheckKind::CurvatureOracle => {
            require(c.oracle.is_some(), "oracle")?;
            if c.oracle == Some(CurvatureOracle::ConstantCurvature) {
                require(c.curvature.is_some(), "curvature")?;
            }
        }
        CheckKind::Convergence => {
            require(c.target.is_some(), "target")?;
            let t = c.target.as_deref().unwrap_or_default();
            let target = s
                .checks
                .iter()
                .find(|o| o.name == t)
                .ok_or_else(|| invalid(ctx("target"), format!("unknown check name '{t}'")))?;
            if !target.config.kind.is_refinable() {
                return Err(invalid(ctx("target"), format!("check '{t}' has no resolution to refine")));
            }
        }
        _ => {}
    }
    if c.kind.uses_sphere_grid() {
        require(c.resolution.is_some(), "resolution")?;
        if s.metric.dim() != 2 || !s.domain.is_torus() {
            return Err(invalid(ctx("kind"), "sphere-bundle checks need a 2-torus"));
        }
    }
    if let Some(f) = &c.factors {
        if f.is_empty() || f.contains(&0) {
            return Err(invalid(ctx("factors"), "factors must be positive"));
        }
    }
    if let Some(st) = &c.start {
        if st.x.len() != s.metric.dim() || st.y.len() != s.metric.dim() {
            return Err(invalid(ctx("start"), format!("x and y need {} components", s.metric.dim())));
        }
    }
    Ok(())
}
