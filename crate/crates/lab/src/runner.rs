//! Executes the checks of a scenario.

use std::time::Instant;

use finsler_core::lie::bracket_identity_defects;
use finsler_core::sampling::sample_fiber_points;
use finsler_core::{
    affine_diagnostics, affine_transformation_defect, curvature_bundle, integrate_geodesic, parallel_residual,
    reversibility, rigidity_identity_check, validate_metric, FiberPoint, FlowMap, GeometryError, SMGrid,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{CheckConfig, CheckKind, ConfigError, CurvatureOracle, NamedCheck, Resolution, Scenario};
use crate::report::{CheckReport, Report};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall-clock time per check. Off by default so that reports
    /// are byte-identical across runs.
    pub timing: bool,
}

/// Everything a check computes before it is judged.
#[derive(Debug, Default)]
struct Outcome {
    value: f64,
    /// Extra pass condition beyond the expectation on `value`.
    extra: Option<(bool, String)>,
    details: Map<String, Value>,
    location: Option<Value>,
    /// What a convergence study compares across resolutions.
    quantity: Vec<f64>,
    sign: Option<i8>,
    /// Rule applied when the check has no explicit expectation.
    default_below: Option<f64>,
}

type CheckResult = Result<Outcome, String>;

fn geom(e: GeometryError) -> String {
    e.to_string()
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn location(p: &FiberPoint<f64>) -> Value {
    json!({"x": p.x, "y": p.y})
}

fn num(v: &Option<crate::config::Num>, default: f64, key: &str) -> Result<f64, String> {
    v.as_ref().map(|n| n.resolve(key).map_err(|e| e.to_string())).transpose().map(|o| o.unwrap_or(default))
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Report {
    let results: Vec<(CheckReport, Option<i8>)> = s.checks.par_iter().map(|c| run_check(s, c, opts)).collect();
    let grid_sign = results.iter().find_map(|(_, sign)| *sign);
    let checks: Vec<CheckReport> = results.into_iter().map(|(r, _)| r).collect();
    Report {
        tool: "finsler-lab",
        version: env!("CARGO_PKG_VERSION"),
        scenario: s.name.clone(),
        seed: s.seed,
        metric_family: s.metric_family,
        dim: s.metric.dim(),
        grid_sign,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run_check(s: &Scenario, c: &NamedCheck, opts: &RunOptions) -> (CheckReport, Option<i8>) {
    let start = Instant::now();
    let result = evaluate(s, &c.config);
    let timing_ms = opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let mut report = CheckReport {
        name: c.name.clone(),
        kind: c.config.kind.as_str(),
        inputs: c.raw.clone(),
        value: None,
        passed: false,
        criterion: String::new(),
        details: Map::new(),
        worst_location: None,
        error: None,
        timing_ms,
    };
    match result {
        Ok(o) => {
            let (mut ok, mut rule) = judge(&c.config, o.value, o.default_below);
            if let Some((extra_ok, extra_rule)) = o.extra {
                ok &= extra_ok;
                rule = format!("{rule}; {extra_rule}");
            }
            report.value = Some(o.value);
            report.passed = ok && o.value.is_finite();
            report.criterion = rule;
            report.details = o.details;
            report.worst_location = o.location;
            (report, o.sign)
        }
        Err(e) => {
            report.criterion = "check must complete".into();
            report.error = Some(e);
            (report, None)
        }
    }
}

fn judge(c: &CheckConfig, value: f64, default_below: Option<f64>) -> (bool, String) {
    if let Some(e) = &c.expect {
        let Ok(e) = e.resolve("expect") else {
            return (false, "expect is not a constant".into());
        };
        let tol = c.tolerance.unwrap_or(1e-9);
        return if c.relative.unwrap_or(false) {
            ((value - e).abs() <= tol * e.abs(), format!("|value - {e:e}| <= {tol:e}·|{e:e}|"))
        } else {
            ((value - e).abs() <= tol, format!("|value - {e:e}| <= {tol:e}"))
        };
    }
    let mut rules = Vec::new();
    let mut ok = true;
    let below = c.expect_below.or(c.tolerance.filter(|_| default_below.is_some())).or(default_below);
    if let Some(b) = below {
        ok &= value < b;
        rules.push(format!("value < {b:e}"));
    }
    if let Some(a) = c.expect_above {
        ok &= value > a;
        rules.push(format!("value > {a:e}"));
    }
    if rules.is_empty() {
        return (true, "informational".into());
    }
    (ok, rules.join(" and "))
}

fn seed(s: &Scenario, c: &CheckConfig) -> u64 {
    c.seed.unwrap_or(s.seed)
}

fn samples(s: &Scenario, c: &CheckConfig, default: usize) -> Vec<FiberPoint<f64>> {
    sample_fiber_points(&s.domain, c.samples.unwrap_or(default), seed(s, c))
}

fn grid<'a>(s: &'a Scenario, c: &CheckConfig) -> Result<SMGrid<'a, f64>, String> {
    let r = c.resolution.as_ref().ok_or("resolution is required")?.grid();
    let theta0 = num(&c.theta0, 0.0, "theta0")?;
    SMGrid::new(&s.metric, &s.domain, [r[0], r[1]], r[2], theta0).map_err(geom)
}

fn field<'a>(s: &'a Scenario, name: &str) -> Result<&'a finsler_core::VectorFieldDef<f64>, String> {
    s.fields.get(name).ok_or_else(|| format!("unknown field '{name}'"))
}

fn evaluate(s: &Scenario, c: &CheckConfig) -> CheckResult {
    match c.kind {
        CheckKind::Validate => check_validate(s, c),
        CheckKind::CurvatureOracle => check_curvature(s, c),
        CheckKind::Brackets => check_brackets(s, c),
        CheckKind::Affine => check_affine(s, c),
        CheckKind::Parallel => check_parallel(s, c),
        CheckKind::FlowAffinity => check_flow(s, c),
        CheckKind::Geodesic => check_geodesic(s, c),
        CheckKind::Contact => check_contact(s, c),
        CheckKind::Volume => {
            let g = grid(s, c)?;
            let v = g.volume();
            Ok(Outcome { value: v, quantity: vec![v], sign: Some(g.sign()), ..Default::default() })
        }
        CheckKind::Stokes => check_stokes(s, c),
        CheckKind::TotalRicci => {
            let g = grid(s, c)?;
            let v = g.total_ricci(field(s, c.field.as_deref().unwrap_or_default())?).map_err(geom)?;
            Ok(Outcome { value: v, quantity: vec![v], sign: Some(g.sign()), ..Default::default() })
        }
        CheckKind::GlobalNorm => {
            let g = grid(s, c)?;
            let v = g.global_norm(field(s, c.field.as_deref().unwrap_or_default())?).map_err(geom)?;
            Ok(Outcome { value: v, quantity: vec![v], sign: Some(g.sign()), ..Default::default() })
        }
        CheckKind::Reversibility => {
            let res = c.resolution.as_ref().map(|r| r.grid()[0]).unwrap_or(8);
            let ang = c.angular_resolution.unwrap_or(1024);
            let v = reversibility(&s.metric, &s.domain, res, ang).map_err(geom)?;
            Ok(Outcome {
                value: v,
                details: object(json!({"base_resolution": res, "angular_resolution": ang})),
                ..Default::default()
            })
        }
        CheckKind::Identity => check_identity(s, c),
        CheckKind::Rigidity => check_rigidity(s, c),
        CheckKind::Convergence => check_convergence(s, c),
    }
}

fn check_validate(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let r = validate_metric(&s.metric, &s.domain, c.samples.unwrap_or(64), seed(s, c)).map_err(geom)?;
    let failures = r.positivity_failures + r.definiteness_failures;
    Ok(Outcome {
        value: r.worst_error(),
        extra: Some((failures == 0, "no positivity or definiteness failures".into())),
        details: object(json!({
            "samples": r.samples,
            "homogeneity_error": r.homogeneity_error,
            "euler_error": r.euler_error,
            "tensor_homogeneity_error": r.tensor_homogeneity_error,
            "positivity_failures": r.positivity_failures,
            "definiteness_failures": r.definiteness_failures,
            "min_norm": r.min_norm,
        })),
        location: r.first_failure.as_ref().or(r.worst_point.as_ref()).map(location),
        default_below: Some(1e-9),
        ..Default::default()
    })
}

fn check_curvature(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let oracle = c.oracle.ok_or("oracle is required")?;
    let k = num(&c.curvature, 0.0, "curvature")?;
    let pts = samples(s, c, 64);
    let defects: Vec<f64> = pts
        .par_iter()
        .map(|p| {
            let b = curvature_bundle(&s.metric, p).map_err(geom)?;
            let f2 = b.f * b.f;
            let gy = b.g.mul_vec(&p.y);
            let n = p.dim();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let expect = match oracle {
                        CurvatureOracle::Flat => 0.0,
                        CurvatureOracle::ConstantCurvature => k * (f2 * delta - p.y[i] * gy[j]),
                    };
                    worst = worst.max((b.riemann[(i, j)] - expect).abs() / f2);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_, String>>()?;
    let (idx, worst) = argmax(&defects);
    let default = match oracle {
        CurvatureOracle::Flat => 1e-10,
        CurvatureOracle::ConstantCurvature => 1e-6,
    };
    Ok(Outcome {
        value: worst,
        details: object(json!({"samples": pts.len(), "curvature": k})),
        location: Some(location(&pts[idx])),
        default_below: Some(default),
        ..Default::default()
    })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold((0, 0.0), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
}

fn check_brackets(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let pts = samples(s, c, 64);
    let defects: Vec<f64> = pts
        .par_iter()
        .map(|p| bracket_identity_defects(&s.metric, p).map(|d| d.worst()).map_err(geom))
        .collect::<Result<_, String>>()?;
    let (idx, worst) = argmax(&defects);
    Ok(Outcome {
        value: worst,
        details: object(json!({"samples": pts.len()})),
        location: Some(location(&pts[idx])),
        default_below: Some(1e-7),
        ..Default::default()
    })
}

/// Jacobi residual below which a field counts as affine on the samples.
const CERTIFY_AFFINE: f64 = 1e-7;

fn check_affine(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let pts = samples(s, c, 256);
    let mut rows = Vec::new();
    let (mut worst, mut leak) = (0.0f64, 0.0f64);
    let mut loc = None;
    for name in c.field_names() {
        let d = affine_diagnostics(&s.metric, field(s, &name)?, &pts).map_err(geom)?;
        if d.max_cross_check >= worst {
            worst = d.max_cross_check;
            loc = Some(location(&pts[d.worst_sample]));
        }
        leak = leak.max(d.max_horizontal_leak);
        rows.push(json!({
            "field": name,
            "max_jacobi": d.max_jacobi,
            "max_cross_check": d.max_cross_check,
            "max_horizontal_leak": d.max_horizontal_leak,
            "parallel_residual": d.parallel_residual,
            "certified_affine": d.certified_affine(CERTIFY_AFFINE),
        }));
    }
    Ok(Outcome {
        value: worst,
        extra: Some((leak < 1e-8, format!("horizontal leak {leak:e} < 1e-8"))),
        details: object(json!({"samples": pts.len(), "certify_threshold": CERTIFY_AFFINE, "table": rows})),
        location: loc,
        default_below: Some(1e-7),
        ..Default::default()
    })
}

fn check_parallel(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let pts = samples(s, c, 64);
    let mut details = Map::new();
    let mut worst = 0.0f64;
    for name in c.field_names() {
        let r = parallel_residual(&s.metric, field(s, &name)?, &pts).map_err(geom)?;
        details.insert(name, json!(r));
        worst = worst.max(r);
    }
    Ok(Outcome { value: worst, details, ..Default::default() })
}

fn check_flow(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let v = field(s, c.field.as_deref().unwrap_or_default())?;
    let times = match &c.times {
        Some(ts) => ts.iter().map(|t| t.resolve("times").map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?,
        None => vec![0.25, 0.5, 1.0],
    };
    let t_end = num(&c.t_end, 1.0, "t_end")?;
    let steps = c.steps.unwrap_or(200);
    let flow_step = num(&c.flow_step, 0.01, "flow_step")?;
    let starts = match &c.start {
        Some(st) => vec![start_point(st)?],
        None => sample_fiber_points(&s.domain, c.geodesics.unwrap_or(4), seed(s, c)),
    };
    let mut per_time = Map::new();
    let mut worst = (0.0f64, None);
    for &t in &times {
        let flow = FlowMap::new(v, t, flow_step);
        let defects: Vec<f64> = starts
            .par_iter()
            .map(|p| affine_transformation_defect(&s.metric, &s.domain, &flow, p, t_end, steps).map_err(geom))
            .collect::<Result<_, String>>()?;
        let (idx, m) = argmax(&defects);
        per_time.insert(format!("{t}"), json!(m));
        if m >= worst.0 {
            worst = (m, Some(location(&starts[idx])));
        }
    }
    Ok(Outcome {
        value: worst.0,
        details: object(json!({"geodesics": starts.len(), "steps": steps, "t_end": t_end, "max_defect_by_time": per_time})),
        location: worst.1,
        quantity: vec![worst.0],
        ..Default::default()
    })
}

fn start_point(st: &crate::config::StartConfig) -> Result<FiberPoint<f64>, String> {
    let x = st.x.iter().map(|v| v.resolve("start.x").map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
    let y = st.y.iter().map(|v| v.resolve("start.y").map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
    FiberPoint::new(x, y).map_err(geom)
}

fn check_geodesic(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let p = start_point(c.start.as_ref().ok_or("start is required")?)?;
    let t_end = num(&c.t_end, 1.0, "t_end")?;
    let steps = c.steps.unwrap_or(1000);
    let tr = integrate_geodesic(&s.metric, &s.domain, &p, t_end, steps).map_err(geom)?;
    let end = tr.end();
    let mut details = object(json!({
        "steps": steps,
        "step": tr.step,
        "equation_residual": tr.equation_residual(&s.metric),
        "end": {"x": end.x, "v": end.velocity},
    }));
    let mut extra = None;
    if let Some(n) = c.order_steps {
        let endpoint = |k: usize| -> Result<Vec<f64>, String> {
            Ok(integrate_geodesic(&s.metric, &s.domain, &p, t_end, k).map_err(geom)?.end().x.clone())
        };
        let (a, b, d) = (endpoint(n)?, endpoint(2 * n)?, endpoint(4 * n)?);
        let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let ratio = dist(&a, &b) / dist(&b, &d);
        details.insert("order_ratio".into(), json!(ratio));
        details.insert("observed_order".into(), json!(ratio.log2()));
        extra = Some(((12.0..=20.0).contains(&ratio), format!("step-halving ratio {ratio:.3} in [12, 20]")));
    }
    Ok(Outcome {
        value: tr.norm_drift(&s.metric),
        extra,
        details,
        quantity: end.x.iter().chain(&end.velocity).copied().collect(),
        default_below: Some(1e-7),
        ..Default::default()
    })
}

fn check_contact(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let g = grid(s, c)?;
    let r = g.contact_report().map_err(geom)?;
    let tol = c.d_omega_tolerance.unwrap_or(1e-8);
    Ok(Outcome {
        value: r.omega_of_xi,
        extra: Some((r.d_omega_of_xi < tol, format!("max |dω(ξ,·)| {:e} < {tol:e}", r.d_omega_of_xi))),
        details: object(json!({
            "nodes": r.nodes,
            "max_omega_xi_defect": r.omega_of_xi,
            "max_d_omega_xi": r.d_omega_of_xi,
            "max_tangency_defect": r.tangency,
            "max_hilbert_form_mismatch": r.form_mismatch,
        })),
        quantity: vec![r.omega_of_xi, r.d_omega_of_xi],
        sign: Some(g.sign()),
        default_below: Some(1e-9),
        ..Default::default()
    })
}

fn check_stokes(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let g = grid(s, c)?;
    let mut details = Map::new();
    let mut worst = 0.0f64;
    let mut quantity = Vec::new();
    for name in c.function_names() {
        let f = s.functions.get(&name).ok_or_else(|| format!("unknown function '{name}'"))?;
        let v = g.reeb_derivative_integral(f);
        details.insert(name, json!(v));
        worst = worst.max(v.abs());
        quantity.push(v);
    }
    Ok(Outcome { value: worst, details, quantity, sign: Some(g.sign()), default_below: Some(1e-8), ..Default::default() })
}

fn check_identity(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let pts = samples(s, c, 256);
    let mut worst = (0.0f64, None);
    let (mut curv, mut jac, mut split) = (0.0f64, 0.0f64, 0.0f64);
    for name in c.field_names() {
        let v = field(s, &name)?;
        let defects = pts
            .par_iter()
            .map(|p| rigidity_identity_check(&s.metric, v, p).map_err(geom))
            .collect::<Result<Vec<_>, String>>()?;
        for (p, d) in pts.iter().zip(&defects) {
            if d.product_rule >= worst.0 {
                worst = (d.product_rule, Some(location(p)));
            }
            curv = curv.max(d.curvature_form);
            jac = jac.max(d.jacobi_term.abs());
            split = split.max((d.curvature_form - d.jacobi_term.abs()).abs());
        }
    }
    Ok(Outcome {
        value: worst.0,
        details: object(json!({
            "samples": pts.len(),
            "max_curvature_form_defect": curv,
            "max_jacobi_term": jac,
            "curvature_form_minus_jacobi_term": split,
        })),
        location: worst.1,
        default_below: Some(1e-8),
        ..Default::default()
    })
}

fn check_rigidity(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let v = field(s, c.field.as_deref().unwrap_or_default())?;
    let g = grid(s, c)?;
    let b = g.rigidity_balance(v).map_err(geom)?;
    let pts = samples(s, c, 64);
    let diag = affine_diagnostics(&s.metric, v, &pts).map_err(geom)?;
    let extra = c.energy_below.map(|e| (b.energy < e, format!("∫g(V̇,V̇) {:e} < {e:e}", b.energy)));
    Ok(Outcome {
        value: b.closure / b.energy.abs().max(1.0),
        extra,
        details: object(json!({
            "velocity_energy": b.energy,
            "total_ricci": b.total_ricci,
            "reeb_flux": b.flux,
            "jacobi_term": b.jacobi_term,
            "max_jacobi": diag.max_jacobi,
            "certified_affine": diag.certified_affine(CERTIFY_AFFINE),
            "parallel_residual": diag.parallel_residual,
        })),
        quantity: vec![b.energy, b.total_ricci, b.flux],
        sign: Some(g.sign()),
        default_below: Some(1e-8),
        ..Default::default()
    })
}

fn check_convergence(s: &Scenario, c: &CheckConfig) -> CheckResult {
    let target = c.target.as_deref().ok_or("target is required")?;
    let factors = c.factors.clone().unwrap_or_else(|| vec![1, 2, 4]);
    let rows = converge(s, target, &factors).map_err(|e| e.to_string())?;
    let last = rows.last().and_then(|r| r.self_difference).unwrap_or(f64::NAN);
    Ok(Outcome {
        value: last,
        details: object(json!({"target": target, "rows": rows.iter().map(|r| json!({
            "resolution": r.resolution,
            "value": r.value,
            "self_difference": r.self_difference,
            "observed_order": r.observed_order,
        })).collect::<Vec<_>>()})),
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub resolution: String,
    pub value: f64,
    pub self_difference: Option<f64>,
    pub observed_order: Option<f64>,
}

fn refined(c: &CheckConfig, factor: usize) -> (CheckConfig, String) {
    let mut r = c.clone();
    match c.kind {
        CheckKind::Geodesic | CheckKind::FlowAffinity => {
            let base = c.steps.unwrap_or(if c.kind == CheckKind::Geodesic { 1000 } else { 200 });
            r.steps = Some(base * factor);
            r.order_steps = None;
            (r, (base * factor).to_string())
        }
        _ => {
            let res = c.resolution.clone().unwrap_or(Resolution::Uniform(8)).scaled(factor);
            let label = res.label();
            r.resolution = Some(res);
            (r, label)
        }
    }
}

/// Re-runs the named check at each factor times its resolution (or step
/// count). The self-difference is the largest componentwise change of the
/// check's quantity from the previous row; the observed order compares
/// consecutive self-differences.
pub fn converge(s: &Scenario, check: &str, factors: &[usize]) -> Result<Vec<ConvergenceRow>, ConfigError> {
    let target = s.checks.iter().find(|c| c.name == check).ok_or_else(|| ConfigError::Invalid {
        context: "--check".into(),
        message: format!("unknown check name '{check}'"),
    })?;
    if !target.config.kind.is_refinable() {
        return Err(ConfigError::Invalid {
            context: "--check".into(),
            message: format!("check '{check}' is neither quadrature- nor ODE-based"),
        });
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev: Option<(usize, Vec<f64>)> = None;
    let mut prev_diff: Option<f64> = None;
    for &f in factors {
        let (cfg, label) = refined(&target.config, f);
        let o = evaluate(s, &cfg).map_err(|e| ConfigError::Invalid { context: format!("check '{check}'"), message: e })?;
        let q = if o.quantity.is_empty() { vec![o.value] } else { o.quantity };
        let diff = prev.as_ref().map(|(_, p)| p.iter().zip(&q).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        let order = match (prev_diff, diff, &prev) {
            (Some(d0), Some(d1), Some((pf, _))) if d0 > 0.0 && d1 > 0.0 => Some((d0 / d1).ln() / (f as f64 / *pf as f64).ln()),
            _ => None,
        };
        rows.push(ConvergenceRow { resolution: label, value: o.value, self_difference: diff, observed_order: order });
        prev_diff = diff;
        prev = Some((f, q));
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut out = String::from("resolution,value,self_difference,observed_order\n");
    for r in rows {
        out.push_str(&format!("{},{:e},{},{}\n", r.resolution, r.value, opt(r.self_difference), opt(r.observed_order)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> CheckConfig {
        serde_json::from_str(&format!(r#"{{"kind": "volume"{extra}}}"#)).unwrap()
    }

    #[test]
    fn expectation_overrides_default_threshold() {
        assert!(judge(&cfg(r#", "expect": 2, "tolerance": 0.1"#), 2.05, Some(1e-9)).0);
        assert!(!judge(&cfg(r#", "expect": 2, "tolerance": 0.1"#), 2.2, Some(1e-9)).0);
        assert!(judge(&cfg(r#", "expect": 200, "tolerance": 1e-3, "relative": true"#), 200.1, None).0);
    }

    #[test]
    fn bounds_and_defaults() {
        assert!(judge(&cfg(""), 1e-10, Some(1e-9)).0);
        assert!(!judge(&cfg(""), 1e-8, Some(1e-9)).0);
        assert!(judge(&cfg(r#", "expect_above": 1"#), 2.0, None).0);
        assert!(!judge(&cfg(r#", "expect_below": 1, "expect_above": 0.5"#), 0.1, None).0);
        let (ok, rule) = judge(&cfg(""), 123.0, None);
        assert!(ok && rule == "informational");
    }

    #[test]
    fn csv_leaves_missing_entries_empty() {
        let rows = [
            ConvergenceRow { resolution: "8".into(), value: 1.0, self_difference: None, observed_order: None },
            ConvergenceRow { resolution: "16".into(), value: 0.5, self_difference: Some(0.5), observed_order: None },
        ];
        assert_eq!(convergence_csv(&rows), "resolution,value,self_difference,observed_order\n8,1e0,,\n16,5e-1,5e-1,\n");
    }
}
