//! Report structure and its JSON schema.

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub metric_family: &'static str,
    pub dim: usize,
    /// Sign of the contact volume density in chart order, if any check
    /// built a sphere-bundle grid.
    pub grid_sign: Option<i8>,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub kind: &'static str,
    pub inputs: Value,
    pub value: Option<f64>,
    pub passed: bool,
    /// Human-readable pass rule, e.g. `value < 1e-8`.
    pub criterion: String,
    pub details: Map<String, Value>,
    pub worst_location: Option<Value>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// JSON schema (draft 2020-12) of [`Report`].
pub fn report_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "finsler-lab scenario report",
        "type": "object",
        "required": ["tool", "version", "scenario", "seed", "metric_family", "dim", "grid_sign", "passed", "checks"],
        "additionalProperties": false,
        "properties": {
            "tool": {"const": "finsler-lab"},
            "version": {"type": "string"},
            "scenario": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0},
            "metric_family": {"enum": ["euclidean", "riemannian", "randers", "custom", "round-sphere-chart"]},
            "dim": {"type": "integer", "minimum": 2},
            "grid_sign": {"enum": [1, -1, null]},
            "passed": {"type": "boolean"},
            "checks": {"type": "array", "items": {"$ref": "#/$defs/check"}}
        },
        "$defs": {
            "check": {
                "type": "object",
                "required": ["name", "kind", "inputs", "value", "passed", "criterion", "details", "worst_location", "error"],
                "additionalProperties": false,
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": [
                        "validate", "curvature-oracle", "brackets", "affine", "parallel", "flow-affinity", "geodesic",
                        "contact", "volume", "stokes", "total-ricci", "global-norm", "reversibility", "identity",
                        "rigidity", "convergence"
                    ]},
                    "inputs": {"type": "object", "description": "the check object from the scenario file"},
                    "value": {"type": ["number", "null"], "description": "primary result; null if the check errored"},
                    "passed": {"type": "boolean"},
                    "criterion": {"type": "string"},
                    "details": {"type": "object"},
                    "worst_location": {
                        "oneOf": [
                            {"type": "null"},
                            {"type": "object", "properties": {
                                "x": {"type": "array", "items": {"type": "number"}},
                                "y": {"type": "array", "items": {"type": "number"}}
                            }}
                        ]
                    },
                    "error": {"type": ["string", "null"]},
                    "timing_ms": {"type": "number", "description": "present only with --timing"}
                }
            }
        }
    })
}

/// JSON schema of scenario files.
pub fn config_schema() -> Value {
    let num = json!({"oneOf": [{"type": "number"}, {"type": "string", "description": "constant expression, e.g. \"2*pi\""}]});
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "finsler-lab scenario",
        "type": "object",
        "required": ["name", "seed", "domain", "metric"],
        "additionalProperties": false,
        "properties": {
            "name": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0},
            "domain": {
                "type": "object",
                "required": ["axes"],
                "properties": {"axes": {"type": "array", "minItems": 2, "items": {"oneOf": [
                    {"type": "object", "required": ["kind", "period"], "properties": {"kind": {"const": "periodic"}, "period": num}},
                    {"type": "object", "required": ["kind"], "properties": {"kind": {"const": "open"}, "lo": num, "hi": num}}
                ]}}}
            },
            "metric": {"oneOf": [
                {"type": "object", "required": ["family", "dim"], "properties": {"family": {"const": "euclidean"}, "dim": {"type": "integer"}, "matrix": {"type": "array"}}},
                {"type": "object", "required": ["family", "a"], "properties": {"family": {"const": "riemannian"}, "a": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}}}},
                {"type": "object", "required": ["family", "b"], "properties": {"family": {"const": "randers"}, "a": {"type": "array"}, "b": {"type": "array", "items": {"type": "string"}}}},
                {"type": "object", "required": ["family", "dim", "norm"], "properties": {"family": {"const": "custom"}, "dim": {"type": "integer"}, "norm": {"type": "string"}}},
                {"type": "object", "required": ["family", "dim"], "properties": {"family": {"const": "round-sphere-chart"}, "dim": {"type": "integer"}}}
            ]},
            "fields": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
            "functions": {"type": "object", "additionalProperties": {"type": "string"}},
            "checks": {"type": "array", "items": {
                "type": "object",
                "required": ["kind"],
                "properties": {
                    "kind": {"type": "string"},
                    "name": {"type": "string"},
                    "seed": {"type": "integer"},
                    "samples": {"type": "integer", "minimum": 1},
                    "resolution": {"oneOf": [{"type": "integer", "minimum": 8}, {"type": "array", "items": {"type": "integer", "minimum": 8}, "minItems": 3, "maxItems": 3}]},
                    "angular_resolution": {"type": "integer", "minimum": 8},
                    "theta0": num,
                    "field": {"type": "string"},
                    "fields": {"type": "array", "items": {"type": "string"}},
                    "function": {"type": "string"},
                    "functions": {"type": "array", "items": {"type": "string"}},
                    "start": {"type": "object", "properties": {"x": {"type": "array"}, "y": {"type": "array"}}},
                    "t_end": num,
                    "steps": {"type": "integer", "minimum": 1},
                    "order_steps": {"type": "integer", "minimum": 1},
                    "times": {"type": "array", "items": num},
                    "flow_step": num,
                    "geodesics": {"type": "integer", "minimum": 1},
                    "oracle": {"enum": ["flat", "constant-curvature"]},
                    "curvature": num,
                    "target": {"type": "string"},
                    "factors": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    "expect": num,
                    "tolerance": {"type": "number"},
                    "relative": {"type": "boolean"},
                    "expect_below": {"type": "number"},
                    "expect_above": {"type": "number"},
                    "energy_below": {"type": "number"},
                    "d_omega_tolerance": {"type": "number"}
                }
            }}
        }
    })
}
