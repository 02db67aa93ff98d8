//! JSON run summaries and the schema they follow.

use serde_json::{json, Map, Value};

use twvort_core::fields::BoundsCheck;
use twvort_core::{
    CriticalPointReport, DecayReport, Field, MinimizeOptions, NewtonOptions, ParameterSet,
    RadialGrid, ResidualReport, SolveResult,
};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Newton refinement as recorded in a summary.
#[derive(Clone, Debug)]
pub struct NewtonRecord {
    pub options: NewtonOptions,
    pub result: SolveResult,
    /// Sup-norm change from the minimizer's profile.
    pub profile_change: f64,
}

/// Everything a `solve` summary is assembled from.
pub struct RunRecord<'a> {
    pub config: &'a RunConfig,
    pub params: &'a ParameterSet,
    pub grid: &'a RadialGrid,
    pub minimize: &'a MinimizeOptions,
    pub minimizer: &'a SolveResult,
    pub newton: Option<&'a NewtonRecord>,
    pub residuals: &'a ResidualReport,
    pub bounds: &'a BoundsCheck,
    pub decay: &'a DecayReport,
    pub potential: &'a CriticalPointReport,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("summary parts serialize")
}

/// Parameters under the config-file key names.
pub fn params_value(p: &ParameterSet) -> Value {
    json!({
        "beta1": p.beta1,
        "beta2": p.beta2,
        "beta_prime": p.beta_prime,
        "alpha": p.alpha,
        "e1": p.e1,
        "e2": p.e2,
        "N": p.n_wind,
        "M": p.m_wind,
        "omega": p.omega,
    })
}

pub fn grid_value(grid: &RadialGrid) -> Value {
    json!({
        "r_max": grid.r_max(),
        "cells": grid.cells(),
        "grading": to_value(&grid.grading()),
        "first_cell": grid.widths()[0],
        "last_cell": grid.widths()[grid.cells() - 1],
    })
}

pub fn build_summary(rec: &RunRecord<'_>) -> Value {
    let final_result = rec.newton.map(|n| &n.result).unwrap_or(rec.minimizer);
    let m = rec.minimizer;
    let residual_norms: Map<String, Value> = Field::ALL
        .iter()
        .map(|&f| (f.name().to_string(), to_value(&rec.residuals.norms(f))))
        .collect();
    let newton = match rec.newton {
        None => Value::Null,
        Some(n) => json!({
            "options": to_value(&n.options),
            "steps": n.result.iterations,
            "converged": n.result.converged,
            "grad_inf_norm": n.result.grad_inf_norm,
            "energy": n.result.energy.total,
            "profile_change": n.profile_change,
            "fallback_used": n.result.fallback_used,
            "diagnostic": n.result.diagnostic,
        }),
    };
    json!({
        "version": VERSION,
        "mode": rec.config.mode.name(),
        "params": params_value(rec.params),
        "params_text": to_value(&rec.config.params_text),
        "grid": grid_value(rec.grid),
        "solver": {
            "minimize": to_value(rec.minimize),
            "pin_a_end": rec.config.solver.pin_a_end,
            "g_amplitude": rec.config.solver.g_amplitude,
        },
        "energy": to_value(&final_result.energy),
        "convergence": {
            "iterations": m.iterations,
            "grad_inf_norm": m.grad_inf_norm,
            "converged": m.converged,
            "diagnostic": m.diagnostic,
            "history_len": m.history.len(),
        },
        "newton": newton,
        "emergent": to_value(&final_result.emergent),
        "bounds": to_value(rec.bounds),
        "residuals": {
            "norms": Value::Object(residual_norms),
            "max_interior_sup": rec.residuals.max_interior_sup(),
        },
        "decay": to_value(rec.decay),
        "potential": to_value(rec.potential),
    })
}

fn num() -> Value {
    json!({ "type": "number" })
}

fn num_or_null() -> Value {
    json!({ "type": ["number", "null"] })
}

fn obj(required: &[&str], props: Value) -> Value {
    json!({ "type": "object", "required": required, "properties": props })
}

fn fit_entry() -> Value {
    obj(&["status"], json!({ "status": { "type": "string" } }))
}

fn fits() -> Value {
    obj(
        &["a", "b", "f", "g"],
        json!({ "a": fit_entry(), "b": fit_entry(), "f": fit_entry(), "g": fit_entry() }),
    )
}

fn entry_map() -> Value {
    let keys = [
        "a_origin", "b_origin", "f_origin", "g_origin", "a_inf", "b_inf", "f_inf", "g_inf",
    ];
    let props: Map<String, Value> = keys
        .iter()
        .map(|k| (k.to_string(), num_or_null()))
        .collect();
    obj(&keys, Value::Object(props))
}

/// Layout every emitted summary follows, written as a JSON Schema subset
/// (`type`, `required`, `properties`, `const`) that [`validate`] checks.
pub fn summary_schema() -> Value {
    let terms = [
        "gauge_a",
        "gauge_b",
        "grad_f",
        "grad_g",
        "cov_a_f",
        "cov_a_g",
        "twist",
        "potential",
    ];
    let term_props: Map<String, Value> = terms.iter().map(|k| (k.to_string(), num())).collect();
    let param_props = json!({
        "beta1": num(), "beta2": num(), "beta_prime": num(), "alpha": num(),
        "e1": num(), "e2": num(),
        "N": { "type": "integer" }, "M": { "type": "integer" },
        "omega": num(),
    });
    json!({
        "title": "twvort run summary",
        "version": VERSION,
        "type": "object",
        "required": ["version", "params", "grid", "energy", "convergence", "emergent", "decay", "potential"],
        "properties": {
            "version": { "type": "string", "const": VERSION },
            "mode": { "type": "string" },
            "params": obj(&ParameterSet::KEYS, param_props),
            "params_text": { "type": "object" },
            "grid": obj(&["r_max", "cells", "grading"], json!({
                "r_max": num(),
                "cells": { "type": "integer" },
                "grading": obj(&["kind"], json!({ "kind": { "type": "string" } })),
                "first_cell": num(),
                "last_cell": num(),
            })),
            "solver": { "type": "object" },
            "energy": obj(&["total", "terms", "alpha_term", "grad_norm"], json!({
                "total": num(),
                "terms": obj(&terms, Value::Object(term_props)),
                "alpha_term": num(),
                "grad_norm": num(),
            })),
            "convergence": obj(&["iterations", "grad_inf_norm", "converged"], json!({
                "iterations": { "type": "integer" },
                "grad_inf_norm": num(),
                "converged": { "type": "boolean" },
                "diagnostic": { "type": ["string", "null"] },
                "history_len": { "type": "integer" },
            })),
            "newton": { "type": ["object", "null"] },
            "emergent": obj(&["a_end", "b_origin"], json!({ "a_end": num(), "b_origin": num() })),
            "bounds": obj(&["holds"], json!({ "holds": { "type": "boolean" } })),
            "residuals": obj(&["norms"], json!({ "norms": { "type": "object" } })),
            "decay": obj(&["origin", "infinity", "targets", "deviations"], json!({
                "origin": fits(),
                "infinity": fits(),
                "targets": { "type": "object" },
                "deviations": entry_map(),
                "epsilon_slack": entry_map(),
                "f_inf_comparison": obj(&["closer", "linearized", "literal"], json!({
                    "fitted": num_or_null(),
                    "linearized": num(),
                    "literal": num(),
                    "closer": { "type": "string" },
                    "note": { "type": "string" },
                })),
            })),
            "potential": obj(&["classification", "landscape_min"], json!({
                "x0": num(),
                "y0": num(),
                "value_at_cp": num(),
                "classification": { "type": "string" },
                "landscape_min": num(),
                "nonneg_over_domain": { "type": "boolean" },
            })),
        }
    })
}

fn type_matches(v: &Value, ty: &str) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        _ => false,
    }
}

fn check(v: &Value, schema: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(v, t),
            Value::Array(ts) => ts
                .iter()
                .filter_map(Value::as_str)
                .any(|t| type_matches(v, t)),
            _ => true,
        };
        if !ok {
            errors.push(format!("{path}: expected type {ty}, got {v}"));
            return;
        }
    }
    if let Some(c) = schema.get("const") {
        if v != c {
            errors.push(format!("{path}: expected {c}, got {v}"));
        }
    }
    let Some(map) = v.as_object() else { return };
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for k in req.iter().filter_map(Value::as_str) {
            if !map.contains_key(k) {
                errors.push(format!("{path}: missing key '{k}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (k, sub) in props {
            if let Some(child) = map.get(k) {
                check(child, sub, &format!("{path}.{k}"), errors);
            }
        }
    }
}

/// Checks `v` against `schema`, listing every violation with its path.
pub fn validate(v: &Value, schema: &Value) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    check(v, schema, "$", &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Whether the schema describes the dotted path, e.g. `"emergent.b_origin"`.
pub fn schema_has_path(schema: &Value, path: &str) -> bool {
    let mut node = schema;
    for part in path.split('.') {
        match node.get("properties").and_then(|p| p.get(part)) {
            Some(next) => node = next,
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_names_the_documented_keys() {
        let s = summary_schema();
        for path in [
            "params.beta_prime",
            "energy.total",
            "energy.terms",
            "energy.alpha_term",
            "convergence.iterations",
            "convergence.grad_inf_norm",
            "convergence.converged",
            "emergent.a_end",
            "emergent.b_origin",
            "decay.origin",
            "decay.infinity",
            "decay.targets",
            "decay.deviations",
            "potential.classification",
            "potential.landscape_min",
        ] {
            assert!(schema_has_path(&s, path), "{path}");
        }
        assert!(!schema_has_path(&s, "emergent.c_origin"));
        assert_eq!(s["version"], VERSION);
    }

    #[test]
    fn validator_reports_paths() {
        let schema = obj(&["x"], json!({ "x": obj(&["y"], json!({ "y": num() })) }));
        assert!(validate(&json!({ "x": { "y": 1.5 } }), &schema).is_ok());
        let errs = validate(&json!({ "x": { "y": "no" } }), &schema).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].starts_with("$.x.y"));
        let errs = validate(&json!({ "x": {} }), &schema).unwrap_err();
        assert!(errs[0].contains("missing key 'y'"));
        let c = json!({ "const": "1" });
        assert!(validate(&json!("2"), &c).is_err());
    }
}
