//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain Rust twin returning
//! `Result<_, String>` so the logic is testable natively.

use std::collections::BTreeMap;

use ifcaudit::benchkit::pairwise_agreement;
use ifcaudit::geomcheck::{
    check_validity, context_precision, evaluate_or_hidden, suite_entries, EvalOptions,
};
use ifcaudit::geomgen::{generate_geometry_suite, SuiteConfig};
use ifcaudit::schema::SchemaVersion;
use ifcaudit::spf::{write_spf, InstanceGraph};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

pub const STUDY_SEGMENTS: [usize; 6] = [8, 16, 32, 64, 128, 256];

fn suite(schema: &str) -> Result<(InstanceGraph, BTreeMap<String, u64>), String> {
    let schema: SchemaVersion = schema.parse().map_err(|e| format!("{e}"))?;
    let (graph, _) =
        generate_geometry_suite(schema, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let roots = suite_entries(&graph)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|e| Some((e.description?, e.root)))
        .collect();
    Ok((graph, roots))
}

fn options(segments: usize) -> EvalOptions {
    EvalOptions {
        segments,
        ..EvalOptions::default()
    }
}

/// Validity and evaluation summary of every suite item, as JSON.
pub fn overview(schema: &str) -> Result<String, String> {
    let (graph, roots) = suite(schema)?;
    let precision = context_precision(&graph).unwrap_or(1e-5);
    let mut rows = Vec::new();
    for (slot, root) in roots {
        let verdict = check_validity(&graph, root, precision).map_err(|e| e.to_string())?;
        let outcome = evaluate_or_hidden(&graph, root, &options(64)).map_err(|e| e.to_string())?;
        rows.push(json!({
            "slot": slot,
            "kind": outcome.shape_class.kind.entity(),
            "valid": verdict.is_valid(),
            "reasons": verdict.reasons,
            "displayed": outcome.displayed,
            "z_relation": outcome.z_relation,
            "volume": outcome.volume(),
            "warnings": outcome.warnings,
        }));
    }
    Ok(Value::Array(rows).to_string())
}

/// Volume, area and triangle count of one item at increasing densities.
pub fn tessellation(schema: &str, slot: &str) -> Result<String, String> {
    let (graph, roots) = suite(schema)?;
    let root = *roots.get(slot).ok_or_else(|| format!("no item {slot}"))?;
    let mut rows = Vec::new();
    for segments in STUDY_SEGMENTS {
        let o = evaluate_or_hidden(&graph, root, &options(segments)).map_err(|e| e.to_string())?;
        rows.push(json!({
            "segments": segments,
            "volume": o.volume(),
            "area": o.area(),
            "triangles": o.mesh.as_ref().map_or(0, |m| m.triangles.len()),
            "smooth": o.smooth_curves,
        }));
    }
    Ok(Value::Array(rows).to_string())
}

/// Flat `[x0, y0, z0, x1, ...]` triangle soup of one item; empty if hidden.
pub fn mesh(schema: &str, slot: &str, segments: usize) -> Result<Vec<f32>, String> {
    let (graph, roots) = suite(schema)?;
    let root = *roots.get(slot).ok_or_else(|| format!("no item {slot}"))?;
    let o = evaluate_or_hidden(&graph, root, &options(segments.clamp(3, 512)))
        .map_err(|e| e.to_string())?;
    let Some(m) = o.mesh else {
        return Ok(Vec::new());
    };
    Ok(m.triangles
        .iter()
        .flat_map(|t| t.iter().map(|&i| m.vertices[i as usize]))
        .flat_map(|p| [p.x as f32, p.y as f32, p.z as f32])
        .collect())
}

/// Per-question pairwise agreement and their mean. One question per line,
/// answers separated by commas.
pub fn agreement(text: &str) -> Result<String, String> {
    let mut scores = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let answers: Vec<String> = line
            .split(',')
            .map(|a| a.trim().to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        let score =
            pairwise_agreement(&answers).ok_or_else(|| format!("need two answers: {line:?}"))?;
        scores.push(json!({ "answers": answers, "score": score }));
    }
    if scores.is_empty() {
        return Err("no answers".into());
    }
    let mean = scores
        .iter()
        .map(|s| s["score"].as_f64().unwrap_or(0.0))
        .sum::<f64>()
        / scores.len() as f64;
    Ok(json!({ "questions": scores, "consistency": mean }).to_string())
}

/// The suite as an IFC file.
pub fn suite_file(schema: &str) -> Result<String, String> {
    let (graph, _) = suite(schema)?;
    String::from_utf8(write_spf(&graph)).map_err(|e| e.to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = suiteOverview)]
pub fn suite_overview(schema: &str) -> Result<String, JsError> {
    js(overview(schema))
}

#[wasm_bindgen(js_name = tessellationStudy)]
pub fn tessellation_study(schema: &str, slot: &str) -> Result<String, JsError> {
    js(tessellation(schema, slot))
}

#[wasm_bindgen(js_name = slotMesh)]
pub fn slot_mesh(schema: &str, slot: &str, segments: usize) -> Result<Vec<f32>, JsError> {
    js(mesh(schema, slot, segments))
}

#[wasm_bindgen(js_name = answerConsistency)]
pub fn answer_consistency(text: &str) -> Result<String, JsError> {
    js(agreement(text))
}

#[wasm_bindgen(js_name = suiteFile)]
pub fn suite_file_js(schema: &str) -> Result<String, JsError> {
    js(suite_file(schema))
}
