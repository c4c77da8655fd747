//! Browser bindings for the compiler demo page. All data crosses the
//! boundary as JSON strings; the page owns presentation.
//!
//! Build with the `wasm32-unknown-unknown` target, e.g.
//! `wasm-pack build crates/wasm --target web`.

use wasm_bindgen::prelude::*;

use atomroute_core::metrics::sweep_fsh;
use atomroute_core::pipeline::{compile, CompileArtifact, CompileOptions};
use atomroute_core::qasm::parse_qasm;
use atomroute_core::render::render_svg;

fn compile_qasm_impl(qasm: &str, options_json: &str) -> Result<String, String> {
    let opts: CompileOptions = if options_json.trim().is_empty() {
        CompileOptions::default()
    } else {
        serde_json::from_str(options_json).map_err(|e| format!("options: {e}"))?
    };
    let mut circuit = parse_qasm(qasm).map_err(|e| e.to_string())?;
    circuit.name = "browser".into();
    let artifact = compile(&circuit, &opts).map_err(|e| e.to_string())?;
    Ok(artifact.to_json())
}

fn artifact_svg_impl(artifact_json: &str) -> Result<String, String> {
    let artifact = CompileArtifact::from_json(artifact_json).map_err(|e| e.to_string())?;
    render_svg(&artifact).map_err(|e| e.to_string())
}

fn sweep_impl(artifact_json: &str, values_csv: &str) -> Result<String, String> {
    let artifact = CompileArtifact::from_json(artifact_json).map_err(|e| e.to_string())?;
    let Some(schedule) = &artifact.schedule else {
        return Err("artifact carries no schedule".into());
    };
    let mut values = Vec::new();
    for tok in values_csv.split(',') {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| format!("not a number: `{tok}`"))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(format!("F_sh must lie in (0, 1], got {v}"));
        }
        values.push(v);
    }
    let table = sweep_fsh(schedule, &artifact.config.operating_point, &values);
    let rows: Vec<serde_json::Value> = table
        .iter()
        .map(|(v, lf)| serde_json::json!({ "f_sh": v, "log_fidelity": lf }))
        .collect();
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

/// Compile a QASM string under the given options (JSON; empty string for
/// defaults) and return the full artifact as JSON. Failure outcomes
/// (no-valid-transport, budget) still return an artifact; malformed input
/// raises.
#[wasm_bindgen]
pub fn compile_qasm(qasm: &str, options_json: &str) -> Result<String, JsError> {
    compile_qasm_impl(qasm, options_json).map_err(|e| JsError::new(&e))
}

/// Render a compiled artifact (JSON) to an SVG document.
#[wasm_bindgen]
pub fn artifact_svg(artifact_json: &str) -> Result<String, JsError> {
    artifact_svg_impl(artifact_json).map_err(|e| JsError::new(&e))
}

/// Recompute the log fidelity of an artifact under comma-separated
/// shuttle-fidelity values; returns JSON rows of {f_sh, log_fidelity}.
#[wasm_bindgen]
pub fn sweep_shuttle_fidelity(artifact_json: &str, values_csv: &str) -> Result<String, JsError> {
    sweep_impl(artifact_json, values_csv).map_err(|e| JsError::new(&e))
}

/// Default options document, for the page to edit.
#[wasm_bindgen]
pub fn default_options_json() -> String {
    serde_json::to_string_pretty(&CompileOptions::default()).expect("options serialize")
}
