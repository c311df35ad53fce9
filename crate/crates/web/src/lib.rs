//! Browser demo bindings. Each export has a plain Rust twin returning
//! `Result<String, String>` so the logic is testable off the browser.

use serde_json::json;
use wasm_bindgen::prelude::*;

use incon_core::constraints::mentioned_relations;
use incon_core::csvio::{read_csv_inferred, relation_to_string, CsvOptions};
use incon_core::datasets::{airport_example, stock_like, AIRPORT_CONSTRAINTS, STOCK_CONSTRAINTS};
use incon_core::harness::builtin_fixtures;
use incon_core::measures::{evaluate_all, MeasureConfig, MeasureKind};
use incon_core::noise::NoiseConfig;
use incon_core::trajectory::{run_trajectory, to_csv, TrajectoryOptions, TrajectorySource};
use incon_core::{parse_constraints, ConstraintSet, Database};

fn load(csv: &str, constraints: &str) -> Result<(Database, ConstraintSet), String> {
    let relation = match mentioned_relations(constraints).as_slice() {
        [r] => r.clone(),
        [] => return Err("the constraints mention no relation".into()),
        many => return Err(format!("the demo takes one relation; constraints mention {}", many.join(", "))),
    };
    let db = read_csv_inferred(csv, &relation, &CsvOptions::default()).map_err(|e| e.to_string())?;
    let sigma = parse_constraints(constraints, db.schema()).map_err(|e| e.to_string())?;
    Ok((db, sigma))
}

fn kinds(list: &str) -> Result<Vec<MeasureKind>, String> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

/// `{facts, constraints, results}` where each result is `{measure, value, exact}`
/// or `{measure, error}`.
pub fn measure_report(csv: &str, constraints: &str, measures: &str) -> Result<String, String> {
    let (db, sigma) = load(csv, constraints)?;
    let kinds = kinds(measures)?;
    let results = evaluate_all(&kinds, &db, &sigma, &MeasureConfig::default()).map_err(|e| e.to_string())?;
    let rows: Vec<serde_json::Value> = kinds
        .iter()
        .zip(results)
        .map(|(k, r)| match r {
            Ok(v) => json!({ "measure": k, "value": v.value, "exact": v.exact }),
            Err(e) => json!({ "measure": k, "error": e.to_string() }),
        })
        .collect();
    Ok(json!({ "facts": db.len(), "constraints": sigma.len(), "results": rows }).to_string())
}

/// Trajectory CSV of a CONoise run.
pub fn trajectory_report(
    csv: &str,
    constraints: &str,
    iterations: usize,
    seed: u64,
    measures: &str,
) -> Result<String, String> {
    let (db, sigma) = load(csv, constraints)?;
    let kinds = kinds(measures)?;
    let src = TrajectorySource::Noise(NoiseConfig::conoise(iterations, seed));
    let records = run_trajectory(&db, &sigma, &src, &kinds, TrajectoryOptions::default(), &MeasureConfig::default())
        .map_err(|e| e.to_string())?;
    Ok(to_csv(&records, false))
}

/// JSON array with every built-in fixture and its checks.
pub fn fixture_report() -> Result<String, String> {
    let config = MeasureConfig::default();
    let mut out = Vec::new();
    for f in builtin_fixtures() {
        let checks = f.check(&config).map_err(|e| e.to_string())?;
        out.push(json!({ "name": f.name, "summary": f.summary, "checks": checks }));
    }
    Ok(serde_json::Value::Array(out).to_string())
}

/// `{csv, constraints}` for `airport-d0`, `airport-d1`, `airport-d2` or `stock`.
pub fn example_report(name: &str) -> Result<String, String> {
    let (db, constraints) = match name {
        "airport-d0" => (airport_example(0), AIRPORT_CONSTRAINTS),
        "airport-d1" => (airport_example(1), AIRPORT_CONSTRAINTS),
        "airport-d2" => (airport_example(2), AIRPORT_CONSTRAINTS),
        "stock" => (stock_like(60, 1), STOCK_CONSTRAINTS),
        _ => return Err(format!("unknown example `{name}`")),
    };
    let relation = db.schema().relations().next().expect("one relation").0.to_owned();
    let csv = relation_to_string(&db, &relation).map_err(|e| e.to_string())?;
    Ok(json!({ "csv": csv, "constraints": constraints }).to_string())
}

#[wasm_bindgen]
pub fn measure(csv: &str, constraints: &str, measures: &str) -> Result<String, JsError> {
    measure_report(csv, constraints, measures).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trajectory(csv: &str, constraints: &str, iterations: usize, seed: u32, measures: &str) -> Result<String, JsError> {
    trajectory_report(csv, constraints, iterations, u64::from(seed), measures).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixtures() -> Result<String, JsError> {
    fixture_report().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn example(name: &str) -> Result<String, JsError> {
    example_report(name).map_err(|e| JsError::new(&e))
}
