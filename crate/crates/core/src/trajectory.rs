//! Measure trajectories along noise runs or repair scripts.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::NoiseError;
use crate::measures::{Evaluator, MeasureConfig, MeasureKind};
use crate::model::Database;
use crate::noise::{conoise_step_in_place, rng_from_seed, NoiseAlgorithm, NoiseConfig, RNoise};
use crate::repair::{apply_in_place, RepairScript};

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySource {
    Noise(NoiseConfig),
    Script(RepairScript),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    /// Record every `every` steps (plus step 0 and the final step).
    pub every: usize,
    pub timings: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions { every: 1, timings: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCell {
    pub measure: MeasureKind,
    /// `None` when the measure failed on this step.
    pub value: Option<f64>,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub action: String,
    pub values: Vec<MeasureCell>,
}

impl TrajectoryRecord {
    pub fn value(&self, kind: MeasureKind) -> Option<f64> {
        self.values.iter().find(|c| c.measure == kind).and_then(|c| c.value)
    }
}

fn snapshot(
    step: usize,
    action: String,
    db: &Database,
    sigma: &ConstraintSet,
    measures: &[MeasureKind],
    config: &MeasureConfig,
    timings: bool,
) -> TrajectoryRecord {
    let ev = Evaluator::new(db, sigma, *config);
    let values = measures
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let res = ev.as_ref().map_err(ToString::to_string).and_then(|e| e.evaluate(kind).map_err(|e| e.to_string()));
            let elapsed_ms = timings.then(|| start.elapsed().as_secs_f64() * 1e3);
            match res {
                Ok(v) => MeasureCell {
                    measure: kind,
                    value: Some(v.value),
                    exact: v.exact,
                    error: None,
                    elapsed_ms,
                },
                Err(e) => MeasureCell {
                    measure: kind,
                    value: None,
                    exact: false,
                    error: Some(e),
                    elapsed_ms,
                },
            }
        })
        .collect();
    TrajectoryRecord { step, action, values }
}

/// Runs `source` from `db`, evaluating `measures` at step 0, every
/// `options.every` steps, and at the final step. Measure failures are recorded
/// in the affected cells and never stop the run.
pub fn run_trajectory(
    db: &Database,
    sigma: &ConstraintSet,
    source: &TrajectorySource,
    measures: &[MeasureKind],
    options: TrajectoryOptions,
    config: &MeasureConfig,
) -> Result<Vec<TrajectoryRecord>, NoiseError> {
    let every = options.every.max(1);
    let mut cur = db.clone();
    let mut records = vec![snapshot(0, "start".into(), &cur, sigma, measures, config, options.timings)];
    let mut record = |step: usize, action: String, cur: &Database, last: bool| {
        if step.is_multiple_of(every) || last {
            records.push(snapshot(step, action, cur, sigma, measures, config, options.timings));
        }
    };
    match source {
        TrajectorySource::Script(script) => {
            let n = script.ops.len();
            for (i, op) in script.ops.iter().enumerate() {
                apply_in_place(&mut cur, op);
                record(i + 1, op.to_string(), &cur, i + 1 == n);
            }
        }
        TrajectorySource::Noise(noise) => {
            noise.validate()?;
            let mut rng = rng_from_seed(noise.seed);
            match noise.algorithm {
                NoiseAlgorithm::CONoise { iterations } => {
                    for i in 0..iterations {
                        let action = conoise_step_in_place(&mut cur, sigma, &mut rng)?;
                        record(i + 1, action, &cur, i + 1 == iterations);
                    }
                }
                NoiseAlgorithm::RNoise { alpha, beta } => {
                    let mut gen = RNoise::new(db, sigma, alpha, beta, noise.typo_prob)?;
                    let total = gen.total_steps();
                    let mut i = 0;
                    while let Some(action) = gen.step(&mut cur, &mut rng) {
                        i += 1;
                        record(i, action, &cur, i == total);
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Divides every measure column by its largest finite value (columns whose
/// maximum is 0 are left alone).
pub fn normalize(records: &mut [TrajectoryRecord]) {
    let Some(first) = records.first() else { return };
    let kinds: Vec<MeasureKind> = first.values.iter().map(|c| c.measure).collect();
    for (j, _) in kinds.iter().enumerate() {
        let max = records
            .iter()
            .filter_map(|r| r.values[j].value)
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max);
        if max > 0.0 {
            for r in records.iter_mut() {
                if let Some(v) = r.values[j].value.as_mut() {
                    *v /= max;
                }
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// `step,action,<measure>...[,<measure>_ms...]`; failed cells are empty.
pub fn to_csv(records: &[TrajectoryRecord], timings: bool) -> String {
    let mut out = String::from("step,action");
    let kinds: Vec<MeasureKind> = records
        .first()
        .map(|r| r.values.iter().map(|c| c.measure).collect())
        .unwrap_or_default();
    for k in &kinds {
        write!(out, ",{k}").unwrap();
    }
    if timings {
        for k in &kinds {
            write!(out, ",{k}_ms").unwrap();
        }
    }
    out.push('\n');
    for r in records {
        write!(out, "{},{}", r.step, csv_field(&r.action)).unwrap();
        for c in &r.values {
            match c.value {
                Some(v) => write!(out, ",{v}").unwrap(),
                None => out.push(','),
            }
        }
        if timings {
            for c in &r.values {
                match c.elapsed_ms {
                    Some(ms) => write!(out, ",{ms:.3}").unwrap(),
                    None => out.push(','),
                }
            }
        }
        out.push('\n');
    }
    out
}

/// One JSON object per record.
pub fn to_jsonl(records: &[TrajectoryRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}
