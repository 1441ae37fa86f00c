//! On-disk report formats. Canonical reports hold no timing so that reruns diff cleanly;
//! wall-clock numbers go to a sibling `.timing.json`.

use std::path::Path;

use qdepth_core::analysis::SuiteReport;
use qdepth_core::models::{Estimate, Model};
use qdepth_core::problems::Variant;
use serde::{Deserialize, Serialize};

pub const SOLVE_SCHEMA: &str = "qdepth.solve-report";
pub const VERIFY_SCHEMA: &str = "qdepth.verify-report";
pub const TIMING_SCHEMA: &str = "qdepth.timing";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: String,
    pub model: Model,
    pub depth_budget: usize,
    pub n: u32,
    pub d: usize,
    pub variant: Variant,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Seed recorded in the instance file, when every trial reuses one instance.
    pub instance_seed: Option<u64>,
}

/// One trial. Trial `t` draws all randomness from stream `t` of the master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub stream: u64,
    pub success: bool,
    pub answer: Option<u64>,
    pub expected: u64,
    pub depth: usize,
    pub oracle_layers: usize,
    pub qbar: usize,
    pub classical_queries: usize,
    pub stochastic_queries: usize,
    pub rounds: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Aggregate {
    pub fn from_rows(rows: &[TrialRow], threshold: f64) -> Self {
        let est = Estimate::from_counts(rows.iter().filter(|r| r.success).count(), rows.len());
        Self {
            successes: est.successes,
            trials: est.trials,
            rate: est.p,
            wilson_lo: est.lo,
            wilson_hi: est.hi,
            threshold,
            pass: est.p >= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: String,
    pub version: u32,
    pub config: SolveConfig,
    pub rows: Vec<TrialRow>,
    pub aggregate: Aggregate,
}

impl SolveReport {
    pub fn new(config: SolveConfig, rows: Vec<TrialRow>) -> Self {
        let aggregate = Aggregate::from_rows(&rows, config.threshold);
        Self { schema: SOLVE_SCHEMA.into(), version: VERSION, config, rows, aggregate }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub version: u32,
    pub report: SuiteReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub trial: usize,
    pub micros: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub schema: String,
    pub version: u32,
    pub total_micros: u64,
    pub rows: Vec<TimingRow>,
}

/// One line of the summary table, also the CSV record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub problem: String,
    pub model: Model,
    pub depth: usize,
    pub n: u32,
    pub d: usize,
    pub seed: u64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub source: String,
}

impl TableRow {
    pub fn from_report(r: &SolveReport, source: &Path) -> Self {
        let name = source.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self {
            problem: r.config.problem.clone(),
            model: r.config.model,
            depth: r.config.depth_budget,
            n: r.config.n,
            d: r.config.d,
            seed: r.config.seed,
            trials: r.aggregate.trials,
            successes: r.aggregate.successes,
            rate: r.aggregate.rate,
            wilson_lo: r.aggregate.wilson_lo,
            wilson_hi: r.aggregate.wilson_hi,
            source: name,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Header row plus one record per item.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
