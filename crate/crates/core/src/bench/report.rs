use super::{BenchError, BenchmarkSpec, CellSummary, RunRecord};
use crate::metrics::{MetricsReport, Summary};
use crate::planners::{PlannerKind, DEFAULT_GOAL_BIAS};
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CSV_HEADER: [&str; 9] = [
    "scene",
    "planner",
    "run",
    "seed",
    "success",
    "planning_time_s",
    "action",
    "power_w",
    "smoothness",
];

/// One line of `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scene: String,
    pub planner: PlannerKind,
    pub run: usize,
    pub seed: u64,
    pub report: MetricsReport,
}

fn csv_err(path: &Path, e: csv::Error) -> BenchError {
    BenchError::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

/// Floats use Rust's shortest round-trip formatting; infinities print as
/// `inf`.
pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let m = &r.report;
        w.write_record([
            r.scene.clone(),
            r.planner.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            m.success.to_string(),
            m.planning_time.to_string(),
            m.action.to_string(),
            m.power.to_string(),
            m.smoothness.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<CsvRow>, BenchError> {
    let bad = |reason: String| BenchError::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().map_err(|e| bad(format!("row {}: {e}", line + 1)));
        rows.push(CsvRow {
            scene: field(0).to_string(),
            planner: field(1).parse().map_err(|e| bad(format!("row {}: {e}", line + 1)))?,
            run: field(2).parse().map_err(|e| bad(format!("row {}: {e}", line + 1)))?,
            seed: field(3).parse().map_err(|e| bad(format!("row {}: {e}", line + 1)))?,
            report: MetricsReport {
                success: field(4).parse().map_err(|e| bad(format!("row {}: {e}", line + 1)))?,
                planning_time: num(5)?,
                action: num(6)?,
                power: num(7)?,
                smoothness: num(8)?,
            },
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetadata {
    pub name: String,
    pub source: String,
    pub load_time_s: f64,
    pub f_max_n: f64,
    pub control_step_s: f64,
    pub substep_s: f64,
    pub mu: f64,
    pub gravity: f64,
    pub goal_radius_m: f64,
}

/// Run configuration, written before any run starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub profile: String,
    pub runs_per_cell: usize,
    pub timeout_s: f64,
    pub goal_bias: f64,
    pub seed_base: u64,
    pub planners: Vec<String>,
    pub scenes: Vec<SceneMetadata>,
}

impl Metadata {
    pub fn new(spec: &BenchmarkSpec, scenes: &[(String, Scene, f64)]) -> Self {
        Metadata {
            profile: spec.profile.map_or("custom", |p| p.name()).to_string(),
            runs_per_cell: spec.runs_per_cell,
            timeout_s: spec.timeout,
            goal_bias: DEFAULT_GOAL_BIAS,
            seed_base: spec.seed_base,
            planners: spec.planners.iter().map(|p| p.to_string()).collect(),
            scenes: spec
                .scenes
                .iter()
                .zip(scenes)
                .map(|(src, (id, s, t))| SceneMetadata {
                    name: id.clone(),
                    source: src.to_string(),
                    load_time_s: *t,
                    f_max_n: s.dynamics.f_max,
                    control_step_s: s.dynamics.control_step,
                    substep_s: s.dynamics.substep(),
                    mu: s.dynamics.mu,
                    gravity: s.dynamics.gravity,
                    goal_radius_m: s.robot.goal_radius,
                })
                .collect(),
        }
    }
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let text = toml::to_string(value).map_err(|e| BenchError::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

pub fn write_metadata(path: &Path, meta: &Metadata) -> Result<(), BenchError> {
    write_toml(path, meta)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    scene: &'a str,
    planner: String,
    runs: usize,
    successes: usize,
    success_rate: f64,
    planning_time_s: f64,
    action: f64,
    power_w: f64,
    smoothness: f64,
}

impl<'a> SummaryRow<'a> {
    fn new(scene: &'a str, planner: PlannerKind, s: &Summary) -> Self {
        SummaryRow {
            scene,
            planner: planner.to_string(),
            runs: s.runs,
            successes: s.successes,
            success_rate: s.success_rate,
            planning_time_s: s.planning_time,
            action: s.action,
            power_w: s.power,
            smoothness: s.smoothness,
        }
    }
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    cell: Vec<SummaryRow<'a>>,
    overall: Vec<SummaryRow<'a>>,
}

/// Per-cell and overall summaries; infinite markers serialize as `inf`.
pub fn write_summary(path: &Path, cells: &[CellSummary], overall: &[(PlannerKind, Summary)]) -> Result<(), BenchError> {
    let doc = SummaryDoc {
        cell: cells.iter().map(|c| SummaryRow::new(&c.scene, c.planner, &c.summary)).collect(),
        overall: overall.iter().map(|(p, s)| SummaryRow::new("overall", *p, s)).collect(),
    };
    write_toml(path, &doc)
}
