//! Benchmark runner: a (scene × planner × run) matrix with seeded runs,
//! per-cell aggregation and report files.

mod report;
mod svg;

pub use report::{
    read_runs_csv, write_metadata, write_runs_csv, write_summary, CsvRow, Metadata, SceneMetadata, CSV_HEADER,
};
pub use svg::{histogram_svg, write_histograms, HISTOGRAMS};

use crate::metrics::{aggregate, segments_from_path, MetricsError, MetricsReport, Summary};
use crate::planners::{solve, PlanError, PlannerConfig, PlannerKind, PlannerStats, SolutionPath};
use crate::scene::{builtin_scene, BuiltinScene, Scene, SceneError};
use crate::statespace::GoalRegion;
use crate::DEFAULT_GOAL_BIAS;
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

pub const DEFAULT_RUNS_PER_CELL: usize = 10;
pub const PAPER_TIMEOUT: f64 = 500.0;
pub const DESK_TIMEOUT: f64 = 60.0;
pub const SEED_ENV: &str = "KINOBENCH_SEED";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("planner failed: {0}")]
    Plan(#[from] PlanError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Paper,
    Desk,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        }
    }

    pub fn timeout(self) -> f64 {
        match self {
            Profile::Paper => PAPER_TIMEOUT,
            Profile::Desk => DESK_TIMEOUT,
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            _ => Err(format!("unknown profile `{s}` (expected paper or desk)")),
        }
    }
}

/// A scene given by built-in name or file path.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneRef {
    Builtin(BuiltinScene),
    File(PathBuf),
}

impl SceneRef {
    /// `builtin:<name>` selects a built-in scene; anything else is a path.
    pub fn parse(s: &str) -> Result<SceneRef, String> {
        match s.strip_prefix("builtin:") {
            Some(name) => name.parse().map(SceneRef::Builtin),
            None => Ok(SceneRef::File(PathBuf::from(s))),
        }
    }

    pub fn load(&self) -> Result<Scene, SceneError> {
        match self {
            SceneRef::Builtin(b) => Ok(builtin_scene(*b)),
            SceneRef::File(p) => Scene::load(p),
        }
    }
}

impl fmt::Display for SceneRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneRef::Builtin(b) => write!(f, "builtin:{b}"),
            SceneRef::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub scenes: Vec<SceneRef>,
    pub planners: Vec<PlannerKind>,
    pub runs_per_cell: usize,
    pub timeout: f64,
    pub seed_base: u64,
    pub out_dir: PathBuf,
    pub profile: Option<Profile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    scenes: Vec<String>,
    planners: Option<Vec<String>>,
    runs_per_cell: Option<usize>,
    timeout: Option<f64>,
    seed_base: Option<u64>,
    out: Option<PathBuf>,
}

impl BenchmarkSpec {
    /// Every built-in scene and planner with the profile's timeout.
    pub fn profile(profile: Profile, out_dir: PathBuf) -> Self {
        BenchmarkSpec {
            scenes: BuiltinScene::ALL.iter().map(|&b| SceneRef::Builtin(b)).collect(),
            planners: PlannerKind::ALL.to_vec(),
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            timeout: profile.timeout(),
            seed_base: 0,
            out_dir,
            profile: Some(profile),
        }
    }

    /// Parses a TOML spec. Relative scene paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, BenchError> {
        let doc: SpecDoc = toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        let planners = match doc.planners {
            None => PlannerKind::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| n.parse())
                .collect::<Result<_, _>>()
                .map_err(BenchError::Spec)?,
        };
        let scenes = doc
            .scenes
            .iter()
            .map(|s| {
                SceneRef::parse(s).map(|r| match r {
                    SceneRef::File(p) if p.is_relative() => SceneRef::File(base.join(p)),
                    r => r,
                })
            })
            .collect::<Result<_, _>>()
            .map_err(BenchError::Spec)?;
        let spec = BenchmarkSpec {
            scenes,
            planners,
            runs_per_cell: doc.runs_per_cell.unwrap_or(DEFAULT_RUNS_PER_CELL),
            timeout: doc.timeout.unwrap_or(PAPER_TIMEOUT),
            seed_base: doc.seed_base.unwrap_or(0),
            out_dir: doc.out.unwrap_or_else(|| PathBuf::from("bench-out")),
            profile: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.scenes.is_empty() || self.planners.is_empty() {
            return Err(BenchError::Spec("at least one scene and one planner are required".into()));
        }
        if self.runs_per_cell == 0 {
            return Err(BenchError::Spec("runs_per_cell must be at least 1".into()));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(BenchError::Spec("timeout must be positive".into()));
        }
        Ok(())
    }

    /// Applies the seed override from the environment, if set.
    pub fn with_env_seed(mut self) -> Result<Self, BenchError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed_base = v
                .trim()
                .parse()
                .map_err(|_| BenchError::Spec(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(self)
    }
}

/// FNV-1a, used to address runs by name.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of run `run` in cell (`scene`, `planner`).
pub fn run_seed(seed_base: u64, scene: &str, planner: PlannerKind, run: usize) -> u64 {
    seed_base ^ fnv1a(format!("{scene}/{planner}/{run}").as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scene: String,
    pub planner: PlannerKind,
    pub run: usize,
    pub seed: u64,
    pub report: MetricsReport,
    pub stats: PlannerStats,
    pub solution: Option<SolutionPath>,
}

/// Plans once and scores the result. Failed runs report `timeout` as
/// their planning time.
pub fn run_once(
    scene: &Scene,
    planner: PlannerKind,
    seed: u64,
    timeout: f64,
) -> Result<(MetricsReport, PlannerStats, Option<SolutionPath>), BenchError> {
    let goal = GoalRegion::of(scene);
    let config = PlannerConfig {
        goal_bias: DEFAULT_GOAL_BIAS,
        ..PlannerConfig::default()
    }
    .with_seed(seed)
    .with_budget(timeout);
    let out = solve(planner, scene, &goal, &config)?;
    let report = match &out.solution {
        Some(path) => {
            let segments = segments_from_path(path, scene)?;
            MetricsReport::from_segments(&segments, scene.dynamics.substep(), out.stats.wall_time)
        }
        None => MetricsReport::failure(timeout),
    };
    Ok((report, out.stats, out.solution))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scene: String,
    pub planner: PlannerKind,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    /// Canonical order: scene, planner, run.
    pub records: Vec<RunRecord>,
    pub cells: Vec<CellSummary>,
    /// Per planner, pooled over every scene.
    pub overall: Vec<(PlannerKind, Summary)>,
}

/// Per-cell and per-planner summaries of `records`.
pub fn summarize(
    records: &[(String, PlannerKind, MetricsReport)],
    scenes: &[String],
    planners: &[PlannerKind],
    timeout: f64,
) -> Result<(Vec<CellSummary>, Vec<(PlannerKind, Summary)>), MetricsError> {
    let mut cells = Vec::new();
    for scene in scenes {
        for &planner in planners {
            let runs: Vec<MetricsReport> = records
                .iter()
                .filter(|(s, p, _)| s == scene && *p == planner)
                .map(|r| r.2)
                .collect();
            cells.push(CellSummary {
                scene: scene.clone(),
                planner,
                summary: aggregate(&runs, timeout)?,
            });
        }
    }
    let mut overall = Vec::new();
    for &planner in planners {
        let runs: Vec<MetricsReport> = records.iter().filter(|r| r.1 == planner).map(|r| r.2).collect();
        overall.push((planner, aggregate(&runs, timeout)?));
    }
    Ok((cells, overall))
}

/// Loads the spec's scenes, returning `(id, scene, load seconds)`.
pub fn load_scenes(spec: &BenchmarkSpec) -> Result<Vec<(String, Scene, f64)>, BenchError> {
    let mut out: Vec<(String, Scene, f64)> = Vec::new();
    for r in &spec.scenes {
        let t = Instant::now();
        let scene = r.load()?;
        let id = match r {
            SceneRef::Builtin(b) => b.name().to_string(),
            SceneRef::File(p) if scene.name.is_empty() => {
                p.file_stem().map_or("scene".into(), |s| s.to_string_lossy().into_owned())
            }
            SceneRef::File(_) => scene.name.clone(),
        };
        if out.iter().any(|(o, _, _)| *o == id) {
            return Err(BenchError::Spec(format!("scene id `{id}` appears twice")));
        }
        out.push((id, scene, t.elapsed().as_secs_f64()));
    }
    Ok(out)
}

/// Runs every cell of `spec` on a pool of `jobs` threads. The metadata
/// file is written before the first run so an unwritable output
/// directory fails early; reports are written at the end.
pub fn run_benchmark(spec: &BenchmarkSpec, jobs: usize) -> Result<BenchResult, BenchError> {
    run_benchmark_with(spec, jobs, |_| {})
}

pub fn run_benchmark_with<F>(spec: &BenchmarkSpec, jobs: usize, progress: F) -> Result<BenchResult, BenchError>
where
    F: Fn(&RunRecord) + Sync,
{
    spec.validate()?;
    let scenes = load_scenes(spec)?;
    prepare_output(spec, &scenes)?;

    let mut jobs_list = Vec::new();
    for (si, (id, _, _)) in scenes.iter().enumerate() {
        for &planner in &spec.planners {
            for run in 0..spec.runs_per_cell {
                jobs_list.push((si, planner, run, run_seed(spec.seed_base, id, planner, run)));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Spec(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs_list
            .par_iter()
            .map(|&(si, planner, run, seed)| {
                let (id, scene, _) = &scenes[si];
                let (report, stats, solution) = run_once(scene, planner, seed, spec.timeout)?;
                let rec = RunRecord {
                    scene: id.clone(),
                    planner,
                    run,
                    seed,
                    report,
                    stats,
                    solution,
                };
                progress(&rec);
                Ok(rec)
            })
            .collect::<Result<_, BenchError>>()
    })?;

    let ids: Vec<String> = scenes.iter().map(|s| s.0.clone()).collect();
    let flat: Vec<_> = records.iter().map(|r| (r.scene.clone(), r.planner, r.report)).collect();
    let (cells, overall) = summarize(&flat, &ids, &spec.planners, spec.timeout)?;
    let result = BenchResult {
        records,
        cells,
        overall,
    };
    emit_reports(&result, spec, &ids)?;
    Ok(result)
}

/// Creates the output directory and writes the run metadata.
pub fn prepare_output(spec: &BenchmarkSpec, scenes: &[(String, Scene, f64)]) -> Result<PathBuf, BenchError> {
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| BenchError::io(&spec.out_dir, e))?;
    let path = spec.out_dir.join("metadata.toml");
    write_metadata(&path, &Metadata::new(spec, scenes))?;
    Ok(path)
}

/// Writes `runs.csv`, `summary.toml` and the histograms.
pub fn emit_reports(result: &BenchResult, spec: &BenchmarkSpec, scene_ids: &[String]) -> Result<(), BenchError> {
    let out = &spec.out_dir;
    write_runs_csv(&out.join("runs.csv"), &result.records)?;
    write_summary(&out.join("summary.toml"), &result.cells, &result.overall)?;
    write_histograms(out, &result.cells, &result.overall, scene_ids, &spec.planners)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_addressed_by_name() {
        let a = run_seed(0, "scene1", PlannerKind::Rrt, 0);
        assert_eq!(a, run_seed(0, "scene1", PlannerKind::Rrt, 0));
        assert_ne!(a, run_seed(0, "scene1", PlannerKind::Rrt, 1));
        assert_ne!(a, run_seed(0, "scene2", PlannerKind::Rrt, 0));
        assert_ne!(a, run_seed(0, "scene1", PlannerKind::Est, 0));
        assert_eq!(run_seed(5, "scene1", PlannerKind::Rrt, 0), a ^ 5);
    }

    #[test]
    fn profiles() {
        let p = BenchmarkSpec::profile(Profile::Paper, PathBuf::from("x"));
        assert_eq!((p.runs_per_cell, p.timeout, p.scenes.len(), p.planners.len()), (10, 500.0, 3, 5));
        let d = BenchmarkSpec::profile(Profile::Desk, PathBuf::from("x"));
        assert_eq!(d.timeout, 60.0);
    }

    #[test]
    fn spec_documents() {
        let s = BenchmarkSpec::from_toml(
            "scenes = [\"builtin:scene2\", \"extra.toml\"]\nplanners = [\"kpiece\"]\nruns_per_cell = 2\ntimeout = 5\n",
            Path::new("/tmp/specs"),
        )
        .unwrap();
        assert_eq!(s.scenes[0], SceneRef::Builtin(BuiltinScene::Scene2));
        assert_eq!(s.scenes[1], SceneRef::File(PathBuf::from("/tmp/specs/extra.toml")));
        assert_eq!(s.planners, vec![PlannerKind::Kpiece]);
        assert_eq!((s.runs_per_cell, s.timeout), (2, 5.0));
        assert!(BenchmarkSpec::from_toml("scenes = [\"builtin:scene1\"]\nplanners = [\"prm\"]\n", Path::new(".")).is_err());
        assert!(BenchmarkSpec::from_toml("scenes = [\"builtin:scene1\"]\nruns_per_cell = 0\n", Path::new(".")).is_err());
        assert!(BenchmarkSpec::from_toml("scenes = []\n", Path::new(".")).is_err());
        assert!(BenchmarkSpec::from_toml("scenes = [\"builtin:scene9\"]\n", Path::new(".")).is_err());
    }

    #[test]
    fn starved_run_fails_cleanly() {
        let scene = builtin_scene(BuiltinScene::Scene3);
        let (report, stats, solution) = run_once(&scene, PlannerKind::Rrt, 1, 1e-9).unwrap();
        assert!(!report.success && solution.is_none());
        assert_eq!(report.planning_time, 1e-9);
        assert!(report.action.is_infinite());
        assert!(stats.wall_time >= 0.0);
    }
}
