//! Tree-based kinodynamic planners sharing one motion store and one
//! planner interface.

mod est;
mod kpiece;
pub mod nn;
mod rrt;
mod tree;

pub(crate) use est::EstCore;
pub use est::{est_solve, MilestoneSampler};
pub use kpiece::{brute_force_interior, kpiece_cell_importance, kpiece_solve, Cell, CellCoord, CellGrid, GridStats};
pub(crate) use rrt::finish;
pub use rrt::{rrt_solve, RRT_CANDIDATES};
pub use tree::{revalidate, Motion, MotionTree, RevalidationError, SolutionPath};

use crate::geom::Vec2;
use crate::scene::Scene;
use crate::statespace::{sample_control, GoalRegion};
use crate::syclop::{syclop_solve, LowLevel, SyclopConfig, SyclopStats};
use crate::world::{check_state, propagate, Control, PropagationResult, Violation, WorldError, WorldState};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};
use thiserror::Error;

pub use crate::DEFAULT_GOAL_BIAS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Rrt,
    Est,
    Kpiece,
    SyclopRrt,
    SyclopEst,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Rrt,
        PlannerKind::Est,
        PlannerKind::Kpiece,
        PlannerKind::SyclopRrt,
        PlannerKind::SyclopEst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Rrt => "rrt",
            PlannerKind::Est => "est",
            PlannerKind::Kpiece => "kpiece",
            PlannerKind::SyclopRrt => "syclop-rrt",
            PlannerKind::SyclopEst => "syclop-est",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner `{s}` (expected rrt, est, kpiece, syclop-rrt or syclop-est)"))
    }
}

/// Nearest-neighbour backend. Both return identical arg-mins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NearestNeighbors {
    Linear,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub goal_bias: f64,
    /// Controls tried per expansion; `None` picks the planner default
    /// (10 for RRT, 1 for EST and KPIECE).
    pub candidate_controls_per_expand: Option<usize>,
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
    /// Optional iteration cap, mainly for reproducible tests.
    pub max_iterations: Option<u64>,
    pub seed: u64,
    pub est_radius: f64,
    pub kpiece_cell_size: f64,
    pub kpiece_border_fraction: f64,
    pub nearest: NearestNeighbors,
    pub syclop: SyclopConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            goal_bias: DEFAULT_GOAL_BIAS,
            candidate_controls_per_expand: None,
            time_budget: 60.0,
            max_iterations: None,
            seed: 0,
            est_radius: 1.0,
            kpiece_cell_size: 0.5,
            kpiece_border_fraction: 0.8,
            nearest: NearestNeighbors::Grid,
            syclop: SyclopConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, seconds: f64) -> Self {
        self.time_budget = seconds;
        self
    }

    pub fn with_max_iterations(mut self, n: u64) -> Self {
        self.max_iterations = Some(n);
        self
    }

    fn validate(&self) -> Result<(), PlanError> {
        let bad = |what: &str| Err(PlanError::BadConfig(what.to_string()));
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal_bias must lie in [0, 1]");
        }
        if !(self.time_budget > 0.0) {
            return bad("time_budget must be positive");
        }
        if self.candidate_controls_per_expand == Some(0) {
            return bad("candidate_controls_per_expand must be at least 1");
        }
        if !(self.est_radius > 0.0) || !(self.kpiece_cell_size > 0.0) {
            return bad("radii and cell sizes must be positive");
        }
        if !(0.0..=1.0).contains(&self.kpiece_border_fraction) {
            return bad("kpiece_border_fraction must lie in [0, 1]");
        }
        self.syclop.validate().map_err(PlanError::BadConfig)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlannerStats {
    pub iterations: u64,
    pub motions: usize,
    pub propagations: u64,
    pub invalid_propagations: u64,
    pub wall_time: f64,
    pub grid: Option<GridStats>,
    pub syclop: Option<SyclopStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub solution: Option<SolutionPath>,
    pub stats: PlannerStats,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start state is invalid: {0}")]
    InvalidStart(Violation),
    #[error("invalid planner configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Runs planner `kind` from the scene's start state.
pub fn solve(
    kind: PlannerKind,
    scene: &Scene,
    goal: &GoalRegion,
    config: &PlannerConfig,
) -> Result<PlanOutcome, PlanError> {
    match kind {
        PlannerKind::Rrt => rrt_solve(scene, goal, config),
        PlannerKind::Est => est_solve(scene, goal, config),
        PlannerKind::Kpiece => kpiece_solve(scene, goal, config),
        PlannerKind::SyclopRrt => syclop_solve(scene, goal, config, LowLevel::Rrt),
        PlannerKind::SyclopEst => syclop_solve(scene, goal, config, LowLevel::Est),
    }
}

/// Common start-of-run checks; returns the root state.
pub(crate) fn start_state(scene: &Scene, config: &PlannerConfig) -> Result<WorldState, PlanError> {
    config.validate()?;
    let s = WorldState::initial(scene);
    check_state(&s, scene).map_err(PlanError::InvalidStart)?;
    Ok(s)
}

/// Wall-clock and iteration budget, checked once per iteration.
pub(crate) struct Budget {
    start: Instant,
    limit: Duration,
    max_iterations: Option<u64>,
}

impl Budget {
    pub(crate) fn new(config: &PlannerConfig) -> Self {
        Budget {
            start: Instant::now(),
            limit: Duration::try_from_secs_f64(config.time_budget).unwrap_or(Duration::MAX),
            max_iterations: config.max_iterations,
        }
    }

    pub(crate) fn exhausted(&self, iterations: u64) -> bool {
        self.max_iterations.is_some_and(|m| iterations >= m) || self.start.elapsed() >= self.limit
    }

    pub(crate) fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Propagates `candidates` sampled controls from `from` and keeps the
/// valid endpoint nearest `target` (first one wins ties).
pub(crate) fn best_toward<R: Rng + ?Sized>(
    rng: &mut R,
    scene: &Scene,
    from: &WorldState,
    target: Vec2,
    candidates: usize,
    stats: &mut PlannerStats,
) -> Result<Option<(Control, PropagationResult)>, WorldError> {
    let mut best: Option<(f64, Control, PropagationResult)> = None;
    for _ in 0..candidates {
        let control = sample_control(rng, scene);
        let r = propagate(from, &control, scene)?;
        stats.propagations += 1;
        if !r.valid {
            stats.invalid_propagations += 1;
            continue;
        }
        let d = r.final_state.robot_pos.distance(target);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, control, r));
        }
    }
    Ok(best.map(|(_, c, r)| (c, r)))
}

/// Propagates one sampled control, returning it only if it stayed valid.
pub(crate) fn sample_valid<R: Rng + ?Sized>(
    rng: &mut R,
    scene: &Scene,
    from: &WorldState,
    stats: &mut PlannerStats,
) -> Result<Option<(Control, PropagationResult)>, WorldError> {
    let control = sample_control(rng, scene);
    let r = propagate(from, &control, scene)?;
    stats.propagations += 1;
    if r.valid {
        Ok(Some((control, r)))
    } else {
        stats.invalid_propagations += 1;
        Ok(None)
    }
}
