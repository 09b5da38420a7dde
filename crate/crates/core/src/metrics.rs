//! Trajectory quality measures: action, power, smoothness, plus per-cell
//! aggregation of benchmark runs.

use crate::geom::Vec2;
use crate::planners::SolutionPath;
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("motion {index}: trace has {got} samples, expected {expected}")]
    CorruptTrace { index: usize, got: usize, expected: usize },
    #[error("motion {index}: control duration is not a whole number of steps")]
    BadDuration { index: usize },
    #[error("cannot aggregate an empty run list")]
    NoRuns,
}

/// One control of a solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment {
    pub force: Vec2,
    pub duration: f64,
    /// Robot arc length over the segment.
    pub path_length: f64,
    /// Net robot displacement.
    pub displacement: Vec2,
    /// Robot velocity at every substep, both ends included.
    pub velocity_trace: Vec<Vec2>,
}

/// One segment per non-root motion, in path order.
pub fn segments_from_path(path: &SolutionPath, scene: &Scene) -> Result<Vec<TrajectorySegment>, MetricsError> {
    let per_step = scene.dynamics.substeps_per_step();
    let mut out = Vec::with_capacity(path.motions.len().saturating_sub(1));
    for (index, m) in path.motions.iter().enumerate().skip(1) {
        let Some(control) = m.control else {
            return Err(MetricsError::BadDuration { index });
        };
        let steps = control
            .steps(scene.dynamics.control_step)
            .map_err(|_| MetricsError::BadDuration { index })?;
        let expected = steps as usize * per_step + 1;
        if m.trace.len() != expected {
            return Err(MetricsError::CorruptTrace {
                index,
                got: m.trace.len(),
                expected,
            });
        }
        let first = m.trace[0].pos;
        let last = m.trace[m.trace.len() - 1].pos;
        out.push(TrajectorySegment {
            force: control.force,
            duration: control.duration,
            path_length: m.path_length(),
            displacement: last - first,
            velocity_trace: m.trace.iter().map(|s| s.vel).collect(),
        });
    }
    Ok(out)
}

/// `Σ |f_i| Δt_i ε_i`.
pub fn action(segments: &[TrajectorySegment]) -> f64 {
    segments.iter().map(|s| s.force.norm() * s.duration * s.path_length).sum()
}

/// `Σ (f_i · d_i) / Δt_i`, signed.
pub fn power(segments: &[TrajectorySegment]) -> f64 {
    segments.iter().map(|s| s.force.dot(s.displacement) / s.duration).sum()
}

/// Squared-jerk integral from double finite differences of the joined
/// velocity traces at spacing `h`. The sample shared by consecutive
/// segments is used once. Fewer than three samples give 0.
pub fn smoothness(segments: &[TrajectorySegment], h: f64) -> f64 {
    let mut v: Vec<Vec2> = Vec::new();
    for s in segments {
        let skip = usize::from(!v.is_empty());
        v.extend(s.velocity_trace.iter().skip(skip));
    }
    smoothness_of_velocities(&v, h)
}

pub fn smoothness_of_velocities(v: &[Vec2], h: f64) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in v.windows(3) {
        let a0 = (w[1] - w[0]) * (1.0 / h);
        let a1 = (w[2] - w[1]) * (1.0 / h);
        let j = (a1 - a0) * (1.0 / h);
        total += j.norm_sq() * h;
    }
    total
}

/// Outcome of one run. Failed runs carry infinite metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub action: f64,
    pub power: f64,
    pub smoothness: f64,
    pub planning_time: f64,
    pub success: bool,
}

impl MetricsReport {
    pub fn from_segments(segments: &[TrajectorySegment], h: f64, planning_time: f64) -> Self {
        MetricsReport {
            action: action(segments),
            power: power(segments),
            smoothness: smoothness(segments, h),
            planning_time,
            success: true,
        }
    }

    pub fn failure(planning_time: f64) -> Self {
        MetricsReport {
            action: f64::INFINITY,
            power: f64::INFINITY,
            smoothness: f64::INFINITY,
            planning_time,
            success: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean over all runs; failed runs count at their recorded time.
    pub planning_time: f64,
    /// Means over successful runs, infinite when there are none.
    pub action: f64,
    pub power: f64,
    pub smoothness: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| s / n as f64)
}

/// Success rate and mean metrics. With no successes the metric means are
/// infinite and the planning time is `max_time`.
pub fn aggregate(runs: &[MetricsReport], max_time: f64) -> Result<Summary, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::NoRuns);
    }
    let ok = || runs.iter().filter(|r| r.success);
    let successes = ok().count();
    let inf = f64::INFINITY;
    let planning_time = if successes == 0 {
        max_time
    } else {
        mean(runs.iter().map(|r| r.planning_time)).expect("non-empty")
    };
    Ok(Summary {
        runs: runs.len(),
        successes,
        success_rate: successes as f64 / runs.len() as f64,
        planning_time,
        action: mean(ok().map(|r| r.action)).unwrap_or(inf),
        power: mean(ok().map(|r| r.power)).unwrap_or(inf),
        smoothness: mean(ok().map(|r| r.smoothness)).unwrap_or(inf),
    })
}
