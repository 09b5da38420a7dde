//! Kinodynamic motion planning for a force-controlled disc robot that may
//! push objects, with a benchmark harness.

pub mod bench;
pub mod geom;
pub mod metrics;
pub mod planners;
pub mod scene;
pub mod statespace;
pub mod syclop;
pub mod world;

/// Probability of steering toward the goal instead of a random target.
pub const DEFAULT_GOAL_BIAS: f64 = 0.05;
