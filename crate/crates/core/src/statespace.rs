//! Services shared by every planner: the state metric, control and target
//! sampling, the KPIECE projection and the goal test.

use crate::geom::{Rect, Vec2};
use crate::scene::Scene;
use crate::world::{Control, WorldState};
use rand::Rng;

/// Longest sampled control, in control steps.
pub const MAX_CONTROL_STEPS: u32 = 10;

/// Closed disc around the robot goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalRegion {
    pub center: Vec2,
    pub radius: f64,
}

impl GoalRegion {
    pub fn new(center: Vec2, radius: f64) -> Self {
        assert!(radius > 0.0, "goal radius must be positive");
        GoalRegion { center, radius }
    }

    pub fn of(scene: &Scene) -> Self {
        GoalRegion::new(scene.robot.goal, scene.robot.goal_radius)
    }
}

/// Robot-position projection used for coverage grids.
#[inline]
pub fn project(state: &WorldState) -> Vec2 {
    state.robot_pos
}

/// Euclidean distance between robot positions; body poses are ignored.
#[inline]
pub fn distance(a: &WorldState, b: &WorldState) -> f64 {
    a.robot_pos.distance(b.robot_pos)
}

/// The boundary counts as inside.
#[inline]
pub fn in_goal(state: &WorldState, goal: &GoalRegion) -> bool {
    state.robot_pos.distance(goal.center) <= goal.radius
}

/// Uniform force in `[-f_max, f_max]²`, duration a uniform multiple
/// `1..=MAX_CONTROL_STEPS` of the control step.
pub fn sample_control<R: Rng + ?Sized>(rng: &mut R, scene: &Scene) -> Control {
    let f = scene.dynamics.f_max;
    let fx = rng.random_range(-f..=f);
    let fy = rng.random_range(-f..=f);
    let k = rng.random_range(1..=MAX_CONTROL_STEPS);
    Control::new(Vec2::new(fx, fy), k as f64 * scene.dynamics.control_step)
}

/// Uniform point in `bounds`.
pub fn sample_in<R: Rng + ?Sized>(rng: &mut R, bounds: &Rect) -> Vec2 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    bounds.lerp(u, v)
}

/// The goal centre with probability `goal_bias`, else a uniform point in
/// `bounds`.
pub fn sample_goal_biased_target<R: Rng + ?Sized>(
    rng: &mut R,
    goal: &GoalRegion,
    bounds: &Rect,
    goal_bias: f64,
) -> Vec2 {
    if rng.random::<f64>() < goal_bias {
        goal.center
    } else {
        sample_in(rng, bounds)
    }
}
