//! Deterministic planar physics for a force-controlled disc robot among
//! fixed and pushable bodies.
//!
//! Bodies translate only. Contacts are resolved with fully inelastic normal
//! impulses followed by positional projection; Fixed bodies never move and
//! any penetration into them beyond [`CONTACT_TOLERANCE`] makes the state
//! invalid. Pushes against a constraint-oriented body are only valid on the
//! faces whose normals line up with its allowed push axis.

mod collide;
mod propagate;
mod validity;

pub use collide::{collide, Contact};
pub use propagate::{
    audit_contacts, check_state, propagate, propagate_observed, resolve_contact_impulses, ContactAudit,
    ImpulseContact, PropagationResult, TraceSample,
};
pub use validity::{check_validity, Violation, PUSH_ANGLE_TOLERANCE_DEG};

use crate::geom::Vec2;
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separation below which two shapes are considered touching (m).
pub const CONTACT_TOLERANCE: f64 = 1e-3;

/// Internal integration substep (s).
pub const SUBSTEP: f64 = 0.007;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("control duration {duration} s is not a positive multiple of the control step {step} s")]
    BadDuration { duration: f64, step: f64 },
    #[error("control force ({fx}, {fy}) N exceeds the per-axis bound {f_max} N")]
    ForceOutOfRange { fx: f64, fy: f64, f_max: f64 },
    #[error("state carries {got} movable bodies but the scene has {expected}")]
    BodyMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Fixed,
    FreeManipulatable,
    ConstraintOriented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PushAxis {
    X,
    Y,
    #[default]
    Any,
}

impl PushAxis {
    pub fn direction(self) -> Option<Vec2> {
        match self {
            PushAxis::X => Some(Vec2::X),
            PushAxis::Y => Some(Vec2::Y),
            PushAxis::Any => None,
        }
    }
}

/// Body geometry in the body frame; the body's pose is a translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Disc { radius: f64 },
    Box { half_width: f64, half_height: f64 },
    ConvexPolygon { vertices: Vec<Vec2> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub id: String,
    pub kind: BodyKind,
    pub shape: Shape,
    /// Initial position.
    pub pose: Vec2,
    /// `None` for Fixed bodies.
    pub mass: Option<f64>,
    pub friction_mu: f64,
    pub allowed_push_axis: PushAxis,
}

impl Body {
    pub fn is_fixed(&self) -> bool {
        self.kind == BodyKind::Fixed
    }

    pub fn inv_mass(&self) -> f64 {
        match self.mass {
            Some(m) if !self.is_fixed() => 1.0 / m,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub pos: Vec2,
    pub vel: Vec2,
}

/// Full physical state. `bodies` holds one entry per movable body, in the
/// order of [`Scene::movable`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub robot_pos: Vec2,
    pub robot_vel: Vec2,
    pub bodies: Vec<BodyState>,
    pub time: f64,
}

impl WorldState {
    /// Robot at rest at the scene start with every movable body at its
    /// initial pose.
    pub fn initial(scene: &Scene) -> Self {
        WorldState {
            robot_pos: scene.robot.start,
            robot_vel: Vec2::ZERO,
            bodies: scene
                .movable()
                .iter()
                .map(|&i| BodyState {
                    pos: scene.bodies[i].pose,
                    vel: Vec2::ZERO,
                })
                .collect(),
            time: 0.0,
        }
    }

    /// Current position of scene body `index` (Fixed bodies report their
    /// initial pose).
    pub fn body_pos(&self, scene: &Scene, index: usize) -> Vec2 {
        match scene.slot(index) {
            Some(s) => self.bodies[s].pos,
            None => scene.bodies[index].pose,
        }
    }

    pub fn body_vel(&self, scene: &Scene, index: usize) -> Vec2 {
        scene.slot(index).map_or(Vec2::ZERO, |s| self.bodies[s].vel)
    }

    pub fn kinetic_energy(&self, scene: &Scene) -> f64 {
        let mut e = 0.5 * scene.robot.mass * self.robot_vel.norm_sq();
        for (slot, &i) in scene.movable().iter().enumerate() {
            e += 0.5 * scene.bodies[i].mass.unwrap_or(0.0) * self.bodies[slot].vel.norm_sq();
        }
        e
    }

    pub fn momentum(&self, scene: &Scene) -> Vec2 {
        let mut p = self.robot_vel * scene.robot.mass;
        for (slot, &i) in scene.movable().iter().enumerate() {
            p += self.bodies[slot].vel * scene.bodies[i].mass.unwrap_or(0.0);
        }
        p
    }
}

/// Constant planar force applied to the robot centre for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub force: Vec2,
    pub duration: f64,
}

impl Control {
    pub fn new(force: Vec2, duration: f64) -> Self {
        Control { force, duration }
    }

    /// Number of control steps covered by this control.
    pub fn steps(&self, control_step: f64) -> Result<u32, WorldError> {
        let ratio = self.duration / control_step;
        let k = ratio.round();
        if !ratio.is_finite() || k < 1.0 || (ratio - k).abs() > 1e-9 * k.max(1.0) {
            return Err(WorldError::BadDuration {
                duration: self.duration,
                step: control_step,
            });
        }
        Ok(k as u32)
    }
}

/// Who is on the `a` side of a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Robot,
    Body(usize),
}

/// A contact between `a` (robot or movable body) and scene body `b`.
/// The normal points from `b` to `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRecord {
    pub a: Entity,
    pub b: usize,
    pub contact: Contact,
}
