//! Scene description, the versioned TOML scene document, and the three
//! built-in benchmark scenes.

mod builtin;
mod reach;

pub use builtin::{builtin_scene, BuiltinScene};
pub use reach::{static_reachability, Reachability};

use crate::geom::{Rect, Vec2};
use crate::world::{collide, Body, BodyKind, PushAxis, Shape, CONTACT_TOLERANCE, SUBSTEP};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_F_MAX: f64 = 10.0;
pub const DEFAULT_CONTROL_STEP: f64 = 0.07;
pub const DEFAULT_MU: f64 = 0.5;
pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_ROBOT_MASS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document is malformed: {0}")]
    Malformed(String),
    #[error("unsupported scene schema {found} (expected {SCHEMA_VERSION})")]
    UnsupportedSchema { found: u32 },
    #[error("{path}: {reason}")]
    InvalidField { path: String, reason: String },
    #[error("{path}: duplicate body id `{id}`")]
    DuplicateId { path: String, id: String },
    #[error("{path}: lies outside the world bounds")]
    OutOfBounds { path: String },
    #[error("{path}: interpenetrates body `{other}` by {depth:.4} m")]
    Interpenetration { path: String, other: String, depth: f64 },
    #[error("cannot read scene file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub radius: f64,
    pub mass: f64,
    pub start: Vec2,
    pub goal: Vec2,
    pub goal_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub f_max: f64,
    pub control_step: f64,
    /// Ground friction coefficient of the robot, and the default for bodies.
    pub mu: f64,
    pub gravity: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics {
            f_max: DEFAULT_F_MAX,
            control_step: DEFAULT_CONTROL_STEP,
            mu: DEFAULT_MU,
            gravity: DEFAULT_GRAVITY,
        }
    }
}

impl Dynamics {
    pub fn substeps_per_step(&self) -> usize {
        ((self.control_step / SUBSTEP).round() as usize).max(1)
    }

    /// Integration substep actually used: the control step split evenly.
    pub fn substep(&self) -> f64 {
        self.control_step / self.substeps_per_step() as f64
    }
}

/// A validated, immutable planning world.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub bounds: Rect,
    pub robot: Robot,
    pub dynamics: Dynamics,
    pub bodies: Vec<Body>,
    pub(crate) robot_shape: Shape,
    movable: Vec<usize>,
    slots: Vec<Option<usize>>,
}

impl Scene {
    /// Indices into `bodies` of every non-Fixed body, in declaration order.
    pub fn movable(&self) -> &[usize] {
        &self.movable
    }

    /// Position of body `index` inside [`crate::world::WorldState::bodies`].
    pub fn slot(&self, index: usize) -> Option<usize> {
        self.slots[index]
    }

    pub fn body_index(&self, id: &str) -> Option<usize> {
        self.bodies.iter().position(|b| b.id == id)
    }

    pub fn robot_shape(&self) -> &Shape {
        &self.robot_shape
    }

    pub fn from_toml(text: &str) -> Result<Scene, SceneError> {
        let doc: SceneDoc = toml::from_str(text).map_err(|e| SceneError::Malformed(e.to_string()))?;
        doc.into_scene()
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scene::from_toml(&text)
    }

    /// Full scene document with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&SceneDoc::from(self)).expect("scene documents always serialize")
    }

    fn new(
        name: String,
        bounds: Rect,
        robot: Robot,
        dynamics: Dynamics,
        bodies: Vec<Body>,
    ) -> Result<Scene, SceneError> {
        let mut movable = Vec::new();
        let mut slots = Vec::with_capacity(bodies.len());
        for (i, b) in bodies.iter().enumerate() {
            if b.is_fixed() {
                slots.push(None);
            } else {
                slots.push(Some(movable.len()));
                movable.push(i);
            }
        }
        let scene = Scene {
            name,
            bounds,
            robot_shape: Shape::Disc {
                radius: robot.radius,
            },
            robot,
            dynamics,
            bodies,
            movable,
            slots,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<(), SceneError> {
        let invalid = |path: &str, reason: &str| SceneError::InvalidField {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let b = &self.bounds;
        if !(b.min.is_finite() && b.max.is_finite() && b.min.x < b.max.x && b.min.y < b.max.y) {
            return Err(invalid("bounds", "min must be strictly below max"));
        }
        let r = &self.robot;
        if !(r.radius > 0.0) {
            return Err(invalid("robot.radius", "must be positive"));
        }
        if !(r.mass > 0.0) {
            return Err(invalid("robot.mass", "must be positive"));
        }
        if !(r.goal_radius > 0.0) {
            return Err(invalid("robot.goal_radius", "must be positive"));
        }
        let d = &self.dynamics;
        if !(d.f_max > 0.0) {
            return Err(invalid("dynamics.f_max", "must be positive"));
        }
        if !(d.control_step > 0.0) {
            return Err(invalid("dynamics.control_step", "must be positive"));
        }
        if !(d.mu >= 0.0) {
            return Err(invalid("dynamics.mu", "must be non-negative"));
        }
        if !(d.gravity >= 0.0) {
            return Err(invalid("dynamics.gravity", "must be non-negative"));
        }
        if !b.inflate(-r.radius).contains(r.start) {
            return Err(SceneError::OutOfBounds {
                path: "robot.start".into(),
            });
        }
        if !b.contains(r.goal) {
            return Err(SceneError::OutOfBounds {
                path: "robot.goal".into(),
            });
        }
        for (i, body) in self.bodies.iter().enumerate() {
            let path = format!("bodies[{i}]");
            if self.bodies[..i].iter().any(|o| o.id == body.id) {
                return Err(SceneError::DuplicateId {
                    path: format!("{path}.id"),
                    id: body.id.clone(),
                });
            }
            validate_shape(&body.shape).map_err(|reason| SceneError::InvalidField {
                path: format!("{path}.shape"),
                reason,
            })?;
            if !body.is_fixed() && !body.mass.is_some_and(|m| m > 0.0) {
                return Err(invalid(&format!("{path}.mass"), "movable bodies need a positive mass"));
            }
            if !(body.friction_mu >= 0.0) {
                return Err(invalid(&format!("{path}.friction_mu"), "must be non-negative"));
            }
            if let Some(c) = collide(&self.robot_shape, r.start, &body.shape, body.pose) {
                if c.depth > CONTACT_TOLERANCE {
                    return Err(SceneError::Interpenetration {
                        path: "robot.start".into(),
                        other: body.id.clone(),
                        depth: c.depth,
                    });
                }
            }
            if !body.is_fixed() {
                for other in &self.bodies[..i] {
                    if let Some(c) = collide(&body.shape, body.pose, &other.shape, other.pose) {
                        if c.depth > CONTACT_TOLERANCE {
                            return Err(SceneError::Interpenetration {
                                path: format!("{path}.pose"),
                                other: other.id.clone(),
                                depth: c.depth,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_shape(shape: &Shape) -> Result<(), String> {
    match shape {
        Shape::Disc { radius } if !(*radius > 0.0) => Err("disc radius must be positive".into()),
        Shape::Box {
            half_width,
            half_height,
        } if !(*half_width > 0.0 && *half_height > 0.0) => {
            Err("box half extents must be positive".into())
        }
        Shape::ConvexPolygon { vertices } => {
            let n = vertices.len();
            if n < 3 {
                return Err("polygon needs at least 3 vertices".into());
            }
            for i in 0..n {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let c = vertices[(i + 2) % n];
                if !((b - a).cross(c - b) > 0.0) {
                    return Err("polygon vertices must be counter-clockwise and strictly convex".into());
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Programmatic scene construction, validated on [`SceneBuilder::build`].
#[derive(Debug, Clone)]
pub struct SceneBuilder {
    name: String,
    bounds: Rect,
    robot: Robot,
    dynamics: Dynamics,
    bodies: Vec<Body>,
}

impl SceneBuilder {
    pub fn new(bounds: Rect) -> Self {
        SceneBuilder {
            name: "custom".into(),
            bounds,
            robot: Robot {
                radius: 0.5,
                mass: DEFAULT_ROBOT_MASS,
                start: bounds.center(),
                goal: bounds.center(),
                goal_radius: 1.0,
            },
            dynamics: Dynamics::default(),
            bodies: Vec::new(),
        }
    }

    pub fn name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    /// Robot disc; the goal radius defaults to twice the robot radius.
    pub fn robot(mut self, radius: f64, mass: f64, start: Vec2, goal: Vec2) -> Self {
        self.robot = Robot {
            radius,
            mass,
            start,
            goal,
            goal_radius: 2.0 * radius,
        };
        self
    }

    pub fn goal_radius(mut self, r: f64) -> Self {
        self.robot.goal_radius = r;
        self
    }

    pub fn dynamics(mut self, d: Dynamics) -> Self {
        self.dynamics = d;
        self
    }

    /// Sets the robot friction and the default for bodies added afterwards.
    pub fn mu(mut self, mu: f64) -> Self {
        self.dynamics.mu = mu;
        self
    }

    pub fn body(
        mut self,
        id: &str,
        kind: BodyKind,
        shape: Shape,
        pose: Vec2,
        mass: Option<f64>,
        axis: PushAxis,
    ) -> Self {
        self.bodies.push(Body {
            id: id.into(),
            kind,
            shape,
            pose,
            mass: if kind == BodyKind::Fixed { None } else { mass },
            friction_mu: self.dynamics.mu,
            allowed_push_axis: axis,
        });
        self
    }

    pub fn fixed(self, id: &str, shape: Shape, pose: Vec2) -> Self {
        self.body(id, BodyKind::Fixed, shape, pose, None, PushAxis::Any)
    }

    pub fn build(self) -> Result<Scene, SceneError> {
        Scene::new(self.name, self.bounds, self.robot, self.dynamics, self.bodies)
    }
}

// ---- document schema ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    bounds: BoundsDoc,
    robot: RobotDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dynamics: Option<DynamicsDoc>,
    #[serde(default)]
    bodies: Vec<BodyDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDoc {
    min: Vec2,
    max: Vec2,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
    start: Vec2,
    goal: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal_radius: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gravity: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    id: String,
    kind: BodyKind,
    shape: Shape,
    pose: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    friction_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allowed_push_axis: Option<PushAxis>,
}

impl SceneDoc {
    fn into_scene(self) -> Result<Scene, SceneError> {
        if self.schema != SCHEMA_VERSION {
            return Err(SceneError::UnsupportedSchema { found: self.schema });
        }
        let dd = self.dynamics.unwrap_or_default();
        let dynamics = Dynamics {
            f_max: dd.f_max.unwrap_or(DEFAULT_F_MAX),
            control_step: dd.control_step.unwrap_or(DEFAULT_CONTROL_STEP),
            mu: dd.mu.unwrap_or(DEFAULT_MU),
            gravity: dd.gravity.unwrap_or(DEFAULT_GRAVITY),
        };
        let robot = Robot {
            radius: self.robot.radius,
            mass: self.robot.mass.unwrap_or(DEFAULT_ROBOT_MASS),
            start: self.robot.start,
            goal: self.robot.goal,
            goal_radius: self.robot.goal_radius.unwrap_or(2.0 * self.robot.radius),
        };
        let bodies = self
            .bodies
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                if b.kind == BodyKind::ConstraintOriented && b.allowed_push_axis.is_none() {
                    return Err(SceneError::InvalidField {
                        path: format!("bodies[{i}].allowed_push_axis"),
                        reason: "required for constraint_oriented bodies".into(),
                    });
                }
                Ok(Body {
                    id: b.id,
                    kind: b.kind,
                    shape: b.shape,
                    pose: b.pose,
                    mass: if b.kind == BodyKind::Fixed { None } else { b.mass },
                    friction_mu: b.friction_mu.unwrap_or(dynamics.mu),
                    allowed_push_axis: b.allowed_push_axis.unwrap_or_default(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Scene::new(
            self.name.unwrap_or_else(|| "unnamed".into()),
            Rect::new(self.bounds.min, self.bounds.max),
            robot,
            dynamics,
            bodies,
        )
    }
}

impl From<&Scene> for SceneDoc {
    fn from(s: &Scene) -> Self {
        SceneDoc {
            schema: SCHEMA_VERSION,
            name: Some(s.name.clone()),
            bounds: BoundsDoc {
                min: s.bounds.min,
                max: s.bounds.max,
            },
            robot: RobotDoc {
                radius: s.robot.radius,
                mass: Some(s.robot.mass),
                start: s.robot.start,
                goal: s.robot.goal,
                goal_radius: Some(s.robot.goal_radius),
            },
            dynamics: Some(DynamicsDoc {
                f_max: Some(s.dynamics.f_max),
                control_step: Some(s.dynamics.control_step),
                mu: Some(s.dynamics.mu),
                gravity: Some(s.dynamics.gravity),
            }),
            bodies: s
                .bodies
                .iter()
                .map(|b| BodyDoc {
                    id: b.id.clone(),
                    kind: b.kind,
                    shape: b.shape.clone(),
                    pose: b.pose,
                    mass: b.mass,
                    friction_mu: Some(b.friction_mu),
                    allowed_push_axis: (b.kind == BodyKind::ConstraintOriented)
                        .then_some(b.allowed_push_axis),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = 1
[bounds]
min = [0.0, 0.0]
max = [10.0, 10.0]
[robot]
radius = 0.5
start = [1.0, 1.0]
goal = [9.0, 9.0]
"#;

    #[test]
    fn minimal_document_fills_defaults() {
        let s = Scene::from_toml(MINIMAL).unwrap();
        assert!(s.bodies.is_empty());
        assert_eq!(s.dynamics.f_max, 10.0);
        assert_eq!(s.dynamics.control_step, 0.07);
        assert_eq!(s.dynamics.mu, 0.5);
        assert_eq!(s.robot.goal_radius, 1.0);
        assert_eq!(s.dynamics.substeps_per_step(), 10);
    }

    #[test]
    fn integers_are_accepted_for_floats() {
        let doc = MINIMAL.replace("[10.0, 10.0]", "[10, 10]");
        let s = Scene::from_toml(&doc).unwrap();
        assert_eq!(s.bounds.max, Vec2::new(10.0, 10.0));
    }

    fn with_bodies(bodies: &str) -> String {
        format!("{MINIMAL}\n{bodies}")
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let doc = with_bodies(
            r#"
[[bodies]]
id = "crate"
kind = "fixed"
pose = [5.0, 5.0]
shape = { type = "box", half_width = 0.5, half_height = 0.5 }
[[bodies]]
id = "crate"
kind = "free_manipulatable"
mass = 1.0
pose = [7.0, 5.0]
shape = { type = "box", half_width = 0.5, half_height = 0.5 }
"#,
        );
        match Scene::from_toml(&doc) {
            Err(SceneError::DuplicateId { id, path }) => {
                assert_eq!(id, "crate");
                assert_eq!(path, "bodies[1].id");
            }
            other => panic!("expected duplicate id, got {other:?}"),
        }
    }

    #[test]
    fn start_outside_bounds() {
        let doc = MINIMAL.replace("start = [1.0, 1.0]", "start = [-1.0, 1.0]");
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::OutOfBounds { path }) if path == "robot.start"
        ));
        let doc = MINIMAL.replace("goal = [9.0, 9.0]", "goal = [9.0, 19.0]");
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::OutOfBounds { path }) if path == "robot.goal"
        ));
    }

    #[test]
    fn start_interpenetration() {
        let doc = with_bodies(
            r#"
[[bodies]]
id = "rock"
kind = "fixed"
pose = [1.2, 1.0]
shape = { type = "disc", radius = 0.3 }
"#,
        );
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::Interpenetration { other, .. }) if other == "rock"
        ));
    }

    #[test]
    fn schema_and_shape_errors() {
        let doc = MINIMAL.replace("schema = 1", "schema = 2");
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::UnsupportedSchema { found: 2 })
        ));
        let doc = MINIMAL.replace("radius = 0.5", "radius = \"big\"");
        assert!(matches!(Scene::from_toml(&doc), Err(SceneError::Malformed(_))));
        let doc = with_bodies(
            r#"
[[bodies]]
id = "tri"
kind = "fixed"
pose = [5.0, 5.0]
shape = { type = "convex_polygon", vertices = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]] }
"#,
        );
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::InvalidField { path, .. }) if path == "bodies[0].shape"
        ));
        let doc = with_bodies(
            r#"
[[bodies]]
id = "b"
kind = "free_manipulatable"
pose = [5.0, 5.0]
shape = { type = "box", half_width = 0.5, half_height = 0.5 }
"#,
        );
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::InvalidField { path, .. }) if path == "bodies[0].mass"
        ));
        let doc = with_bodies(
            r#"
[[bodies]]
id = "b"
kind = "constraint_oriented"
mass = 1.0
pose = [5.0, 5.0]
shape = { type = "box", half_width = 0.5, half_height = 0.5 }
"#,
        );
        assert!(matches!(
            Scene::from_toml(&doc),
            Err(SceneError::InvalidField { path, .. }) if path == "bodies[0].allowed_push_axis"
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        for which in BuiltinScene::ALL {
            let s = builtin_scene(which);
            let again = Scene::from_toml(&s.to_toml()).unwrap();
            assert_eq!(s, again);
        }
    }
}
