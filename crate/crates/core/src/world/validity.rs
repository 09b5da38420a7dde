use super::{BodyKind, ContactRecord, Entity, WorldState, CONTACT_TOLERANCE};
use crate::scene::Scene;
use std::fmt;

/// Maximum angle between a push contact normal and the allowed push axis.
pub const PUSH_ANGLE_TOLERANCE_DEG: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The robot or a movable body sank into a Fixed body.
    FixedPenetration { body: String, depth: f64 },
    /// The robot touched a constraint-oriented body on a face it may not
    /// be pushed from.
    DisallowedPushFace { body: String },
    OutOfBounds,
}

impl Violation {
    pub fn reason(&self) -> &'static str {
        match self {
            Violation::FixedPenetration { .. } => "fixed-body penetration",
            Violation::DisallowedPushFace { .. } => "disallowed push face",
            Violation::OutOfBounds => "out of world bounds",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FixedPenetration { body, depth } => {
                write!(f, "{} ({body}, {depth:.4} m)", self.reason())
            }
            Violation::DisallowedPushFace { body } => write!(f, "{} ({body})", self.reason()),
            Violation::OutOfBounds => f.write_str(self.reason()),
        }
    }
}

/// Manipulation and collision rules for one substep.
///
/// Invalid iff the robot or a movable body penetrates a Fixed body beyond
/// the contact tolerance, the robot touches a constraint-oriented body on a
/// face not aligned (within [`PUSH_ANGLE_TOLERANCE_DEG`]) with its push
/// axis, or the robot disc leaves the world bounds. Contacts with free
/// manipulatable bodies are always allowed.
pub fn check_validity(
    state: &WorldState,
    contacts: &[ContactRecord],
    scene: &Scene,
) -> Result<(), Violation> {
    let r = scene.robot.radius;
    let b = &scene.bounds;
    let p = state.robot_pos;
    if p.x - r < b.min.x - CONTACT_TOLERANCE
        || p.x + r > b.max.x + CONTACT_TOLERANCE
        || p.y - r < b.min.y - CONTACT_TOLERANCE
        || p.y + r > b.max.y + CONTACT_TOLERANCE
    {
        return Err(Violation::OutOfBounds);
    }
    let cos_tol = PUSH_ANGLE_TOLERANCE_DEG.to_radians().cos();
    for rec in contacts {
        let body = &scene.bodies[rec.b];
        match body.kind {
            BodyKind::Fixed => {
                if rec.contact.depth > CONTACT_TOLERANCE {
                    return Err(Violation::FixedPenetration {
                        body: body.id.clone(),
                        depth: rec.contact.depth,
                    });
                }
            }
            BodyKind::ConstraintOriented if rec.a == Entity::Robot => {
                if let Some(axis) = body.allowed_push_axis.direction() {
                    // normal is the outward face normal of the body at the contact
                    if rec.contact.normal.dot(axis).abs() < cos_tol {
                        return Err(Violation::DisallowedPushFace {
                            body: body.id.clone(),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rect, Vec2};
    use crate::scene::SceneBuilder;
    use crate::world::{BodyKind, Contact, PushAxis, Shape};

    fn scene() -> Scene {
        SceneBuilder::new(Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)))
            .robot(0.5, 1.0, Vec2::new(1.0, 1.0), Vec2::new(9.0, 9.0))
            .body(
                "co",
                BodyKind::ConstraintOriented,
                Shape::Box {
                    half_width: 0.5,
                    half_height: 0.5,
                },
                Vec2::new(5.0, 5.0),
                Some(1.0),
                PushAxis::Y,
            )
            .body(
                "free",
                BodyKind::FreeManipulatable,
                Shape::Box {
                    half_width: 0.5,
                    half_height: 0.5,
                },
                Vec2::new(7.0, 5.0),
                Some(1.0),
                PushAxis::Any,
            )
            .body(
                "wall",
                BodyKind::Fixed,
                Shape::Box {
                    half_width: 0.5,
                    half_height: 0.5,
                },
                Vec2::new(5.0, 8.0),
                None,
                PushAxis::Any,
            )
            .build()
            .unwrap()
    }

    fn touching(b: usize, normal: Vec2, depth: f64) -> ContactRecord {
        ContactRecord {
            a: Entity::Robot,
            b,
            contact: Contact {
                point: Vec2::ZERO,
                normal,
                depth,
            },
        }
    }

    #[test]
    fn no_contacts_is_valid() {
        let s = scene();
        assert_eq!(check_validity(&WorldState::initial(&s), &[], &s), Ok(()));
    }

    #[test]
    fn lateral_face_of_y_body_is_disallowed() {
        let s = scene();
        let st = WorldState::initial(&s);
        let err = check_validity(&st, &[touching(0, Vec2::new(-1.0, 0.0), 0.0)], &s).unwrap_err();
        assert_eq!(err.reason(), "disallowed push face");
        assert!(check_validity(&st, &[touching(0, Vec2::new(0.0, -1.0), 0.0)], &s).is_ok());
        assert!(check_validity(&st, &[touching(0, Vec2::new(0.0, 1.0), 0.0)], &s).is_ok());
    }

    #[test]
    fn angular_tolerance_is_thirty_degrees() {
        let s = scene();
        let st = WorldState::initial(&s);
        let at = |deg: f64| {
            let t = (-90.0 + deg).to_radians();
            touching(0, Vec2::new(t.cos(), t.sin()), 0.0)
        };
        assert!(check_validity(&st, &[at(29.0)], &s).is_ok());
        assert!(check_validity(&st, &[at(31.0)], &s).is_err());
    }

    #[test]
    fn free_body_any_face() {
        let s = scene();
        let st = WorldState::initial(&s);
        for n in [Vec2::X, -Vec2::X, Vec2::Y, -Vec2::Y] {
            assert!(check_validity(&st, &[touching(1, n, 0.01)], &s).is_ok());
        }
    }

    #[test]
    fn fixed_penetration_beyond_tolerance() {
        let s = scene();
        let st = WorldState::initial(&s);
        assert!(check_validity(&st, &[touching(2, Vec2::Y, 0.0009)], &s).is_ok());
        let err = check_validity(&st, &[touching(2, Vec2::Y, 0.002)], &s).unwrap_err();
        assert!(matches!(err, Violation::FixedPenetration { .. }));
    }

    #[test]
    fn leaving_bounds() {
        let s = scene();
        let mut st = WorldState::initial(&s);
        st.robot_pos = Vec2::new(0.4, 5.0);
        assert_eq!(check_validity(&st, &[], &s), Err(Violation::OutOfBounds));
    }
}
