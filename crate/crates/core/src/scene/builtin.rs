//! The three benchmark worlds, ordered by clutter.
//!
//! All share a 10 m × 10 m walled world, a 0.5 m robot disc of 1 kg and a
//! goal radius of 1 m. Blue cubes are 0.5 m free manipulatable boxes.

use super::{Scene, SceneBuilder};
use crate::geom::{Rect, Vec2};
use crate::world::{BodyKind, PushAxis, Shape};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinScene {
    Scene1,
    Scene2,
    Scene3,
}

impl BuiltinScene {
    pub const ALL: [BuiltinScene; 3] = [BuiltinScene::Scene1, BuiltinScene::Scene2, BuiltinScene::Scene3];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinScene::Scene1 => "scene1",
            BuiltinScene::Scene2 => "scene2",
            BuiltinScene::Scene3 => "scene3",
        }
    }
}

impl fmt::Display for BuiltinScene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinScene {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        BuiltinScene::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown built-in scene `{s}` (expected scene1, scene2 or scene3)"))
    }
}

const CUBE_HALF: f64 = 0.25;
const CUBE_MASS: f64 = 0.5;

fn rect(hw: f64, hh: f64) -> Shape {
    Shape::Box {
        half_width: hw,
        half_height: hh,
    }
}

/// Triangular prism footprint, 1.6 m base and 1.4 m tall.
fn prism() -> Shape {
    Shape::ConvexPolygon {
        vertices: vec![Vec2::new(-0.8, -0.7), Vec2::new(0.8, -0.7), Vec2::new(0.0, 0.7)],
    }
}

fn walled(name: &str, start: Vec2, goal: Vec2) -> SceneBuilder {
    SceneBuilder::new(Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)))
        .name(name)
        .robot(0.5, 1.0, start, goal)
        .fixed("wall_s", rect(5.0, 0.1), Vec2::new(5.0, 0.1))
        .fixed("wall_n", rect(5.0, 0.1), Vec2::new(5.0, 9.9))
        .fixed("wall_w", rect(0.1, 5.0), Vec2::new(0.1, 5.0))
        .fixed("wall_e", rect(0.1, 5.0), Vec2::new(9.9, 5.0))
}

fn cubes(mut b: SceneBuilder, at: &[(f64, f64)]) -> SceneBuilder {
    for (i, &(x, y)) in at.iter().enumerate() {
        b = b.body(
            &format!("cube{}", i + 1),
            BodyKind::FreeManipulatable,
            rect(CUBE_HALF, CUBE_HALF),
            Vec2::new(x, y),
            Some(CUBE_MASS),
            PushAxis::Any,
        );
    }
    b
}

pub fn builtin_scene(which: BuiltinScene) -> Scene {
    let builder = match which {
        // Low clutter; open routes around every obstacle.
        BuiltinScene::Scene1 => {
            let b = walled("scene1", Vec2::new(1.5, 1.5), Vec2::new(8.5, 8.5))
                .fixed("prism1", prism(), Vec2::new(3.5, 6.5))
                .fixed("prism2", prism(), Vec2::new(6.5, 3.5))
                .fixed("pillar", rect(0.3, 1.0), Vec2::new(5.0, 5.0));
            cubes(b, &[(3.0, 3.2), (7.0, 7.0), (5.0, 8.0), (8.0, 5.5), (2.0, 8.0)])
        }
        // A divider splits the world; its only passage is plugged by a slab
        // that may only be pushed along y.
        BuiltinScene::Scene2 => {
            let b = walled("scene2", Vec2::new(2.0, 2.0), Vec2::new(8.0, 8.0))
                .fixed("divider_w", rect(2.0, 0.2), Vec2::new(2.2, 5.0))
                .fixed("divider_e", rect(2.0, 0.2), Vec2::new(7.8, 5.0))
                .body(
                    "gate",
                    BodyKind::ConstraintOriented,
                    rect(0.78, 0.2),
                    Vec2::new(5.0, 5.0),
                    Some(CUBE_MASS),
                    PushAxis::Y,
                )
                .fixed("prism1", prism(), Vec2::new(2.5, 7.5))
                .fixed("prism2", prism(), Vec2::new(7.5, 2.5));
            cubes(b, &[(3.5, 3.0), (6.5, 7.0), (8.5, 6.5)])
        }
        // Dense clutter; the goal sits under a block in a pocket that can
        // only be pushed along x.
        BuiltinScene::Scene3 => {
            let b = walled("scene3", Vec2::new(1.5, 1.5), Vec2::new(7.5, 5.0))
                .body(
                    "goal_block",
                    BodyKind::ConstraintOriented,
                    rect(0.6, 0.6),
                    Vec2::new(7.5, 5.0),
                    Some(CUBE_MASS),
                    PushAxis::X,
                )
                .fixed("pocket_n", rect(0.9, 0.3), Vec2::new(7.5, 6.6))
                .fixed("pocket_s", rect(0.9, 0.3), Vec2::new(7.5, 3.4))
                .fixed("prism1", prism(), Vec2::new(3.0, 4.0))
                .fixed("prism2", prism(), Vec2::new(4.5, 7.5))
                .fixed("prism3", prism(), Vec2::new(5.5, 2.0))
                .fixed("ledge", rect(0.6, 0.2), Vec2::new(2.0, 6.5));
            cubes(
                b,
                &[(2.5, 2.8), (5.2, 5.0), (6.2, 8.2), (8.8, 8.5), (3.5, 8.8), (8.8, 1.5)],
            )
        }
    };
    builder.build().expect("built-in scenes are valid")
}
