#![allow(dead_code)]

use kinobench::geom::{Rect, Vec2};
use kinobench::scene::{Scene, SceneBuilder};
use kinobench::statespace::{sample_control, sample_in};
use kinobench::world::{check_state, Control, PropagationResult, WorldState};
use rand::Rng;

/// 10 m × 10 m world with no bodies.
pub fn empty_scene(start: Vec2, goal: Vec2) -> Scene {
    SceneBuilder::new(Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)))
        .name("empty")
        .robot(0.5, 1.0, start, goal)
        .build()
        .unwrap()
}

/// A valid state of `scene` with the robot placed uniformly at random and
/// every velocity drawn from `[-vmax, vmax]²`.
pub fn random_state<R: Rng>(rng: &mut R, scene: &Scene, vmax: f64) -> WorldState {
    let v = |rng: &mut R| Vec2::new(rng.random_range(-vmax..=vmax), rng.random_range(-vmax..=vmax));
    loop {
        let mut s = WorldState::initial(scene);
        s.robot_pos = sample_in(rng, &scene.bounds);
        s.robot_vel = v(rng);
        for b in &mut s.bodies {
            b.vel = v(rng);
        }
        if check_state(&s, scene).is_ok() {
            return s;
        }
    }
}

pub fn random_control<R: Rng>(rng: &mut R, scene: &Scene) -> Control {
    sample_control(rng, scene)
}

fn state_bits(s: &WorldState) -> Vec<u64> {
    let mut out = vec![
        s.robot_pos.x.to_bits(),
        s.robot_pos.y.to_bits(),
        s.robot_vel.x.to_bits(),
        s.robot_vel.y.to_bits(),
        s.time.to_bits(),
    ];
    for b in &s.bodies {
        out.extend([b.pos.x.to_bits(), b.pos.y.to_bits(), b.vel.x.to_bits(), b.vel.y.to_bits()]);
    }
    out
}

/// Bitwise equality of two propagation results.
pub fn bit_identical(a: &PropagationResult, b: &PropagationResult) -> bool {
    a.valid == b.valid
        && a.violation == b.violation
        && a.path_length.to_bits() == b.path_length.to_bits()
        && state_bits(&a.final_state) == state_bits(&b.final_state)
        && a.trace.len() == b.trace.len()
        && a.trace.iter().zip(&b.trace).all(|(x, y)| {
            [x.time, x.pos.x, x.pos.y, x.vel.x, x.vel.y].map(f64::to_bits)
                == [y.time, y.pos.x, y.pos.y, y.vel.x, y.vel.y].map(f64::to_bits)
        })
}
