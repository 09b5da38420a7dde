use super::{
    check_validity, collide, BodyKind, Contact, ContactRecord, Control, Entity, Violation,
    WorldError, WorldState, CONTACT_TOLERANCE,
};
use crate::geom::Vec2;
use crate::scene::Scene;

const VELOCITY_ITERATIONS: usize = 8;
const POSITION_ITERATIONS: usize = 4;

/// Robot sample taken after every integration substep (and once at the
/// start of the control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub pos: Vec2,
    pub vel: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// Last valid state; the control's end state when `valid`.
    pub final_state: WorldState,
    pub trace: Vec<TraceSample>,
    pub valid: bool,
    pub violation: Option<Violation>,
    /// Robot arc length over the trace.
    pub path_length: f64,
}

/// A normal contact between two solver entities (0 = robot, `1 + slot` =
/// movable body), normal pointing from `b` to `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseContact {
    pub a: usize,
    pub b: usize,
    pub normal: Vec2,
}

/// Sequential fully-inelastic normal impulses. Each impulse is equal and
/// opposite, so linear momentum is preserved.
pub fn resolve_contact_impulses(
    contacts: &[ImpulseContact],
    inv_mass: &[f64],
    vel: &mut [Vec2],
    iterations: usize,
) {
    for _ in 0..iterations {
        let mut active = false;
        for c in contacts {
            let (ia, ib) = (inv_mass[c.a], inv_mass[c.b]);
            let k = ia + ib;
            if k == 0.0 {
                continue;
            }
            let vn = (vel[c.a] - vel[c.b]).dot(c.normal);
            if vn >= 0.0 {
                continue;
            }
            active = true;
            let j = -vn / k;
            vel[c.a] += c.normal * (j * ia);
            vel[c.b] -= c.normal * (j * ib);
        }
        if !active {
            break;
        }
    }
}

struct Stepper<'a> {
    scene: &'a Scene,
    h: f64,
    inv_mass: Vec<f64>,
    mu_g: Vec<f64>,
    pairs: Vec<(usize, usize, Contact)>,
    impulses: Vec<ImpulseContact>,
    vel: Vec<Vec2>,
    records: Vec<ContactRecord>,
}

impl<'a> Stepper<'a> {
    fn new(scene: &'a Scene) -> Self {
        let g = scene.dynamics.gravity;
        let mut inv_mass = vec![1.0 / scene.robot.mass];
        let mut mu_g = vec![scene.dynamics.mu * g];
        for &i in scene.movable() {
            inv_mass.push(scene.bodies[i].inv_mass());
            mu_g.push(scene.bodies[i].friction_mu * g);
        }
        Stepper {
            scene,
            h: scene.dynamics.substep(),
            inv_mass,
            mu_g,
            pairs: Vec::new(),
            impulses: Vec::new(),
            vel: Vec::new(),
            records: Vec::new(),
        }
    }

    fn pos(s: &WorldState, e: usize) -> Vec2 {
        if e == 0 {
            s.robot_pos
        } else {
            s.bodies[e - 1].pos
        }
    }

    fn pos_mut(s: &mut WorldState, e: usize) -> &mut Vec2 {
        if e == 0 {
            &mut s.robot_pos
        } else {
            &mut s.bodies[e - 1].pos
        }
    }

    fn shape(&self, e: usize) -> &'a super::Shape {
        if e == 0 {
            &self.scene.robot_shape
        } else {
            &self.scene.bodies[self.scene.movable()[e - 1]].shape
        }
    }

    /// Velocity update with Coulomb ground friction and the matching
    /// constant-acceleration position update.
    fn integrate(&self, pos: &mut Vec2, vel: &mut Vec2, accel: Vec2, mu_g: f64) {
        let h = self.h;
        let free = *vel + accel * h;
        let dv = mu_g * h;
        let speed = free.norm();
        let next = if speed <= dv {
            Vec2::ZERO
        } else {
            free - free * (dv / speed)
        };
        *pos += (*vel + next) * (0.5 * h);
        *vel = next;
    }

    fn movable_contacts(&mut self, s: &WorldState) {
        self.pairs.clear();
        let n = s.bodies.len() + 1;
        for a in 0..n {
            for b in (a + 1)..n {
                if let Some(c) = collide(self.shape(a), Self::pos(s, a), self.shape(b), Self::pos(s, b)) {
                    self.pairs.push((a, b, c));
                }
            }
        }
    }

    fn all_contacts(&mut self, s: &WorldState) {
        self.records.clear();
        let scene = self.scene;
        let entities = s.bodies.len() + 1;
        for e in 0..entities {
            let (entity, own) = if e == 0 {
                (Entity::Robot, None)
            } else {
                (Entity::Body(scene.movable()[e - 1]), Some(scene.movable()[e - 1]))
            };
            let pa = Self::pos(s, e);
            let sa = self.shape(e);
            for (bi, body) in scene.bodies.iter().enumerate() {
                if Some(bi) == own {
                    continue;
                }
                // movable pairs once, from the lower entity
                if let Some(slot) = scene.slot(bi) {
                    if slot + 1 <= e {
                        continue;
                    }
                }
                if let Some(contact) = collide(sa, pa, &body.shape, s.body_pos(scene, bi)) {
                    self.records.push(ContactRecord {
                        a: entity,
                        b: bi,
                        contact,
                    });
                }
            }
        }
    }

    fn step(&mut self, s: &mut WorldState, force: Vec2) -> Result<(), Violation> {
        let robot_accel = force * self.inv_mass[0];
        let (mut p, mut v) = (s.robot_pos, s.robot_vel);
        self.integrate(&mut p, &mut v, robot_accel, self.mu_g[0]);
        s.robot_pos = p;
        s.robot_vel = v;
        for slot in 0..s.bodies.len() {
            let b = &mut s.bodies[slot];
            if b.vel == Vec2::ZERO {
                continue;
            }
            let (mut p, mut v) = (b.pos, b.vel);
            self.integrate(&mut p, &mut v, Vec2::ZERO, self.mu_g[slot + 1]);
            b.pos = p;
            b.vel = v;
        }
        s.time += self.h;

        self.movable_contacts(s);
        if !self.pairs.is_empty() {
            self.impulses.clear();
            self.impulses.extend(self.pairs.iter().map(|&(a, b, c)| ImpulseContact {
                a,
                b,
                normal: c.normal,
            }));
            self.vel.clear();
            self.vel.push(s.robot_vel);
            self.vel.extend(s.bodies.iter().map(|b| b.vel));
            resolve_contact_impulses(&self.impulses, &self.inv_mass, &mut self.vel, VELOCITY_ITERATIONS);
            s.robot_vel = self.vel[0];
            for (b, v) in s.bodies.iter_mut().zip(&self.vel[1..]) {
                b.vel = *v;
            }
            for pass in 0..POSITION_ITERATIONS {
                if pass > 0 {
                    self.movable_contacts(s);
                }
                let mut moved = false;
                for k in 0..self.pairs.len() {
                    let (a, b, c) = self.pairs[k];
                    let (ia, ib) = (self.inv_mass[a], self.inv_mass[b]);
                    if c.depth <= 0.0 || ia + ib == 0.0 {
                        continue;
                    }
                    let corr = c.depth / (ia + ib);
                    *Self::pos_mut(s, a) += c.normal * (corr * ia);
                    *Self::pos_mut(s, b) -= c.normal * (corr * ib);
                    moved = true;
                }
                if !moved {
                    break;
                }
            }
        }

        self.all_contacts(s);
        check_validity(s, &self.records, self.scene)
    }
}

/// Validity of a standalone state under the same rules used during
/// propagation.
pub fn check_state(state: &WorldState, scene: &Scene) -> Result<(), Violation> {
    let mut stepper = Stepper::new(scene);
    stepper.all_contacts(state);
    check_validity(state, &stepper.records, scene)
}

fn check_inputs(state: &WorldState, control: &Control, scene: &Scene) -> Result<u32, WorldError> {
    if state.bodies.len() != scene.movable().len() {
        return Err(WorldError::BodyMismatch {
            expected: scene.movable().len(),
            got: state.bodies.len(),
        });
    }
    let f_max = scene.dynamics.f_max * (1.0 + 1e-12);
    if control.force.x.abs() > f_max || control.force.y.abs() > f_max || !control.force.is_finite() {
        return Err(WorldError::ForceOutOfRange {
            fx: control.force.x,
            fy: control.force.y,
            f_max: scene.dynamics.f_max,
        });
    }
    control.steps(scene.dynamics.control_step)
}

/// Integrate `control` from `state`, stopping at the first invalid substep.
pub fn propagate(
    state: &WorldState,
    control: &Control,
    scene: &Scene,
) -> Result<PropagationResult, WorldError> {
    propagate_observed(state, control, scene, |_, _| {})
}

/// As [`propagate`], calling `observe` with every accepted substep state and
/// the contacts found at it.
pub fn propagate_observed<F>(
    state: &WorldState,
    control: &Control,
    scene: &Scene,
    mut observe: F,
) -> Result<PropagationResult, WorldError>
where
    F: FnMut(&WorldState, &[ContactRecord]),
{
    let steps = check_inputs(state, control, scene)?;
    let substeps = steps as usize * scene.dynamics.substeps_per_step();
    let mut stepper = Stepper::new(scene);
    let mut trace = Vec::with_capacity(substeps + 1);
    trace.push(TraceSample {
        time: state.time,
        pos: state.robot_pos,
        vel: state.robot_vel,
    });
    let mut current = state.clone();
    let mut next = state.clone();
    let mut violation = None;
    let mut path_length = 0.0;
    for _ in 0..substeps {
        next.clone_from(&current);
        match stepper.step(&mut next, control.force) {
            Ok(()) => {
                observe(&next, &stepper.records);
                path_length += (next.robot_pos - current.robot_pos).norm();
                trace.push(TraceSample {
                    time: next.time,
                    pos: next.robot_pos,
                    vel: next.robot_vel,
                });
                std::mem::swap(&mut current, &mut next);
            }
            Err(v) => {
                violation = Some(v);
                break;
            }
        }
    }
    Ok(PropagationResult {
        final_state: current,
        trace,
        valid: violation.is_none(),
        violation,
        path_length,
    })
}

/// Robot contacts with constraint-oriented bodies seen while replaying a
/// control sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactAudit {
    pub substeps: usize,
    pub constrained_contacts: usize,
    pub disallowed: usize,
    pub pushes_by_body: Vec<(String, usize)>,
}

/// Replays `controls` from `start` and audits every robot contact with a
/// constraint-oriented box. The contact direction runs from the closest
/// point of the box to the robot centre; it is disallowed when it is more
/// than the push tolerance away from the allowed axis. Solver normals are
/// not consulted.
pub fn audit_contacts(
    start: &WorldState,
    controls: &[Control],
    scene: &Scene,
) -> Result<ContactAudit, WorldError> {
    let cos_tol = super::PUSH_ANGLE_TOLERANCE_DEG.to_radians().cos();
    let mut audit = ContactAudit::default();
    let mut state = start.clone();
    for control in controls {
        let res = propagate_observed(&state, control, scene, |s, _| {
            audit.substeps += 1;
            for (bi, body) in scene.bodies.iter().enumerate() {
                if body.kind != BodyKind::ConstraintOriented {
                    continue;
                }
                let super::Shape::Box {
                    half_width,
                    half_height,
                } = body.shape
                else {
                    continue;
                };
                let rel = s.robot_pos - s.body_pos(scene, bi);
                let closest = Vec2::new(
                    rel.x.clamp(-half_width, half_width),
                    rel.y.clamp(-half_height, half_height),
                );
                let gap = rel - closest;
                if gap.norm() > scene.robot.radius + CONTACT_TOLERANCE {
                    continue;
                }
                audit.constrained_contacts += 1;
                let bad = match (gap.normalized(), body.allowed_push_axis.direction()) {
                    (_, None) => false,
                    (None, Some(_)) => true,
                    (Some(n), Some(axis)) => n.dot(axis).abs() < cos_tol,
                };
                if bad {
                    audit.disallowed += 1;
                } else {
                    match audit.pushes_by_body.iter_mut().find(|(id, _)| *id == body.id) {
                        Some((_, n)) => *n += 1,
                        None => audit.pushes_by_body.push((body.id.clone(), 1)),
                    }
                }
            }
        })?;
        state = res.final_state;
    }
    Ok(audit)
}
