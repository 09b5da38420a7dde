use crate::scene::Scene;
use crate::statespace::{in_goal, GoalRegion};
use crate::world::{propagate, Control, PropagationResult, TraceSample, WorldError, WorldState};
use thiserror::Error;

/// Tree node: the state reached by applying `control` from the parent's
/// state, plus the robot trace recorded along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub id: usize,
    pub parent: Option<usize>,
    pub state: WorldState,
    pub control: Option<Control>,
    pub trace: Vec<TraceSample>,
    /// KPIECE coverage cell holding this motion.
    pub cell: Option<(i32, i32)>,
}

impl Motion {
    pub fn path_length(&self) -> f64 {
        self.trace.windows(2).map(|w| w[1].pos.distance(w[0].pos)).sum()
    }

    /// Number of control steps in this motion (0 for the root).
    pub fn steps(&self, scene: &Scene) -> u32 {
        self.control
            .map_or(0, |c| c.steps(scene.dynamics.control_step).unwrap_or(0))
    }
}

/// Append-only store of motions; ids are indices.
#[derive(Debug, Clone, Default)]
pub struct MotionTree {
    motions: Vec<Motion>,
}

impl MotionTree {
    pub fn with_root(state: WorldState) -> Self {
        let trace = vec![TraceSample {
            time: state.time,
            pos: state.robot_pos,
            vel: state.robot_vel,
        }];
        MotionTree {
            motions: vec![Motion {
                id: 0,
                parent: None,
                state,
                control: None,
                trace,
                cell: None,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.motions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motions.is_empty()
    }

    pub fn get(&self, id: usize) -> &Motion {
        &self.motions[id]
    }

    pub fn get_mut(&mut self, id: usize) -> &mut Motion {
        &mut self.motions[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Motion> {
        self.motions.iter()
    }

    /// Adds the outcome of a valid propagation from `parent`.
    pub fn add(&mut self, parent: usize, control: Control, result: PropagationResult) -> usize {
        debug_assert!(result.valid);
        let id = self.motions.len();
        self.motions.push(Motion {
            id,
            parent: Some(parent),
            state: result.final_state,
            control: Some(control),
            trace: result.trace,
            cell: None,
        });
        id
    }

    /// Splits motion `id` after `steps` control steps by inserting a new
    /// motion between it and its parent. Returns the new motion's id; its
    /// state is the intermediate state, reproduced exactly by re-propagation.
    pub fn split(&mut self, id: usize, steps: u32, scene: &Scene) -> Result<usize, WorldError> {
        let m = &self.motions[id];
        let total = m.steps(scene);
        assert!(steps >= 1 && steps < total, "split point must be interior");
        let parent = m.parent.expect("root cannot be split");
        let control = m.control.expect("non-root motion has a control");
        let dt = scene.dynamics.control_step;
        let head = Control::new(control.force, steps as f64 * dt);
        let tail = Control::new(control.force, (total - steps) as f64 * dt);
        let result = propagate(&self.motions[parent].state, &head, scene)?;
        debug_assert!(result.valid);
        let cut = steps as usize * scene.dynamics.substeps_per_step();
        debug_assert_eq!(result.trace.last(), m.trace.get(cut));
        let mid = self.motions.len();
        let tail_trace = m.trace[cut..].to_vec();
        self.motions.push(Motion {
            id: mid,
            parent: Some(parent),
            state: result.final_state,
            control: Some(head),
            trace: result.trace,
            cell: None,
        });
        let m = &mut self.motions[id];
        m.parent = Some(mid);
        m.control = Some(tail);
        m.trace = tail_trace;
        Ok(mid)
    }

    /// Root-to-`id` path.
    pub fn path_to(&self, id: usize) -> SolutionPath {
        let mut chain = Vec::new();
        let mut cur = Some(id);
        while let Some(i) = cur {
            chain.push(self.motions[i].clone());
            cur = self.motions[i].parent;
        }
        chain.reverse();
        SolutionPath::new(chain)
    }
}

/// Root-to-goal sequence of motions.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub motions: Vec<Motion>,
    pub total_duration: f64,
}

impl SolutionPath {
    pub fn new(motions: Vec<Motion>) -> Self {
        let total_duration = motions.iter().filter_map(|m| m.control).map(|c| c.duration).sum();
        SolutionPath {
            motions,
            total_duration,
        }
    }

    pub fn start(&self) -> &WorldState {
        &self.motions[0].state
    }

    pub fn end(&self) -> &WorldState {
        &self.motions.last().expect("paths are never empty").state
    }

    pub fn controls(&self) -> Vec<Control> {
        self.motions.iter().filter_map(|m| m.control).collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RevalidationError {
    #[error("path is empty")]
    Empty,
    #[error("motion {index}: parent link does not point at the previous motion")]
    BrokenLink { index: usize },
    #[error("motion {index}: {source}")]
    World {
        index: usize,
        #[source]
        source: WorldError,
    },
    #[error("motion {index}: replay hit an invalid state")]
    Invalid { index: usize },
    #[error("motion {index}: replayed state differs from the stored state")]
    Diverged { index: usize },
    #[error("final state is outside the goal region")]
    NotInGoal,
}

/// Replays every control from the path's start state and demands
/// bit-identical states and traces and a final state in the goal.
pub fn revalidate(path: &SolutionPath, scene: &Scene, goal: &GoalRegion) -> Result<(), RevalidationError> {
    let first = path.motions.first().ok_or(RevalidationError::Empty)?;
    let mut state = first.state.clone();
    for (index, pair) in path.motions.windows(2).enumerate() {
        let index = index + 1;
        let (prev, m) = (&pair[0], &pair[1]);
        if m.parent != Some(prev.id) {
            return Err(RevalidationError::BrokenLink { index });
        }
        let control = m.control.ok_or(RevalidationError::BrokenLink { index })?;
        let r = propagate(&state, &control, scene)
            .map_err(|source| RevalidationError::World { index, source })?;
        if !r.valid {
            return Err(RevalidationError::Invalid { index });
        }
        if r.final_state != m.state || r.trace != m.trace {
            return Err(RevalidationError::Diverged { index });
        }
        state = r.final_state;
    }
    if !in_goal(&state, goal) {
        return Err(RevalidationError::NotInGoal);
    }
    Ok(())
}
