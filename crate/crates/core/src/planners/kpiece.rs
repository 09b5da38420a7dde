use super::rrt::finish;
use super::{start_state, Budget, MotionTree, PlanError, PlanOutcome, PlannerConfig, PlannerStats};
use crate::geom::Vec2;
use crate::scene::Scene;
use crate::statespace::{in_goal, project, sample_control, GoalRegion};
use crate::world::{propagate, Control};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

pub type CellCoord = (i32, i32);

const NEIGHBOR_OFFSETS: [CellCoord; 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub coord: CellCoord,
    pub motions: Vec<usize>,
    pub selections: u64,
    pub created_at: u64,
    pub last_selected_at: u64,
    pub expansion_successes: u64,
    pub expansion_attempts: u64,
    /// Instantiated orthogonal neighbours, 0..=4.
    pub neighbors: u8,
}

impl Cell {
    pub fn new(coord: CellCoord, now: u64) -> Self {
        Cell {
            coord,
            motions: Vec::new(),
            selections: 0,
            created_at: now,
            last_selected_at: now,
            expansion_successes: 0,
            expansion_attempts: 0,
            neighbors: 0,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.neighbors == 4
    }

    pub fn coverage(&self) -> usize {
        self.motions.len()
    }
}

/// `E·R / ((1+S)(1+N)·C)` with recency `R = 1/(1 + now - last_selected_at)`
/// and expansion factor `E = (successes+1)/(attempts+1)`.
pub fn kpiece_cell_importance(cell: &Cell, now: u64) -> f64 {
    let r = 1.0 / (1.0 + now.saturating_sub(cell.last_selected_at) as f64);
    let e = (cell.expansion_successes as f64 + 1.0) / (cell.expansion_attempts as f64 + 1.0);
    let s = cell.selections as f64;
    let n = cell.neighbors as f64;
    let c = cell.coverage().max(1) as f64;
    e * r / ((1.0 + s) * (1.0 + n) * c)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GridStats {
    pub cells: usize,
    pub interior: usize,
    pub exterior: usize,
    pub min_exterior_seen: usize,
}

/// Coverage grid over the robot-position projection.
#[derive(Debug, Clone)]
pub struct CellGrid {
    cell_size: f64,
    origin: Vec2,
    cells: BTreeMap<CellCoord, Cell>,
    interior: usize,
    min_exterior_seen: Option<usize>,
}

impl CellGrid {
    pub fn new(origin: Vec2, cell_size: f64) -> Self {
        assert!(cell_size > 0.0);
        CellGrid {
            cell_size,
            origin,
            cells: BTreeMap::new(),
            interior: 0,
            min_exterior_seen: None,
        }
    }

    pub fn coord_of(&self, p: Vec2) -> CellCoord {
        (
            ((p.x - self.origin.x) / self.cell_size).floor() as i32,
            ((p.y - self.origin.y) / self.cell_size).floor() as i32,
        )
    }

    pub fn get(&self, c: CellCoord) -> Option<&Cell> {
        self.cells.get(&c)
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Instantiates `c` if needed, keeping neighbour counts current.
    pub fn instantiate(&mut self, c: CellCoord, now: u64) -> &mut Cell {
        if !self.cells.contains_key(&c) {
            let mut cell = Cell::new(c, now);
            for (dx, dy) in NEIGHBOR_OFFSETS {
                if let Some(nb) = self.cells.get_mut(&(c.0 + dx, c.1 + dy)) {
                    nb.neighbors += 1;
                    cell.neighbors += 1;
                    if nb.neighbors == 4 {
                        self.interior += 1;
                    }
                }
            }
            if cell.neighbors == 4 {
                self.interior += 1;
            }
            self.cells.insert(c, cell);
            let ext = self.cells.len() - self.interior;
            self.min_exterior_seen = Some(self.min_exterior_seen.map_or(ext, |m| m.min(ext)));
        }
        self.cells.get_mut(&c).expect("just inserted")
    }

    pub fn add_motion(&mut self, id: usize, p: Vec2, now: u64) -> CellCoord {
        let c = self.coord_of(p);
        self.instantiate(c, now).motions.push(id);
        c
    }

    pub fn stats(&self) -> GridStats {
        let exterior = self.cells.len() - self.interior;
        GridStats {
            cells: self.cells.len(),
            interior: self.interior,
            exterior,
            min_exterior_seen: self.min_exterior_seen.unwrap_or(0),
        }
    }

    pub fn interior_set(&self) -> BTreeSet<CellCoord> {
        self.cells.values().filter(|c| c.is_interior()).map(|c| c.coord).collect()
    }

    /// Highest-importance cell in the requested class, falling back to the
    /// other class when it is empty. Ties go to the lowest coordinate.
    pub fn select(&self, interior: bool, now: u64) -> Option<CellCoord> {
        let best_in = |want: bool| {
            let mut best: Option<(f64, CellCoord)> = None;
            for c in self.cells.values().filter(|c| c.is_interior() == want) {
                let score = kpiece_cell_importance(c, now);
                if best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, c.coord));
                }
            }
            best.map(|(_, c)| c)
        };
        best_in(interior).or_else(|| best_in(!interior))
    }
}

/// Interior cells by direct definition, for cross-checking [`CellGrid`].
pub fn brute_force_interior(cells: &BTreeSet<CellCoord>) -> BTreeSet<CellCoord> {
    cells
        .iter()
        .filter(|&&(x, y)| {
            NEIGHBOR_OFFSETS
                .iter()
                .all(|&(dx, dy)| cells.contains(&(x + dx, y + dy)))
        })
        .copied()
        .collect()
}

/// KPIECE over the robot-position projection.
pub fn kpiece_solve(scene: &Scene, goal: &GoalRegion, config: &PlannerConfig) -> Result<PlanOutcome, PlanError> {
    let root = start_state(scene, config)?;
    let budget = Budget::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = PlannerStats::default();
    let mut tree = MotionTree::with_root(root);
    let mut grid = CellGrid::new(scene.bounds.min, config.kpiece_cell_size);
    let c = grid.add_motion(0, project(&tree.get(0).state), 0);
    tree.get_mut(0).cell = Some(c);
    if in_goal(&tree.get(0).state, goal) {
        stats.grid = Some(grid.stats());
        return Ok(finish(&tree, Some(0), stats, &budget));
    }
    let candidates = config.candidate_controls_per_expand.unwrap_or(1);
    let step = scene.dynamics.control_step;
    let per_step = scene.dynamics.substeps_per_step();
    // motion whose endpoint is nearest the goal, for goal-biased expansion
    let mut closest = (tree.get(0).state.robot_pos.distance(goal.center), 0usize);

    let mut solved = None;
    'outer: while !budget.exhausted(stats.iterations) {
        stats.iterations += 1;
        let now = stats.iterations;
        #[cfg(debug_assertions)]
        if now % 100 == 0 {
            let all: BTreeSet<CellCoord> = grid.cells().map(|c| c.coord).collect();
            assert_eq!(grid.interior_set(), brute_force_interior(&all));
        }

        let (cell_coord, motion) = if rng.random::<f64>() < config.goal_bias {
            (tree.get(closest.1).cell.expect("motions carry cells"), closest.1)
        } else {
            let want_interior = rng.random::<f64>() >= config.kpiece_border_fraction;
            let c = grid.select(want_interior, now).expect("grid is never empty");
            let cell = grid.get(c).expect("selected cell exists");
            (c, cell.motions[rng.random_range(0..cell.motions.len())])
        };
        {
            let cell = grid.instantiate(cell_coord, now);
            cell.selections += 1;
            cell.last_selected_at = now;
            cell.expansion_attempts += 1;
        }

        // a uniform control-step boundary along the motion
        let total = tree.get(motion).steps(scene);
        let mut from = motion;
        if total > 1 {
            let k = rng.random_range(1..=total);
            if k < total {
                from = tree.split(motion, k, scene)?;
                let p = project(&tree.get(from).state);
                let c = grid.add_motion(from, p, now);
                tree.get_mut(from).cell = Some(c);
            }
        }

        let start = tree.get(from).state.clone();
        let mut added = false;
        for _ in 0..candidates {
            let control = sample_control(&mut rng, scene);
            let mut result = propagate(&start, &control, scene)?;
            stats.propagations += 1;
            let mut control = control;
            if !result.valid {
                stats.invalid_propagations += 1;
                // keep the valid prefix, cut back to whole control steps
                let whole = (result.trace.len() - 1) / per_step;
                if whole == 0 {
                    continue;
                }
                control = Control::new(control.force, whole as f64 * step);
                result = propagate(&start, &control, scene)?;
                stats.propagations += 1;
                debug_assert!(result.valid);
            }
            let id = tree.add(from, control, result);
            let p = project(&tree.get(id).state);
            let c = grid.add_motion(id, p, now);
            tree.get_mut(id).cell = Some(c);
            added = true;
            let d = p.distance(goal.center);
            if d < closest.0 {
                closest = (d, id);
            }
            if in_goal(&tree.get(id).state, goal) {
                solved = Some(id);
                break;
            }
        }
        if added {
            grid.instantiate(cell_coord, now).expansion_successes += 1;
        }
        if solved.is_some() {
            break 'outer;
        }
    }
    stats.grid = Some(grid.stats());
    Ok(finish(&tree, solved, stats, &budget))
}
