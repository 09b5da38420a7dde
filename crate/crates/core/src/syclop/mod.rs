//! SyCLoP: a coarse workspace decomposition whose lead (a region path from
//! start to goal) steers a low-level RRT or EST tree.

use crate::geom::{Rect, Vec2};
use crate::planners::nn::NearestIndex;
use crate::planners::{
    best_toward, finish, sample_valid, start_state, Budget, EstCore, MotionTree, NearestNeighbors, PlanError,
    PlanOutcome, PlannerConfig, PlannerStats,
};
use crate::scene::Scene;
use crate::statespace::{in_goal, sample_in, GoalRegion};
use crate::world::{collide, CONTACT_TOLERANCE};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Added to the squared free volume in the edge cost so blocked regions
/// stay finite.
pub const LEAD_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyclopConfig {
    pub grid_dims: (usize, usize),
    pub free_volume_samples: usize,
    pub lead_period: u64,
    pub exploration_probability: f64,
}

impl Default for SyclopConfig {
    fn default() -> Self {
        SyclopConfig {
            grid_dims: (10, 10),
            free_volume_samples: 400,
            lead_period: 50,
            exploration_probability: 0.05,
        }
    }
}

impl SyclopConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.grid_dims.0 == 0 || self.grid_dims.1 == 0 {
            return Err("grid_dims must be at least 1 per axis".into());
        }
        if self.free_volume_samples == 0 || self.lead_period == 0 {
            return Err("free_volume_samples and lead_period must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.exploration_probability) {
            return Err("exploration_probability must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowLevel {
    Rrt,
    Est,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SyclopStats {
    pub regions: usize,
    pub lead_computations: u64,
    pub exploration_leads: u64,
    pub last_lead_len: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum SyclopError {
    #[error("no region path from {start} to {goal}")]
    NoPath { start: usize, goal: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub index: usize,
    pub rect: Rect,
    pub free_volume: f64,
    pub coverage: usize,
    pub selections: u64,
}

/// Uniform grid of regions; index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub bounds: Rect,
    pub nx: usize,
    pub ny: usize,
    pub regions: Vec<Region>,
}

fn grid_line(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if k == n {
        hi
    } else {
        lo + (hi - lo) * k as f64 / n as f64
    }
}

impl Decomposition {
    /// Plain grid with every free volume set to 1.
    pub fn grid(bounds: Rect, nx: usize, ny: usize) -> Self {
        assert!(nx >= 1 && ny >= 1);
        let mut regions = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let min = Vec2::new(
                    grid_line(bounds.min.x, bounds.max.x, nx, i),
                    grid_line(bounds.min.y, bounds.max.y, ny, j),
                );
                let max = Vec2::new(
                    grid_line(bounds.min.x, bounds.max.x, nx, i + 1),
                    grid_line(bounds.min.y, bounds.max.y, ny, j + 1),
                );
                regions.push(Region {
                    index: j * nx + i,
                    rect: Rect::new(min, max),
                    free_volume: 1.0,
                    coverage: 0,
                    selections: 0,
                });
            }
        }
        Decomposition { bounds, nx, ny, regions }
    }

    fn axis_index(p: f64, lo: f64, hi: f64, n: usize) -> usize {
        let guess = ((p - lo) / (hi - lo) * n as f64).floor();
        let mut i = if guess.is_finite() { (guess.max(0.0) as usize).min(n - 1) } else { 0 };
        while i > 0 && p <= grid_line(lo, hi, n, i) {
            i -= 1;
        }
        while i + 1 < n && p > grid_line(lo, hi, n, i + 1) {
            i += 1;
        }
        i
    }

    /// Region containing `p`. Points on a shared edge go to the lower
    /// index; points outside are clamped to the nearest region.
    pub fn region_of(&self, p: Vec2) -> usize {
        let i = Self::axis_index(p.x, self.bounds.min.x, self.bounds.max.x, self.nx);
        let j = Self::axis_index(p.y, self.bounds.min.y, self.bounds.max.y, self.ny);
        j * self.nx + i
    }

    pub fn neighbors(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (r % self.nx, r / self.nx);
        let mut out = [None; 4];
        if i > 0 {
            out[0] = Some(r - 1);
        }
        if i + 1 < self.nx {
            out[1] = Some(r + 1);
        }
        if j > 0 {
            out[2] = Some(r - self.nx);
        }
        if j + 1 < self.ny {
            out[3] = Some(r + self.nx);
        }
        out.into_iter().flatten()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).any(|n| n == b)
    }

    /// Cost of entering region `r`.
    pub fn edge_cost(&self, r: usize) -> f64 {
        let g = &self.regions[r];
        (1.0 + g.coverage as f64) * (1.0 + g.selections as f64) / (LEAD_EPSILON + g.free_volume * g.free_volume)
    }

    pub fn total_coverage(&self) -> usize {
        self.regions.iter().map(|r| r.coverage).sum()
    }

    /// True when `lead` is a chain of adjacent regions from `start` to `goal`.
    pub fn is_valid_lead(&self, lead: &[usize], start: usize, goal: usize) -> bool {
        lead.first() == Some(&start)
            && lead.last() == Some(&goal)
            && lead.windows(2).all(|w| self.are_adjacent(w[0], w[1]))
    }
}

/// Uniform decomposition with free volumes estimated from `samples` robot
/// placements per region, tested against Fixed bodies only.
pub fn decompose<R: Rng + ?Sized>(scene: &Scene, dims: (usize, usize), samples: usize, rng: &mut R) -> Decomposition {
    let mut d = Decomposition::grid(scene.bounds, dims.0, dims.1);
    let robot = scene.robot_shape();
    let fixed: Vec<_> = scene.bodies.iter().filter(|b| b.is_fixed()).collect();
    for region in &mut d.regions {
        let free = (0..samples)
            .filter(|_| {
                let p = sample_in(rng, &region.rect);
                fixed.iter().all(|b| {
                    collide(robot, p, &b.shape, b.pose).is_none_or(|c| c.depth <= CONTACT_TOLERANCE)
                })
            })
            .count();
        region.free_volume = free as f64 / samples as f64;
    }
    d
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on cost, then lowest index
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Cheapest region path by Dijkstra, costs summed over entered regions.
pub fn shortest_lead(d: &Decomposition, start: usize, goal: usize) -> Result<Vec<usize>, SyclopError> {
    let n = d.regions.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Frontier(0.0, start));
    while let Some(Frontier(c, r)) = heap.pop() {
        if c > dist[r] {
            continue;
        }
        if r == goal {
            break;
        }
        for nb in d.neighbors(r) {
            let nc = c + d.edge_cost(nb);
            if nc < dist[nb] {
                dist[nb] = nc;
                prev[nb] = r;
                heap.push(Frontier(nc, nb));
            }
        }
    }
    if !dist[goal].is_finite() {
        return Err(SyclopError::NoPath { start, goal });
    }
    let mut path = vec![goal];
    while *path.last().expect("non-empty") != start {
        path.push(prev[*path.last().expect("non-empty")]);
    }
    path.reverse();
    Ok(path)
}

/// Randomised depth-first region path.
pub fn random_lead<R: Rng + ?Sized>(
    d: &Decomposition,
    start: usize,
    goal: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SyclopError> {
    let mut seen = vec![false; d.regions.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(&top) = stack.last() {
        if top == goal {
            return Ok(stack);
        }
        let mut open: Vec<usize> = d.neighbors(top).filter(|&n| !seen[n]).collect();
        if open.is_empty() {
            stack.pop();
            continue;
        }
        open.shuffle(rng);
        seen[open[0]] = true;
        stack.push(open[0]);
    }
    Err(SyclopError::NoPath { start, goal })
}

/// Lead from `start` to `goal`: the cheapest path, or with probability
/// `explore` a random depth-first path.
pub fn compute_lead<R: Rng + ?Sized>(
    d: &Decomposition,
    start: usize,
    goal: usize,
    explore: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, bool), SyclopError> {
    if rng.random::<f64>() < explore {
        random_lead(d, start, goal, rng).map(|l| (l, true))
    } else {
        shortest_lead(d, start, goal).map(|l| (l, false))
    }
}

/// Region selection weight.
pub fn region_weight(r: &Region) -> f64 {
    r.free_volume * r.free_volume / (1.0 + r.selections as f64)
}

/// Picks a lead region holding at least one motion with probability
/// proportional to [`region_weight`] and counts the selection. Falls back
/// to the first lead region when none holds a motion.
pub fn select_region<R: Rng + ?Sized>(lead: &[usize], d: &mut Decomposition, rng: &mut R) -> usize {
    let candidates: Vec<usize> = lead.iter().copied().filter(|&r| d.regions[r].coverage > 0).collect();
    let chosen = if candidates.is_empty() {
        lead[0]
    } else {
        let weights: Vec<f64> = candidates.iter().map(|&r| region_weight(&d.regions[r])).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = *candidates.last().expect("non-empty");
            for (&r, &w) in candidates.iter().zip(&weights) {
                if u < w {
                    pick = r;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            candidates[rng.random_range(0..candidates.len())]
        }
    };
    d.regions[chosen].selections += 1;
    chosen
}

enum Layer {
    Rrt(Vec<NearestIndex>, usize),
    Est(EstCore, usize),
}

/// SyCLoP with an RRT or EST continuous layer.
pub fn syclop_solve(
    scene: &Scene,
    goal: &GoalRegion,
    config: &PlannerConfig,
    low: LowLevel,
) -> Result<PlanOutcome, PlanError> {
    let root = start_state(scene, config)?;
    let budget = Budget::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = PlannerStats::default();
    let mut tree = MotionTree::with_root(root);
    let sc = &config.syclop;
    let mut d = decompose(scene, sc.grid_dims, sc.free_volume_samples, &mut rng);
    let mut ss = SyclopStats {
        regions: d.regions.len(),
        ..Default::default()
    };
    if in_goal(&tree.get(0).state, goal) {
        stats.syclop = Some(ss);
        return Ok(finish(&tree, Some(0), stats, &budget));
    }

    let mut layer = match low {
        LowLevel::Rrt => Layer::Rrt(
            d.regions
                .iter()
                .map(|r| {
                    let cell = r.rect.width().min(r.rect.height()) / 4.0;
                    match config.nearest {
                        NearestNeighbors::Linear => NearestIndex::new(NearestNeighbors::Linear, r.rect, cell),
                        NearestNeighbors::Grid => NearestIndex::new(NearestNeighbors::Grid, r.rect, cell.max(1e-6)),
                    }
                })
                .collect(),
            config.candidate_controls_per_expand.unwrap_or(crate::planners::RRT_CANDIDATES),
        ),
        LowLevel::Est => Layer::Est(
            EstCore::new(scene, config.est_radius, d.regions.len()),
            config.candidate_controls_per_expand.unwrap_or(1),
        ),
    };
    let register = |id: usize, p: Vec2, d: &mut Decomposition, layer: &mut Layer| {
        let r = d.region_of(p);
        d.regions[r].coverage += 1;
        match layer {
            Layer::Rrt(idx, _) => idx[r].insert(id, p),
            Layer::Est(core, _) => core.insert(id, p, r),
        }
    };
    register(0, tree.get(0).state.robot_pos, &mut d, &mut layer);

    let start_region = d.region_of(tree.get(0).state.robot_pos);
    let goal_region = d.region_of(goal.center);
    let mut lead = Vec::new();
    let mut solved = None;
    while !budget.exhausted(stats.iterations) {
        if stats.iterations % sc.lead_period == 0 {
            let (l, explored) = compute_lead(&d, start_region, goal_region, sc.exploration_probability, &mut rng)
                .expect("a full grid is connected");
            debug_assert!(d.is_valid_lead(&l, start_region, goal_region));
            ss.lead_computations += 1;
            ss.exploration_leads += explored as u64;
            ss.last_lead_len = l.len();
            lead = l;
        }
        stats.iterations += 1;
        let region = select_region(&lead, &mut d, &mut rng);

        let mut added = Vec::new();
        match &mut layer {
            Layer::Rrt(idx, candidates) => {
                let target = if rng.random::<f64>() < config.goal_bias {
                    goal.center
                } else {
                    sample_in(&mut rng, &d.regions[region].rect)
                };
                let near = match idx[region].nearest(target) {
                    Some((id, _)) => id,
                    None => 0,
                };
                let from = tree.get(near).state.clone();
                if let Some((c, r)) = best_toward(&mut rng, scene, &from, target, *candidates, &mut stats)? {
                    added.push(tree.add(near, c, r));
                }
            }
            Layer::Est(core, candidates) => {
                let m = core.sample(&mut rng, region).unwrap_or(0);
                let from = tree.get(m).state.clone();
                for _ in 0..*candidates {
                    if let Some((c, r)) = sample_valid(&mut rng, scene, &from, &mut stats)? {
                        added.push(tree.add(m, c, r));
                    }
                }
            }
        }
        for id in added {
            let p = tree.get(id).state.robot_pos;
            register(id, p, &mut d, &mut layer);
            if solved.is_none() && in_goal(&tree.get(id).state, goal) {
                solved = Some(id);
            }
        }
        debug_assert_eq!(d.total_coverage(), tree.len());
        if solved.is_some() {
            break;
        }
    }
    stats.syclop = Some(ss);
    Ok(finish(&tree, solved, stats, &budget))
}
