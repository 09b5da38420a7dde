use super::nn::PointGrid;
use super::rrt::finish;
use super::{sample_valid, start_state, Budget, MotionTree, PlanError, PlanOutcome, PlannerConfig, PlannerStats};
use crate::geom::Vec2;
use crate::scene::Scene;
use crate::statespace::{in_goal, GoalRegion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weighted sampler over milestones, weight `1 / (1 + neighbours)`.
/// Backed by a Fenwick tree so updates and draws are logarithmic.
#[derive(Debug, Clone, Default)]
pub struct MilestoneSampler {
    weights: Vec<f64>,
    fenwick: Vec<f64>,
}

impl MilestoneSampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weight_for(neighbors: u32) -> f64 {
        1.0 / (1.0 + neighbors as f64)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut k = i + 1;
        while k <= self.fenwick.len() {
            self.fenwick[k - 1] += delta;
            k += k & k.wrapping_neg();
        }
    }

    /// Appends a milestone with `neighbors` neighbours; returns its index.
    pub fn push(&mut self, neighbors: u32) -> usize {
        let i = self.weights.len();
        let w = Self::weight_for(neighbors);
        self.weights.push(0.0);
        // node k covers (k - lowbit(k), k]; fill it from the existing prefix sums
        let k = i + 1;
        let low = k & k.wrapping_neg();
        let mut sum = 0.0;
        let mut j = k - 1;
        while j > k - low {
            sum += self.fenwick[j - 1];
            j -= j & j.wrapping_neg();
        }
        self.fenwick.push(sum);
        self.set_neighbors(i, neighbors);
        debug_assert_eq!(self.weights[i], w);
        i
    }

    pub fn set_neighbors(&mut self, i: usize, neighbors: u32) {
        let w = Self::weight_for(neighbors);
        let delta = w - self.weights[i];
        self.weights[i] = w;
        self.add(i, delta);
    }

    pub fn total(&self) -> f64 {
        let mut k = self.fenwick.len();
        let mut s = 0.0;
        while k > 0 {
            s += self.fenwick[k - 1];
            k -= k & k.wrapping_neg();
        }
        s
    }

    /// Draws an index with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let n = self.weights.len();
        if n == 0 {
            return None;
        }
        let mut target = rng.random::<f64>() * self.total();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.fenwick[next - 1] <= target {
                target -= self.fenwick[next - 1];
                pos = next;
            }
            step >>= 1;
        }
        // rounding can land past the last positive weight
        Some(pos.min(n - 1))
    }
}

/// EST bookkeeping: neighbour counts within radius `R` and one sampler per
/// partition (a single partition for plain EST, one per region for
/// SyCLoP).
#[derive(Debug, Clone)]
pub(crate) struct EstCore {
    radius: f64,
    grid: PointGrid,
    neighbors: Vec<u32>,
    loc: Vec<(usize, usize)>,
    pub(crate) parts: Vec<MilestoneSampler>,
    members: Vec<Vec<usize>>,
}

impl EstCore {
    pub(crate) fn new(scene: &Scene, radius: f64, parts: usize) -> Self {
        EstCore {
            radius,
            grid: PointGrid::new(scene.bounds, radius),
            neighbors: Vec::new(),
            loc: Vec::new(),
            parts: vec![MilestoneSampler::new(); parts],
            members: vec![Vec::new(); parts],
        }
    }

    /// Registers motion `id` (ids must arrive densely in order).
    pub(crate) fn insert(&mut self, id: usize, p: Vec2, part: usize) {
        debug_assert_eq!(id, self.neighbors.len());
        let mut own = 0;
        let mut touched = Vec::new();
        self.grid.within(p, self.radius, |other, _| {
            own += 1;
            touched.push(other);
        });
        for other in touched {
            self.neighbors[other] += 1;
            let (q, i) = self.loc[other];
            self.parts[q].set_neighbors(i, self.neighbors[other]);
        }
        self.grid.insert(id, p);
        self.neighbors.push(own);
        let i = self.parts[part].push(own);
        self.members[part].push(id);
        self.loc.push((part, i));
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R, part: usize) -> Option<usize> {
        self.parts[part].sample(rng).map(|i| self.members[part][i])
    }

    #[cfg(test)]
    pub(crate) fn neighbors(&self, id: usize) -> u32 {
        self.neighbors[id]
    }
}

/// Expansive space trees: expand a milestone drawn with weight
/// `1 / (1 + N_R)` by one random control.
pub fn est_solve(scene: &Scene, goal: &GoalRegion, config: &PlannerConfig) -> Result<PlanOutcome, PlanError> {
    let root = start_state(scene, config)?;
    let budget = Budget::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = PlannerStats::default();
    let mut tree = MotionTree::with_root(root);
    if in_goal(&tree.get(0).state, goal) {
        return Ok(finish(&tree, Some(0), stats, &budget));
    }
    let mut core = EstCore::new(scene, config.est_radius, 1);
    core.insert(0, tree.get(0).state.robot_pos, 0);
    let candidates = config.candidate_controls_per_expand.unwrap_or(1);

    while !budget.exhausted(stats.iterations) {
        stats.iterations += 1;
        let m = core.sample(&mut rng, 0).expect("tree has a root");
        let from = tree.get(m).state.clone();
        for _ in 0..candidates {
            let Some((control, result)) = sample_valid(&mut rng, scene, &from, &mut stats)? else {
                continue;
            };
            let id = tree.add(m, control, result);
            core.insert(id, tree.get(id).state.robot_pos, 0);
            if in_goal(&tree.get(id).state, goal) {
                return Ok(finish(&tree, Some(id), stats, &budget));
            }
        }
    }
    Ok(finish(&tree, None, stats, &budget))
}
