use super::nn::NearestIndex;
use super::{best_toward, start_state, Budget, MotionTree, PlanError, PlanOutcome, PlannerConfig, PlannerStats};
use crate::scene::Scene;
use crate::statespace::{in_goal, sample_goal_biased_target, GoalRegion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const RRT_CANDIDATES: usize = 10;

pub(crate) const NN_CELL: f64 = 0.25;

/// Kinodynamic RRT: extend the nearest tree node toward a goal-biased
/// random target with the best of several sampled controls.
pub fn rrt_solve(scene: &Scene, goal: &GoalRegion, config: &PlannerConfig) -> Result<PlanOutcome, PlanError> {
    let root = start_state(scene, config)?;
    let budget = Budget::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = PlannerStats::default();
    let mut tree = MotionTree::with_root(root);
    if in_goal(&tree.get(0).state, goal) {
        return Ok(finish(&tree, Some(0), stats, &budget));
    }
    let mut nn = NearestIndex::new(config.nearest, scene.bounds, NN_CELL);
    nn.insert(0, tree.get(0).state.robot_pos);
    let candidates = config.candidate_controls_per_expand.unwrap_or(RRT_CANDIDATES);

    while !budget.exhausted(stats.iterations) {
        stats.iterations += 1;
        let target = sample_goal_biased_target(&mut rng, goal, &scene.bounds, config.goal_bias);
        let (near, _) = nn.nearest(target).expect("tree has a root");
        let from = tree.get(near).state.clone();
        let Some((control, result)) = best_toward(&mut rng, scene, &from, target, candidates, &mut stats)? else {
            continue;
        };
        let id = tree.add(near, control, result);
        let p = tree.get(id).state.robot_pos;
        nn.insert(id, p);
        if in_goal(&tree.get(id).state, goal) {
            return Ok(finish(&tree, Some(id), stats, &budget));
        }
    }
    Ok(finish(&tree, None, stats, &budget))
}

pub(crate) fn finish(tree: &MotionTree, goal_id: Option<usize>, mut stats: PlannerStats, budget: &Budget) -> PlanOutcome {
    stats.motions = tree.len();
    stats.wall_time = budget.elapsed();
    PlanOutcome {
        solution: goal_id.map(|id| tree.path_to(id)),
        stats,
    }
}
