//! Static reachability oracle: flood fill over robot-centre free space with
//! every body frozen in place.

use super::Scene;
use crate::geom::Vec2;
use crate::world::collide;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct Reachability {
    pub resolution: f64,
    pub free_cells: usize,
    pub reached_cells: usize,
    /// Some reachable free cell lies inside the goal region.
    pub goal_region_reachable: bool,
    /// The cell containing the goal point itself is reachable.
    pub goal_point_reachable: bool,
}

/// 4-connected flood fill on a grid of robot-centre positions. A cell is
/// free when the robot disc at its centre stays inside the bounds and
/// overlaps no body.
pub fn static_reachability(scene: &Scene, resolution: f64) -> Reachability {
    let b = scene.bounds;
    let nx = (b.width() / resolution).ceil() as usize;
    let ny = (b.height() / resolution).ceil() as usize;
    let center = |i: usize, j: usize| {
        Vec2::new(
            b.min.x + (i as f64 + 0.5) * resolution,
            b.min.y + (j as f64 + 0.5) * resolution,
        )
    };
    let inner = b.inflate(-scene.robot.radius);
    let robot = scene.robot_shape();
    let mut free = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let p = center(i, j);
            free[j * nx + i] = inner.contains(p)
                && scene.bodies.iter().all(|body| {
                    collide(robot, p, &body.shape, body.pose).is_none_or(|c| c.depth <= 0.0)
                });
        }
    }
    let cell_of = |p: Vec2| {
        let i = (((p.x - b.min.x) / resolution) as usize).min(nx - 1);
        let j = (((p.y - b.min.y) / resolution) as usize).min(ny - 1);
        (i, j)
    };
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    let (si, sj) = cell_of(scene.robot.start);
    if free[sj * nx + si] {
        seen[sj * nx + si] = true;
        queue.push_back((si, sj));
    }
    let mut reached = 0;
    let mut region = false;
    while let Some((i, j)) = queue.pop_front() {
        reached += 1;
        if center(i, j).distance(scene.robot.goal) <= scene.robot.goal_radius {
            region = true;
        }
        let mut visit = |ii: usize, jj: usize| {
            let k = jj * nx + ii;
            if free[k] && !seen[k] {
                seen[k] = true;
                queue.push_back((ii, jj));
            }
        };
        if i > 0 {
            visit(i - 1, j);
        }
        if i + 1 < nx {
            visit(i + 1, j);
        }
        if j > 0 {
            visit(i, j - 1);
        }
        if j + 1 < ny {
            visit(i, j + 1);
        }
    }
    let (gi, gj) = cell_of(scene.robot.goal);
    Reachability {
        resolution,
        free_cells: free.iter().filter(|f| **f).count(),
        reached_cells: reached,
        goal_region_reachable: region,
        goal_point_reachable: seen[gj * nx + gi],
    }
}
