//! Nearest-neighbour queries over robot positions.
//!
//! [`linear_nearest`] is the reference scan; [`PointGrid`] buckets points
//! on a uniform grid and returns the same arg-min (ties go to the lowest
//! id).

use super::NearestNeighbors;
use crate::geom::{Rect, Vec2};

#[inline]
fn better(d: f64, id: usize, best: Option<(usize, f64)>) -> bool {
    match best {
        None => true,
        Some((bid, bd)) => d < bd || (d == bd && id < bid),
    }
}

/// Exact nearest point by exhaustive scan.
pub fn linear_nearest<I>(points: I, q: Vec2) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = (usize, Vec2)>,
{
    let mut best = None;
    for (id, p) in points {
        let d = q.distance(p);
        if better(d, id, best) {
            best = Some((id, d));
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct PointGrid {
    bounds: Rect,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<(usize, Vec2)>>,
    len: usize,
}

impl PointGrid {
    pub fn new(bounds: Rect, cell: f64) -> Self {
        assert!(cell > 0.0);
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        PointGrid {
            bounds,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn coord(&self, p: Vec2) -> (usize, usize) {
        let i = ((p.x - self.bounds.min.x) / self.cell).floor();
        let j = ((p.y - self.bounds.min.y) / self.cell).floor();
        (
            (i.max(0.0) as usize).min(self.nx - 1),
            (j.max(0.0) as usize).min(self.ny - 1),
        )
    }

    pub fn insert(&mut self, id: usize, p: Vec2) {
        let (i, j) = self.coord(p);
        self.buckets[j * self.nx + i].push((id, p));
        self.len += 1;
    }

    fn scan_ring(&self, ci: usize, cj: usize, r: usize, mut f: impl FnMut(&[(usize, Vec2)])) {
        let (ci, cj, r) = (ci as isize, cj as isize, r as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        for j in (cj - r)..=(cj + r) {
            if j < 0 || j >= ny {
                continue;
            }
            let edge_row = j == cj - r || j == cj + r;
            let mut i = ci - r;
            while i <= ci + r {
                if i >= 0 && i < nx {
                    f(&self.buckets[(j * nx + i) as usize]);
                }
                i += if edge_row || r == 0 { 1 } else { 2 * r };
            }
        }
    }

    /// Exact nearest neighbour of `q`.
    pub fn nearest(&self, q: Vec2) -> Option<(usize, f64)> {
        if self.len == 0 {
            return None;
        }
        if !self.bounds.contains(q) {
            return linear_nearest(self.buckets.iter().flatten().copied(), q);
        }
        let (ci, cj) = self.coord(q);
        let max_r = self.nx.max(self.ny);
        let mut best = None;
        for r in 0..=max_r {
            self.scan_ring(ci, cj, r, |bucket| {
                for &(id, p) in bucket {
                    let d = q.distance(p);
                    if better(d, id, best) {
                        best = Some((id, d));
                    }
                }
            });
            // every unscanned point is at least r cells away
            if let Some((_, d)) = best {
                if d < r as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }

    /// Calls `f(id, distance)` for every point within `radius` of `q`.
    pub fn within(&self, q: Vec2, radius: f64, mut f: impl FnMut(usize, f64)) {
        let lo = self.coord(q - Vec2::new(radius, radius));
        let hi = self.coord(q + Vec2::new(radius, radius));
        for j in lo.1..=hi.1 {
            for i in lo.0..=hi.0 {
                for &(id, p) in &self.buckets[j * self.nx + i] {
                    let d = q.distance(p);
                    if d <= radius {
                        f(id, d);
                    }
                }
            }
        }
    }
}

/// Nearest-neighbour index selected by [`NearestNeighbors`].
#[derive(Debug, Clone)]
pub enum NearestIndex {
    Linear(Vec<(usize, Vec2)>),
    Grid(PointGrid),
}

impl NearestIndex {
    pub fn new(kind: NearestNeighbors, bounds: Rect, cell: f64) -> Self {
        match kind {
            NearestNeighbors::Linear => NearestIndex::Linear(Vec::new()),
            NearestNeighbors::Grid => NearestIndex::Grid(PointGrid::new(bounds, cell)),
        }
    }

    pub fn insert(&mut self, id: usize, p: Vec2) {
        match self {
            NearestIndex::Linear(v) => v.push((id, p)),
            NearestIndex::Grid(g) => g.insert(id, p),
        }
    }

    pub fn nearest(&self, q: Vec2) -> Option<(usize, f64)> {
        match self {
            NearestIndex::Linear(v) => linear_nearest(v.iter().copied(), q),
            NearestIndex::Grid(g) => g.nearest(q),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            NearestIndex::Linear(v) => v.len(),
            NearestIndex::Grid(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn grid_matches_linear_scan(
            pts in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 1..200),
            queries in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 1..20),
            cell in 0.2..3.0f64,
        ) {
            let bounds = Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0));
            let mut grid = PointGrid::new(bounds, cell);
            let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
            for (i, p) in pts.iter().enumerate() {
                grid.insert(i, *p);
            }
            for (x, y) in queries {
                let q = Vec2::new(x, y);
                prop_assert_eq!(grid.nearest(q), linear_nearest(pts.iter().copied().enumerate(), q));
                let mut got = vec![];
                grid.within(q, 1.0, |id, _| got.push(id));
                got.sort();
                let want: Vec<usize> = pts.iter().enumerate()
                    .filter(|(_, p)| q.distance(**p) <= 1.0).map(|(i, _)| i).collect();
                prop_assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let bounds = Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0));
        let mut grid = PointGrid::new(bounds, 0.5);
        grid.insert(3, Vec2::new(6.0, 5.0));
        grid.insert(1, Vec2::new(4.0, 5.0));
        grid.insert(2, Vec2::new(5.0, 6.0));
        assert_eq!(grid.nearest(Vec2::new(5.0, 5.0)), Some((1, 1.0)));
    }

    #[test]
    fn query_outside_bounds_falls_back() {
        let bounds = Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0));
        let mut grid = PointGrid::new(bounds, 1.0);
        grid.insert(0, Vec2::new(9.5, 9.5));
        grid.insert(1, Vec2::new(0.5, 0.5));
        assert_eq!(grid.nearest(Vec2::new(20.0, 20.0)).unwrap().0, 0);
    }
}
