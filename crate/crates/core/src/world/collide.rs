//! Narrow-phase contact generation between discs and convex polygons.
//!
//! Boxes are handled as four-vertex polygons without allocating. Every
//! contact normal points from shape `b` towards shape `a`.

use super::{Shape, CONTACT_TOLERANCE};
use crate::geom::{Rect, Vec2};

/// Deepest-penetration contact between two shapes.
///
/// `depth` is positive when the shapes overlap and may be slightly negative
/// (down to `-CONTACT_TOLERANCE`) when they are separated by less than the
/// contact tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub point: Vec2,
    pub normal: Vec2,
    pub depth: f64,
}

impl Contact {
    fn flipped(self) -> Contact {
        Contact { normal: -self.normal, ..self }
    }
}

enum Verts<'a> {
    Quad([Vec2; 4]),
    Slice(&'a [Vec2], Vec2),
}

impl Verts<'_> {
    fn len(&self) -> usize {
        match self {
            Verts::Quad(_) => 4,
            Verts::Slice(v, _) => v.len(),
        }
    }

    #[inline]
    fn get(&self, i: usize) -> Vec2 {
        match self {
            Verts::Quad(q) => q[i],
            Verts::Slice(v, off) => v[i] + *off,
        }
    }

    fn edge_normal(&self, i: usize) -> Vec2 {
        let a = self.get(i);
        let b = self.get((i + 1) % self.len());
        (b - a).perp_right().normalized().unwrap_or(Vec2::X)
    }

    fn project(&self, axis: Vec2) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let p = self.get(i).dot(axis);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (lo, hi)
    }

    fn centroid(&self) -> Vec2 {
        let mut c = Vec2::ZERO;
        for i in 0..self.len() {
            c += self.get(i);
        }
        c / self.len() as f64
    }
}

fn polygon_view(shape: &Shape, pose: Vec2) -> Option<Verts<'_>> {
    match shape {
        Shape::Disc { .. } => None,
        Shape::Box {
            half_width: hw,
            half_height: hh,
        } => Some(Verts::Quad([
            pose + Vec2::new(-hw, -hh),
            pose + Vec2::new(*hw, -hh),
            pose + Vec2::new(*hw, *hh),
            pose + Vec2::new(-hw, *hh),
        ])),
        Shape::ConvexPolygon { vertices } => Some(Verts::Slice(vertices, pose)),
    }
}

/// Contact between two posed shapes, or `None` when they are separated by
/// more than the contact tolerance.
pub fn collide(shape_a: &Shape, pose_a: Vec2, shape_b: &Shape, pose_b: Vec2) -> Option<Contact> {
    if !shape_a
        .aabb(pose_a)
        .overlaps(&shape_b.aabb(pose_b).inflate(CONTACT_TOLERANCE))
    {
        return None;
    }
    match (shape_a, shape_b) {
        (Shape::Disc { radius: ra }, Shape::Disc { radius: rb }) => {
            disc_disc(pose_a, *ra, pose_b, *rb)
        }
        (Shape::Disc { radius }, _) => {
            disc_polygon(pose_a, *radius, &polygon_view(shape_b, pose_b)?)
        }
        (_, Shape::Disc { radius }) => {
            disc_polygon(pose_b, *radius, &polygon_view(shape_a, pose_a)?).map(Contact::flipped)
        }
        _ => polygon_polygon(&polygon_view(shape_a, pose_a)?, &polygon_view(shape_b, pose_b)?),
    }
}

fn disc_disc(ca: Vec2, ra: f64, cb: Vec2, rb: f64) -> Option<Contact> {
    let d = ca - cb;
    let dist = d.norm();
    let depth = ra + rb - dist;
    if depth < -CONTACT_TOLERANCE {
        return None;
    }
    // coincident centres: +x tie-break
    let normal = if dist > 0.0 { d / dist } else { Vec2::X };
    Some(Contact {
        point: cb + normal * rb,
        normal,
        depth,
    })
}

fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

fn disc_polygon(c: Vec2, r: f64, poly: &Verts<'_>) -> Option<Contact> {
    let n = poly.len();
    let mut best_face = 0;
    let mut best_sep = f64::NEG_INFINITY;
    for i in 0..n {
        let s = poly.edge_normal(i).dot(c - poly.get(i));
        if s > best_sep {
            best_sep = s;
            best_face = i;
        }
    }
    if best_sep <= 0.0 {
        // centre inside the polygon: push out through the nearest face
        let normal = poly.edge_normal(best_face);
        return Some(Contact {
            point: c - normal * best_sep,
            normal,
            depth: r - best_sep,
        });
    }
    let mut closest = poly.get(0);
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let q = closest_on_segment(c, poly.get(i), poly.get((i + 1) % n));
        let d = (c - q).norm_sq();
        if d < best_d {
            best_d = d;
            closest = q;
        }
    }
    let dist = best_d.sqrt();
    let depth = r - dist;
    if depth < -CONTACT_TOLERANCE {
        return None;
    }
    let normal = (c - closest).normalized().unwrap_or(Vec2::X);
    Some(Contact {
        point: closest,
        normal,
        depth,
    })
}

fn polygon_polygon(a: &Verts<'_>, b: &Verts<'_>) -> Option<Contact> {
    let mut best_axis = Vec2::X;
    let mut best_overlap = f64::INFINITY;
    for (poly, count) in [(a, a.len()), (b, b.len())] {
        for i in 0..count {
            let axis = poly.edge_normal(i);
            let (alo, ahi) = a.project(axis);
            let (blo, bhi) = b.project(axis);
            let overlap = ahi.min(bhi) - alo.max(blo);
            if overlap < -CONTACT_TOLERANCE {
                return None;
            }
            if overlap < best_overlap {
                best_overlap = overlap;
                best_axis = axis;
            }
        }
    }
    let mut normal = best_axis;
    if (a.centroid() - b.centroid()).dot(normal) < 0.0 {
        normal = -normal;
    }
    // deepest vertex of `a` along -normal
    let mut point = a.get(0);
    let mut lowest = f64::INFINITY;
    for i in 0..a.len() {
        let p = a.get(i);
        let d = p.dot(normal);
        if d < lowest {
            lowest = d;
            point = p;
        }
    }
    Some(Contact {
        point,
        normal,
        depth: best_overlap,
    })
}

impl Shape {
    /// Bounding rectangle at `pose`.
    pub fn aabb(&self, pose: Vec2) -> Rect {
        match self {
            Shape::Disc { radius } => Rect::new(
                pose - Vec2::new(*radius, *radius),
                pose + Vec2::new(*radius, *radius),
            ),
            Shape::Box {
                half_width,
                half_height,
            } => Rect::new(
                pose - Vec2::new(*half_width, *half_height),
                pose + Vec2::new(*half_width, *half_height),
            ),
            Shape::ConvexPolygon { vertices } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                Rect::new(lo + pose, hi + pose)
            }
        }
    }

    /// Closed point-in-shape test.
    pub fn contains(&self, pose: Vec2, p: Vec2) -> bool {
        match self {
            Shape::Disc { radius } => (p - pose).norm() <= *radius,
            _ => {
                let Some(poly) = polygon_view(self, pose) else {
                    return false;
                };
                (0..poly.len()).all(|i| poly.edge_normal(i).dot(p - poly.get(i)) <= 0.0)
            }
        }
    }
}
