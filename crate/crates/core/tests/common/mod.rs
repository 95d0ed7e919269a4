//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use areamap::geometry::random::random_convex_upto;
use areamap::{Polygon, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_polygon(seed: u64, max_n: usize) -> Polygon {
    random_convex_upto(&mut rng(seed), max_n)
}

pub fn area_of(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum::<f64>()
        / 2.0
}

/// Part of `poly` on the right of the directed line `from -> to`,
/// by Sutherland-Hodgman clipping.
pub fn clip_right(poly: &Polygon, from: Vec2, to: Vec2) -> Vec<(f64, f64)> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let side = |p: (f64, f64)| -(dx * (p.1 - from.y) - dy * (p.0 - from.x));
    let pts: Vec<(f64, f64)> = poly.vertices().iter().map(|v| (v.x, v.y)).collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Area cut off ahead of `x` by the chord to `y`.
pub fn clipped_cut_area(poly: &Polygon, x: Vec2, y: Vec2) -> f64 {
    let region = clip_right(poly, x, y);
    if region.len() < 3 {
        0.0
    } else {
        area_of(&region).abs()
    }
}

pub fn centroid_of(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let w = p.0 * q.1 - q.0 * p.1;
        a += w;
        cx += (p.0 + q.0) * w;
        cy += (p.1 + q.1) * w;
    }
    (cx / (3.0 * a), cy / (3.0 * a))
}

/// Arc position (fraction of perimeter, in `(s, s + 1)`) of the point whose
/// chord from `point_at(s)` cuts `area`, by bisection on the clipped area.
pub fn phi_by_bisection(poly: &Polygon, s: f64, area: f64) -> f64 {
    let x = poly.point_at(s).xy;
    let (mut lo, mut hi) = (s, s + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let cut = clipped_cut_area(poly, x, poly.point_at(mid).xy);
        if cut < area {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}
