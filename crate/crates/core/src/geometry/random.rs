//! Random strictly convex polygons for property checks and sampling runs.

use std::f64::consts::TAU;

use rand::Rng;

use super::{Polygon, Vec2};

/// Draws a strictly convex polygon with `n >= 3` vertices.
///
/// Vertices are sorted angles on the unit circle (adjacent gaps at least a
/// fifth of the mean gap), pushed through a random shear-and-stretch affine
/// map and translated. Affine images of points on a circle stay in strictly
/// convex position.
pub fn random_convex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Polygon {
    assert!(n >= 3, "need at least 3 vertices");
    let min_gap = 0.2 * TAU / n as f64;
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let tight = (0..n).any(|i| {
            let next = if i + 1 == n { angles[0] + TAU } else { angles[i + 1] };
            next - angles[i] < min_gap
        });
        if tight {
            continue;
        }
        let sx = rng.gen_range(0.5..2.0);
        let sy = rng.gen_range(0.5..2.0);
        let shear = rng.gen_range(-0.5..0.5);
        let offset = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let pts = angles.iter().map(|a| {
            let (x, y) = (a.cos(), a.sin());
            Vec2::new(sx * x + shear * y, sy * y) + offset
        });
        if let Ok(poly) = Polygon::new(pts) {
            return poly;
        }
    }
}

/// Random polygon with a vertex count drawn from `3..=max_n`.
pub fn random_convex_upto<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> Polygon {
    let n = rng.gen_range(3..=max_n.max(3));
    random_convex(rng, n)
}
