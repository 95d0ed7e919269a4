//! Planar primitives for convex polygons.
//!
//! A [`Polygon`] is a strictly convex, counterclockwise vertex loop. Points on
//! its boundary are addressed by [`BoundaryPoint`], which carries both the
//! `(side, t)` representation and the normalized arc-length coordinate `s`
//! in `[0, 1)` measured counterclockwise from vertex 0. Sides are half-open
//! `[P_k, P_{k+1})`, so a vertex always belongs to its outgoing side.
//!
//! Tolerances are absolute and scaled by the perimeter (lengths) or the area.

pub mod random;

use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for every length-scaled comparison.
pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is
    /// counterclockwise from `self`.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

/// Intersection of the infinite lines `a0 a1` and `b0 b1`, or `None` when
/// the directions are parallel to within [`REL_TOL`].
pub fn line_intersection(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<Vec2> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.cross(db);
    if denom.abs() <= REL_TOL * da.norm() * db.norm() {
        return None;
    }
    let t = (b0 - a0).cross(db) / denom;
    Some(a0 + da * t)
}

/// Distance from `p` to the infinite line through `a` and `b`.
pub fn line_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let d = b - a;
    d.cross(p - a).abs() / d.norm()
}

/// Which open half-plane of a directed chord a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPlaneSign {
    /// Right of the chord direction.
    Negative,
    OnLine,
    /// Left of the chord direction.
    Positive,
}

impl HalfPlaneSign {
    pub fn value(self) -> i8 {
        match self {
            HalfPlaneSign::Negative => -1,
            HalfPlaneSign::OnLine => 0,
            HalfPlaneSign::Positive => 1,
        }
    }
}

/// Side of the directed line `from -> to` containing `p`.
///
/// `scale` is the length scale (usually the polygon perimeter); points closer
/// than `1e-12 * scale` to the line report [`HalfPlaneSign::OnLine`].
pub fn half_plane_sign(from: Vec2, to: Vec2, p: Vec2, scale: f64) -> Result<HalfPlaneSign> {
    let dir = to - from;
    let len = dir.norm();
    let tol = REL_TOL * scale;
    if len <= tol {
        return Err(Error::DegenerateChord);
    }
    let signed_dist = dir.cross(p - from) / len;
    Ok(if signed_dist > tol {
        HalfPlaneSign::Positive
    } else if signed_dist < -tol {
        HalfPlaneSign::Negative
    } else {
        HalfPlaneSign::OnLine
    })
}

/// Result of intersecting the lines carrying two polygon sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideIntersection {
    Point(Vec2),
    Parallel,
}

impl SideIntersection {
    pub fn point(self) -> Option<Vec2> {
        match self {
            SideIntersection::Point(p) => Some(p),
            SideIntersection::Parallel => None,
        }
    }
}

/// A point on the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    /// Index of the side `[P_side, P_side+1)` containing the point.
    pub side: usize,
    /// Fraction along the side, in `[0, 1)`.
    pub t: f64,
    pub xy: Vec2,
    /// Normalized arc length from vertex 0, in `[0, 1)`.
    pub s: f64,
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    side_lengths: Vec<f64>,
    /// `n + 1` entries: arc length at each vertex, closing with the perimeter.
    cumulative_arc: Vec<f64>,
    perimeter: f64,
    area: f64,
}

impl Polygon {
    /// Validates a vertex loop and builds the polygon.
    ///
    /// Clockwise input is reversed. Vertex 0 of the input stays vertex 0.
    pub fn new<P: Into<Vec2>>(points: impl IntoIterator<Item = P>) -> Result<Self> {
        let mut vertices: Vec<Vec2> = points.into_iter().map(Into::into).collect();
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices { count: n });
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::Parse("non-finite coordinate".into()));
        }

        let (mut lo, mut hi) = (vertices[0], vertices[0]);
        for v in &vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let dup_tol = REL_TOL * hi.dist(lo);
        for j in 1..n {
            if vertices[..j].iter().any(|v| v.dist(vertices[j]) <= dup_tol) {
                return Err(Error::DuplicateVertex { index: j });
            }
        }

        if shoelace(&vertices) < 0.0 {
            // keep vertex 0 in place so that s = 0 stays where the caller put it
            vertices[1..].reverse();
        }

        let mut turning = 0.0;
        for i in 0..n {
            let e1 = vertices[i] - vertices[(i + n - 1) % n];
            let e2 = vertices[(i + 1) % n] - vertices[i];
            let c = e1.cross(e2);
            if c <= REL_TOL * e1.norm() * e2.norm() {
                return Err(Error::NonConvex { index: i });
            }
            turning += c.atan2(e1.dot(e2));
        }
        // all left turns but wound more than once (a star polygon)
        if (turning - TAU).abs() > 1e-6 {
            return Err(Error::NonConvex { index: 0 });
        }

        let side_lengths: Vec<f64> = (0..n)
            .map(|i| vertices[i].dist(vertices[(i + 1) % n]))
            .collect();
        let mut cumulative_arc = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cumulative_arc.push(0.0);
        for len in &side_lengths {
            acc += len;
            cumulative_arc.push(acc);
        }
        let area = shoelace(&vertices);
        Ok(Polygon {
            vertices,
            side_lengths,
            cumulative_arc,
            perimeter: acc,
            area,
        })
    }

    /// Parses a JSON array of `[x, y]` pairs.
    pub fn from_json(text: &str) -> Result<Self> {
        let pts: Vec<[f64; 2]> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Polygon::new(pts)
    }

    pub fn to_json(&self) -> String {
        let pts: Vec<[f64; 2]> = self.vertices.iter().map(|v| [v.x, v.y]).collect();
        serde_json::to_string(&pts).expect("finite coordinates serialize")
    }

    /// Regular `n`-gon with the given side length; side 0 is horizontal and
    /// starts at the origin.
    pub fn regular(n: usize, side: f64) -> Result<Self> {
        let n_f = n as f64;
        let radius = side / (2.0 * (std::f64::consts::PI / n_f).sin());
        let start = -std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / n_f;
        let raw: Vec<Vec2> = (0..n)
            .map(|k| {
                let a = start + TAU * k as f64 / n_f;
                Vec2::new(radius * a.cos(), radius * a.sin())
            })
            .collect();
        let origin = raw.first().copied().unwrap_or_default();
        Polygon::new(raw.into_iter().map(|v| v - origin))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Vertex `i`, with the index reduced modulo `n`.
    #[inline]
    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    pub fn side_length(&self, side: usize) -> f64 {
        self.side_lengths[side % self.len()]
    }

    pub fn side_lengths(&self) -> &[f64] {
        &self.side_lengths
    }

    pub fn cumulative_arc(&self) -> &[f64] {
        &self.cumulative_arc
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Length tolerance `1e-12 * L`.
    pub fn length_tol(&self) -> f64 {
        REL_TOL * self.perimeter
    }

    /// Boundary point on `side` at fraction `t`, canonicalized: points within
    /// the length tolerance of a vertex are moved onto it, and a vertex is
    /// always reported as `t = 0` on its outgoing side.
    pub fn boundary_point(&self, side: usize, t: f64) -> BoundaryPoint {
        let n = self.len();
        let mut side = side % n;
        let len = self.side_lengths[side];
        let tol = self.length_tol();
        let mut t = t.clamp(0.0, 1.0);
        if (1.0 - t) * len <= tol {
            side = (side + 1) % n;
            t = 0.0;
        } else if t * len <= tol {
            t = 0.0;
        }
        let xy = if t == 0.0 {
            self.vertices[side]
        } else {
            self.vertices[side].lerp(self.vertex(side + 1), t)
        };
        let s = (self.cumulative_arc[side] + t * self.side_lengths[side]) / self.perimeter;
        BoundaryPoint {
            side,
            t,
            xy,
            s: if s >= 1.0 { 0.0 } else { s },
        }
    }

    /// Point at normalized arc length `s` (reduced modulo 1).
    pub fn point_at(&self, s: f64) -> BoundaryPoint {
        let mut r = s.rem_euclid(1.0);
        if r >= 1.0 {
            r = 0.0;
        }
        let arc = r * self.perimeter;
        let n = self.len();
        let side = self.cumulative_arc[1..=n]
            .partition_point(|&c| c <= arc)
            .min(n - 1);
        let t = (arc - self.cumulative_arc[side]) / self.side_lengths[side];
        self.boundary_point(side, t)
    }

    /// Normalized arc coordinate of a boundary point.
    pub fn arc_of(&self, p: &BoundaryPoint) -> f64 {
        p.s
    }

    /// Finds the boundary point at `xy`, if `xy` is within `1e-9 * L` of the
    /// boundary.
    pub fn locate(&self, xy: Vec2) -> Result<BoundaryPoint> {
        let n = self.len();
        let mut best = (f64::INFINITY, 0, 0.0);
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertex(k + 1);
            let d = b - a;
            let t = ((xy - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            let dist = a.lerp(b, t).dist(xy);
            if dist < best.0 {
                best = (dist, k, t);
            }
        }
        if best.0 > 1e-9 * self.perimeter {
            return Err(Error::NotOnBoundary { x: xy.x, y: xy.y });
        }
        Ok(self.boundary_point(best.1, best.2))
    }

    /// Distance from a boundary point to the nearest vertex.
    pub fn vertex_distance(&self, p: &BoundaryPoint) -> f64 {
        let len = self.side_lengths[p.side];
        (p.t * len).min((1.0 - p.t) * len)
    }

    /// Whether `p` is within the length tolerance of a vertex.
    pub fn near_vertex(&self, p: &BoundaryPoint) -> bool {
        self.vertex_distance(p) <= self.length_tol()
    }

    /// Area of the region bounded by the chord `x -> y` and the boundary arc
    /// running counterclockwise from `x` to `y`.
    pub fn cut_area(&self, x: &BoundaryPoint, y: &BoundaryPoint) -> f64 {
        shoelace(&self.cut_region(x, y)).clamp(0.0, self.area)
    }

    /// Vertex loop of the cut region: `x`, the vertices strictly between `x`
    /// and `y` counterclockwise, then `y`.
    pub fn cut_region(&self, x: &BoundaryPoint, y: &BoundaryPoint) -> Vec<Vec2> {
        let n = self.len();
        let count = if x.side == y.side {
            if y.t >= x.t {
                0
            } else {
                n
            }
        } else {
            (y.side + n - x.side) % n
        };
        let mut pts = Vec::with_capacity(count + 2);
        pts.push(x.xy);
        pts.extend((1..=count).map(|k| self.vertex(x.side + k)));
        pts.push(y.xy);
        pts
    }

    /// Intersection of the infinite lines through sides `i` and `j`.
    pub fn side_line_intersection(&self, i: usize, j: usize) -> SideIntersection {
        match line_intersection(
            self.vertex(i),
            self.vertex(i + 1),
            self.vertex(j),
            self.vertex(j + 1),
        ) {
            Some(p) => SideIntersection::Point(p),
            None => SideIntersection::Parallel,
        }
    }

    /// Distance from `p` to the infinite line carrying `side`.
    pub fn side_line_distance(&self, side: usize, p: Vec2) -> f64 {
        line_distance(self.vertex(side), self.vertex(side + 1), p)
    }
}

/// Signed shoelace area (positive for counterclockwise loops).
pub fn shoelace(points: &[Vec2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let o = points[0];
    let mut twice = 0.0;
    for k in 1..n - 1 {
        twice += (points[k] - o).cross(points[k + 1] - o);
    }
    0.5 * twice
}

/// Area centroid of a simple polygon given as a vertex loop.
pub fn centroid(points: &[Vec2]) -> Vec2 {
    let o = points[0];
    let mut twice_area = 0.0;
    let mut acc = Vec2::default();
    for k in 1..points.len().saturating_sub(1) {
        let (a, b) = (points[k] - o, points[k + 1] - o);
        let w = a.cross(b);
        twice_area += w;
        acc += (a + b) * (w / 3.0);
    }
    if twice_area == 0.0 {
        let sum = points.iter().fold(Vec2::default(), |s, &p| s + p);
        return sum / points.len() as f64;
    }
    o + acc / twice_area
}
