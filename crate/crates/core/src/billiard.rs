//! The constant-area chord map on a convex polygon.
//!
//! For a boundary point `x`, [`phi`] returns the point `y` counterclockwise of
//! `x` such that the chord `x y` cuts off area `A` together with the boundary
//! arc from `x` to `y`. The chords envelope the outer billiard table, and the
//! polygon is an invariant curve of that table's billiard map; restricted to
//! the polygon the map is an orientation-preserving circle homeomorphism.
//!
//! Lifts to the real line use [`Lift`], an integer turn count plus a
//! fractional coordinate, so that `F(s + 1) = F(s) + 1` holds exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{line_intersection, BoundaryPoint, Polygon, Vec2};

/// Step for finite-difference derivatives at vertex-touching points.
pub const VERTEX_FD_STEP: f64 = 1e-7;

/// A polygon together with the cut area `A` (not `a = 2A`).
#[derive(Debug, Clone, Copy)]
pub struct MapConfig<'a> {
    poly: &'a Polygon,
    area: f64,
}

impl<'a> MapConfig<'a> {
    pub fn new(poly: &'a Polygon, area: f64) -> Result<Self> {
        check_area(poly, area)?;
        Ok(Self { poly, area })
    }

    /// Builds a config from the doubled parameter `a = 2A`.
    pub fn from_doubled(poly: &'a Polygon, a: f64) -> Result<Self> {
        Self::new(poly, 0.5 * a)
    }

    pub fn poly(&self) -> &'a Polygon {
        self.poly
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// The doubled area parameter `a = 2A`.
    pub fn doubled(&self) -> f64 {
        2.0 * self.area
    }
}

pub(crate) fn check_area(poly: &Polygon, area: f64) -> Result<()> {
    let half = 0.5 * poly.area();
    if area.is_finite() && area > 0.0 && area < half {
        Ok(())
    } else {
        Err(Error::AreaOutOfRange { area, half })
    }
}

/// A point of the universal cover of the boundary circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lift {
    pub turns: i64,
    /// Normalized arc coordinate in `[0, 1)`.
    pub frac: f64,
}

impl Lift {
    pub fn new(turns: i64, frac: f64) -> Self {
        Self { turns, frac }
    }

    pub fn from_f64(s: f64) -> Self {
        let turns = s.floor();
        let mut frac = s - turns;
        let mut turns = turns as i64;
        if frac >= 1.0 {
            frac = 0.0;
            turns += 1;
        }
        Self { turns, frac }
    }

    pub fn to_f64(self) -> f64 {
        self.turns as f64 + self.frac
    }

    /// `self - other` as a real number; exact in the integer part.
    pub fn diff(self, other: Lift) -> f64 {
        (self.turns - other.turns) as f64 + (self.frac - other.frac)
    }

    pub fn shift(self, turns: i64) -> Self {
        Self {
            turns: self.turns + turns,
            frac: self.frac,
        }
    }
}

/// Forward map with an arbitrary per-step area. Caller checks the area.
fn advance(poly: &Polygon, x: &BoundaryPoint, area: f64) -> BoundaryPoint {
    let n = poly.len();
    let o = x.xy;
    let mut acc = 0.0;
    // The cut area is affine in the moving endpoint along each side, so the
    // crossing side is found by accumulating the fan (x, P_k, P_k+1).
    for step in 1..=n {
        let k = (x.side + step) % n;
        let a = poly.vertex(k);
        let b = poly.vertex(k + 1);
        let tri = 0.5 * (a - o).cross(b - o);
        if tri > 0.0 && acc + tri >= area {
            return poly.boundary_point(k, (area - acc) / tri);
        }
        acc += tri;
    }
    unreachable!("cut area {area} below half the polygon area is always reached")
}

/// One step of the chord map with per-step area `area`.
pub fn phi_step_area(poly: &Polygon, x: &BoundaryPoint, area: f64) -> Result<BoundaryPoint> {
    check_area(poly, area)?;
    Ok(advance(poly, x, area))
}

/// The chord map `phi_A`.
pub fn phi(cfg: &MapConfig, x: &BoundaryPoint) -> BoundaryPoint {
    advance(cfg.poly, x, cfg.area)
}

/// Lifted step for a given area.
pub(crate) fn lift_step(poly: &Polygon, s: Lift, area: f64) -> Lift {
    let x = poly.point_at(s.frac);
    let y = advance(poly, &x, area);
    let wrapped = y.s <= s.frac;
    Lift {
        turns: s.turns + i64::from(wrapped),
        frac: y.s,
    }
}

/// Lift `F` of the chord map on the split representation.
pub fn phi_lift_exact(cfg: &MapConfig, s: Lift) -> Lift {
    lift_step(cfg.poly, s, cfg.area)
}

/// Lift `F` on plain reals. See [`phi_lift_exact`] for exact periodicity.
pub fn phi_lift(cfg: &MapConfig, s: f64) -> f64 {
    phi_lift_exact(cfg, Lift::from_f64(s)).to_f64()
}

/// `F^k(s)`.
pub fn iterate_lift(cfg: &MapConfig, s: Lift, k: u64) -> Lift {
    (0..k).fold(s, |acc, _| lift_step(cfg.poly, acc, cfg.area))
}

/// Derivative of one step, `d s_y / d s_x`, with per-step area `area`.
///
/// Equal to `dist(y, line(x)) / dist(x, line(y))` where `line(p)` carries the
/// side of `p`: moving both endpoints must sweep equal thin triangles.
pub fn derivative_for_area(poly: &Polygon, area: f64, x: &BoundaryPoint) -> Result<f64> {
    check_area(poly, area)?;
    let y = advance(poly, x, area);
    if poly.near_vertex(x) || poly.near_vertex(&y) {
        return Err(Error::VertexNonSmooth);
    }
    Ok(poly.side_line_distance(x.side, y.xy) / poly.side_line_distance(y.side, x.xy))
}

pub fn derivative(cfg: &MapConfig, x: &BoundaryPoint) -> Result<f64> {
    derivative_for_area(cfg.poly, cfg.area, x)
}

/// Symmetric finite difference of the lifted composition over `areas`.
pub(crate) fn composed_fd_derivative(poly: &Polygon, areas: &[f64], s: f64, h: f64) -> f64 {
    let run = |s0: f64| {
        let start = Lift::from_f64(s0);
        let end = areas.iter().fold(start, |acc, &a| lift_step(poly, acc, a));
        end.diff(start) + s0
    };
    (run(s + h) - run(s - h)) / (2.0 * h)
}

/// An iterated orbit `beta_0 ... beta_n`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub points: Vec<BoundaryPoint>,
    /// Lift coordinates, strictly increasing.
    pub lift_values: Vec<f64>,
    pub lifts: Vec<Lift>,
    /// Whole turns completed, `floor(lift_n - lift_0)`.
    pub winding: i64,
    /// Derivative of each step.
    pub step_derivatives: Vec<f64>,
    /// Steps whose derivative came from finite differences because an
    /// endpoint touched a vertex.
    pub flagged_steps: Vec<usize>,
    pub derivative_product: f64,
    /// Area cut at each step.
    pub areas: Vec<f64>,
}

impl OrbitRecord {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Lift displacement `lift_n - lift_0`.
    pub fn displacement(&self) -> f64 {
        match (self.lifts.first(), self.lifts.last()) {
            (Some(a), Some(b)) => b.diff(*a),
            _ => 0.0,
        }
    }
}

/// Orbit of a generalized map cutting `areas[k]` at step `k`.
pub fn orbit_with_areas(poly: &Polygon, areas: &[f64], s0: f64) -> Result<OrbitRecord> {
    for &a in areas {
        check_area(poly, a)?;
    }
    let start = Lift::from_f64(s0);
    let mut lifts = Vec::with_capacity(areas.len() + 1);
    let mut points = Vec::with_capacity(areas.len() + 1);
    lifts.push(start);
    points.push(poly.point_at(start.frac));
    let mut step_derivatives = Vec::with_capacity(areas.len());
    let mut flagged_steps = Vec::new();
    for (k, &area) in areas.iter().enumerate() {
        let cur = lifts[k];
        let next = lift_step(poly, cur, area);
        let d = match derivative_for_area(poly, area, &points[k]) {
            Ok(d) => d,
            Err(_) => {
                flagged_steps.push(k);
                composed_fd_derivative(poly, &[area], cur.to_f64(), VERTEX_FD_STEP)
            }
        };
        step_derivatives.push(d);
        lifts.push(next);
        points.push(poly.point_at(next.frac));
    }
    let displacement = lifts[lifts.len() - 1].diff(start);
    Ok(OrbitRecord {
        points,
        lift_values: lifts.iter().map(|l| l.to_f64()).collect(),
        winding: displacement.floor() as i64,
        derivative_product: step_derivatives.iter().product(),
        step_derivatives,
        flagged_steps,
        areas: areas.to_vec(),
        lifts,
    })
}

/// `n` steps of the chord map from `s0`.
pub fn orbit(cfg: &MapConfig, s0: f64, n: usize) -> Result<OrbitRecord> {
    orbit_with_areas(cfg.poly, &vec![cfg.area; n], s0)
}

/// Tangency point of the chord `x phi(x)` with the table it envelopes: the
/// chord midpoint.
pub fn envelope_midpoint(cfg: &MapConfig, x: &BoundaryPoint) -> Vec2 {
    let y = phi(cfg, x);
    (x.xy + y.xy) * 0.5
}

/// Intersection of the chords starting at `s` and `s + ds`, the finite
/// version of the envelope construction.
pub fn chord_pair_intersection(cfg: &MapConfig, s: f64, ds: f64) -> Option<Vec2> {
    let x0 = cfg.poly.point_at(s);
    let x1 = cfg.poly.point_at(s + ds);
    line_intersection(x0.xy, phi(cfg, &x0).xy, x1.xy, phi(cfg, &x1).xy)
}
