//! Numerical checks of the good/bad chord structure behind the devil's
//! staircase.
//!
//! Every chord `beta_i beta_{i+1}` of an orbit joins two polygon sides. When
//! those sides are not parallel their lines meet at `Q`; the chord is *good*
//! (`sigma = +1`) when `Q` lies in the open half-plane containing the cut
//! region, *bad* (`sigma = -1`) otherwise, and `sigma = 0` for parallel
//! sides. Each chord also carries the marks
//!
//! * `a`: distance from `beta_i` to its counterclockwise-adjacent vertex,
//! * `b`: distance from `beta_{i+1}` to its clockwise-adjacent vertex,
//! * `d`, `d'`: distances from those two vertices to `Q`.
//!
//! The checks here deform an orbit by sliding `beta_0` (so that `a_0` grows at
//! unit speed) and confirm, by finite differences, that
//!
//! * a bad chord is flanked by good chords,
//! * `(a+d)(b+d')` (good) and `(d-a)(d'-b)` (bad) stay constant, as does
//!   `a_{k+1} + b_k`,
//! * the velocity ratios `a'_{k+1} / a'_k` equal `(b+d')/(a+d)` or
//!   `(d'-b)/(d-a)`,
//! * after a bad chord, `a'_{k+1}/(d_{k+1}+a_{k+1}) >= a'_k/(d_k-a_k)` with
//!   equality exactly when `beta_{k}` and `beta_{k+2}` share a side,
//!
//! and that the return map of a periodic orbit has derivative different
//! from 1, so no iterate of the map is the identity near a periodic point.

use serde::Serialize;

use crate::billiard::{composed_fd_derivative, lift_step, orbit_with_areas, Lift, MapConfig, OrbitRecord};
use crate::error::{Error, Result};
use crate::geometry::{centroid, half_plane_sign, BoundaryPoint, HalfPlaneSign, Polygon, SideIntersection, Vec2};
use crate::rotation::{bisect_zero, rotation_number, RotationEstimate, RotationOptions};

/// Classification of a chord by where its side lines meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sigma {
    Bad,
    Parallel,
    Good,
}

impl Sigma {
    pub fn value(self) -> i8 {
        match self {
            Sigma::Bad => -1,
            Sigma::Parallel => 0,
            Sigma::Good => 1,
        }
    }
}

/// Sign of the chord `x -> y`.
pub fn sigma(poly: &Polygon, x: &BoundaryPoint, y: &BoundaryPoint) -> Result<Sigma> {
    if x.side == y.side {
        return Err(Error::SameSide);
    }
    if poly.near_vertex(x) || poly.near_vertex(y) {
        return Err(Error::VertexAmbiguous);
    }
    let q = match poly.side_line_intersection(x.side, y.side) {
        SideIntersection::Parallel => return Ok(Sigma::Parallel),
        SideIntersection::Point(q) => q,
    };
    let scale = poly.perimeter();
    // P_{side(x)+1} is always strictly inside the cut arc
    let mut cut_side = half_plane_sign(x.xy, y.xy, poly.vertex(x.side + 1), scale)?;
    if cut_side == HalfPlaneSign::OnLine {
        cut_side = half_plane_sign(x.xy, y.xy, centroid(&poly.cut_region(x, y)), scale)?;
    }
    match half_plane_sign(x.xy, y.xy, q, scale)? {
        HalfPlaneSign::OnLine => Err(Error::DegenerateChord),
        s if s == cut_side => Ok(Sigma::Good),
        _ => Ok(Sigma::Bad),
    }
}

/// Distance from a boundary point to the end vertex of its side.
pub fn mark_a(poly: &Polygon, p: &BoundaryPoint) -> f64 {
    p.xy.dist(poly.vertex(p.side + 1))
}

/// Distance from a boundary point to the start vertex of its side.
pub fn mark_b(poly: &Polygon, p: &BoundaryPoint) -> f64 {
    p.xy.dist(poly.vertex(p.side))
}

/// One chord of an orbit with its sign and marks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordRecord {
    /// Step index `i` of the chord `beta_i beta_{i+1}`.
    pub index: usize,
    pub from: BoundaryPoint,
    pub to: BoundaryPoint,
    /// `None` when an endpoint sits on a vertex.
    pub sigma: Option<Sigma>,
    pub q: Option<Vec2>,
    pub a: f64,
    pub b: f64,
    pub d: Option<f64>,
    pub d_prime: Option<f64>,
}

impl ChordRecord {
    pub fn is_skipped(&self) -> bool {
        self.sigma == Some(Sigma::Parallel)
    }

    /// Good or bad, i.e. part of the skip-filtered sequence.
    pub fn is_counted(&self) -> bool {
        matches!(self.sigma, Some(Sigma::Good | Sigma::Bad))
    }

    /// Velocity ratio `a'_{k+1} / a'_k` across this chord.
    pub fn analytic_ratio(&self) -> Option<f64> {
        match (self.sigma?, self.d, self.d_prime) {
            (Sigma::Good, Some(d), Some(dp)) => Some((self.b + dp) / (self.a + d)),
            (Sigma::Bad, Some(d), Some(dp)) => Some((dp - self.b) / (d - self.a)),
            (Sigma::Parallel, _, _) => Some(1.0),
            _ => None,
        }
    }

    /// The product that stays constant while the orbit is deformed.
    pub fn hyperbola_product(&self) -> Option<f64> {
        hyperbola_product(self.sigma?, self.a, self.b, self.d?, self.d_prime?)
    }

    /// Largest mismatch between `|beta_i Q|`, `|beta_{i+1} Q|` and their
    /// expressions in the marks (`a + d`, `b + d'` for good chords,
    /// `d - a`, `d' - b` for bad ones).
    pub fn collinearity_residual(&self) -> Option<f64> {
        let (q, d, dp) = (self.q?, self.d?, self.d_prime?);
        let (from_q, to_q) = (self.from.xy.dist(q), self.to.xy.dist(q));
        match self.sigma? {
            Sigma::Good => Some((from_q - (self.a + d)).abs().max((to_q - (self.b + dp)).abs())),
            Sigma::Bad => Some((from_q - (d - self.a)).abs().max((to_q - (dp - self.b)).abs())),
            Sigma::Parallel => None,
        }
    }
}

fn hyperbola_product(sigma: Sigma, a: f64, b: f64, d: f64, dp: f64) -> Option<f64> {
    match sigma {
        Sigma::Good => Some((a + d) * (b + dp)),
        Sigma::Bad => Some((d - a) * (dp - b)),
        Sigma::Parallel => None,
    }
}

fn chord_record(poly: &Polygon, index: usize, from: BoundaryPoint, to: BoundaryPoint) -> ChordRecord {
    let sigma = sigma(poly, &from, &to).ok();
    let q = poly.side_line_intersection(from.side, to.side).point();
    let near = poly.vertex(from.side + 1);
    let far = poly.vertex(to.side);
    ChordRecord {
        index,
        from,
        to,
        sigma,
        q,
        a: mark_a(poly, &from),
        b: mark_b(poly, &to),
        d: q.map(|q| q.dist(near)),
        d_prime: q.map(|q| q.dist(far)),
    }
}

/// Sign and marks for every chord of an orbit.
pub fn chord_marks(poly: &Polygon, orbit: &OrbitRecord) -> Vec<ChordRecord> {
    orbit
        .points
        .windows(2)
        .enumerate()
        .map(|(i, w)| chord_record(poly, i, w[0], w[1]))
        .collect()
}

/// Two adjacent bad chords in the skip-filtered sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlternationViolation {
    pub first: usize,
    pub second: usize,
}

/// Checks that every bad chord has good neighbours in the skip-filtered
/// sequence. `cyclic` closes the sequence for periodic orbits.
pub fn verify_alternation(marks: &[ChordRecord], cyclic: bool) -> Vec<AlternationViolation> {
    let counted: Vec<&ChordRecord> = marks.iter().filter(|c| c.is_counted()).collect();
    let len = counted.len();
    let pairs = if cyclic { len } else { len.saturating_sub(1) };
    (0..pairs)
        .filter_map(|k| {
            let (a, b) = (counted[k], counted[(k + 1) % len]);
            (a.sigma == Some(Sigma::Bad) && b.sigma == Some(Sigma::Bad)).then_some(AlternationViolation {
                first: a.index,
                second: b.index,
            })
        })
        .collect()
}

/// Positions of `beta_k ... beta_{k+len}` after sliding `beta_k` clockwise by
/// arc length `offset` (so `a_k` grows by `offset`). Fails if any point
/// changes side or lands on a vertex.
fn local_trace(poly: &Polygon, orbit: &OrbitRecord, k: usize, len: usize, offset: f64) -> Result<Vec<BoundaryPoint>> {
    let mut cur = Lift::from_f64(orbit.lift_values[k] - offset / poly.perimeter());
    let mut pts = Vec::with_capacity(len + 1);
    pts.push(poly.point_at(cur.frac));
    for &area in &orbit.areas[k..k + len] {
        cur = lift_step(poly, cur, area);
        pts.push(poly.point_at(cur.frac));
    }
    let unchanged = pts
        .iter()
        .zip(&orbit.points[k..])
        .all(|(p, base)| p.side == base.side && !poly.near_vertex(p));
    if unchanged {
        Ok(pts)
    } else {
        Err(Error::VertexNonSmooth)
    }
}

fn is_closed(orbit: &OrbitRecord) -> bool {
    let d = orbit.displacement();
    orbit.steps() > 0 && (d - d.round()).abs() <= 1e-9
}

/// Deformation velocities of the orbit marks when `beta_0` slides so that
/// `a_0` grows at unit speed, next to the analytic ratios.
///
/// Each ratio `a'_{k+1} / a'_k` is a central difference taken at `beta_k`,
/// and the velocities are their running products. Differencing the whole
/// orbit at once would drown the late velocities of a contracting orbit in
/// rounding noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformationRecord {
    /// Arc-length finite-difference step.
    pub h: f64,
    /// `a'_k` for every orbit point `beta_0 ... beta_n`; `a'_0 = 1`.
    pub velocities: Vec<f64>,
    /// Measured `a'_{k+1} / a'_k` for every chord.
    pub measured_ratios: Vec<f64>,
    /// Predicted `a'_{k+1} / a'_k` for every chord.
    pub analytic_ratios: Vec<f64>,
    pub sigmas: Vec<Sigma>,
}

impl DeformationRecord {
    /// Largest relative mismatch between measured and predicted ratios.
    pub fn max_ratio_error(&self) -> f64 {
        self.measured_ratios
            .iter()
            .zip(&self.analytic_ratios)
            .map(|(m, r)| (m - r).abs() / r.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    pub fn same_sign(&self) -> bool {
        self.velocities.iter().all(|&v| v > 0.0) || self.velocities.iter().all(|&v| v < 0.0)
    }
}

/// Deformation velocities with arc-length step `h`.
pub fn deformation_velocities(poly: &Polygon, orbit: &OrbitRecord, h: f64) -> Result<DeformationRecord> {
    let marks = chord_marks(poly, orbit);
    let mut analytic_ratios = Vec::with_capacity(marks.len());
    let mut measured_ratios = Vec::with_capacity(marks.len());
    let mut sigmas = Vec::with_capacity(marks.len());
    for c in &marks {
        let (Some(s), Some(r)) = (c.sigma, c.analytic_ratio()) else {
            return Err(Error::VertexNonSmooth);
        };
        let fwd = local_trace(poly, orbit, c.index, 1, h)?;
        let bwd = local_trace(poly, orbit, c.index, 1, -h)?;
        let da_next = mark_a(poly, &fwd[1]) - mark_a(poly, &bwd[1]);
        let da = mark_a(poly, &fwd[0]) - mark_a(poly, &bwd[0]);
        sigmas.push(s);
        analytic_ratios.push(r);
        measured_ratios.push(da_next / da);
    }
    let mut velocities = Vec::with_capacity(marks.len() + 1);
    velocities.push(1.0);
    for r in &measured_ratios {
        velocities.push(velocities.last().unwrap() * r);
    }
    Ok(DeformationRecord {
        h,
        velocities,
        measured_ratios,
        analytic_ratios,
        sigmas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    /// Good or bad chords checked.
    pub checked: usize,
    /// Largest relative variation of `(a+d)(b+d')` or `(d-a)(d'-b)`.
    pub max_product_variation: f64,
    /// Largest relative variation of `a_{k+1} + b_k` over consecutive
    /// counted chords.
    pub max_sum_variation: f64,
}

impl InvariantReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_product_variation <= tol && self.max_sum_variation <= tol
    }
}

fn relative_spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (hi - lo) / mean.abs().max(f64::MIN_POSITIVE)
}

/// Slides each chord's start over `[-10h, 10h]` in 21 steps and measures how
/// much its hyperbola product moves. The `a_{k+1} + b_k` sums are checked the
/// same way from the end point of each counted chord.
pub fn verify_invariants(poly: &Polygon, orbit: &OrbitRecord, h: f64) -> Result<InvariantReport> {
    let marks = chord_marks(poly, orbit);
    if marks.iter().any(|c| c.sigma.is_none()) {
        return Err(Error::VertexNonSmooth);
    }
    let counted: Vec<&ChordRecord> = marks.iter().filter(|c| c.is_counted()).collect();
    let offsets = || (-10..=10).map(|j| j as f64 * h);

    let mut max_product_variation: f64 = 0.0;
    for c in &counted {
        let (sigma, d, dp) = (c.sigma.unwrap(), c.d.unwrap(), c.d_prime.unwrap());
        let mut values = Vec::with_capacity(21);
        for off in offsets() {
            let pts = local_trace(poly, orbit, c.index, 1, off)?;
            values.extend(hyperbola_product(sigma, mark_a(poly, &pts[0]), mark_b(poly, &pts[1]), d, dp));
        }
        max_product_variation = max_product_variation.max(relative_spread(&values));
    }

    let mut max_sum_variation: f64 = 0.0;
    for pair in counted.windows(2) {
        let (start, end) = (pair[0].index + 1, pair[1].index);
        let mut values = Vec::with_capacity(21);
        for off in offsets() {
            let pts = local_trace(poly, orbit, start, end - start, off)?;
            values.push(mark_b(poly, &pts[0]) + mark_a(poly, &pts[end - start]));
        }
        max_sum_variation = max_sum_variation.max(relative_spread(&values));
    }

    Ok(InvariantReport {
        checked: counted.len(),
        max_product_variation,
        max_sum_variation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    /// Bad chords followed by a good chord that were checked.
    pub checked: usize,
    /// Chord indices where the inequality fails.
    pub violations: Vec<usize>,
    /// Chord indices where equality holds within tolerance.
    pub equality_cases: Vec<usize>,
    /// Chords where equality and "`beta_k`, `beta_{k+2}` on one side"
    /// disagree.
    pub side_mismatches: Vec<usize>,
    /// Smallest normalized margin `(lhs - rhs) / max(1, |lhs|, |rhs|)`.
    pub min_margin: f64,
}

impl InequalityReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.side_mismatches.is_empty()
    }
}

/// Tolerance of the pairing inequality, relative to `max(1, |lhs|, |rhs|)`.
/// Central differences at `h = 1e-6 L` put equality cases within about
/// `1e-9` of zero, while strict cases sit several percent above it.
pub const INEQUALITY_TOL: f64 = 1e-7;

/// Checks `a'_{k+1}/(d_{k+1}+a_{k+1}) >= a'_k/(d_k-a_k)` after every bad
/// chord, using finite-difference velocities with step `h`. Both sides are
/// scaled by `a'_k`, which is positive.
pub fn verify_inequality(poly: &Polygon, orbit: &OrbitRecord, h: f64) -> Result<InequalityReport> {
    let marks = chord_marks(poly, orbit);
    let def = deformation_velocities(poly, orbit, h)?;
    let cyclic = is_closed(orbit);
    let steps = marks.len();
    let mut report = InequalityReport {
        checked: 0,
        violations: Vec::new(),
        equality_cases: Vec::new(),
        side_mismatches: Vec::new(),
        min_margin: f64::INFINITY,
    };
    for (i, c) in marks.iter().enumerate() {
        if c.sigma != Some(Sigma::Bad) {
            continue;
        }
        let next = if i + 1 < steps {
            &marks[i + 1]
        } else if cyclic {
            &marks[0]
        } else {
            continue;
        };
        if next.sigma != Some(Sigma::Good) {
            continue;
        }
        report.checked += 1;
        let lhs = def.measured_ratios[i] / (next.d.unwrap() + next.a);
        let rhs = 1.0 / (c.d.unwrap() - c.a);
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        let margin = (lhs - rhs) / scale;
        report.min_margin = report.min_margin.min(margin);
        let same_side = c.from.side == next.to.side;
        if margin < -INEQUALITY_TOL {
            report.violations.push(i);
        } else if margin <= INEQUALITY_TOL {
            report.equality_cases.push(i);
            if !same_side {
                report.side_mismatches.push(i);
            }
        } else if same_side {
            report.side_mismatches.push(i);
        }
    }
    Ok(report)
}

/// Derivative of the `q`-step return map at a periodic point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnDerivative {
    /// Product of per-step derivatives around the orbit.
    pub product: f64,
    /// `sum_good a'_k/(a_k+d_k) - sum_bad a'_k/(d_k-a_k)` with `a'_0 = 1`;
    /// `None` when an orbit point sits on a vertex.
    pub paired_sum: Option<f64>,
    /// The product was taken by finite differences (vertex-touching orbit).
    pub finite_difference: bool,
    /// Product within `1e-6` of 1.
    pub parabolic: bool,
    /// `F^q(s) - s - p` at the witness.
    pub closure_error: f64,
}

/// Tolerance on `|product - 1|` below which an orbit counts as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-6;

fn return_derivative_of(poly: &Polygon, orbit: &OrbitRecord, closure_error: f64) -> ReturnDerivative {
    let finite_difference = !orbit.flagged_steps.is_empty();
    let product = if finite_difference {
        composed_fd_derivative(poly, &orbit.areas, orbit.lift_values[0], crate::billiard::VERTEX_FD_STEP)
    } else {
        orbit.derivative_product
    };
    let marks = chord_marks(poly, orbit);
    let paired_sum = (|| {
        let mut velocity = 1.0;
        let mut sum = 0.0;
        for c in &marks {
            match c.sigma? {
                Sigma::Good => sum += velocity / (c.a + c.d?),
                Sigma::Bad => sum -= velocity / (c.d? - c.a),
                Sigma::Parallel => {}
            }
            velocity *= c.analytic_ratio()?;
        }
        Some(sum)
    })();
    ReturnDerivative {
        product,
        paired_sum,
        finite_difference,
        parabolic: (product - 1.0).abs() <= PARABOLIC_TOL,
        closure_error,
    }
}

/// Return-map derivative at a `q`-periodic point with lift coordinate
/// `witness` winding `p` times.
pub fn return_derivative(cfg: &MapConfig, p: u64, q: u64, witness: f64) -> Result<ReturnDerivative> {
    let orbit = orbit_with_areas(cfg.poly(), &vec![cfg.area(); q as usize], witness)?;
    let closure_error = orbit.displacement() - p as f64;
    if closure_error.abs() > 1e-9 {
        return Err(Error::NoClosure);
    }
    Ok(return_derivative_of(cfg.poly(), &orbit, closure_error))
}

/// A closed chain cutting a prescribed area at each step.
#[derive(Debug, Clone, Serialize)]
pub struct FakeOrbit {
    pub orbit: OrbitRecord,
    pub derivative: ReturnDerivative,
}

/// Finds a start point whose chain cutting `areas[0], areas[1], ...` closes
/// after one pass with `p` turns, by bisection on the displacement.
///
/// Without a bracket the displacement is sampled on a grid over one turn and
/// the first decreasing sign change (else any sign change) is refined.
pub fn fake_orbit(poly: &Polygon, areas: &[f64], p: u64, bracket: Option<(f64, f64)>) -> Result<FakeOrbit> {
    if areas.is_empty() {
        return Err(Error::NoClosure);
    }
    for &a in areas {
        crate::billiard::check_area(poly, a)?;
    }
    let g = |s: f64| {
        let start = Lift::from_f64(s);
        let end = areas.iter().fold(start, |acc, &a| lift_step(poly, acc, a));
        end.diff(start) - p as f64
    };
    let (lo, hi) = match bracket {
        Some((lo, hi)) => {
            let (g_lo, g_hi) = (g(lo), g(hi));
            if !(lo < hi) || (g_lo > 0.0 && g_hi > 0.0) || (g_lo < 0.0 && g_hi < 0.0) {
                return Err(Error::NoClosure);
            }
            (lo, hi)
        }
        None => {
            let m = 64 * poly.len();
            let xs: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let gs: Vec<f64> = xs.iter().map(|&s| g(s)).collect();
            let changes: Vec<usize> = (0..m).filter(|&i| (gs[i] > 0.0) != (gs[i + 1] > 0.0) || gs[i] == 0.0).collect();
            let i = changes
                .iter()
                .copied()
                .find(|&i| gs[i] > 0.0)
                .or_else(|| changes.first().copied())
                .ok_or(Error::NoClosure)?;
            (xs[i], xs[i + 1])
        }
    };
    let s0 = bisect_zero(&g, lo, hi);
    let orbit = orbit_with_areas(poly, areas, s0)?;
    let closure_error = orbit.displacement() - p as f64;
    if closure_error.abs() > 1e-9 {
        return Err(Error::NoClosure);
    }
    let derivative = return_derivative_of(poly, &orbit, closure_error);
    Ok(FakeOrbit { orbit, derivative })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Orbit segment length.
    pub steps: usize,
    /// Finite-difference step as a fraction of the perimeter.
    pub h: f64,
    pub rotation: RotationOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            steps: 32,
            h: 1e-6,
            rotation: RotationOptions {
                iterations: 100_000,
                q_max: 50,
                ..RotationOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlternationSection {
    pub pass: bool,
    pub checked_chords: usize,
    pub violations: Vec<AlternationViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSection {
    pub pass: bool,
    #[serde(flatten)]
    pub report: InvariantReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocitySection {
    pub pass: bool,
    pub max_ratio_error: f64,
    pub velocities_same_sign: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalitySection {
    pub pass: bool,
    #[serde(flatten)]
    pub report: InequalityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnMapSection {
    /// The return derivative differs from 1, or the orbit is a parabolic
    /// (double-zero) witness.
    pub pass: bool,
    pub p: u64,
    pub q: u64,
    pub witness_lift: f64,
    pub touching: bool,
    #[serde(flatten)]
    pub derivative: ReturnDerivative,
}

/// Machine-readable result of [`verify`].
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub polygon_area: f64,
    pub area: f64,
    pub start: f64,
    /// Start actually analysed, when `start` had to be nudged off a vertex.
    pub perturbed_start: Option<f64>,
    pub steps: usize,
    pub h: f64,
    /// Every chord joins parallel sides; the sign sequence is empty.
    pub all_parallel: bool,
    pub max_collinearity_residual: f64,
    pub alternation: AlternationSection,
    pub invariants: InvariantSection,
    pub velocity_ratios: VelocitySection,
    pub inequality: InequalitySection,
    pub rotation: RotationEstimate,
    pub return_map: Option<ReturnMapSection>,
    pub pass: bool,
}

/// Tolerances applied by [`verify`].
pub const INVARIANT_TOL: f64 = 1e-7;
pub const VELOCITY_TOL: f64 = 1e-5;

/// Runs every check on the orbit segment from `start`, plus the return-map
/// witness when the rotation number is rational.
pub fn verify(cfg: &MapConfig, start: f64, opts: &VerifyOptions) -> Result<VerificationReport> {
    let poly = cfg.poly();
    let h = opts.h * poly.perimeter();
    let attempt = |s: f64| -> Result<_> {
        let orbit = crate::billiard::orbit(cfg, s, opts.steps)?;
        let def = deformation_velocities(poly, &orbit, h)?;
        let l2 = verify_invariants(poly, &orbit, h)?;
        let l4 = verify_inequality(poly, &orbit, h)?;
        Ok((orbit, def, l2, l4))
    };
    // clears the finite-difference window around a vertex hit
    let nudge = 64.0 * opts.h;
    let mut perturbed_start = None;
    let (orbit, def, l2, l4) = match attempt(start) {
        Err(Error::VertexNonSmooth) => {
            let moved = attempt(start + nudge).map(|v| (start + nudge, v));
            let (s, v) = match moved {
                Err(Error::VertexNonSmooth) => (start - nudge, attempt(start - nudge)?),
                other => other?,
            };
            perturbed_start = Some(s);
            v
        }
        other => other?,
    };

    let marks = chord_marks(poly, &orbit);
    let counted = marks.iter().filter(|c| c.is_counted()).count();
    let l1 = verify_alternation(&marks, false);
    let max_collinearity_residual = marks
        .iter()
        .filter_map(ChordRecord::collinearity_residual)
        .fold(0.0, f64::max);

    let rotation = rotation_number(cfg, &opts.rotation);
    let return_map = match (rotation.fraction(), rotation.witness_lift) {
        (Some((p, q)), Some(w)) => {
            let touching = matches!(
                crate::rotation::classify(cfg, p, q, opts.rotation.grid),
                crate::rotation::DisplacementClass::Zero { touching: true, .. }
            );
            let derivative = return_derivative(cfg, p, q, w)?;
            Some(ReturnMapSection {
                pass: !derivative.parabolic || touching,
                p,
                q,
                witness_lift: w,
                touching,
                derivative,
            })
        }
        _ => None,
    };

    let alternation = AlternationSection {
        pass: l1.is_empty(),
        checked_chords: counted,
        violations: l1,
    };
    let invariants = InvariantSection {
        pass: l2.passes(INVARIANT_TOL),
        report: l2,
    };
    let velocity_ratios = VelocitySection {
        pass: def.max_ratio_error() <= VELOCITY_TOL && def.same_sign(),
        max_ratio_error: def.max_ratio_error(),
        velocities_same_sign: def.same_sign(),
    };
    let inequality = InequalitySection {
        pass: l4.passes(),
        report: l4,
    };
    let pass = alternation.pass
        && invariants.pass
        && velocity_ratios.pass
        && inequality.pass
        && max_collinearity_residual <= 1e-9 * poly.perimeter()
        && return_map.as_ref().is_none_or(|t| t.pass);
    Ok(VerificationReport {
        polygon_area: poly.area(),
        area: cfg.area(),
        start,
        perturbed_start,
        steps: opts.steps,
        h,
        all_parallel: counted == 0,
        max_collinearity_residual,
        alternation,
        invariants,
        velocity_ratios,
        inequality,
        rotation,
        return_map,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::orbit;
    use approx::assert_abs_diff_eq;

    fn square() -> Polygon {
        Polygon::new([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn quad() -> Polygon {
        Polygon::new([[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [0.0, 2.0]]).unwrap()
    }

    fn corner_u(area: f64) -> f64 {
        (1.0 + (1.0 - 8.0 * area).sqrt()) / 2.0
    }

    #[test]
    fn sigma_examples() {
        let sq = square();
        let u = corner_u(0.1);
        let x = sq.locate(Vec2::new(1.0 - u, 0.0)).unwrap();
        let y = sq.locate(Vec2::new(1.0, 1.0 - u)).unwrap();
        assert_eq!(sigma(&sq, &x, &y), Ok(Sigma::Good));

        let x = sq.locate(Vec2::new(0.5, 0.0)).unwrap();
        let y = sq.locate(Vec2::new(0.6, 1.0)).unwrap();
        assert_eq!(sigma(&sq, &x, &y), Ok(Sigma::Parallel));

        let qd = quad();
        let x = qd.locate(Vec2::new(1.0, 1.75)).unwrap();
        let y = qd.locate(Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(sigma(&qd, &x, &y), Ok(Sigma::Bad));

        assert_eq!(sigma(&qd, &y, &y), Err(Error::SameSide));
        let corner = qd.point_at(0.0);
        assert_eq!(sigma(&qd, &x, &corner), Err(Error::VertexAmbiguous));
    }

    #[test]
    fn marks_of_square_periodic_orbit() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let u = corner_u(0.1);
        let orb = orbit(&cfg, (1.0 - u) / 4.0, 4).unwrap();
        let marks = chord_marks(&sq, &orb);
        assert_eq!(marks.len(), 4);
        for c in &marks {
            assert_eq!(c.sigma, Some(Sigma::Good));
            assert_abs_diff_eq!(c.a, u, epsilon = 1e-12);
            assert_abs_diff_eq!(c.b, 1.0 - u, epsilon = 1e-12);
            assert_abs_diff_eq!(c.d.unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.d_prime.unwrap(), 0.0, epsilon = 1e-12);
            assert!(c.collinearity_residual().unwrap() < 1e-12);
        }
        assert!(verify_alternation(&marks, true).is_empty());
    }

    #[test]
    fn marks_of_bad_quad_chord() {
        let qd = quad();
        let x = qd.locate(Vec2::new(1.0, 1.75)).unwrap();
        let area = qd.cut_area(&x, &qd.locate(Vec2::new(1.0, 0.0)).unwrap());
        assert_abs_diff_eq!(area, 1.875, epsilon = 1e-12);
        let cfg = MapConfig::new(&qd, area).unwrap();
        let orb = orbit(&cfg, x.s, 2).unwrap();
        let c = &chord_marks(&qd, &orb)[0];
        assert_eq!(c.sigma, Some(Sigma::Bad));
        assert_abs_diff_eq!(c.a, 1.0625f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.a, 1.03078, epsilon = 1e-5);
        assert_abs_diff_eq!(c.b, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.d.unwrap(), 68f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(c.d_prime.unwrap(), 8.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.d.unwrap() - c.a, 7.21543, epsilon = 1e-5);
        assert!(c.collinearity_residual().unwrap() < 1e-9);
    }

    #[test]
    fn parallel_step_is_skipped() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.45).unwrap();
        let orb = orbit(&cfg, 0.125, 1).unwrap();
        let marks = chord_marks(&sq, &orb);
        assert!(marks[0].is_skipped());
        assert!(!marks[0].is_counted());
        let def = deformation_velocities(&sq, &orb, 4e-6).unwrap();
        assert_eq!(def.analytic_ratios, vec![1.0]);
        assert!(def.max_ratio_error() < 1e-5);
    }

    #[test]
    fn alternation_checker_flags_injected_fault() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let orb = orbit(&cfg, 0.05, 2).unwrap();
        let mut marks = chord_marks(&sq, &orb);
        assert!(verify_alternation(&marks, false).is_empty());
        for c in &mut marks {
            c.sigma = Some(Sigma::Bad);
        }
        assert_eq!(
            verify_alternation(&marks, false),
            vec![AlternationViolation { first: 0, second: 1 }]
        );
    }

    #[test]
    fn deformation_on_square_orbit() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let orb = orbit(&cfg, (1.0 - corner_u(0.1)) / 4.0, 4).unwrap();
        let def = deformation_velocities(&sq, &orb, 4e-6).unwrap();
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        for r in &def.analytic_ratios {
            assert_abs_diff_eq!(*r, golden, epsilon = 1e-12);
        }
        assert!(def.max_ratio_error() < 1e-5);
        assert!(def.same_sign());
        assert_abs_diff_eq!(def.velocities[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn invariants_on_square_orbit() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let orb = orbit(&cfg, (1.0 - corner_u(0.1)) / 4.0, 4).unwrap();
        for c in chord_marks(&sq, &orb) {
            // right angle at Q: (a+d)(b+d') = 2A
            assert_abs_diff_eq!(c.hyperbola_product().unwrap(), 0.2, epsilon = 1e-12);
        }
        let rep = verify_invariants(&sq, &orb, 4e-6).unwrap();
        assert_eq!(rep.checked, 4);
        assert!(rep.passes(1e-7), "{rep:?}");
    }

    #[test]
    fn inequality_equality_case_on_quad() {
        // bad chord from the top side to the bottom, then back to the top side
        let qd = quad();
        let x = qd.locate(Vec2::new(1.0, 1.75)).unwrap();
        let cfg = MapConfig::new(&qd, 1.875).unwrap();
        let orb = orbit(&cfg, x.s, 2).unwrap();
        assert_eq!(orb.points[2].side, x.side);
        let rep = verify_inequality(&qd, &orb, 1e-6 * qd.perimeter()).unwrap();
        assert_eq!(rep.checked, 1);
        assert_eq!(rep.equality_cases, vec![0]);
        assert!(rep.passes());
        let rep2 = verify_invariants(&qd, &orb, 1e-6 * qd.perimeter()).unwrap();
        assert!(rep2.passes(1e-7), "{rep2:?}");
    }

    #[test]
    fn inequality_vacuous_without_bad_chords() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let orb = orbit(&cfg, 0.05, 8).unwrap();
        let rep = verify_inequality(&sq, &orb, 4e-6).unwrap();
        assert_eq!(rep.checked, 0);
        assert!(rep.passes());
    }

    #[test]
    fn return_derivatives_on_square() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let u = corner_u(0.1);
        let attracting = return_derivative(&cfg, 1, 4, (1.0 - u) / 4.0).unwrap();
        let repelling = return_derivative(&cfg, 1, 4, u / 4.0).unwrap();
        let golden: f64 = (3.0 - 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(attracting.product, golden.powi(4), epsilon = 1e-12);
        assert_abs_diff_eq!(repelling.product, golden.powi(-4), epsilon = 1e-9);
        assert_abs_diff_eq!(attracting.product * repelling.product, 1.0, epsilon = 1e-9);
        assert!(!attracting.parabolic && !repelling.parabolic);
        assert!(attracting.paired_sum.unwrap() > 0.0);
        assert_eq!(return_derivative(&cfg, 1, 4, 0.1), Err(Error::NoClosure));
    }

    #[test]
    fn fake_orbits() {
        let sq = square();
        let equal = fake_orbit(&sq, &[0.1; 4], 1, None).unwrap();
        let u = corner_u(0.1);
        assert_abs_diff_eq!(mark_a(&sq, &equal.orbit.points[0]), u, epsilon = 1e-9);

        let fake = fake_orbit(&sq, &[0.1, 0.12, 0.1, 0.12], 1, None).unwrap();
        assert!(fake.derivative.closure_error.abs() <= 1e-9);
        assert!((fake.derivative.product - 1.0).abs() > 1e-3);

        assert_eq!(
            fake_orbit(&sq, &[0.45, 0.45], 1, None).unwrap_err(),
            Error::NoClosure
        );
        assert_eq!(
            fake_orbit(&sq, &[0.1; 4], 1, Some((0.1, 0.15))).unwrap_err(),
            Error::NoClosure
        );
    }

    #[test]
    fn verify_report_square() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.1).unwrap();
        let rep = verify(&cfg, 0.05, &VerifyOptions::default()).unwrap();
        assert!(rep.pass, "{rep:#?}");
        let t = rep.return_map.unwrap();
        assert_eq!((t.p, t.q), (1, 4));
        assert!(!t.derivative.parabolic);
    }

    #[test]
    fn verify_nudges_vertex_start() {
        let sq = square();
        let cfg = MapConfig::new(&sq, 0.2).unwrap();
        let rep = verify(&cfg, 0.0, &VerifyOptions::default()).unwrap();
        assert!(rep.perturbed_start.is_some());
    }
}
