//! Rotation numbers of the chord map and their dependence on the cut area.
//!
//! Two estimators are combined:
//!
//! * the long-run average `(F^n(s) - s) / n`, which is within `1/n` of the
//!   rotation number for any start point, and
//! * an exact test for a rational `p/q`: the displacement
//!   `g(s) = F^q(s) - s - p` has a zero iff there is a periodic orbit of
//!   period `q` winding `p` times, which happens iff the rotation number is
//!   `p/q`. If `g > 0` everywhere the rotation number is above `p/q`, if
//!   `g < 0` everywhere it is below.
//!
//! The sign of `g` is invariant under the map (`F` is increasing and commutes
//! with integer shifts), so it suffices to sample `g` on one fundamental
//! domain `[s_0, F(s_0))`. A Stern–Brocot descent over `p/q` with `q <= q_max`
//! then locates the rational, if any, and the long-run bracket lets the
//! descent skip every node that the bracket already decides.

use rayon::prelude::*;
use serde::Serialize;

use crate::billiard::{check_area, iterate_lift, phi_lift_exact, Lift, MapConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Polygon};

/// Displacement magnitude treated as a touching (double) zero.
pub const TOUCH_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationOptions {
    /// Iterations of the long-run estimator.
    pub iterations: u64,
    /// Largest denominator tried by the exact search.
    pub q_max: u64,
    /// Displacement samples per polygon side.
    pub grid: usize,
    /// Start point of the long-run orbit.
    pub start: f64,
}

impl Default for RotationOptions {
    fn default() -> Self {
        Self {
            iterations: 200_000,
            q_max: 200,
            grid: 64,
            start: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationKind {
    Exact { p: u64, q: u64 },
    LongRun,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub value: f64,
    pub kind: RotationKind,
    pub iterations: u64,
    /// Zero for exact results, `1 / iterations` otherwise.
    pub error_bound: f64,
    /// A point of a `q`-periodic orbit when exact.
    pub witness: Option<BoundaryPoint>,
    /// Lift coordinate of the witness.
    pub witness_lift: Option<f64>,
}

impl RotationEstimate {
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, RotationKind::Exact { .. })
    }

    pub fn fraction(&self) -> Option<(u64, u64)> {
        match self.kind {
            RotationKind::Exact { p, q } => Some((p, q)),
            RotationKind::LongRun => None,
        }
    }
}

/// Long-run estimate `(F^n(s0) - s0) / n`.
pub fn rotation_number_longrun(cfg: &MapConfig, s0: f64, n: u64) -> RotationEstimate {
    let n = n.max(1);
    let start = Lift::from_f64(s0);
    let end = iterate_lift(cfg, start, n);
    RotationEstimate {
        value: end.diff(start) / n as f64,
        kind: RotationKind::LongRun,
        iterations: n,
        error_bound: 1.0 / n as f64,
        witness: None,
        witness_lift: None,
    }
}

/// `g(s) = F^q(s) - s - p`.
pub fn displacement(cfg: &MapConfig, p: u64, q: u64, s: f64) -> f64 {
    let start = Lift::from_f64(s);
    iterate_lift(cfg, start, q).diff(start) - p as f64
}

/// Outcome of testing one rational against the rotation number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisplacementClass {
    /// `g > 0` everywhere: rotation number above `p/q`.
    TauAbove,
    /// `g < 0` everywhere: rotation number below `p/q`.
    TauBelow,
    /// `g` vanishes at `witness` (a lift coordinate). `touching` marks a
    /// double zero found by extremum refinement rather than a sign change.
    Zero { witness: f64, touching: bool },
}

pub(crate) fn bisect_zero(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    if g_lo.abs() <= g_hi.abs() {
        lo
    } else {
        hi
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Tests `p/q` against the rotation number by sampling the displacement on a
/// fundamental domain with `grid` points per side, refining sign changes by
/// bisection and the extreme sample by golden-section search.
///
/// Among several sign changes a decreasing one is preferred, so the witness
/// lies on an attracting orbit when one exists.
pub fn classify(cfg: &MapConfig, p: u64, q: u64, grid: usize) -> DisplacementClass {
    let m = (grid * cfg.poly().len()).max(8);
    let start = Lift::new(0, 0.0);
    let width = phi_lift_exact(cfg, start).diff(start);
    let g = |s: f64| displacement(cfg, p, q, s);
    let xs: Vec<f64> = (0..=m).map(|i| width * i as f64 / m as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&s| g(s)).collect();

    let mut rising = None;
    for i in 0..m {
        let (a, b) = (gs[i], gs[i + 1]);
        if a == 0.0 {
            return DisplacementClass::Zero {
                witness: xs[i],
                touching: false,
            };
        }
        if (a > 0.0) != (b > 0.0) {
            if a > 0.0 {
                return DisplacementClass::Zero {
                    witness: bisect_zero(&g, xs[i], xs[i + 1]),
                    touching: false,
                };
            }
            rising.get_or_insert(i);
        }
    }
    if let Some(i) = rising {
        return DisplacementClass::Zero {
            witness: bisect_zero(&g, xs[i], xs[i + 1]),
            touching: false,
        };
    }

    // One sign throughout: refine the extremum closest to zero.
    let positive = gs[0] > 0.0;
    let signed = |s: f64| if positive { g(s) } else { -g(s) };
    let (i, _) = gs
        .iter()
        .map(|&v| if positive { v } else { -v })
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let lo = xs[i.saturating_sub(1)];
    let hi = xs[(i + 1).min(m)];
    let (x_min, f_min) = golden_min(&signed, lo, hi);
    if f_min < -TOUCH_TOL {
        return DisplacementClass::Zero {
            witness: bisect_zero(&g, x_min, xs[i]),
            touching: false,
        };
    }
    if f_min <= TOUCH_TOL {
        return DisplacementClass::Zero {
            witness: x_min,
            touching: true,
        };
    }
    if positive {
        DisplacementClass::TauAbove
    } else {
        DisplacementClass::TauBelow
    }
}

/// A rational rotation number with a periodic witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalWitness {
    pub p: u64,
    pub q: u64,
    pub witness_lift: f64,
    pub witness: BoundaryPoint,
    /// The witness is a double zero of the displacement (parabolic orbit).
    pub touching: bool,
}

fn stern_brocot(
    cfg: &MapConfig,
    q_max: u64,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Option<RationalWitness> {
    let mut left = (0u64, 1u64);
    let mut right = (1u64, 1u64);
    loop {
        let (p, q) = (left.0 + right.0, left.1 + right.1);
        if q > q_max {
            return None;
        }
        let x = p as f64 / q as f64;
        if x < lo {
            left = (p, q);
            continue;
        }
        if x > hi {
            right = (p, q);
            continue;
        }
        match classify(cfg, p, q, grid) {
            DisplacementClass::TauAbove => left = (p, q),
            DisplacementClass::TauBelow => right = (p, q),
            DisplacementClass::Zero { witness, touching } => {
                return Some(RationalWitness {
                    p,
                    q,
                    witness_lift: witness,
                    witness: cfg.poly().point_at(witness),
                    touching,
                });
            }
        }
    }
}

/// Searches for a rational rotation number `p/q` with `q <= q_max`.
pub fn detect_rational(cfg: &MapConfig, q_max: u64, grid: usize) -> Option<RationalWitness> {
    stern_brocot(cfg, q_max, grid, f64::NEG_INFINITY, f64::INFINITY)
}

/// Rotation number: exact when a rational with small denominator is found,
/// the long-run average otherwise.
pub fn rotation_number(cfg: &MapConfig, opts: &RotationOptions) -> RotationEstimate {
    let est = rotation_number_longrun(cfg, opts.start, opts.iterations);
    // |F^n(s) - s - n tau| < 1 for every s
    let margin = est.error_bound + 1e-9;
    match stern_brocot(cfg, opts.q_max, opts.grid, est.value - margin, est.value + margin) {
        Some(w) => RotationEstimate {
            value: w.p as f64 / w.q as f64,
            kind: RotationKind::Exact { p: w.p, q: w.q },
            iterations: est.iterations,
            error_bound: 0.0,
            witness: Some(w.witness),
            witness_lift: Some(w.witness_lift),
        },
        None => est,
    }
}

/// One row of a devil's-staircase sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseRow {
    #[serde(rename = "A")]
    pub area: f64,
    #[serde(rename = "A_over_S")]
    pub area_over_s: f64,
    pub tau: f64,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub rotation: RotationOptions,
    /// When set, one extra pass inserts a midpoint between neighbours whose
    /// rotation numbers differ by more than this.
    pub refine_threshold: Option<f64>,
}

fn row_at(poly: &Polygon, area: f64, opts: &RotationOptions) -> Result<StaircaseRow> {
    let cfg = MapConfig::new(poly, area)?;
    let est = rotation_number(&cfg, opts);
    let frac = est.fraction();
    Ok(StaircaseRow {
        area,
        area_over_s: area / poly.area(),
        tau: est.value,
        p: frac.map(|f| f.0),
        q: frac.map(|f| f.1),
        exact: frac.is_some(),
    })
}

/// Rotation number on a uniform grid of `samples` areas in `[a_lo, a_hi]`.
/// Rows are computed in parallel and returned sorted by area.
pub fn staircase_sweep(
    poly: &Polygon,
    a_lo: f64,
    a_hi: f64,
    samples: usize,
    opts: &SweepOptions,
) -> Result<Vec<StaircaseRow>> {
    check_area(poly, a_lo)?;
    check_area(poly, a_hi)?;
    if a_lo >= a_hi {
        return Err(Error::BracketInvalid {
            reason: format!("a_lo {a_lo} must be below a_hi {a_hi}"),
        });
    }
    let samples = samples.max(2);
    let areas: Vec<f64> = (0..samples)
        .map(|i| a_lo + (a_hi - a_lo) * i as f64 / (samples - 1) as f64)
        .collect();
    let mut rows = areas
        .par_iter()
        .map(|&a| row_at(poly, a, &opts.rotation))
        .collect::<Result<Vec<_>>>()?;

    if let Some(threshold) = opts.refine_threshold {
        let mids: Vec<f64> = rows
            .windows(2)
            .filter(|w| (w[1].tau - w[0].tau).abs() > threshold)
            .map(|w| 0.5 * (w[0].area + w[1].area))
            .collect();
        let extra = mids
            .par_iter()
            .map(|&a| row_at(poly, a, &opts.rotation))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(extra);
        rows.sort_by(|a, b| a.area.total_cmp(&b.area));
    }
    Ok(rows)
}

/// Bounds of the plateau `{A : rotation number = p/q}` to within `tol`.
///
/// The bracket must satisfy `tau(A1) <= p/q <= tau(A2)`. When an endpoint is
/// itself on the plateau the search continues outward to the admissible
/// domain `[1e-6 S, S/2 - 1e-6 S]`, so the returned edge may be that floor
/// or ceiling. A plateau narrower than `tol` is returned as a single point.
pub fn plateau_bounds(
    poly: &Polygon,
    p: u64,
    q: u64,
    bracket: (f64, f64),
    tol: f64,
    grid: usize,
) -> Result<(f64, f64)> {
    let (a1, a2) = bracket;
    if !(a1 < a2) {
        return Err(Error::BracketInvalid {
            reason: format!("empty bracket [{a1}, {a2}]"),
        });
    }
    if q == 0 || p >= q {
        return Err(Error::BracketInvalid {
            reason: format!("{p}/{q} is not in (0, 1)"),
        });
    }
    check_area(poly, a1)?;
    check_area(poly, a2)?;
    let class = |a: f64| -> Result<DisplacementClass> {
        Ok(classify(&MapConfig::new(poly, a)?, p, q, grid))
    };
    let on = |c: DisplacementClass| matches!(c, DisplacementClass::Zero { .. });

    let c1 = class(a1)?;
    let c2 = class(a2)?;
    if c1 == DisplacementClass::TauAbove || c2 == DisplacementClass::TauBelow {
        return Err(Error::BracketInvalid {
            reason: format!("{p}/{q} is not between the rotation numbers at {a1} and {a2}"),
        });
    }

    // a point on the plateau
    let inside = if on(c1) {
        a1
    } else if on(c2) {
        a2
    } else {
        let (mut lo, mut hi) = (a1, a2);
        loop {
            if hi - lo <= tol {
                let mid = 0.5 * (lo + hi);
                return Ok((mid, mid));
            }
            let mid = 0.5 * (lo + hi);
            match class(mid)? {
                DisplacementClass::Zero { .. } => break mid,
                DisplacementClass::TauBelow => lo = mid,
                DisplacementClass::TauAbove => hi = mid,
            }
        }
    };

    let edge = |mut inn: f64, mut out: f64| -> Result<f64> {
        while (inn - out).abs() > tol {
            let mid = 0.5 * (inn + out);
            if on(class(mid)?) {
                inn = mid;
            } else {
                out = mid;
            }
        }
        Ok(inn)
    };

    let floor = 1e-6 * poly.area();
    let ceiling = 0.5 * poly.area() - 1e-6 * poly.area();
    let lower = if on(c1) {
        if on(class(floor)?) {
            floor
        } else {
            edge(inside, floor)?
        }
    } else {
        edge(inside, a1)?
    };
    let upper = if on(c2) {
        if on(class(ceiling)?) {
            ceiling
        } else {
            edge(inside, ceiling)?
        }
    } else {
        edge(inside, a2)?
    };
    Ok((lower, upper))
}
