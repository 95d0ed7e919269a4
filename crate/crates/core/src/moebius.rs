//! Constant-area maps between lines as projective transformations.
//!
//! Given two crossing lines `l` and `l'` meeting at `I`, the map sending a
//! point `X` of `l` to the point `Y` of `l'` with triangle `IXY` of area `c`
//! is fractional-linear in the lines' coordinates: it sends `I` to infinity
//! and infinity to `I`. Chaining such maps around a cyclic list of lines
//! gives a Möbius transformation of the first line, and two small
//! configurations make that composition the identity.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{line_intersection, Vec2};

/// A point of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(u) => Some(u),
            ExtReal::Infinity => None,
        }
    }

    /// Distance that stays meaningful near infinity: plain difference for
    /// two finite values, reciprocal-chart difference otherwise.
    pub fn distance(self, other: ExtReal) -> f64 {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
            (ExtReal::Finite(a), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(a)) => 1.0 / a.abs(),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(u) => write!(f, "{u}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

/// A line with an affine coordinate: `u` names `origin + u * direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartedLine {
    pub origin: Vec2,
    pub direction: Vec2,
}

impl ChartedLine {
    /// Normalizes `direction`.
    pub fn new(origin: Vec2, direction: Vec2) -> Result<Self> {
        let len = direction.norm();
        if !(len > 1e-12) || !origin.x.is_finite() || !origin.y.is_finite() {
            return Err(Error::InvalidArgument("line direction must be a finite nonzero vector".into()));
        }
        Ok(Self {
            origin,
            direction: direction / len,
        })
    }

    /// Line through `a` with coordinate increasing toward `b`.
    pub fn through(a: Vec2, b: Vec2) -> Result<Self> {
        Self::new(a, b - a)
    }

    pub fn point(&self, u: f64) -> Vec2 {
        self.origin + self.direction * u
    }

    /// Coordinate of the orthogonal projection of `p`.
    pub fn coord(&self, p: Vec2) -> f64 {
        (p - self.origin).dot(self.direction)
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.direction.cross(p - self.origin).abs()
    }

    pub fn intersection(&self, other: &ChartedLine) -> Option<Vec2> {
        line_intersection(self.origin, self.origin + self.direction, other.origin, other.origin + other.direction)
    }
}

/// `u -> (m00 u + m01) / (m10 u + m11)`, defined up to scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjMap {
    pub m: [[f64; 2]; 2],
}

impl ProjMap {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        let map = Self { m };
        if !(map.det().abs() > 1e-12 * map.norm().powi(2)) {
            return Err(Error::SingularMap);
        }
        Ok(map)
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same map scaled to unit Frobenius norm.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            m: self.m.map(|row| row.map(|v| v / n)),
        }
    }

    pub fn apply(&self, u: ExtReal) -> ExtReal {
        let [[a, b], [c, d]] = self.m;
        let (num, den) = match u {
            ExtReal::Finite(u) => (a * u + b, c * u + d),
            ExtReal::Infinity => (a, c),
        };
        if den == 0.0 {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(num / den)
        }
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self { m: [[d, -b], [-c, a]] }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &ProjMap) -> Self {
        let (x, y) = (self.m, first.m);
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        Self { m }.normalized()
    }

    /// Frobenius distance from the identity, both normalized, minimized over
    /// the sign of the scale.
    pub fn identity_distance(&self) -> f64 {
        let n = self.normalized().m;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [1.0, -1.0]
            .iter()
            .map(|s| {
                let d = [n[0][0] - s * r, n[0][1], n[1][0], n[1][1] - s * r];
                d.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Map from `lk` to `lk1` cutting triangles of area `c` at their
/// intersection `I`.
///
/// In coordinates centred at `I` the map is `u v = 2 orientation c / (d x d')`
/// with `d`, `d'` the line directions; `orientation = -1` puts the triangle
/// on the clockwise side, the convention of both canonical configurations.
pub fn area_map(lk: &ChartedLine, lk1: &ChartedLine, c: f64, orientation: f64) -> Result<ProjMap> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("cut area must be positive, got {c}")));
    }
    let i = lk.intersection(lk1).ok_or(Error::ParallelLines)?;
    let (u_i, v_i) = (lk.coord(i), lk1.coord(i));
    let kappa = 2.0 * orientation * c / lk.direction.cross(lk1.direction);
    ProjMap::new([[v_i, kappa - v_i * u_i], [1.0, -u_i]])
}

/// Composition of `maps`, the first applied first.
pub fn compose(maps: &[ProjMap]) -> ProjMap {
    maps.iter()
        .fold(ProjMap::identity(), |acc, f| f.after(&acc))
}

pub fn is_identity(m: &ProjMap, tol: f64) -> bool {
    m.identity_distance() <= tol
}

/// A point named in a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedPoint {
    pub name: String,
    /// Index of the line carrying the point.
    pub line: usize,
    pub position: Vec2,
}

/// Chain entry: a named point or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ChainPoint {
    Infinity,
    Named(String),
}

impl fmt::Display for ChainPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainPoint::Infinity => f.write_str("inf"),
            ChainPoint::Named(n) => f.write_str(n),
        }
    }
}

/// Cyclic list of lines with the maps between consecutive ones.
///
/// Map `k` sends line `k` to line `k+1` around `I_k`, the intersection of
/// the two lines; intersections are named `I1, I2, ...`. Each map's area is
/// the area of its defining triangle, so moving a marked point changes the
/// maps that mention it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedConfig {
    pub name: String,
    pub lines: Vec<ChartedLine>,
    pub intersections: Vec<Vec2>,
    pub marked: Vec<MarkedPoint>,
    /// Three point names per map.
    pub defining_triangles: Vec<[String; 3]>,
    /// Area shared by every map in the unperturbed configuration.
    pub cut_area: f64,
    pub orientation: f64,
    /// Chains of points on lines `0, 1, 2, ...` (cyclically) expected to be
    /// carried onto each other by successive maps.
    pub chains: Vec<Vec<ChainPoint>>,
}

/// One chain pushed through the maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub labels: Vec<ChainPoint>,
    pub expected: Vec<ExtReal>,
    pub actual: Vec<ExtReal>,
    pub max_error: f64,
}

fn triangle_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).cross(c - a).abs()
}

impl MarkedConfig {
    fn build(
        name: &str,
        lines: Vec<ChartedLine>,
        marked: &[(&str, usize, Vec2)],
        triangles: &[[&str; 3]],
        cut_area: f64,
        chains: &[&[&str]],
    ) -> Self {
        let n = lines.len();
        let intersections = (0..n)
            .map(|k| lines[k].intersection(&lines[(k + 1) % n]).expect("canonical lines cross"))
            .collect();
        let chain_point = |s: &&str| match *s {
            "inf" => ChainPoint::Infinity,
            other => ChainPoint::Named(other.to_string()),
        };
        Self {
            name: name.to_string(),
            lines,
            intersections,
            marked: marked
                .iter()
                .map(|&(name, line, position)| MarkedPoint {
                    name: name.to_string(),
                    line,
                    position,
                })
                .collect(),
            defining_triangles: triangles.iter().map(|t| t.map(str::to_string)).collect(),
            cut_area,
            orientation: -1.0,
            chains: chains.iter().map(|c| c.iter().map(chain_point).collect()).collect(),
        }
    }

    /// Position of a marked point or intersection `I1..In`.
    pub fn point(&self, name: &str) -> Option<Vec2> {
        if let Some(m) = self.marked.iter().find(|m| m.name == name) {
            return Some(m.position);
        }
        let k: usize = name.strip_prefix('I')?.parse().ok()?;
        self.intersections.get(k.checked_sub(1)?).copied()
    }

    /// Coordinate of a chain point on line `line`.
    pub fn chart_coord(&self, p: &ChainPoint, line: usize) -> Result<ExtReal> {
        match p {
            ChainPoint::Infinity => Ok(ExtReal::Infinity),
            ChainPoint::Named(name) => {
                let pos = self
                    .point(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown point {name}")))?;
                let l = &self.lines[line];
                if l.distance_to(pos) > 1e-12 * (1.0 + pos.norm()) {
                    return Err(Error::InvalidArgument(format!("{name} is not on line {}", line + 1)));
                }
                Ok(ExtReal::Finite(l.coord(pos)))
            }
        }
    }

    /// Per-map cut areas from the defining triangles.
    pub fn map_areas(&self) -> Vec<f64> {
        self.defining_triangles
            .iter()
            .map(|[a, b, c]| {
                let p = |n: &String| self.point(n).expect("defining triangle names exist");
                triangle_area(p(a), p(b), p(c))
            })
            .collect()
    }

    pub fn maps(&self) -> Result<Vec<ProjMap>> {
        let n = self.lines.len();
        self.map_areas()
            .iter()
            .enumerate()
            .map(|(k, &c)| area_map(&self.lines[k], &self.lines[(k + 1) % n], c, self.orientation))
            .collect()
    }

    /// Composition of all maps, a map of the first line to itself.
    pub fn composition(&self) -> Result<ProjMap> {
        Ok(compose(&self.maps()?))
    }

    pub fn check_chains(&self) -> Result<Vec<ChainCheck>> {
        let maps = self.maps()?;
        let n = self.lines.len();
        self.chains
            .iter()
            .map(|chain| {
                let expected = chain
                    .iter()
                    .enumerate()
                    .map(|(j, p)| self.chart_coord(p, j % n))
                    .collect::<Result<Vec<_>>>()?;
                let mut actual = vec![expected[0]];
                for j in 1..chain.len() {
                    let prev = actual[j - 1];
                    actual.push(maps[(j - 1) % n].apply(prev));
                }
                let max_error = expected
                    .iter()
                    .zip(&actual)
                    .map(|(e, a)| e.distance(*a))
                    .fold(0.0, f64::max);
                Ok(ChainCheck {
                    labels: chain.clone(),
                    expected,
                    actual,
                    max_error,
                })
            })
            .collect()
    }

    /// Copy with the marked point `name` slid by `eps` along its line.
    pub fn perturbed(&self, name: &str, eps: f64) -> Result<Self> {
        let mut out = self.clone();
        let m = out
            .marked
            .iter_mut()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no marked point {name}")))?;
        m.position += self.lines[m.line].direction * eps;
        Ok(out)
    }
}

/// Three lines bounding the right triangle `(0,0), (1,0), (0,1)`, with maps
/// cutting the triangle's full area 0.5.
pub fn triangle_config() -> MarkedConfig {
    let v = Vec2::new;
    let lines = vec![
        ChartedLine::new(v(0.0, 0.0), v(1.0, 0.0)).unwrap(),
        ChartedLine::new(v(1.0, 0.0), v(-1.0, 1.0)).unwrap(),
        ChartedLine::new(v(0.0, 1.0), v(0.0, -1.0)).unwrap(),
    ];
    MarkedConfig::build(
        "triangle",
        lines,
        &[("M1", 0, v(-1.0, 0.0)), ("M2", 1, v(0.5, 0.5)), ("M3", 2, v(0.0, -1.0))],
        &[["I1", "M1", "M2"], ["I2", "M2", "M3"], ["I3", "M3", "M1"]],
        0.5,
        &[
            &["inf", "I1", "I3", "inf"],
            &["I3", "I2", "inf", "I3"],
            &["M1", "M2", "M3", "M1"],
        ],
    )
}

/// The four sides of the unit square as two pairs of parallel lines, with
/// maps cutting a quarter of its area.
pub fn parallelogram_config() -> MarkedConfig {
    let v = Vec2::new;
    let lines = vec![
        ChartedLine::new(v(0.0, 0.0), v(1.0, 0.0)).unwrap(),
        ChartedLine::new(v(1.0, 0.0), v(0.0, 1.0)).unwrap(),
        ChartedLine::new(v(1.0, 1.0), v(-1.0, 0.0)).unwrap(),
        ChartedLine::new(v(0.0, 1.0), v(0.0, -1.0)).unwrap(),
    ];
    MarkedConfig::build(
        "parallelogram",
        lines,
        &[("M1", 0, v(0.5, 0.0)), ("M2", 2, v(0.5, 1.0)), ("M3", 3, v(0.0, 0.5))],
        &[["I1", "M1", "I2"], ["I2", "I1", "M2"], ["I3", "M2", "I4"], ["I4", "M3", "I1"]],
        0.25,
        &[
            &["M1", "I2", "inf", "I3", "M1"],
            &["inf", "I1", "M2", "I4", "inf"],
            &["I1", "inf", "I2", "M3", "I1"],
        ],
    )
}

/// Canonical configuration by name.
pub fn config_by_name(name: &str) -> Result<MarkedConfig> {
    match name {
        "triangle" => Ok(triangle_config()),
        "parallelogram" => Ok(parallelogram_config()),
        other => Err(Error::InvalidArgument(format!("unknown configuration {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fin(u: f64) -> ExtReal {
        ExtReal::Finite(u)
    }

    #[test]
    fn apply_handles_infinity() {
        let inv = ProjMap::new([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(inv.apply(fin(0.0)), ExtReal::Infinity);
        assert_eq!(inv.apply(ExtReal::Infinity), fin(0.0));
        assert_eq!(inv.apply(fin(4.0)), fin(0.25));
        assert_eq!(ProjMap::new([[1.0, 2.0], [2.0, 4.0]]), Err(Error::SingularMap));
    }

    #[test]
    fn identity_checks() {
        assert!(is_identity(&ProjMap::identity(), 1e-12));
        let seven = ProjMap::new([[7.0, 0.0], [0.0, 7.0]]).unwrap();
        assert!(is_identity(&seven, 1e-12));
        let neg = ProjMap::new([[-2.0, 0.0], [0.0, -2.0]]).unwrap();
        assert!(is_identity(&neg, 1e-12));
        let swap = ProjMap::new([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(!is_identity(&swap, 1e-3));
    }

    #[test]
    fn compose_order_and_inverse() {
        let shift = ProjMap::new([[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let double = ProjMap::new([[2.0, 0.0], [0.0, 1.0]]).unwrap();
        // shift first, then double
        let m = compose(&[shift, double]);
        assert_abs_diff_eq!(m.apply(fin(1.0)).finite().unwrap(), 4.0, epsilon = 1e-12);
        assert!(is_identity(&compose(&[shift, shift.inverse()]), 1e-12));
        let single = compose(&[double]);
        assert_abs_diff_eq!(single.apply(fin(3.0)).finite().unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn area_map_sends_intersection_to_infinity() {
        let cfg = triangle_config();
        let f = area_map(&cfg.lines[0], &cfg.lines[1], 0.5, -1.0).unwrap();
        let i1 = cfg.intersections[0];
        assert_eq!(f.apply(fin(cfg.lines[0].coord(i1))), ExtReal::Infinity);
        let at_inf = f.apply(ExtReal::Infinity).finite().unwrap();
        assert!(cfg.lines[1].point(at_inf).dist(i1) < 1e-12);
        let x_axis = cfg.lines[0];
        assert_eq!(area_map(&x_axis, &x_axis, 1.0, -1.0), Err(Error::ParallelLines));
    }

    #[test]
    fn area_map_examples() {
        let tri = triangle_config();
        let f1 = area_map(&tri.lines[0], &tri.lines[1], 0.5, -1.0).unwrap();
        let img = f1.apply(fin(-1.0)).finite().unwrap();
        assert!(tri.lines[1].point(img).dist(Vec2::new(0.5, 0.5)) < 1e-12);

        let par = parallelogram_config();
        let g1 = area_map(&par.lines[0], &par.lines[1], 0.25, -1.0).unwrap();
        let img = g1.apply(fin(0.5)).finite().unwrap();
        assert!(par.lines[1].point(img).dist(Vec2::new(1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn canonical_instances() {
        let tri = triangle_config();
        let p = |n: &str| tri.point(n).unwrap();
        assert_eq!(p("I1"), Vec2::new(1.0, 0.0));
        assert_eq!(p("I2"), Vec2::new(0.0, 1.0));
        assert_eq!(p("I3"), Vec2::new(0.0, 0.0));
        assert_abs_diff_eq!(p("M1").dist(p("I3")), p("I3").dist(p("I1")), epsilon = 1e-15);
        assert_abs_diff_eq!(p("M3").dist(p("I3")), p("I3").dist(p("I2")), epsilon = 1e-15);
        for a in tri.map_areas() {
            assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        }
        let par = parallelogram_config();
        assert_eq!(par.point("I4"), Some(Vec2::new(0.0, 0.0)));
        for a in par.map_areas() {
            assert_abs_diff_eq!(a, 0.25, epsilon = 1e-15);
        }
        assert!(par.point("I5").is_none());
    }

    #[test]
    fn compositions_are_identity_and_chains_close() {
        for cfg in [triangle_config(), parallelogram_config()] {
            let m = cfg.composition().unwrap();
            assert!(m.identity_distance() <= 1e-9, "{}: {:?}", cfg.name, m);
            for chain in cfg.check_chains().unwrap() {
                assert!(chain.max_error <= 1e-9, "{}: {chain:?}", cfg.name);
            }
        }
    }

    #[test]
    fn perturbation_breaks_identity() {
        let cfg = triangle_config().perturbed("M2", 1e-3).unwrap();
        assert!(cfg.composition().unwrap().identity_distance() > 1e-4);
        assert!(triangle_config().perturbed("I1", 1e-3).is_err());
    }
}
