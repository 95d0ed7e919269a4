mod common;

use areamap::geometry::{BoundaryPoint, Polygon, Vec2};
use areamap::Error;
use common::{clipped_cut_area, random_polygon};
use proptest::prelude::*;

fn arc_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn cut_area_matches_clipping(seed in any::<u64>(), s1 in 0.0..1.0f64, s2 in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let (x, y) = (poly.point_at(s1), poly.point_at(s2));
        prop_assume!(x.xy.dist(y.xy) > 1e-6 * poly.perimeter());
        let oracle = clipped_cut_area(&poly, x.xy, y.xy);
        prop_assert!((poly.cut_area(&x, &y) - oracle).abs() <= 1e-9 * poly.area());
    }

    #[test]
    fn cut_areas_of_a_chord_sum_to_total(seed in any::<u64>(), s1 in 0.0..1.0f64, s2 in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let (x, y) = (poly.point_at(s1), poly.point_at(s2));
        prop_assume!(x.xy.dist(y.xy) > 1e-6 * poly.perimeter());
        let total = poly.cut_area(&x, &y) + poly.cut_area(&y, &x);
        prop_assert!((total - poly.area()).abs() <= 1e-9 * poly.area());
    }

    #[test]
    fn point_at_inverts_arc_of(seed in any::<u64>(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let p = poly.point_at(s);
        prop_assert!(arc_gap(poly.arc_of(&p), s) <= 1e-12);
        prop_assert!(p.t >= 0.0 && p.t < 1.0 && p.side < poly.len());
        let back = poly.point_at(poly.arc_of(&p));
        prop_assert!(back.xy.dist(p.xy) <= 1e-12 * poly.perimeter());
    }

    #[test]
    fn locate_recovers_boundary_points(seed in any::<u64>(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let p = poly.point_at(s);
        let q = poly.locate(p.xy).unwrap();
        prop_assert!(q.xy.dist(p.xy) <= 1e-12 * poly.perimeter());
        prop_assert!(arc_gap(q.s, p.s) <= 1e-12);
    }

    #[test]
    fn vertices_are_canonical(seed in any::<u64>(), k in 0usize..12) {
        let poly = random_polygon(seed, 12);
        let k = k % poly.len();
        let prev = (k + poly.len() - 1) % poly.len();
        let end_of_prev: BoundaryPoint = poly.boundary_point(prev, 1.0);
        prop_assert_eq!(end_of_prev.side, k);
        prop_assert_eq!(end_of_prev.t, 0.0);
        prop_assert!(poly.near_vertex(&end_of_prev));
    }

    #[test]
    fn shape_measures_are_affine_consistent(seed in any::<u64>()) {
        let poly = random_polygon(seed, 12);
        let shifted = Polygon::new(poly.vertices().iter().map(|v| *v + Vec2::new(3.0, -2.0))).unwrap();
        prop_assert!((shifted.area() - poly.area()).abs() <= 1e-12 * poly.area());
        prop_assert!((shifted.perimeter() - poly.perimeter()).abs() <= 1e-12 * poly.perimeter());
        let arcs = poly.cumulative_arc();
        prop_assert_eq!(arcs.len(), poly.len() + 1);
        prop_assert!(arcs.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn polygon_file_round_trip() {
    let poly = Polygon::from_json("[[0,0],[2,0],[2,1],[1,2],[0,1]]").unwrap();
    assert_eq!(poly.area(), 3.0);
    let again = Polygon::from_json(&poly.to_json()).unwrap();
    assert_eq!(again.vertices(), poly.vertices());
}

#[test]
fn clockwise_input_is_reoriented() {
    let cw = Polygon::new([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
    assert_eq!(cw.area(), 1.0);
    assert_eq!(cw.vertex(0), Vec2::new(0.0, 0.0));
    assert_eq!(cw.vertex(1), Vec2::new(1.0, 0.0));
}

#[test]
fn invalid_polygons() {
    assert_eq!(Polygon::new([[0.0, 0.0], [1.0, 0.0]]).unwrap_err(), Error::TooFewVertices { count: 2 });
    assert!(matches!(
        Polygon::new([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        Err(Error::DuplicateVertex { .. })
    ));
    assert!(matches!(
        Polygon::new([[0.0, 0.0], [1.0, 0.0], [0.2, 0.2], [0.0, 1.0]]),
        Err(Error::NonConvex { .. })
    ));
    let pentagram = (0..5).map(|k| {
        let a = std::f64::consts::TAU * (2 * k) as f64 / 5.0;
        [a.cos(), a.sin()]
    });
    assert!(Polygon::new(pentagram).is_err());
}
