mod common;

use areamap::billiard::{
    derivative, iterate_lift, orbit, orbit_with_areas, phi, phi_lift, phi_lift_exact, phi_step_area, Lift, MapConfig,
};
use areamap::{Error, Polygon};
use common::{clipped_cut_area, phi_by_bisection, random_polygon};
use proptest::prelude::*;

fn area_fraction() -> impl Strategy<Value = f64> {
    0.01..0.49f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn phi_matches_bisection(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let y = phi(&cfg, &poly.point_at(s));
        let oracle = poly.point_at(phi_by_bisection(&poly, s, cfg.area()));
        prop_assert!(y.xy.dist(oracle.xy) <= 1e-9 * poly.perimeter(), "{:?} vs {:?}", y, oracle);
    }

    #[test]
    fn phi_cuts_the_prescribed_area(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let x = poly.point_at(s);
        let y = phi(&cfg, &x);
        prop_assert!((poly.cut_area(&x, &y) - cfg.area()).abs() <= 1e-9 * poly.area());
        prop_assert!((clipped_cut_area(&poly, x.xy, y.xy) - cfg.area()).abs() <= 1e-9 * poly.area());
    }

    #[test]
    fn lift_is_monotone_and_periodic(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64, ds in 1e-6..0.5f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let (f, g) = (phi_lift(&cfg, s), phi_lift(&cfg, s + ds));
        prop_assert!(g > f);
        prop_assert!(f > s && f < s + 1.0);
        let base = phi_lift_exact(&cfg, Lift::from_f64(s));
        let shifted = phi_lift_exact(&cfg, Lift::from_f64(s).shift(1));
        prop_assert_eq!(shifted.diff(base), 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let h = 1e-6;
        let x = poly.point_at(s);
        let y = phi(&cfg, &x);
        // keep the difference stencil on one side at both ends
        let margin = 4.0 * h * poly.perimeter();
        prop_assume!(poly.vertex_distance(&x) > margin && poly.vertex_distance(&y) > margin * 100.0);
        let analytic = derivative(&cfg, &x).unwrap();
        let fd = (phi_lift(&cfg, s + h) - phi_lift(&cfg, s - h)) / (2.0 * h);
        prop_assert!((analytic - fd).abs() <= 1e-5 * analytic.max(1.0), "{analytic} vs {fd}");
    }

    #[test]
    fn orbit_product_obeys_chain_rule(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 8);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let orb = orbit(&cfg, s, 3).unwrap();
        prop_assume!(orb.flagged_steps.is_empty());
        let margin = 1e-4 * poly.perimeter();
        prop_assume!(orb.points.iter().all(|p| poly.vertex_distance(p) > margin));
        let h = 1e-7;
        let f3 = |t: f64| iterate_lift(&cfg, Lift::from_f64(t), 3).to_f64();
        let fd = (f3(s + h) - f3(s - h)) / (2.0 * h);
        let product: f64 = orb.step_derivatives.iter().product();
        prop_assert!((orb.derivative_product - product).abs() <= 1e-12 * product);
        prop_assert!((product - fd).abs() <= 1e-5 * product.max(1.0), "{product} vs {fd}");
    }

    #[test]
    fn equal_area_lists_reproduce_phi(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let plain = orbit(&cfg, s, 5).unwrap();
        let listed = orbit_with_areas(&poly, &[cfg.area(); 5], s).unwrap();
        prop_assert_eq!(plain.lift_values, listed.lift_values);
        let x = poly.point_at(s);
        prop_assert_eq!(phi_step_area(&poly, &x, cfg.area()).unwrap(), phi(&cfg, &x));
    }

    #[test]
    fn orbit_lifts_increase(seed in any::<u64>(), frac in area_fraction(), s in 0.0..1.0f64) {
        let poly = random_polygon(seed, 12);
        let cfg = MapConfig::new(&poly, frac * poly.area()).unwrap();
        let orb = orbit(&cfg, s, 50).unwrap();
        prop_assert!(orb.lift_values.windows(2).all(|w| w[1] > w[0] && w[1] < w[0] + 1.0));
        prop_assert_eq!(orb.winding, orb.displacement().floor() as i64);
    }
}

#[test]
fn area_range_is_enforced() {
    let sq = Polygon::regular(4, 1.0).unwrap();
    for bad in [0.0, -0.1, 0.5, 0.7, f64::NAN] {
        assert!(matches!(MapConfig::new(&sq, bad), Err(Error::AreaOutOfRange { .. })), "{bad}");
    }
    assert_eq!(MapConfig::from_doubled(&sq, 0.2).unwrap().area(), 0.1);
}

#[test]
fn vertex_touching_orbit_is_flagged() {
    let sq = Polygon::regular(4, 1.0).unwrap();
    let cfg = MapConfig::new(&sq, 0.125).unwrap();
    let orb = orbit(&cfg, 0.0, 4).unwrap();
    assert!(!orb.flagged_steps.is_empty());
    assert!(orb.derivative_product.is_finite() && orb.derivative_product > 0.0);
    assert_eq!(derivative(&cfg, &sq.point_at(0.0)), Err(Error::VertexNonSmooth));
}
