use std::sync::Arc;

use hozon_core::higher::{dm_radial, RadialMeanBody, StarOracle};
use hozon_core::measure::SphereRule;
use hozon_core::zonoid::{mz_table, Budget, Route};
use hozon_core::{Ball, ConvexBody, Polytope, QBody, RngPlan};

fn interval() -> Arc<dyn ConvexBody> {
    Arc::new(Polytope::cube(&[0.0], &[1.0]).unwrap())
}

#[test]
fn every_route_finds_a_third_on_the_unit_interval() {
    let plan = RngPlan::new(7, 4).unwrap();
    let budget = Budget { tuples: 100_000, directions: 2, chords: 50_000 };
    let q = QBody::segment();
    for route in [Route::Direct, Route::Spherical, Route::Factored] {
        let t = mz_table(interval(), &q, 1.0, route, &[1.0, -1.0], &plan, &budget).unwrap();
        for j in 0..2 {
            let err = (t.value(j) - 1.0 / 3.0).abs();
            assert!(err < 0.01_f64.max(4.0 * t.std_err(j)), "{route:?}: {}", t.value(j));
        }
    }
}

#[test]
fn difference_body_of_an_interval() {
    let k = Polytope::cube(&[0.0], &[1.0]).unwrap();
    assert!((dm_radial(&k, &[1.0], 1).unwrap() - 1.0).abs() < 1e-12);
    // D^2 [0,1] is the hexagon {|x|, |y|, |x - y| <= 1} in the plane
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((dm_radial(&k, &[s, s], 2).unwrap() - 1.0 / s).abs() < 1e-9);
    assert!((dm_radial(&k, &[s, -s], 2).unwrap() - 0.5 / s).abs() < 1e-9);
}

#[test]
fn ball_zonoid_is_rotation_invariant() {
    let disk: Arc<dyn ConvexBody> = Arc::new(Ball::new(vec![0.3, -0.1], 1.0).unwrap());
    let plan = RngPlan::new(3, 4).unwrap();
    let budget = Budget { tuples: 1, directions: 40_000, chords: 8 };
    let q = QBody::ball(1).unwrap();
    let thetas = [1.0, 0.0, 0.0, 1.0, -0.6, 0.8];
    let t = mz_table(disk, &q, 2.0, Route::Spherical, &thetas, &plan, &budget).unwrap();
    for j in 1..3 {
        let se = t.std_err(0).hypot(t.std_err(j));
        assert!((t.value(j) - t.value(0)).abs() < 4.0 * se + 1e-3, "{} vs {}", t.value(j), t.value(0));
    }
}

#[test]
fn cached_power_tables_match_the_direct_moments() {
    let k = interval();
    let plan = RngPlan::new(11, 2).unwrap();
    let rule = SphereRule::new(2, 2_000, &plan, 1).unwrap();
    let star = RadialMeanBody::new(k, 2, 3.0, &plan, 16).unwrap();
    let tab = StarOracle::tabulate(&star, rule).unwrap();
    let q = QBody::cube(2).unwrap();
    let (top, base) = (tab.power_table(3.0), tab.power_table(2.0));
    let w = tab.q_weights(&q, 1.0, &[1.0]).unwrap();
    let a = tab.q_moment(&q, 1.0, &[1.0]).unwrap();
    let b = tab.moment_with(&w, &top);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let c = tab.centroid_support(&q, 1.0, &[1.0]).unwrap();
    let d = tab.centroid_support_with(&q, 1.0, &[1.0], &top, &base).unwrap();
    assert_eq!(c.value.to_bits(), d.value.to_bits());
}
