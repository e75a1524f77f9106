use levy_recur::recurrence::profile::{Harmonic, TimeProfile};
use levy_recur::recurrence::{bebutov_distance, bl_distance, bl_distance_1d, EmpiricalLaw};
use levy_recur::Error;
use proptest::prelude::*;

mod common;
use common::bl_lp;

const HORIZON: f64 = 60.0;
const GRID: f64 = 0.01;

fn profile() -> impl Strategy<Value = TimeProfile> {
    prop::collection::vec((-1.0..1.0f64, 0.1..3.0f64, 0.0..6.3f64), 1..4).prop_map(|hs| TimeProfile::QuasiPeriodic {
        offset: 0.0,
        harmonics: hs.into_iter().map(|(amp, freq, phase)| Harmonic { amp, freq, phase }).collect(),
    })
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..25)
}

fn bebutov(a: &TimeProfile, b: &TimeProfile) -> Result<f64, Error> {
    bebutov_distance(|t| a.eval(t), |t| b.eval(t), HORIZON, GRID)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bebutov_axioms(a in profile(), b in profile(), c in profile()) {
        let (ab, bc, ac) = match (bebutov(&a, &b), bebutov(&b, &c), bebutov(&a, &c)) {
            (Ok(x), Ok(y), Ok(z)) => (x, y, z),
            _ => return Err(TestCaseError::reject("distance below the horizon resolution")),
        };
        prop_assert_eq!(bebutov(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, bebutov(&b, &a).unwrap());
        prop_assert!(ab >= 0.0 && ab.is_finite());
        let tol = 2.0 * GRID * [&a, &b, &c].iter().map(|p| p.lipschitz_t()).fold(0.0, f64::max);
        prop_assert!(ac <= ab + bc + tol, "{} > {} + {} + {}", ac, ab, bc, tol);
    }

    #[test]
    fn bl_axioms(x in sample(), y in sample(), z in sample()) {
        let xy = bl_distance_1d(&x, &y);
        prop_assert!(bl_distance_1d(&x, &x).abs() <= 1e-8);
        prop_assert!((xy - bl_distance_1d(&y, &x)).abs() <= 1e-8);
        prop_assert!((0.0..=2.0).contains(&xy));
        prop_assert!(bl_distance_1d(&x, &z) <= xy + bl_distance_1d(&y, &z) + 1e-8);
    }

    #[test]
    fn bl_matches_linear_program(x in prop::collection::vec(-3.0..3.0f64, 1..12), y in prop::collection::vec(-3.0..3.0f64, 1..12)) {
        let exact = bl_lp(&x, &y);
        let fast = bl_distance_1d(&x, &y);
        prop_assert!((exact - fast).abs() <= 1e-8, "lp {} vs {}", exact, fast);
    }

    #[test]
    fn multi_dimensional_is_coordinate_max(x in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..15), y in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..15)) {
        let mu = EmpiricalLaw::new(x.iter().map(|p| vec![p.0, p.1]).collect()).unwrap();
        let nu = EmpiricalLaw::new(y.iter().map(|p| vec![p.0, p.1]).collect()).unwrap();
        let by_hand = bl_distance_1d(&mu.coordinate(0), &nu.coordinate(0)).max(bl_distance_1d(&mu.coordinate(1), &nu.coordinate(1)));
        prop_assert_eq!(bl_distance(&mu, &nu).unwrap(), by_hand);
    }
}

#[test]
fn point_masses_against_closed_form_and_lp() {
    for (x, y) in [(0.0f64, 0.3f64), (-1.0, 2.5), (0.7, 0.7000001), (5.0, -5.0), (0.0, 2.0)] {
        let d = (x - y).abs();
        let exact = 2.0 * d / (2.0 + d);
        assert!((bl_lp(&[x], &[y]) - exact).abs() < 1e-8);
        assert!((bl_distance_1d(&[x], &[y]) - exact).abs() < 1e-8);
    }
}

#[test]
fn larger_supports_match_lp() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let xs: Vec<f64> = (0..40).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = (0..35).map(|_| rng.random_range(-1.0..3.0)).collect();
        assert!((bl_lp(&xs, &ys) - bl_distance_1d(&xs, &ys)).abs() < 1e-8);
    }
}
