use std::f64::consts::PI;

use levy_recur::model::presets;
use levy_recur::pullback::PullbackSettings;
use levy_recur::recurrence::profile::{Mode, TimeProfile};
use levy_recur::recurrence::{almost_periods, bl_distance_1d, shift_coupling_gap, ScanSettings};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn periodic_profile_accepts_exactly_the_multiples() {
    // period 2, oscillation 2.6, ε far below it
    let p = TimeProfile::Periodic {
        omega0: PI,
        offset: 0.0,
        modes: vec![Mode { k: 1, amp: 1.0, phase: 0.0 }, Mode { k: 3, amp: 0.3, phase: 1.0 }],
    };
    let s = ScanSettings { epsilon: 0.05, scan_window: 20.0, tau_step: 0.25, sup_horizon: 10.0, t_step: 0.01 };
    let r = almost_periods(&[&p], &s).unwrap();
    let taus: Vec<f64> = r.candidate_taus.iter().map(|c| c.0).collect();
    let want: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    assert_eq!(taus, want);
    assert!(r.relatively_dense);
    assert_eq!(r.max_gap, 2.0);
}

#[test]
fn acceptance_set_grows_with_epsilon() {
    let f = presets::example61_f_profile();
    let scan = |epsilon| ScanSettings { epsilon, scan_window: 150.0, tau_step: 0.01, sup_horizon: 20.0, t_step: 0.02 };
    let narrow = almost_periods(&[&f], &scan(0.03)).unwrap();
    let wide = almost_periods(&[&f], &scan(0.06)).unwrap();
    assert!(!narrow.candidate_taus.is_empty());
    let wide_taus: Vec<f64> = wide.candidate_taus.iter().map(|c| c.0).collect();
    for (tau, d) in &narrow.candidate_taus {
        assert!(*d < 0.03);
        assert!(wide_taus.contains(tau), "{tau} accepted at ε but not at 2ε");
    }
}

#[test]
fn empirical_gaussian_law_converges() {
    // reference law: 2·10⁴ midpoint quantiles of N(0, 1)
    let n_ref = 20_000;
    let z = Normal::new(0.0, 1.0).unwrap();
    let reference: Vec<f64> = (0..n_ref).map(|i| z.inverse_cdf((i as f64 + 0.5) / n_ref as f64)).collect();
    let mut means = Vec::new();
    for n in [100, 1_000, 10_000] {
        let mut total = 0.0;
        for s in 0..5 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + s);
            let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            total += bl_distance_1d(&xs, &reference);
        }
        means.push(total / 5.0);
    }
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
    assert!(means[2] < 0.02);
}

#[test]
fn exact_period_shift_leaves_the_solution_unchanged() {
    let m = presets::periodic_model();
    let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
    let r = shift_coupling_gap(&m, 2.0 * PI, &times, 6, &PullbackSettings::new(1e-2, 1e-2), 3).unwrap();
    assert!(r.measured_sup_gap < 1e-20, "{}", r.measured_sup_gap);
    assert!(r.sup_i.iter().all(|v| *v < 1e-20));
    assert!(r.theoretical_bound < 1e-18);
}

#[test]
fn shift_coupling_needs_condition_l() {
    let mut m = presets::example61_forced(1.0, 1.0);
    m.lipschitz_l = 0.6;
    let times = [0.0, 1.0];
    let err = shift_coupling_gap(&m, 1.0, &times, 2, &PullbackSettings::new(1e-2, 1e-2), 1).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
