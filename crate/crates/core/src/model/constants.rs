//! Explicit constants of the existence, compatibility and stability theory.

use serde::Serialize;

use crate::error::{Error, Result};

const ALPHA_GRID_POINTS: usize = 20_001;
const ALPHA_MAX: f64 = 1e6;
const DEN_FLOOR: f64 = 1e-6;

/// Burkholder-Davis-Gundy constant c_p = [p(p−1)/2 · (p/(p−1))^{p−2}]^{p/2}.
pub fn compute_cp(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::input(format!("c_p needs p > 0, got {p}")));
    }
    Ok((p * (p - 1.0) / 2.0 * (p / (p - 1.0)).powf(p - 2.0)).powf(p / 2.0))
}

fn kunita_den(p: f64, alpha: f64) -> f64 {
    1.0 - (p - 1.0) * (p - 2.0) * 2f64.powf(p - 4.0) * (p / (p - 1.0)).powf(p) * alpha.powf(2.0 - p)
}

/// Kunita's D₁(p, α) and D₂(p, α); `None` when the shared denominator is below the floor.
pub fn kunita_d1_d2(p: f64, alpha: f64) -> Option<(f64, f64)> {
    let den = kunita_den(p, alpha);
    if !(den >= DEN_FLOOR) {
        return None;
    }
    let r = (p / (p - 1.0)).powf(p);
    let d1 = 2f64.powf(p - 3.0) * r * alpha.powf(2.0 - p / 2.0) / den;
    let d2 = p * (p - 1.0) * 2f64.powf(p - 4.0) * r / den;
    Some((d1, d2))
}

/// d_p = min over a log grid α ∈ [1, 10⁶] of max(D₁, D₂); returns (d_p, α*).
pub fn compute_dp(p: f64) -> Result<(f64, f64)> {
    compute_dp_on_grid(p, ALPHA_GRID_POINTS)
}

pub fn compute_dp_on_grid(p: f64, points: usize) -> Result<(f64, f64)> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::input(format!("d_p needs p >= 2, got {p}")));
    }
    let top = ALPHA_MAX.log10();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..points {
        let alpha = if i == 0 { 1.0 } else { 10f64.powf(top * i as f64 / (points - 1).max(1) as f64) };
        if let Some((d1, d2)) = kunita_d1_d2(p, alpha) {
            let d = d1.max(d2);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, alpha));
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no admissible Kunita alpha in [1, 1e6] for p = {p}")))
}

/// Contraction constant θ_p of the L^p fixed-point map (p > 2).
pub fn compute_theta(p: f64, k: f64, omega: f64, l: f64, b: f64) -> Result<f64> {
    if !(p > 2.0) {
        return Err(Error::input(format!("theta_p needs p > 2, got {p}")));
    }
    if !(omega > 0.0) {
        return Err(Error::input("theta_p needs omega > 0"));
    }
    let cp = compute_cp(p)?;
    let (dp, _) = compute_dp(p)?;
    let wp = omega * p;
    let jump = (1.0 + 2f64.powf(p - 1.0)) * dp;
    let brace = ((1.0 + (2.0 * b).powf(p - 1.0)) * (2.0 * (p - 1.0) / wp).powf(p - 1.0)
        + (cp + jump) * ((p - 2.0) / wp).powf(p / 2.0 - 1.0))
        * 2.0
        / wp
        + jump / wp;
    Ok(4f64.powf(p - 1.0) * k.powf(p) * l.powf(p) * brace)
}

/// θ₂ = (4K²ℒ²/ω²)(1 + 2ω + 2b).
pub fn theta_2(k: f64, omega: f64, l: f64, b: f64) -> f64 {
    4.0 * k * k * l * l / (omega * omega) * (1.0 + 2.0 * omega + 2.0 * b)
}

/// lim_{p→2⁺} θ_p = (4K²ℒ²/ω²)(1 + 10ω + 2b).
pub fn theta_limit_2plus(k: f64, omega: f64, l: f64, b: f64) -> f64 {
    4.0 * k * k * l * l / (omega * omega) * (1.0 + 10.0 * omega + 2.0 * b)
}

/// Radius r of the invariant L²-ball B[0, r].
pub fn compute_radius(k: f64, omega: f64, l: f64, a0: f64, b: f64) -> Result<f64> {
    let s = (1.0 + 2.0 * omega + 2.0 * b).sqrt();
    let den = omega - 2.0 * k * l * s;
    if !(den > 1e-12 * omega) {
        return Err(Error::threshold(format!(
            "existence condition ℒ < ω/(2K√(1+2ω+2b)) fails: ℒ = {l}, bound = {}",
            omega / (2.0 * k * s)
        )));
    }
    Ok(2.0 * k * a0 * s / den)
}

/// Square-mean contraction rate ω − 5(1/ω + 4 + 2b/ω)K²ℒ².
pub fn stability_margin(k: f64, omega: f64, l: f64, b: f64) -> f64 {
    omega - 5.0 * (1.0 / omega + 4.0 + 2.0 * b / omega) * k * k * l * l
}

/// c = 1 − (8K²ℒ²/ω²)(1 + 2ω + 2b).
pub fn compat_c(k: f64, omega: f64, l: f64, b: f64) -> f64 {
    1.0 - 8.0 * k * k * l * l / (omega * omega) * (1.0 + 2.0 * omega + 2.0 * b)
}

/// α = ω − [8K²ℒ²/ω + 32K²ℒ² + 16K²ℒ²b/ω].
pub fn compat_alpha(k: f64, omega: f64, l: f64, b: f64) -> f64 {
    let kl = k * k * l * l;
    omega - (8.0 * kl / omega + 32.0 * kl + 16.0 * kl * b / omega)
}

/// Sup-in-time mean-square gap bound between bounded solutions of two
/// coefficient quadruples whose sup mean-square differences are `sup_i`.
pub fn compat_gap_bound(k: f64, omega: f64, l: f64, b: f64, sup_i: [f64; 4]) -> Result<f64> {
    let c = compat_c(k, omega, l, b);
    if !(c > 0.0) {
        return Err(Error::threshold(format!("compatibility constant c = {c} is not positive")));
    }
    let k2 = k * k;
    let w = [
        8.0 * k2 / (omega * omega),
        4.0 * k2 / omega,
        4.0 * k2 / omega,
        8.0 * k2 / omega + 16.0 * k2 * b / (omega * omega),
    ];
    Ok(w.iter().zip(sup_i).map(|(wi, si)| wi * si).sum::<f64>() / c)
}

/// Bound on sup‖φ‖² for the bounded solution of the linear equation with
/// forcing norms sup|f|, sup‖gQ^{1/2}‖, sup‖F‖, sup‖G‖ (jump norms in L²(ν)).
pub fn linear_solution_bound(k: f64, omega: f64, b: f64, f: f64, g: f64, big_f: f64, big_g: f64) -> f64 {
    k * k / (omega * omega)
        * (4.0 * f * f + 2.0 * omega * g * g + 2.0 * omega * big_f * big_f + (4.0 * omega + 8.0 * b) * big_g * big_g)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub c_p: f64,
    pub d_p: f64,
    pub alpha_kunita: f64,
    pub theta_2: f64,
    pub theta_p: f64,
    pub theta_limit_2plus: f64,
    /// `None` when the existence threshold fails.
    pub radius_r: Option<f64>,
    pub compat_c: f64,
    pub compat_alpha: f64,
    pub stability_margin: f64,
}

impl TheoremConstants {
    pub fn evaluate(k: f64, omega: f64, l: f64, a0: f64, b: f64, p: f64) -> Result<Self> {
        let (d_p, alpha_kunita) = compute_dp(p)?;
        Ok(TheoremConstants {
            c_p: compute_cp(p)?,
            d_p,
            alpha_kunita,
            theta_2: theta_2(k, omega, l, b),
            theta_p: compute_theta(p, k, omega, l, b)?,
            theta_limit_2plus: theta_limit_2plus(k, omega, l, b),
            radius_r: compute_radius(k, omega, l, a0, b).ok(),
            compat_c: compat_c(k, omega, l, b),
            compat_alpha: compat_alpha(k, omega, l, b),
            stability_margin: stability_margin(k, omega, l, b),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cp_values() {
        assert_eq!(compute_cp(2.0).unwrap(), 1.0);
        let c4 = compute_cp(4.0).unwrap();
        assert!((c4 - (32.0f64 / 3.0).powi(2)).abs() < 1e-10);
        assert!((compute_cp(2.0 + 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(compute_cp(0.0).is_err());
    }

    #[test]
    fn dp_at_two() {
        let (d, a) = compute_dp(2.0).unwrap();
        assert_eq!(d, 2.0);
        assert_eq!(a, 1.0);
        for alpha in [1.0, 7.0, 1e5] {
            assert_eq!(kunita_den(2.0, alpha), 1.0);
        }
    }

    #[test]
    fn dp_matches_finer_grid() {
        // brute-force oracle on a ten times finer grid
        let (d, _) = compute_dp(3.0).unwrap();
        let top = 6.0f64;
        let n = 200_001;
        let mut best = f64::INFINITY;
        for i in 0..n {
            let alpha = 10f64.powf(top * i as f64 / (n - 1) as f64);
            let r = 1.5f64.powi(3);
            let den = 1.0 - 2.0 * 0.5 * r / alpha;
            if den >= 1e-6 {
                let d1 = r * alpha.sqrt() / den;
                let d2 = 3.0 * r / den;
                best = best.min(d1.max(d2));
            }
        }
        assert!(((d - best) / best).abs() < 0.01, "{d} vs {best}");
    }

    #[test]
    fn dp_infeasible_grid_errors() {
        // a one-point grid {α = 1} is inadmissible at p = 3 (denominator 1 − 27/8)
        assert!(matches!(compute_dp_on_grid(3.0, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn theta_zero_lipschitz() {
        assert_eq!(compute_theta(3.0, 1.0, 4.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_limit_example_parameters() {
        let th = compute_theta(2.0 + 1e-6, 1.0, 4.0, 0.25, 1.0).unwrap();
        assert!(((th - 43.0 / 64.0) / (43.0 / 64.0)).abs() < 1e-3, "{th}");
        let gap = theta_limit_2plus(1.0, 4.0, 0.25, 1.0) - theta_2(1.0, 4.0, 0.25, 1.0);
        assert!((gap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radius_example_value() {
        let r = compute_radius(1.0, 4.0, 0.25, 1.0, 1.0).unwrap();
        let want = 2.0 * 11f64.sqrt() / (4.0 - 11f64.sqrt() / 2.0);
        assert!((r - want).abs() < 1e-12);
        assert!((r - 2.8327).abs() < 1e-4);
        assert_eq!(compute_radius(1.0, 4.0, 0.25, 0.0, 1.0).unwrap(), 0.0);
        let at = 4.0 / (2.0 * 11f64.sqrt());
        assert!(matches!(compute_radius(1.0, 4.0, at, 1.0, 1.0), Err(Error::Threshold(_))));
    }

    #[test]
    fn margin_values() {
        assert_eq!(stability_margin(1.0, 4.0, 0.0, 3.0), 4.0);
        let m = stability_margin(1.0, 4.0, 1.0 / 16.0, 1.0);
        assert!((m - (4.0 - 95.0 / 1024.0)).abs() < 1e-14);
    }

    #[test]
    fn compat_values() {
        assert_eq!(compat_gap_bound(1.0, 4.0, 0.25, 1.0, [0.0; 4]).unwrap(), 0.0);
        assert!((compat_c(1.0, 4.0, 0.25, 1.0) - (1.0 - 11.0 / 32.0)).abs() < 1e-15);
        let s = [0.1, 0.2, 0.3, 0.4];
        let got = compat_gap_bound(2.0, 3.0, 0.0, 0.5, s).unwrap();
        let want = 32.0 / 9.0 * 0.1 + 16.0 / 3.0 * 0.2 + 16.0 / 3.0 * 0.3 + (32.0 / 3.0 + 32.0 / 9.0) * 0.4;
        assert!((got - want).abs() < 1e-12);
        assert!(compat_gap_bound(1.0, 1.0, 10.0, 0.0, s).is_err());
    }

    #[test]
    fn linear_bound_weights() {
        let v = linear_solution_bound(1.0, 2.0, 1.0, 1.0, 0.0, 0.0, 0.0);
        assert!((v - 1.0).abs() < 1e-15);
        let v = linear_solution_bound(1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!((v - 4.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn theta_monotone_in_l_and_b(
            k in 1.0f64..3.0, omega in 0.5f64..10.0, l in 0.0f64..1.0, dl in 0.001f64..0.5,
            b in 0.0f64..5.0, db in 0.001f64..2.0, p in 2.1f64..4.0,
        ) {
            let base = compute_theta(p, k, omega, l, b).unwrap();
            prop_assert!(compute_theta(p, k, omega, l + dl, b).unwrap() >= base);
            prop_assert!(compute_theta(p, k, omega, l, b + db).unwrap() >= base);
        }

        #[test]
        fn theta_2_below_limit(k in 1.0f64..3.0, omega in 0.5f64..10.0, l in 0.01f64..1.0, b in 0.0f64..5.0) {
            prop_assert!(theta_2(k, omega, l, b) < theta_limit_2plus(k, omega, l, b));
        }

        #[test]
        fn radius_blows_up_at_threshold(k in 1.0f64..3.0, omega in 0.5f64..10.0, b in 0.0f64..5.0) {
            let thr = omega / (2.0 * k * (1.0 + 2.0 * omega + 2.0 * b).sqrt());
            let r = compute_radius(k, omega, thr * (1.0 - 1e-9), 1.0, b).unwrap();
            prop_assert!(r > 1e6);
        }

        #[test]
        fn margin_positive_iff_lmin(k in 1.0f64..3.0, omega in 0.5f64..10.0, l in 0.0f64..1.0, b in 0.0f64..5.0) {
            let lmin = omega / (k * (5.0 * (1.0 + 4.0 * omega + 2.0 * b)).sqrt()) - l;
            let m = stability_margin(k, omega, l, b);
            prop_assume!(lmin.abs() > 1e-9);
            prop_assert_eq!(m > 0.0, lmin > 0.0);
        }

        #[test]
        fn cp_dp_continuous(p in 2.0f64..5.9999) {
            let dp = 1e-4;
            let (x, y) = (compute_cp(p).unwrap(), compute_cp(p + dp).unwrap());
            prop_assert!((x - y).abs() < 1e-2 * x);
            let (a, _) = compute_dp_on_grid(p, 2001).unwrap();
            let (c, _) = compute_dp_on_grid(p + dp, 2001).unwrap();
            prop_assert!((a - c).abs() < 1e-2 * a.max(1.0), "{} {}", a, c);
        }
    }
}
