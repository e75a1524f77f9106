//! Square-mean stability experiments: same-noise gap curves, decay-rate fits
//! and the ultimate bound on the second moment.

use serde::Serialize;

use crate::ensemble::{column_stats, map_paths, squared_norm, MeanSe};
use crate::error::{Error, Result};
use crate::integrator::integrate_observed;
use crate::model::SdeModel;
use crate::noise::NoiseRealization;
use crate::pullback::{forgetting_check, PullbackSettings};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCurve {
    pub times: Vec<f64>,
    pub gap: Vec<MeanSe>,
}

impl GapCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,gap,se\n");
        for (t, g) in self.times.iter().zip(&self.gap) {
            s.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", g.mean, g.se));
        }
        s
    }
}

/// E|Y(t; y0a) − Y(t; y0b)|² on [0, horizon] under synchronous coupling.
#[allow(clippy::too_many_arguments)]
pub fn gap_experiment(
    model: &SdeModel,
    y0a: &[f64],
    y0b: &[f64],
    horizon: f64,
    n_points: usize,
    n_paths: usize,
    settings: &PullbackSettings,
    seed: u64,
) -> Result<GapCurve> {
    model.validate()?;
    if !(horizon > 0.0) || n_points < 2 {
        return Err(Error::input("horizon must be positive with at least two grid points"));
    }
    let times: Vec<f64> = (0..n_points).map(|i| horizon * i as f64 / (n_points - 1) as f64).collect();
    let gap = forgetting_check(model, &times, settings, n_paths, seed, y0a, y0b)?;
    Ok(GapCurve { times, gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub rate_se: f64,
    pub r_squared: f64,
    pub n_used: usize,
}

/// Least-squares slope of −log gap against t over the leading stretch where
/// gap exceeds ten standard errors (every point when SEs are zero).
pub fn fit_decay_rate(times: &[f64], curve: &[MeanSe]) -> Result<DecayFit> {
    let mut pts = Vec::new();
    for (t, g) in times.iter().zip(curve) {
        if g.mean > 0.0 && g.mean > 10.0 * g.se {
            pts.push((*t, g.mean.ln()));
        } else if !pts.is_empty() {
            break;
        }
    }
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("{n} usable points, need at least 5")));
    }
    let nf = n as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let sse: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mt)).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let rate_se = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(DecayFit { rate: -slope, rate_se, r_squared, n_used: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UltimateBound {
    pub tail_second_moment: f64,
    pub tail_se: f64,
    pub r_plus_1: f64,
    pub pass: bool,
}

/// Average of E|Y(t)|² over the final 20% of [0, horizon], compared with r + 1.
pub fn ultimate_bound_check(
    model: &SdeModel,
    horizon: f64,
    n_paths: usize,
    y0: &[f64],
    settings: &PullbackSettings,
    seed: u64,
) -> Result<UltimateBound> {
    model.validate()?;
    let r = model.constants()?.radius_r.ok_or_else(|| Error::threshold("radius r is undefined: existence condition fails"))?;
    let n_tail = 21;
    let times: Vec<f64> = (0..n_tail).map(|i| horizon * (0.8 + 0.2 * i as f64 / (n_tail - 1) as f64)).collect();
    let mut obs = vec![0.0];
    obs.extend(&times);
    let rows = map_paths(n_paths, seed, |_, s| {
        let noise = NoiseRealization::sample(&model.wiener, &model.jumps, (0.0, horizon), settings.base_step, s)?;
        let xs = integrate_observed(model, &noise, 0.0, y0, settings.max_step, &obs)?;
        // time average per path keeps the SE honest under serial correlation
        Ok(vec![xs[1..].iter().map(|x| squared_norm(x)).sum::<f64>() / n_tail as f64])
    })?;
    let s = column_stats(&rows)[0];
    Ok(UltimateBound {
        tail_second_moment: s.mean,
        tail_se: s.se,
        r_plus_1: r + 1.0,
        pass: s.mean + 3.0 * s.se < r + 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn exact(rate: f64, noise: f64, seed: u64) -> (Vec<f64>, Vec<MeanSe>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, noise).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let c = times
            .iter()
            .map(|t| MeanSe { mean: (-rate * t).exp() * (1.0 + if noise > 0.0 { n.sample(&mut rng) } else { 0.0 }), se: 0.0 })
            .collect();
        (times, c)
    }

    #[test]
    fn exact_exponential() {
        let (t, c) = exact(3.0, 0.0, 0);
        let f = fit_decay_rate(&t, &c).unwrap();
        assert!((f.rate - 3.0).abs() < 1e-6);
        assert!(f.r_squared > 0.999999);
    }

    #[test]
    fn noisy_exponential() {
        let (t, c) = exact(3.0, 0.05, 9);
        let f = fit_decay_rate(&t, &c).unwrap();
        assert!((f.rate - 3.0).abs() < 0.15, "{f:?}");
    }

    #[test]
    fn constant_curve_and_short_curve() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let c = vec![MeanSe { mean: 2.0, se: 0.0 }; 10];
        assert!(fit_decay_rate(&t, &c).unwrap().rate.abs() < 1e-12);
        assert!(matches!(fit_decay_rate(&t[..4], &c[..4]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn deterministic_linear_rate() {
        let mut m = presets::linear_sin_forced(1.5);
        m.f = crate::model::Coefficient::zero();
        let c = gap_experiment(&m, &[1.0], &[0.0], 3.0, 31, 2, &PullbackSettings::new(1e-3, 1e-3), 1).unwrap();
        let f = fit_decay_rate(&c.times, &c.gap).unwrap();
        assert!((f.rate - 3.0).abs() < 0.03);
    }

    #[test]
    fn zero_model_ultimate_bound() {
        let mut m = presets::linear_sin_forced(1.0);
        m.f = crate::model::Coefficient::zero();
        let u = ultimate_bound_check(&m, 5.0, 4, &[0.0], &PullbackSettings::new(1e-3, 1e-2), 1).unwrap();
        assert_eq!(u.tail_second_moment, 0.0);
        assert!(u.pass);
    }
}
