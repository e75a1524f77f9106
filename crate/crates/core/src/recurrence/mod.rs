//! Recurrence: the Bebutov metric, ε-almost-period scans, the bounded-Lipschitz
//! metric on empirical laws, and the solution-level tests (distributional
//! almost periods and the shift-coupling gap).

mod bl;
pub mod profile;

pub use bl::{bl_distance, bl_distance_1d, bl_signed, box_lipschitz_max, signed_support, EmpiricalLaw};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{column_stats, map_paths, mean_se, MeanSe};
use crate::error::{Error, Result};
use crate::model::{compat_gap_bound, JumpCoefficient, SdeModel};
use crate::noise::{MarkSampler, NoiseRealization};
use crate::integrator::integrate_observed;
use crate::pullback::{bounded_at, model_horizon, PullbackSettings};
use crate::seed::rng_from;
use profile::TimeProfile;

/// Residual below which a distance is treated as exact zero.
const ZERO_DISTANCE: f64 = 1e-12;

/// d(φ, ψ) = sup_{k>0} min{max_{|t|≤k} |φ(t) − ψ(t)|, 1/k}, computed as the fixed
/// point ε = max_{|t|≤1/ε} |φ − ψ| on a grid over [−horizon, horizon].
pub fn bebutov_distance<F, G>(phi: F, psi: G, horizon: f64, grid_step: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(horizon > 0.0 && grid_step > 0.0 && horizon.is_finite()) {
        return Err(Error::input("horizon and grid_step must be positive"));
    }
    let n = (horizon / grid_step).ceil() as usize;
    // running max of ρ over |t| ≤ radius(j)
    let mut radius = Vec::with_capacity(n + 1);
    let mut running = Vec::with_capacity(n + 1);
    let mut m: f64 = 0.0;
    for j in 0..=n {
        let t = (j as f64 * grid_step).min(horizon);
        m = m.max((phi(t) - psi(t)).abs()).max((phi(-t) - psi(-t)).abs());
        radius.push(t);
        running.push(m);
    }
    let max_upto = |k: f64| -> f64 {
        let idx = radius.partition_point(|r| *r <= k);
        if idx == 0 {
            0.0
        } else {
            running[idx - 1]
        }
    };
    let at_horizon = m;
    if at_horizon <= ZERO_DISTANCE {
        return Ok(at_horizon);
    }
    let mut lo = 1.0 / horizon;
    if at_horizon < lo {
        return Err(Error::WidenHorizon { horizon });
    }
    let mut hi = at_horizon.max(lo);
    // h(ε) = max_{|t|≤1/ε} ρ − ε is non-increasing
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if max_upto(1.0 / mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSettings {
    pub epsilon: f64,
    /// Candidate τ range (0, scan_window].
    pub scan_window: f64,
    pub tau_step: f64,
    /// The sup over t is taken over |t| ≤ sup_horizon.
    pub sup_horizon: f64,
    pub t_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub epsilon: f64,
    /// Accepted (τ, sup distance) pairs, without the run of small shifts
    /// adjacent to 0.
    pub candidate_taus: Vec<(f64, f64)>,
    /// Largest gap between consecutive accepted τ, counting 0 and the window end.
    pub max_gap: f64,
    pub window: f64,
    pub sup_horizon: f64,
    /// At least two accepted τ and no gap longer than half the window.
    pub relatively_dense: bool,
}

/// sup_{|t|≤H} |φ(t + τ) − φ(t)| over all profiles, stopping once `limit` is reached.
fn shift_distance(profiles: &[&TimeProfile], tau: f64, ts: &[f64], limit: f64) -> f64 {
    let mut m: f64 = 0.0;
    for &t in ts {
        for p in profiles {
            m = m.max((p.eval(t + tau) - p.eval(t)).abs());
            if m >= limit {
                return m;
            }
        }
    }
    m
}

/// Jointly accepted ε-almost periods of the given profiles on the τ grid.
pub fn almost_periods(profiles: &[&TimeProfile], s: &ScanSettings) -> Result<RecurrenceReport> {
    if !(s.epsilon > 0.0 && s.scan_window > 0.0 && s.tau_step > 0.0 && s.sup_horizon >= 0.0 && s.t_step > 0.0) {
        return Err(Error::input("scan settings must be positive"));
    }
    let nt = (2.0 * s.sup_horizon / s.t_step).ceil() as usize;
    let ts: Vec<f64> = (0..=nt).map(|i| -s.sup_horizon + i as f64 * s.t_step).collect();
    let n_tau = (s.scan_window / s.tau_step).floor() as usize;
    let accepted: Vec<(f64, f64)> = (1..=n_tau)
        .into_par_iter()
        .filter_map(|j| {
            let tau = j as f64 * s.tau_step;
            let d = shift_distance(profiles, tau, &ts, s.epsilon);
            (d < s.epsilon).then_some((tau, d))
        })
        .collect();
    // shifts next to 0 pass by continuity alone
    let lead = accepted.iter().enumerate().take_while(|(k, a)| (a.0 - (k + 1) as f64 * s.tau_step).abs() < 0.5 * s.tau_step).count();
    let accepted = accepted[lead..].to_vec();
    let mut edges = vec![0.0];
    edges.extend(accepted.iter().map(|a| a.0));
    edges.push(s.scan_window);
    let max_gap = edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(RecurrenceReport {
        epsilon: s.epsilon,
        relatively_dense: accepted.len() >= 2 && max_gap <= s.scan_window / 2.0,
        candidate_taus: accepted,
        max_gap,
        window: s.scan_window,
        sup_horizon: s.sup_horizon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionalReport {
    pub tau: f64,
    pub times: Vec<f64>,
    pub beta: Vec<f64>,
    /// Mean β between two resamples of the pooled observations (null floor).
    pub bootstrap_error: Vec<f64>,
    pub bootstrap_sd: Vec<f64>,
    pub max_beta: f64,
    /// max_t β(t) / bootstrap_error(t).
    pub max_ratio: f64,
    /// Some t with β(t) > bootstrap_error(t) + 3·bootstrap_sd(t).
    pub detects_difference: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistributionalSettings {
    pub n_paths: usize,
    pub n_bootstrap: usize,
    /// Observed leading coordinates.
    pub n_observed: usize,
    pub pullback: PullbackSettings,
}

fn resample<R: Rng>(rng: &mut R, pool: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect()
}

/// β(law ξ(t), law ξ(t + τ)) over the grid, each with a bootstrap null floor.
pub fn distributional_almost_period_test(
    model: &SdeModel,
    tau: f64,
    t_grid: &[f64],
    settings: &DistributionalSettings,
    seed: u64,
) -> Result<DistributionalReport> {
    model.validate()?;
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("t_grid must be nonempty and increasing"));
    }
    let h = model_horizon(model, settings.pullback.tol)?;
    let mut obs_times: Vec<f64> = t_grid.iter().flat_map(|t| [*t, t + tau]).collect();
    obs_times.sort_by(f64::total_cmp);
    obs_times.dedup();
    let zero = vec![0.0; model.dim()];
    let k_obs = settings.n_observed.clamp(1, model.dim());
    let paths = map_paths(settings.n_paths, seed, |_, s| {
        let xs = bounded_at(model, &obs_times, h, &settings.pullback, &zero, s)?;
        Ok(xs.into_iter().map(|x| x[..k_obs].to_vec()).collect::<Vec<_>>())
    })?;
    let at = |t: f64| -> Vec<Vec<f64>> {
        let j = obs_times.partition_point(|x| *x < t);
        paths.iter().map(|p| p[j].clone()).collect()
    };
    let rows: Vec<Result<(f64, f64, f64)>> = t_grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let a = EmpiricalLaw::new(at(t))?;
            let b = EmpiricalLaw::new(at(t + tau))?;
            let beta = bl_distance(&a, &b)?;
            let pool: Vec<Vec<f64>> = a.samples.iter().chain(&b.samples).cloned().collect();
            let mut rng = rng_from(seed ^ 0xB007, i as u64);
            let null: Vec<f64> = (0..settings.n_bootstrap)
                .map(|_| {
                    let x = EmpiricalLaw::new(resample(&mut rng, &pool, a.len()))?;
                    let y = EmpiricalLaw::new(resample(&mut rng, &pool, b.len()))?;
                    bl_distance(&x, &y)
                })
                .collect::<Result<_>>()?;
            let ms = mean_se(&null);
            let sd = ms.se * (null.len() as f64).sqrt();
            Ok((beta, ms.mean, sd))
        })
        .collect();
    let rows: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let beta: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let floor: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let sd: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(DistributionalReport {
        tau,
        times: t_grid.to_vec(),
        max_beta: beta.iter().cloned().fold(0.0, f64::max),
        max_ratio: beta.iter().zip(&floor).map(|(b, f)| b / f).fold(0.0, f64::max),
        detects_difference: rows.iter().any(|(b, f, s)| *b > f + 3.0 * s),
        beta,
        bootstrap_error: floor,
        bootstrap_sd: sd,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftCouplingReport {
    pub tau: f64,
    pub times: Vec<f64>,
    /// E|ξ^τ(t) − ξ(t)|² per time.
    pub gap: Vec<MeanSe>,
    pub measured_sup_gap: f64,
    pub se_at_sup: f64,
    /// sup_t of the mean-square coefficient differences (f, g, F, G) along ξ.
    pub sup_i: [f64; 4],
    pub theoretical_bound: f64,
}

/// rate·E_x|J₁(x) − J₂(x)|² for a jump coefficient pair along one state.
fn jump_gap_sq(c: &JumpCoefficient, shifted: &JumpCoefficient, t: f64, y: &[f64], rate: f64, law: &MarkSampler, model: &SdeModel) -> f64 {
    if rate == 0.0 || c.coefficient.is_zero() {
        return 0.0;
    }
    let basis = model.basis.as_ref();
    let diff = |x: &[f64]| -> f64 {
        let a = c.eval(t, y, x, basis);
        let b = shifted.eval(t, y, x, basis);
        a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum()
    };
    if c.uses_mark {
        rate * law.norm_moment(2.0) * law.directions().iter().map(|(w, e)| w * diff(e)).sum::<f64>()
    } else {
        rate * diff(&[1.0])
    }
}

/// Same-noise gap between the bounded solutions of the τ-shifted and the
/// original coefficients, and the compatibility bound from the measured
/// coefficient differences.
pub fn shift_coupling_gap(
    model: &SdeModel,
    tau: f64,
    times: &[f64],
    n_paths: usize,
    pullback: &PullbackSettings,
    seed: u64,
) -> Result<ShiftCouplingReport> {
    model.validate()?;
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("times must be nonempty and increasing"));
    }
    let cond = crate::model::check_conditions(model);
    if !cond.cond_l.pass {
        return Err(Error::threshold(format!("condition (L) fails with slack {}", cond.cond_l.slack)));
    }
    let h = model_horizon(model, pullback.tol)?;
    let shifted = model.shifted(tau);
    let (a, b) = (times[0], *times.last().expect("nonempty"));
    let q = &model.wiener.mode_variances;
    let js = &model.jumps;
    let zero = vec![0.0; model.dim()];
    let per_path = map_paths(n_paths, seed, |_, s| {
        let noise = NoiseRealization::sample(&model.wiener, &model.jumps, (a - h, b.max(a + pullback.base_step)), pullback.base_step, s)?;
        let x = integrate_observed(model, &noise, a - h, &zero, pullback.max_step, times)?;
        let y = integrate_observed(&shifted, &noise, a - h, &zero, pullback.max_step, times)?;
        let mut gap = Vec::with_capacity(times.len());
        let mut coef: Vec<[f64; 4]> = Vec::with_capacity(times.len());
        for ((t, xi), yi) in times.iter().zip(&x).zip(&y) {
            gap.push(xi.iter().zip(yi).map(|(u, v)| (u - v).powi(2)).sum::<f64>());
            let d2 = |u: Vec<f64>, v: Vec<f64>| u.iter().zip(&v).map(|(p, r)| (p - r).powi(2)).sum::<f64>();
            let i1 = d2(shifted.drift(*t, xi), model.drift(*t, xi));
            let gs = shifted.diffusion(*t, xi);
            let gm = model.diffusion(*t, xi);
            let i2: f64 = gs.iter().zip(&gm).zip(q).map(|((u, v), qn)| qn * (u - v).powi(2)).sum();
            let i3 = jump_gap_sq(&model.big_f, &shifted.big_f, *t, xi, js.small_rate, &js.small_mark, model);
            let i4 = jump_gap_sq(&model.big_g, &shifted.big_g, *t, xi, js.large_rate, &js.large_mark, model);
            coef.push([i1, i2, i3, i4]);
        }
        Ok((gap, coef))
    })?;
    let gaps: Vec<Vec<f64>> = per_path.iter().map(|p| p.0.clone()).collect();
    let gap = column_stats(&gaps);
    let mut sup_i = [0.0f64; 4];
    for (k, s) in sup_i.iter_mut().enumerate() {
        let rows: Vec<Vec<f64>> = per_path.iter().map(|p| p.1.iter().map(|c| c[k]).collect()).collect();
        *s = column_stats(&rows).iter().map(|m| m.mean).fold(0.0, f64::max);
    }
    let (imax, sup) = gap
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, m)| if m.mean > acc.1 { (i, m.mean) } else { acc });
    let bound = compat_gap_bound(model.semigroup.k, model.semigroup.omega, model.lipschitz_l, model.b(), sup_i)?;
    Ok(ShiftCouplingReport {
        tau,
        times: times.to_vec(),
        measured_sup_gap: sup,
        se_at_sup: gap[imax].se,
        gap,
        sup_i,
        theoretical_bound: bound,
    })
}
