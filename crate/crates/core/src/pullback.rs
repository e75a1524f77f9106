//! Bounded solution by pullback: integrate from a far-past zero state with one
//! contiguous two-sided noise path and keep the window.

use serde::Serialize;

use crate::ensemble::{column_stats, map_paths, squared_norm, MeanSe};
use crate::error::{Error, Result};
use crate::integrator::{integrate, integrate_observed, SamplePath};
use crate::model::SdeModel;
use crate::noise::NoiseRealization;

/// Smallest T with 5K²·start_bound·e^{−rate·T} ≤ tol².
pub fn pullback_horizon(k: f64, rate: f64, start_bound: f64, tol: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::threshold(format!(
            "stability margin {rate} is not positive; the far past is not forgotten"
        )));
    }
    if !(tol > 0.0) || start_bound < 0.0 {
        return Err(Error::input("tol must be > 0 and start_bound >= 0"));
    }
    if start_bound == 0.0 {
        return Ok(0.0);
    }
    Ok(((5.0 * k * k * start_bound / (tol * tol)).ln() / rate).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PullbackSettings {
    pub tol: f64,
    pub max_step: f64,
    /// Spacing of the stored Wiener increments.
    pub base_step: f64,
}

impl PullbackSettings {
    pub fn new(tol: f64, max_step: f64) -> Self {
        PullbackSettings { tol, max_step, base_step: max_step }
    }
}

/// Pullback horizon for a model, with start bound r² (or 1 when the radius is undefined).
pub fn model_horizon(model: &SdeModel, tol: f64) -> Result<f64> {
    let r = model.constants().ok().and_then(|c| c.radius_r).unwrap_or(1.0);
    pullback_horizon(model.semigroup.k, model.margin(), (r * r).max(1e-300), tol)
}

fn far_past_noise(model: &SdeModel, window: (f64, f64), horizon: f64, s: &PullbackSettings, seed: u64) -> Result<NoiseRealization> {
    NoiseRealization::sample(&model.wiener, &model.jumps, (window.0 - horizon, window.1), s.base_step, seed)
}

/// Path of the bounded solution on the window.
pub fn bounded_solution(model: &SdeModel, window: (f64, f64), settings: &PullbackSettings, seed: u64) -> Result<SamplePath> {
    model.validate()?;
    let h = model_horizon(model, settings.tol)?;
    let noise = far_past_noise(model, window, h, settings, seed)?;
    let start = window.0 - h;
    let path = integrate(model, &noise, start, window.1, &vec![0.0; model.dim()], settings.max_step)?;
    Ok(path.restrict(window.0, window.1))
}

/// Bounded solution sampled at sorted times, started `horizon` before the first.
pub fn bounded_at(
    model: &SdeModel,
    times: &[f64],
    horizon: f64,
    settings: &PullbackSettings,
    y_start: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let (a, b) = (times[0], *times.last().expect("nonempty"));
    let noise = far_past_noise(model, (a, b.max(a + settings.base_step)), horizon, settings, seed)?;
    integrate_observed(model, &noise, a - horizon, y_start, settings.max_step, times)
}

/// Ensemble second moment E|ξ(t)|² on the grid.
pub fn second_moment_curve(
    model: &SdeModel,
    times: &[f64],
    settings: &PullbackSettings,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<MeanSe>> {
    model.validate()?;
    let h = model_horizon(model, settings.tol)?;
    let zero = vec![0.0; model.dim()];
    let rows = map_paths(n_paths, seed, |_, s| {
        let xs = bounded_at(model, times, h, settings, &zero, s)?;
        Ok(xs.iter().map(|x| squared_norm(x)).collect::<Vec<f64>>())
    })?;
    Ok(column_stats(&rows))
}

/// Same-noise squared gap E|Y_a(t) − Y_b(t)|² from two starts at `times[0]`.
pub fn forgetting_check(
    model: &SdeModel,
    times: &[f64],
    settings: &PullbackSettings,
    n_paths: usize,
    seed: u64,
    y0a: &[f64],
    y0b: &[f64],
) -> Result<Vec<MeanSe>> {
    if model.margin() <= 0.0 {
        return Err(Error::threshold("stability margin is not positive"));
    }
    let t0 = times[0];
    let t1 = *times.last().expect("nonempty");
    let rows = map_paths(n_paths, seed, |_, s| {
        let noise = NoiseRealization::sample(&model.wiener, &model.jumps, (t0, t1.max(t0 + settings.base_step)), settings.base_step, s)?;
        let a = integrate_observed(model, &noise, t0, y0a, settings.max_step, times)?;
        let b = integrate_observed(model, &noise, t0, y0b, settings.max_step, times)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum())
            .collect::<Vec<f64>>())
    })?;
    Ok(column_stats(&rows))
}
