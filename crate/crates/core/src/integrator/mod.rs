//! Jump-adapted exponential integrator for the mild solution on a diagonal
//! (modal) state space, plus the Galerkin build of the stochastic heat equation.

pub mod galerkin;

use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{heat_lipschitz_formula, Coefficient, JumpCoefficient, SdeModel, SemigroupSpec, StateMap};
use crate::noise::{JumpMeasureSpec, NoiseRealization, WienerSpec};
use crate::recurrence::profile::{Harmonic, Outer, TimeProfile};
use galerkin::{GalerkinSpec, SineBasis};

const BLOWUP_LEVEL: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpFlag {
    None,
    Small,
    Large,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub left_limits: Vec<Vec<f64>>,
    pub jump_flags: Vec<JumpFlag>,
}

impl SamplePath {
    fn start(t0: f64, y0: &[f64]) -> Self {
        SamplePath {
            times: vec![t0],
            values: vec![y0.to_vec()],
            left_limits: vec![y0.to_vec()],
            jump_flags: vec![JumpFlag::None],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> &[f64] {
        self.values.last().expect("path has a start point")
    }

    /// Restriction to times in [a, b].
    pub fn restrict(&self, a: f64, b: f64) -> SamplePath {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.times[i] >= a && self.times[i] <= b).collect();
        SamplePath {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            values: keep.iter().map(|&i| self.values[i].clone()).collect(),
            left_limits: keep.iter().map(|&i| self.left_limits[i].clone()).collect(),
            jump_flags: keep.iter().map(|&i| self.jump_flags[i]).collect(),
        }
    }

    /// `time,jump_flag,y0,...` keeping the first `modes` components.
    pub fn to_csv(&self, modes: usize) -> String {
        let m = modes.min(self.values.first().map_or(0, Vec::len));
        let mut s = String::from("time,jump_flag");
        for k in 0..m {
            let _ = write!(s, ",y{k}");
        }
        s.push('\n');
        for i in 0..self.len() {
            let flag = match self.jump_flags[i] {
                JumpFlag::None => "none",
                JumpFlag::Small => "small",
                JumpFlag::Large => "large",
            };
            let _ = write!(s, "{:.17e},{flag}", self.times[i]);
            for v in &self.values[i][..m] {
                let _ = write!(s, ",{v:.17e}");
            }
            s.push('\n');
        }
        s
    }
}

/// (1 − e^{−z})/z, stable near zero.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z / 2.0
    } else {
        -(-z).exp_m1() / z
    }
}

enum Event<'a> {
    Cut,
    Observe,
    Small(&'a [f64]),
    Large(&'a [f64]),
}

struct Stepper<'a> {
    model: &'a SdeModel,
    eig: &'a [f64],
}

impl Stepper<'_> {
    fn step(&self, t: f64, h: f64, y: &mut [f64], dw: &[f64]) -> Result<()> {
        if h <= 0.0 {
            return Ok(());
        }
        let drift = self.model.drift(t + h / 2.0, y);
        let comp = self.model.compensator(t, y);
        let diff = self.model.diffusion(t, y);
        for n in 0..y.len() {
            let z = self.eig[n] * h;
            let decay = (-z).exp();
            y[n] = decay * (y[n] + diff[n] * dw[n]) + h * phi1(z) * (drift[n] + comp[n]);
        }
        check_finite(t + h, y)
    }
}

fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite() && v.abs() < BLOWUP_LEVEL) {
        Ok(())
    } else {
        Err(Error::Blowup { time: t })
    }
}

fn check_start(model: &SdeModel, noise: &NoiseRealization, t0: f64, t1: f64, y0: &[f64], max_step: f64) -> Result<()> {
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::input("max_step must be positive"));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::input(format!("integration interval [{t0}, {t1}] is invalid")));
    }
    let (a, b) = noise.window;
    if t0 < a || t1 > b {
        return Err(Error::input(format!("noise window [{a}, {b}] does not cover [{t0}, {t1}]")));
    }
    if y0.len() != model.dim() || noise.dim() != model.dim() {
        return Err(Error::input("state, noise and model dimensions differ"));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("initial state has non-finite entries"));
    }
    Ok(())
}

/// Mild-solution path on [t0, t1] from Y(t0) = y0.
pub fn integrate(
    model: &SdeModel,
    noise: &NoiseRealization,
    t0: f64,
    t1: f64,
    y0: &[f64],
    max_step: f64,
) -> Result<SamplePath> {
    let mut path = SamplePath::start(t0, y0);
    run(model, noise, t0, t1, y0, max_step, &[], |t, left, value, flag| {
        path.times.push(t);
        path.left_limits.push(left.to_vec());
        path.values.push(value.to_vec());
        path.jump_flags.push(flag);
    })?;
    Ok(path)
}

/// States at the requested times (sorted, inside [t0, t1]); cheaper than a full path.
pub fn integrate_observed(
    model: &SdeModel,
    noise: &NoiseRealization,
    t0: f64,
    y0: &[f64],
    max_step: f64,
    observe: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if observe.windows(2).any(|w| w[1] < w[0]) || observe.first().is_some_and(|t| *t < t0) {
        return Err(Error::input("observation times must be sorted and not precede t0"));
    }
    let t1 = observe.last().copied().unwrap_or(t0);
    let mut out = Vec::with_capacity(observe.len());
    let mut k = 0;
    while k < observe.len() && observe[k] == t0 {
        out.push(y0.to_vec());
        k += 1;
    }
    let mut last_v = y0.to_vec();
    let tol = 1e-9 * max_step;
    run(model, noise, t0, t1, y0, max_step, observe, |t, _, value, _| {
        last_v.clear();
        last_v.extend_from_slice(value);
        while k < observe.len() && observe[k] <= t + tol {
            out.push(value.to_vec());
            k += 1;
        }
    })?;
    while out.len() < observe.len() {
        out.push(last_v.clone());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run<R>(
    model: &SdeModel,
    noise: &NoiseRealization,
    t0: f64,
    t1: f64,
    y0: &[f64],
    max_step: f64,
    extra_cuts: &[f64],
    mut record: R,
) -> Result<()>
where
    R: FnMut(f64, &[f64], &[f64], JumpFlag),
{
    check_start(model, noise, t0, t1, y0, max_step)?;
    let stepper = Stepper { model, eig: &model.semigroup.eigenvalues };
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(());
    }
    let base = &noise.base_times;
    let first = base.partition_point(|b| *b <= t0).saturating_sub(1);
    let mut si = noise.small_jumps.partition_point(|j| j.time <= t0);
    let mut li = noise.large_jumps.partition_point(|j| j.time <= t0);
    let mut ci = extra_cuts.partition_point(|c| *c <= t0);
    let mut events: Vec<(f64, Event)> = Vec::new();
    let mut cuts: Vec<f64> = Vec::new();
    for i in first..base.len() - 1 {
        let (a, b) = (base[i], base[i + 1]);
        if b <= t0 {
            continue;
        }
        if a >= t1 {
            break;
        }
        let lo = a.max(t0);
        let hi = b.min(t1);
        events.clear();
        // the part of the base interval before t0 is a leading cut
        if a < t0 {
            events.push((t0, Event::Cut));
        }
        while si < noise.small_jumps.len() && noise.small_jumps[si].time < hi {
            let j = &noise.small_jumps[si];
            events.push((j.time, Event::Small(&j.mark)));
            si += 1;
        }
        while li < noise.large_jumps.len() && noise.large_jumps[li].time < hi {
            let j = &noise.large_jumps[li];
            events.push((j.time, Event::Large(&j.mark)));
            li += 1;
        }
        while ci < extra_cuts.len() && extra_cuts[ci] < hi {
            events.push((extra_cuts[ci], Event::Observe));
            ci += 1;
        }
        let m = ((hi - lo) / max_step).ceil().max(1.0) as usize;
        for k in 1..m {
            events.push((lo + (hi - lo) * k as f64 / m as f64, Event::Cut));
        }
        if hi < b {
            events.push((hi, Event::Cut));
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        // an observation time that lands on an existing step point must not
        // split it, or the bridge draws would change
        let tol = 1e-9 * max_step;
        let mut kept = 0;
        for j in 0..events.len() {
            let t = events[j].0;
            let near = |u: f64| (u - t).abs() <= tol;
            let redundant = matches!(events[j].1, Event::Observe)
                && (near(a) || near(b) || (kept > 0 && near(events[kept - 1].0))
                    || events[j + 1..].iter().any(|e| !matches!(e.1, Event::Observe) && near(e.0)));
            if !redundant {
                events.swap(kept, j);
                kept += 1;
            }
        }
        events.truncate(kept);
        cuts.clear();
        cuts.extend(events.iter().map(|e| e.0));
        let pieces = noise.bridge(i, &cuts);
        // pieces[0] covers [a, cuts[0]]; pieces[k] covers [cuts[k-1], cuts[k]]
        let mut left = a;
        for (k, piece) in pieces.iter().enumerate() {
            let right = if k < events.len() { events[k].0 } else { b };
            if left >= t0 && right <= t1 && right > left {
                stepper.step(left, right - left, &mut y, piece)?;
            }
            if k < events.len() && right > t0 && right <= t1 {
                let before = y.clone();
                let flag = match events[k].1 {
                    Event::Cut | Event::Observe => JumpFlag::None,
                    Event::Small(x) => {
                        add(&mut y, &model.small_jump(right, &before, x));
                        JumpFlag::Small
                    }
                    Event::Large(x) => {
                        add(&mut y, &model.large_jump(right, &before, x));
                        JumpFlag::Large
                    }
                };
                check_finite(right, &y)?;
                record(right, &before, &y, flag);
            } else if k == events.len() && right > t0 && right <= t1 && right > left {
                record(right, &y, &y, JumpFlag::None);
            }
            left = right;
        }
    }
    Ok(())
}

fn add(y: &mut [f64], dy: &[f64]) {
    for (a, b) in y.iter_mut().zip(dy) {
        *a += b;
    }
}

/// Stochastic heat equation on (0,1) with Dirichlet conditions, truncated to
/// the first N sine modes. Q has eigenvalues q_scale·n^{−q_decay}.
pub fn build_heat_model(
    galerkin: GalerkinSpec,
    q_scale: f64,
    q_decay: f64,
    jumps: JumpMeasureSpec,
) -> Result<SdeModel> {
    let basis = SineBasis::new(galerkin)?;
    if !(q_scale.is_finite() && q_scale >= 0.0 && q_decay.is_finite()) {
        return Err(Error::input("Q scale must be >= 0 and decay finite"));
    }
    let n = galerkin.n_modes;
    let eigenvalues = basis.eigenvalues();
    let f = Coefficient::single(
        TimeProfile::QuasiPeriodic { offset: 0.0, harmonics: vec![Harmonic::cos(0.2, 1.0), Harmonic::sin(0.2, 2f64.sqrt())] },
        StateMap::Sin { c: 1.0 },
    )
    .collocated();
    let g = Coefficient::single(
        TimeProfile::LevitanComposite {
            amp: 1.0,
            outer: Outer::Sin,
            scale: 1.0,
            shift: 2.0,
            inner: vec![Harmonic::cos(1.0, 1.0), Harmonic::cos(1.0, 2f64.sqrt())],
        },
        StateMap::Linear { c: 1.0 },
    );
    let h = Coefficient::single(
        TimeProfile::LevitanComposite {
            amp: 1.0 / 3.0,
            outer: Outer::Identity,
            scale: 1.0,
            shift: 2.0,
            inner: vec![Harmonic::sin(1.0, 2f64.sqrt())],
        },
        StateMap::Cos { c: 1.0 },
    )
    .collocated();
    let wiener = WienerSpec::new((1..=n).map(|k| q_scale * (k as f64).powf(-q_decay)).collect());
    let p = 2.1;
    let lipschitz_l =
        heat_lipschitz_formula(wiener.sqrt_q_norm(), jumps.small_rate, jumps.large_rate, p);
    // |h(t,0,z)| ≤ |z|/3
    let a0 = [2.0, p]
        .iter()
        .map(|&q| {
            let s = (jumps.small_rate * jumps.small_mark.norm_moment(q)).powf(1.0 / q);
            let l = (jumps.large_rate * jumps.large_mark.norm_moment(q)).powf(1.0 / q);
            s.max(l) / 3.0
        })
        .fold(0.0, f64::max);
    let model = SdeModel {
        semigroup: SemigroupSpec { eigenvalues, k: 1.0, omega: PI * PI },
        f,
        g,
        big_f: JumpCoefficient::times_mark(h.clone()),
        big_g: JumpCoefficient::times_mark(h),
        wiener,
        jumps,
        a0,
        lipschitz_l,
        moment_p: p,
        basis: Some(basis),
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;
    use crate::noise::MarkSampler;
    use crate::seed::derive_seed;

    fn quiet_scalar(lambda: f64) -> SdeModel {
        let mut m = presets::linear_sin_forced(lambda);
        m.f = Coefficient::zero();
        m
    }

    fn noise_for(m: &SdeModel, window: (f64, f64), step: f64, seed: u64) -> NoiseRealization {
        NoiseRealization::sample(&m.wiener, &m.jumps, window, step, seed).unwrap()
    }

    #[test]
    fn linear_decay_is_exact() {
        let m = quiet_scalar(1.0);
        let n = noise_for(&m, (0.0, 1.0), 0.01, 1);
        let p = integrate(&m, &n, 0.0, 1.0, &[2.0], 1e-4).unwrap();
        assert!((p.terminal()[0] - 2.0 * (-1f64).exp()).abs() < 1e-8);
        assert!(p.times.windows(2).all(|w| w[1] > w[0]));
        assert!((p.times.last().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi1_limits() {
        assert_eq!(phi1(0.0), 1.0);
        assert!((phi1(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((phi1(1e-9) - (1.0 - 5e-10)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let m = quiet_scalar(1.0);
        let n = noise_for(&m, (0.0, 1.0), 0.1, 1);
        assert!(matches!(integrate(&m, &n, 0.0, 1.0, &[f64::NAN], 0.1), Err(Error::Input(_))));
        assert!(matches!(integrate(&m, &n, 0.0, 2.0, &[1.0], 0.1), Err(Error::Input(_))));
        assert!(matches!(integrate(&m, &n, 0.0, 1.0, &[1.0], 0.0), Err(Error::Input(_))));
    }

    #[test]
    fn blowup_reports_time() {
        let mut m = quiet_scalar(1.0);
        m.f = Coefficient::single(TimeProfile::constant(1e3), StateMap::Linear { c: 1.0 });
        let n = noise_for(&m, (0.0, 10.0), 0.1, 1);
        match integrate(&m, &n, 0.0, 10.0, &[1.0], 0.1) {
            Err(Error::Blowup { time }) => assert!(time > 0.0 && time <= 10.0),
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn jump_bookkeeping() {
        let m = presets::example61_forced(1.0, 1.0);
        let n = noise_for(&m, (-2.0, 6.0), 0.05, 17);
        let p = integrate(&m, &n, -1.0, 5.0, &[0.3], 0.01).unwrap();
        let mut jumps = 0;
        for i in 0..p.len() {
            match p.jump_flags[i] {
                JumpFlag::None => assert_eq!(p.values[i], p.left_limits[i]),
                flag => {
                    jumps += 1;
                    let t = p.times[i];
                    let list = if flag == JumpFlag::Small { &n.small_jumps } else { &n.large_jumps };
                    let j = list.iter().find(|j| j.time == t).unwrap();
                    let inc = if flag == JumpFlag::Small {
                        m.small_jump(t, &p.left_limits[i], &j.mark)
                    } else {
                        m.large_jump(t, &p.left_limits[i], &j.mark)
                    };
                    assert_eq!(p.values[i][0], p.left_limits[i][0] + inc[0]);
                }
            }
        }
        let expected = n.small_jumps.iter().chain(&n.large_jumps).filter(|j| j.time > -1.0 && j.time < 5.0).count();
        assert_eq!(jumps, expected);
        assert!(jumps > 0);
    }

    #[test]
    fn same_inputs_same_path() {
        let m = presets::example61_forced(1.0, 1.0);
        let n = noise_for(&m, (0.0, 3.0), 0.1, 5);
        assert_eq!(integrate(&m, &n, 0.0, 3.0, &[1.0], 0.01).unwrap(), integrate(&m, &n, 0.0, 3.0, &[1.0], 0.01).unwrap());
    }

    #[test]
    fn observed_matches_full_path() {
        let m = presets::example61_forced(1.0, 1.0);
        let n = noise_for(&m, (0.0, 3.0), 0.1, 5);
        let obs = [0.0, 0.5, 1.25, 3.0];
        let got = integrate_observed(&m, &n, 0.0, &[1.0], 0.01, &obs).unwrap();
        assert_eq!(got[0], vec![1.0]);
        let full = integrate(&m, &n, 0.0, 3.0, &[1.0], 0.01).unwrap();
        let at = |t: f64| full.values[full.times.iter().position(|s| (s - t).abs() < 1e-9).unwrap()][0];
        assert_eq!(got[1][0], at(0.5));
        assert_eq!(got[2][0], at(1.25));
        assert_eq!(got[3][0], full.terminal()[0]);
    }

    #[test]
    fn refinement_ratio_near_two() {
        // additive noise with a time-dependent linear drift: strong order one
        let mut m = presets::linear_sin_forced(1.0);
        m.f = Coefficient::single(TimeProfile::QuasiPeriodic { offset: 0.0, harmonics: vec![Harmonic::sin(0.5, 1.0)] }, StateMap::Linear { c: 1.0 });
        m.g = Coefficient::single(TimeProfile::constant(0.3), StateMap::Const { c: 1.0 });
        m.wiener = WienerSpec::new(vec![1.0]);
        let steps = [0.08, 0.04, 0.02, 0.01];
        let mut diffs = [0.0; 3];
        for s in 0..200 {
            let n = noise_for(&m, (0.0, 4.0), 0.08, derive_seed(99, s));
            let ends: Vec<f64> = steps.iter().map(|h| integrate(&m, &n, 0.0, 4.0, &[1.0], *h).unwrap().terminal()[0]).collect();
            for k in 0..3 {
                diffs[k] += (ends[k] - ends[k + 1]).powi(2);
            }
        }
        for k in 0..2 {
            let ratio = (diffs[k] / diffs[k + 1]).sqrt();
            assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn heat_build_spectrum_and_constants() {
        let m = build_heat_model(GalerkinSpec { n_modes: 8, collocation_points: 32 }, 0.01, 2.0, JumpMeasureSpec::none()).unwrap();
        assert_eq!(m.semigroup.omega, PI * PI);
        assert_eq!(m.semigroup.k, 1.0);
        assert!((m.f.lipschitz_bound() - 0.4).abs() < 1e-15);
        assert_eq!(m.g.lipschitz_bound(), 1.0);
        assert!((m.big_g.coefficient.lipschitz_bound() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.lipschitz_l, 0.4);
    }

    #[test]
    fn heat_single_mode_decay() {
        let mut m = build_heat_model(GalerkinSpec { n_modes: 1, collocation_points: 8 }, 0.0, 2.0, JumpMeasureSpec::none()).unwrap();
        m.f = Coefficient::zero();
        let n = noise_for(&m, (0.0, 0.5), 0.01, 3);
        let p = integrate(&m, &n, 0.0, 0.5, &[1.0], 1e-5).unwrap();
        let exact = (-PI * PI * 0.5).exp();
        assert!(((p.terminal()[0] - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn heat_zero_noise_decays_in_every_mode() {
        let m = build_heat_model(GalerkinSpec { n_modes: 4, collocation_points: 16 }, 0.0, 2.0, JumpMeasureSpec::none()).unwrap();
        let n = noise_for(&m, (0.0, 3.0), 0.1, 3);
        let p = integrate(&m, &n, 0.0, 3.0, &[1.0, -0.5, 0.3, 0.2], 1e-3).unwrap();
        assert!(p.terminal().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn heat_jumps_are_finite_rank() {
        let jumps = JumpMeasureSpec {
            small_rate: 0.5,
            small_mark: MarkSampler::FiniteRank {
                mode_weights: vec![1.0, 1.0, 0.0],
                radius: Box::new(MarkSampler::UniformShell { lo: 0.2, hi: 1.0, symmetric: true }),
            },
            truncation_delta: 0.2,
            large_rate: 0.5,
            large_mark: MarkSampler::FiniteRank {
                mode_weights: vec![1.0, 0.0, 0.0],
                radius: Box::new(MarkSampler::PointMass { value: 1.0 }),
            },
        };
        let m = build_heat_model(GalerkinSpec { n_modes: 3, collocation_points: 24 }, 0.01, 2.0, jumps).unwrap();
        let n = noise_for(&m, (0.0, 10.0), 0.1, 8);
        let p = integrate(&m, &n, 0.0, 10.0, &[0.1, 0.0, 0.0], 1e-2).unwrap();
        assert!(p.values.iter().flatten().all(|v| v.is_finite()));
        assert!(p.jump_flags.iter().any(|f| *f != JumpFlag::None));
    }
}
