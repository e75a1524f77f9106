//! Two-sided Lévy noise in Lévy-Itô form: mode-wise Q-Wiener increments,
//! marked Poisson point sets for small (|x| < 1) and large (|x| ≥ 1) jumps,
//! and the small-jump compensator drift.
//!
//! Times t ≥ 0 are driven by a forward stream and times t < 0 by an
//! independent stream run backwards from the origin, L(t) = −L₂(−t).

mod marks;

pub use marks::MarkSampler;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerSpec {
    /// Covariance eigenvalues q_n of Q, one per mode.
    pub mode_variances: Vec<f64>,
    /// Constant drift `a` of the Lévy-Itô decomposition; folded into f.
    pub drift_a: Vec<f64>,
}

impl WienerSpec {
    pub fn new(mode_variances: Vec<f64>) -> Self {
        let d = mode_variances.len();
        WienerSpec { mode_variances, drift_a: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.mode_variances.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.mode_variances.len() != dim || self.drift_a.len() != dim {
            return Err(Error::input(format!(
                "Wiener spec has {} variances and {} drifts, model dimension is {dim}",
                self.mode_variances.len(),
                self.drift_a.len()
            )));
        }
        if self.mode_variances.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(Error::input("mode variances must be finite and nonnegative"));
        }
        if self.drift_a.iter().any(|a| !a.is_finite()) {
            return Err(Error::input("drift must be finite"));
        }
        Ok(())
    }

    /// ‖Q^{1/2}‖ in operator norm.
    pub fn sqrt_q_norm(&self) -> f64 {
        self.mode_variances.iter().fold(0.0f64, |m, q| m.max(*q)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpMeasureSpec {
    /// λ_s = ν({δ ≤ |x| < 1}).
    pub small_rate: f64,
    pub small_mark: MarkSampler,
    pub truncation_delta: f64,
    /// b = ν({|x| ≥ 1}).
    pub large_rate: f64,
    pub large_mark: MarkSampler,
}

impl JumpMeasureSpec {
    /// No jumps at all.
    pub fn none() -> Self {
        JumpMeasureSpec {
            small_rate: 0.0,
            small_mark: MarkSampler::UniformShell { lo: 0.5, hi: 1.0, symmetric: true },
            truncation_delta: 0.5,
            large_rate: 0.0,
            large_mark: MarkSampler::PointMass { value: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.small_rate.is_finite() && self.small_rate >= 0.0) {
            return Err(Error::input("small_rate must be finite and >= 0"));
        }
        if !(self.large_rate.is_finite() && self.large_rate >= 0.0) {
            return Err(Error::input("large_rate b must be finite and >= 0"));
        }
        if !(self.truncation_delta > 0.0 && self.truncation_delta < 1.0) {
            return Err(Error::input("truncation_delta must lie in (0,1)"));
        }
        self.small_mark.validate()?;
        self.large_mark.validate()?;
        if self.small_rate > 0.0 && !self.small_mark.fits_shell(self.truncation_delta, 1.0) {
            return Err(Error::input("small marks must satisfy delta <= |x| < 1"));
        }
        if self.large_rate > 0.0 && !self.large_mark.fits_shell(1.0, f64::INFINITY) {
            return Err(Error::input("large marks must satisfy |x| >= 1"));
        }
        Ok(())
    }

    pub fn mark_moment_2_small(&self) -> f64 {
        self.small_mark.norm_moment(2.0)
    }

    pub fn mark_moment_2_large(&self) -> f64 {
        self.large_mark.norm_moment(2.0)
    }

    pub fn mark_moment_p_large(&self, p: f64) -> f64 {
        self.large_mark.norm_moment(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub mark: Vec<f64>,
}

/// Increments over each interval of `grid`. Intervals may have zero length.
pub fn sample_wiener_increments(spec: &WienerSpec, grid: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    check_grid(grid)?;
    let d = spec.dim();
    let n = grid.len().saturating_sub(1);
    let mut out = vec![vec![0.0; d]; n];
    let mut fwd = rng_from(seed, 1);
    let mut bwd = rng_from(seed, 2);
    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let len = b - a.max(0.0);
        if b > 0.0 && len > 0.0 {
            add_gaussian(&mut fwd, &spec.mode_variances, len, &mut out[i]);
        }
    }
    for i in (0..n).rev() {
        let (a, b) = (grid[i], grid[i + 1]);
        let len = b.min(0.0) - a;
        if a < 0.0 && len > 0.0 {
            add_gaussian(&mut bwd, &spec.mode_variances, len, &mut out[i]);
        }
    }
    Ok(out)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::input("grid contains non-finite times"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::input(format!("grid not monotone: {} follows {}", w[1], w[0])));
    }
    Ok(())
}

fn add_gaussian<R: Rng>(rng: &mut R, q: &[f64], len: f64, out: &mut [f64]) {
    for (o, qn) in out.iter_mut().zip(q) {
        let z: f64 = StandardNormal.sample(rng);
        *o += (qn * len).sqrt() * z;
    }
}

/// Small and large jumps inside the open window, each list time-ordered.
pub fn sample_jumps(spec: &JumpMeasureSpec, window: (f64, f64), seed: u64) -> Result<(Vec<Jump>, Vec<Jump>)> {
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::input(format!("jump window [{t0}, {t1}] is empty")));
    }
    let small = sample_marked_points(spec.small_rate, &spec.small_mark, window, seed, 3);
    let large = sample_marked_points(spec.large_rate, &spec.large_mark, window, seed, 5);
    Ok((small, large))
}

fn sample_marked_points(rate: f64, law: &MarkSampler, window: (f64, f64), seed: u64, stream: u64) -> Vec<Jump> {
    let (t0, t1) = window;
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    // forward piece [max(t0,0), t1], backward piece [t0, min(t1,0)] run from its right end
    let pieces = [(t0.max(0.0), t1, stream, false), (t0, t1.min(0.0), stream + 1, true)];
    for (a, b, s, reversed) in pieces {
        if b <= a {
            continue;
        }
        let mut rng = rng_from(seed, s);
        let count = Poisson::new(rate * (b - a)).expect("positive mean").sample(&mut rng) as usize;
        for _ in 0..count {
            let time = loop {
                let u: f64 = rng.random();
                let t = if reversed { b - (b - a) * u } else { a + (b - a) * u };
                if t > t0 && t < t1 {
                    break t;
                }
            };
            out.push(Jump { time, mark: law.sample(&mut rng) });
        }
    }
    out.sort_by(|x, y| x.time.total_cmp(&y.time));
    out
}

/// A coefficient evaluated against jump marks.
pub trait MarkFunction {
    fn eval(&self, t: f64, y: &[f64], mark: &[f64]) -> Vec<f64>;

    /// True when the value is affine in the mark, so that E[F(t,Y,x)] = F(t,Y,E[x]).
    fn affine_in_mark(&self) -> bool {
        false
    }
}

impl<F> MarkFunction for F
where
    F: Fn(f64, &[f64], &[f64]) -> Vec<f64>,
{
    fn eval(&self, t: f64, y: &[f64], mark: &[f64]) -> Vec<f64> {
        self(t, y, mark)
    }
}

/// −λ_s E_mark[F(t, Y, mark)].
pub fn small_jump_compensator<M: MarkFunction + ?Sized>(spec: &JumpMeasureSpec, f: &M, t: f64, y: &[f64]) -> Vec<f64> {
    if spec.small_rate == 0.0 {
        return vec![0.0; y.len()];
    }
    let mean = if f.affine_in_mark() {
        f.eval(t, y, &spec.small_mark.mean())
    } else {
        spec.small_mark.expectation(y.len(), |x| f.eval(t, y, x))
    };
    mean.into_iter().map(|v| -spec.small_rate * v).collect()
}

/// A frozen noise path: Wiener increments on a base grid plus both jump lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub window: (f64, f64),
    pub seed: u64,
    pub base_times: Vec<f64>,
    pub wiener_increments: Vec<Vec<f64>>,
    pub small_jumps: Vec<Jump>,
    pub large_jumps: Vec<Jump>,
    mode_variances: Vec<f64>,
}

impl NoiseRealization {
    pub fn sample(
        wiener: &WienerSpec,
        jumps: &JumpMeasureSpec,
        window: (f64, f64),
        base_step: f64,
        seed: u64,
    ) -> Result<Self> {
        let (t0, t1) = window;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::input(format!("noise window [{t0}, {t1}] is empty")));
        }
        if !(base_step.is_finite() && base_step > 0.0) {
            return Err(Error::input("base_step must be positive"));
        }
        let base_times = anchored_grid(t0, t1, base_step);
        let wiener_increments = sample_wiener_increments(wiener, &base_times, derive_seed(seed, 8))?;
        let (small_jumps, large_jumps) = sample_jumps(jumps, window, derive_seed(seed, 9))?;
        Ok(NoiseRealization {
            window,
            seed,
            base_times,
            wiener_increments,
            small_jumps,
            large_jumps,
            mode_variances: wiener.mode_variances.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mode_variances.len()
    }

    /// Wiener increments over the pieces of base interval `i` cut at the
    /// interior points `cuts` (sorted). Pieces sum to the base increment.
    ///
    /// W is fixed at every dyadic point of the interval by a Lévy midpoint
    /// construction keyed on (seed, i, node), so refining the cuts never
    /// changes the path; between dyadic points of depth `BRIDGE_DEPTH` it is
    /// linear.
    pub fn bridge(&self, i: usize, cuts: &[f64]) -> Vec<Vec<f64>> {
        let (a, b) = (self.base_times[i], self.base_times[i + 1]);
        let total = &self.wiener_increments[i];
        if cuts.is_empty() {
            return vec![total.clone()];
        }
        let us: Vec<f64> = cuts.iter().map(|c| ((c - a) / (b - a)).clamp(0.0, 1.0)).collect();
        let mut vals = vec![Vec::new(); us.len()];
        let node = Node { key: derive_seed(derive_seed(self.seed, 7), i as u64), id: 1, depth: 0, lo: 0.0, hi: 1.0 };
        let zero = vec![0.0; total.len()];
        self.levy_fill(node, b - a, &zero, total, &us, &mut vals);
        let mut out = Vec::with_capacity(us.len() + 1);
        let mut prev = zero;
        for v in vals {
            out.push(v.iter().zip(&prev).map(|(x, p)| x - p).collect());
            prev = v;
        }
        out.push(total.iter().zip(&prev).map(|(x, p)| x - p).collect());
        out
    }

    fn levy_fill(&self, node: Node, len: f64, w_lo: &[f64], w_hi: &[f64], us: &[f64], out: &mut [Vec<f64>]) {
        if us.is_empty() {
            return;
        }
        let span = node.hi - node.lo;
        if node.depth == BRIDGE_DEPTH {
            for (u, o) in us.iter().zip(out.iter_mut()) {
                let s = if span > 0.0 { (u - node.lo) / span } else { 0.0 };
                *o = w_lo.iter().zip(w_hi).map(|(l, h)| l + s * (h - l)).collect();
            }
            return;
        }
        let mid = 0.5 * (node.lo + node.hi);
        let mut rng = rng_from(node.key, node.id);
        let w_mid: Vec<f64> = w_lo
            .iter()
            .zip(w_hi)
            .zip(&self.mode_variances)
            .map(|((l, h), q)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.5 * (l + h) + (q * len * span / 4.0).max(0.0).sqrt() * z
            })
            .collect();
        let left = us.partition_point(|u| *u < mid);
        let right = us.partition_point(|u| *u <= mid);
        for o in &mut out[left..right] {
            o.clone_from(&w_mid);
        }
        let (out_l, rest) = out.split_at_mut(left);
        let out_r = &mut rest[right - left..];
        let child = |id: u64, lo: f64, hi: f64| Node { key: node.key, id, depth: node.depth + 1, lo, hi };
        self.levy_fill(child(2 * node.id, node.lo, mid), len, w_lo, &w_mid, &us[..left], out_l);
        self.levy_fill(child(2 * node.id + 1, mid, node.hi), len, &w_mid, w_hi, &us[right..], out_r);
    }

    /// Debug dump: `time,kind,components...` for Wiener increments (stamped at
    /// interval start) and both jump lists.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,kind,components\n");
        for (t, inc) in self.base_times.iter().zip(&self.wiener_increments) {
            let _ = writeln!(s, "{t:.17e},wiener,{}", join(inc));
        }
        for j in &self.small_jumps {
            let _ = writeln!(s, "{:.17e},small,{}", j.time, join(&j.mark));
        }
        for j in &self.large_jumps {
            let _ = writeln!(s, "{:.17e},large,{}", j.time, join(&j.mark));
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(";")
}

/// Endpoints plus the multiples of `h` strictly inside (t0, t1).
pub(crate) fn anchored_grid(t0: f64, t1: f64, h: f64) -> Vec<f64> {
    let mut g = vec![t0];
    let tol = 1e-9 * h;
    let mut k = (t0 / h).floor() as i64 + 1;
    loop {
        let t = k as f64 * h;
        if t >= t1 - tol {
            break;
        }
        if t > t0 + tol {
            g.push(t);
        }
        k += 1;
    }
    g.push(t1);
    g
}

const BRIDGE_DEPTH: u32 = 30;

#[derive(Clone, Copy)]
struct Node {
    key: u64,
    id: u64,
    depth: u32,
    lo: f64,
    hi: f64,
}
