//! Closed registry of jump-mark laws with analytically known moments.

use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const QUAD_NODES: usize = 64;

struct Rules {
    legendre: GaussLegendre,
    laguerre: GaussLaguerre,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        legendre: GaussLegendre::new(QUAD_NODES).expect("degree >= 2"),
        laguerre: GaussLaguerre::new(QUAD_NODES, 0.0).expect("degree >= 2"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarkSampler {
    /// |x| uniform on [lo, hi); sign ± with equal odds when `symmetric`.
    UniformShell { lo: f64, hi: f64, symmetric: bool },
    PointMass { value: f64 },
    /// |x| = lo + Exp(rate).
    TruncatedExpTail { lo: f64, rate: f64, symmetric: bool },
    /// x = s·e_J with J drawn from `mode_weights` (normalized) and s from `radius`.
    FiniteRank { mode_weights: Vec<f64>, radius: Box<MarkSampler> },
}

impl MarkSampler {
    /// Dimension of a sampled mark.
    pub fn dim(&self) -> usize {
        match self {
            MarkSampler::FiniteRank { mode_weights, .. } => mode_weights.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MarkSampler::UniformShell { lo, hi, .. } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return Err(Error::input("uniform shell needs 0 <= lo < hi"));
                }
            }
            MarkSampler::PointMass { value } => {
                if !value.is_finite() {
                    return Err(Error::input("point mass must be finite"));
                }
            }
            MarkSampler::TruncatedExpTail { lo, rate, .. } => {
                if !(lo.is_finite() && *lo >= 0.0 && rate.is_finite() && *rate > 0.0) {
                    return Err(Error::input("exponential tail needs lo >= 0 and rate > 0"));
                }
            }
            MarkSampler::FiniteRank { mode_weights, radius } => {
                if mode_weights.is_empty()
                    || mode_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
                    || mode_weights.iter().sum::<f64>() <= 0.0
                {
                    return Err(Error::input("finite-rank marks need nonnegative weights with positive sum"));
                }
                if matches!(**radius, MarkSampler::FiniteRank { .. }) {
                    return Err(Error::input("finite-rank radius must be a scalar law"));
                }
                radius.validate()?;
            }
        }
        Ok(())
    }

    /// Smallest and largest possible |x| (the upper end may be excluded or infinite).
    pub fn norm_support(&self) -> (f64, f64) {
        match self {
            MarkSampler::UniformShell { lo, hi, .. } => (*lo, *hi),
            MarkSampler::PointMass { value } => (value.abs(), value.abs()),
            MarkSampler::TruncatedExpTail { lo, .. } => (*lo, f64::INFINITY),
            MarkSampler::FiniteRank { radius, .. } => radius.norm_support(),
        }
    }

    /// Whether the upper end of `norm_support` is attained.
    fn upper_attained(&self) -> bool {
        match self {
            MarkSampler::UniformShell { .. } | MarkSampler::TruncatedExpTail { .. } => false,
            MarkSampler::PointMass { .. } => true,
            MarkSampler::FiniteRank { radius, .. } => radius.upper_attained(),
        }
    }

    /// Support check against a shell `lo <= |x| < hi` (`hi` may be infinite).
    pub fn fits_shell(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.norm_support();
        let upper_ok = if self.upper_attained() { b < hi } else { b <= hi };
        a >= lo && upper_ok
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            MarkSampler::FiniteRank { mode_weights, radius } => {
                let total: f64 = mode_weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut j = mode_weights.len() - 1;
                for (i, w) in mode_weights.iter().enumerate() {
                    if u < *w {
                        j = i;
                        break;
                    }
                    u -= w;
                }
                let s = radius.sample_scalar(rng);
                let mut x = vec![0.0; mode_weights.len()];
                x[j] = s;
                x
            }
            _ => vec![self.sample_scalar(rng)],
        }
    }

    fn sample_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sign = |rng: &mut R, symmetric: bool| {
            if symmetric && rng.random::<bool>() {
                -1.0
            } else {
                1.0
            }
        };
        match self {
            MarkSampler::UniformShell { lo, hi, symmetric } => {
                let m = lo + (hi - lo) * rng.random::<f64>();
                sign(rng, *symmetric) * m
            }
            MarkSampler::PointMass { value } => *value,
            MarkSampler::TruncatedExpTail { lo, rate, symmetric } => {
                let e: f64 = Exp::new(*rate).expect("validated rate").sample(rng);
                sign(rng, *symmetric) * (lo + e)
            }
            MarkSampler::FiniteRank { .. } => unreachable!("vector law"),
        }
    }

    /// E|x|^q in closed form.
    pub fn norm_moment(&self, q: f64) -> f64 {
        match self {
            MarkSampler::UniformShell { lo, hi, .. } => {
                (hi.powf(q + 1.0) - lo.powf(q + 1.0)) / ((q + 1.0) * (hi - lo))
            }
            MarkSampler::PointMass { value } => value.abs().powf(q),
            MarkSampler::TruncatedExpTail { lo, rate, .. } => {
                if q == 0.0 {
                    return 1.0;
                }
                let x = rate * lo;
                if x == 0.0 {
                    gamma(q + 1.0) / rate.powf(q)
                } else {
                    // rate^{-q} e^{x} Γ(q+1, x)
                    x.exp() * gamma(q + 1.0) * gamma_ur(q + 1.0, x) / rate.powf(q)
                }
            }
            MarkSampler::FiniteRank { radius, .. } => radius.norm_moment(q),
        }
    }

    /// Unit directions e_J with their probabilities; every mark is s·e_J with
    /// |s| distributed as `norm_moment` describes.
    pub fn directions(&self) -> Vec<(f64, Vec<f64>)> {
        match self {
            MarkSampler::FiniteRank { mode_weights, .. } => {
                let total: f64 = mode_weights.iter().sum();
                let d = mode_weights.len();
                mode_weights
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(j, w)| {
                        let mut e = vec![0.0; d];
                        e[j] = 1.0;
                        (w / total, e)
                    })
                    .collect()
            }
            _ => vec![(1.0, vec![1.0])],
        }
    }

    /// Mean mark vector.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            MarkSampler::UniformShell { lo, hi, symmetric } => {
                vec![if *symmetric { 0.0 } else { 0.5 * (lo + hi) }]
            }
            MarkSampler::PointMass { value } => vec![*value],
            MarkSampler::TruncatedExpTail { lo, rate, symmetric } => {
                vec![if *symmetric { 0.0 } else { lo + 1.0 / rate }]
            }
            MarkSampler::FiniteRank { mode_weights, radius } => {
                let total: f64 = mode_weights.iter().sum();
                let m = radius.mean()[0];
                mode_weights.iter().map(|w| m * w / total).collect()
            }
        }
    }

    /// E[h(x)] by fixed-node Gauss-Legendre quadrature against the mark law.
    pub fn expectation<H>(&self, out_dim: usize, mut h: H) -> Vec<f64>
    where
        H: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut acc = vec![0.0; out_dim];
        self.accumulate(rules(), 1.0, &mut h, &mut acc);
        acc
    }

    fn accumulate(&self, rules: &Rules, weight: f64, h: &mut dyn FnMut(&[f64]) -> Vec<f64>, acc: &mut [f64]) {
        let mut add = |x: &[f64], w: f64, acc: &mut [f64]| {
            for (a, v) in acc.iter_mut().zip(h(x)) {
                *a += w * v;
            }
        };
        match self {
            MarkSampler::PointMass { value } => add(&[*value], weight, acc),
            MarkSampler::UniformShell { lo, hi, symmetric } => {
                for &(node, w) in rules.legendre.as_node_weight_pairs() {
                    let m = lo + 0.5 * (node + 1.0) * (hi - lo);
                    let w = weight * 0.5 * w;
                    if *symmetric {
                        add(&[m], 0.5 * w, acc);
                        add(&[-m], 0.5 * w, acc);
                    } else {
                        add(&[m], w, acc);
                    }
                }
            }
            MarkSampler::TruncatedExpTail { lo, rate, symmetric } => {
                // |x| = lo + u/rate with u ~ Exp(1)
                for &(u, w) in rules.laguerre.as_node_weight_pairs() {
                    let m = lo + u / rate;
                    let w = weight * w;
                    if *symmetric {
                        add(&[m], 0.5 * w, acc);
                        add(&[-m], 0.5 * w, acc);
                    } else {
                        add(&[m], w, acc);
                    }
                }
            }
            MarkSampler::FiniteRank { mode_weights, radius } => {
                let total: f64 = mode_weights.iter().sum();
                let d = mode_weights.len();
                for (j, wj) in mode_weights.iter().enumerate() {
                    if *wj == 0.0 {
                        continue;
                    }
                    let mut lift = |s: &[f64]| {
                        let mut x = vec![0.0; d];
                        x[j] = s[0];
                        h(&x)
                    };
                    radius.accumulate(rules, weight * wj / total, &mut lift, acc);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn uniform_shell_moments() {
        let m = MarkSampler::UniformShell { lo: 0.2, hi: 1.0, symmetric: false };
        assert!((m.norm_moment(1.0) - 0.6).abs() < 1e-15);
        assert!((m.norm_moment(2.0) - (1.0 - 0.008) / 2.4).abs() < 1e-15);
        assert_eq!(m.mean(), vec![0.6]);
    }

    #[test]
    fn exp_tail_integer_moments() {
        // E(lo+E)^2 = lo^2 + 2 lo/rate + 2/rate^2
        let m = MarkSampler::TruncatedExpTail { lo: 1.0, rate: 2.0, symmetric: false };
        assert!((m.norm_moment(2.0) - 2.5).abs() < 1e-12);
        assert!((m.norm_moment(1.0) - 1.5).abs() < 1e-12);
        let lo3 = 1.0 + 3.0 * 0.5 + 6.0 * 0.25 + 6.0 * 0.125;
        assert!((m.norm_moment(3.0) - lo3).abs() < 1e-11);
    }

    #[test]
    fn quadrature_reproduces_moments() {
        let laws = [
            MarkSampler::UniformShell { lo: 0.1, hi: 0.9, symmetric: true },
            MarkSampler::TruncatedExpTail { lo: 1.0, rate: 3.0, symmetric: false },
            MarkSampler::FiniteRank {
                mode_weights: vec![1.0, 3.0],
                radius: Box::new(MarkSampler::UniformShell { lo: 0.5, hi: 1.0, symmetric: false }),
            },
        ];
        for law in &laws {
            let e = law.expectation(1, |x| vec![x.iter().map(|v| v * v).sum()]);
            assert!((e[0] - law.norm_moment(2.0)).abs() < 1e-9, "{law:?}");
            let mean = law.expectation(law.dim(), |x| x.to_vec());
            for (a, b) in mean.iter().zip(law.mean()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn samples_respect_support() {
        let mut rng = rng_from(3, 0);
        let small = MarkSampler::UniformShell { lo: 0.25, hi: 1.0, symmetric: true };
        let large = MarkSampler::TruncatedExpTail { lo: 1.0, rate: 1.0, symmetric: true };
        assert!(small.fits_shell(0.25, 1.0));
        assert!(large.fits_shell(1.0, f64::INFINITY));
        assert!(!MarkSampler::PointMass { value: 1.0 }.fits_shell(0.1, 1.0));
        for _ in 0..10_000 {
            let x = small.sample(&mut rng)[0].abs();
            assert!((0.25..1.0).contains(&x));
            assert!(large.sample(&mut rng)[0].abs() >= 1.0);
        }
    }

    #[test]
    fn finite_rank_marks_are_axis_aligned() {
        let mut rng = rng_from(5, 1);
        let law = MarkSampler::FiniteRank {
            mode_weights: vec![0.0, 1.0, 1.0],
            radius: Box::new(MarkSampler::PointMass { value: 0.5 }),
        };
        for _ in 0..100 {
            let x = law.sample(&mut rng);
            assert_eq!(x.len(), 3);
            assert_eq!(x[0], 0.0);
            assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);
        }
    }
}
