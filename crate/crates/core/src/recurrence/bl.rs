//! Bounded-Lipschitz (Dudley) distance between empirical laws on the line.
//!
//! For 1-D supports the pairwise Lipschitz constraints reduce to adjacent
//! sorted points. With s the Lipschitz budget and m = 1 − s the sup budget,
//! the optimum is (1 − s)·V(s/(1 − s)) where V(κ) maximizes Σ wᵢgᵢ over
//! |gᵢ| ≤ 1, |gᵢ₊₁ − gᵢ| ≤ κ dᵢ. V is computed exactly by dynamic programming
//! over concave piecewise-linear value functions; the outer problem is
//! concave in s and solved by golden-section search.

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

const GOLDEN_ITERS: usize = 90;

/// Uniformly weighted samples of a fixed set of observation functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub samples: Vec<Vec<f64>>,
}

impl EmpiricalLaw {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::input("empirical law has no samples"));
        };
        let d = first.len();
        if d == 0 || samples.iter().any(|s| s.len() != d) {
            return Err(Error::input("samples must share one positive dimension"));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("samples must be finite"));
        }
        Ok(EmpiricalLaw { samples })
    }

    pub fn scalar(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|x| vec![*x]).collect())
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[k]).collect()
    }
}

/// β(μ, ν); multi-dimensional observations are compared coordinate-wise and
/// the largest coordinate distance is returned.
pub fn bl_distance(mu: &EmpiricalLaw, nu: &EmpiricalLaw) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::input("empirical law has no samples"));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::input("laws observe different dimensions"));
    }
    Ok((0..mu.dim())
        .map(|k| bl_distance_1d(&mu.coordinate(k), &nu.coordinate(k)))
        .fold(0.0, f64::max))
}

/// β between the uniform empirical laws of two scalar samples.
pub fn bl_distance_1d(xs: &[f64], ys: &[f64]) -> f64 {
    let (points, weights) = signed_support(xs, ys);
    bl_signed(&points, &weights)
}

/// Sorted union support with net weights μ − ν (equal points merged).
pub fn signed_support(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wx = 1.0 / xs.len() as f64;
    let wy = 1.0 / ys.len() as f64;
    let mut all: Vec<(f64, f64)> = xs.iter().map(|x| (*x, wx)).chain(ys.iter().map(|y| (*y, -wy))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points: Vec<f64> = Vec::with_capacity(all.len());
    let mut weights: Vec<f64> = Vec::with_capacity(all.len());
    for (x, w) in all {
        if points.last() == Some(&x) {
            *weights.last_mut().expect("nonempty") += w;
        } else {
            points.push(x);
            weights.push(w);
        }
    }
    (points, weights)
}

/// sup Σ wᵢ f(xᵢ) over ‖f‖_BL ≤ 1 for sorted points.
pub fn bl_signed(points: &[f64], weights: &[f64]) -> f64 {
    if points.is_empty() || weights.iter().all(|w| *w == 0.0) {
        return 0.0;
    }
    let gaps: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
    let value = |s: f64| -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        (1.0 - s) * box_lipschitz_max(weights, &gaps, s / (1.0 - s))
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = value(c);
    let mut fd = value(d);
    let mut best = value(0.0).max(fc).max(fd);
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = value(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// max Σ wᵢgᵢ subject to |gᵢ| ≤ 1 and |gᵢ₊₁ − gᵢ| ≤ κ·gapᵢ.
pub fn box_lipschitz_max(weights: &[f64], gaps: &[f64], kappa: f64) -> f64 {
    // value function on [−1, 1]: value at −1 plus segments keyed by
    // (slope − offset), ordered by slope, each with its length
    let mut segs: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
    let mut offset = weights[0];
    let mut v0 = -weights[0];
    segs.insert(OrderedFloat(0.0), 2.0);
    for (w, gap) in weights[1..].iter().zip(gaps) {
        let r = (kappa * gap).min(2.0);
        if r > 0.0 {
            *segs.entry(OrderedFloat(-offset)).or_insert(0.0) += 2.0 * r;
            // cut r from the left end (steepest ascent first)
            let mut left = r;
            while left > 0.0 {
                let Some((&key, &len)) = segs.iter().next_back() else { break };
                let slope = key.0 + offset;
                let take = len.min(left);
                v0 += slope * take;
                left -= take;
                if take >= len {
                    segs.remove(&key);
                } else {
                    *segs.get_mut(&key).expect("present") = len - take;
                }
            }
            let mut right = r;
            while right > 0.0 {
                let Some((&key, &len)) = segs.iter().next() else { break };
                let take = len.min(right);
                right -= take;
                if take >= len {
                    segs.remove(&key);
                } else {
                    *segs.get_mut(&key).expect("present") = len - take;
                }
            }
        }
        offset += w;
        v0 -= w;
    }
    v0 + segs
        .iter()
        .map(|(k, len)| (k.0 + offset).max(0.0) * len)
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        for a in [0.0, 0.1, 1.0, 2.5, 40.0] {
            let got = bl_distance_1d(&[0.3], &[0.3 + a]);
            assert!((got - 2.0 * a / (2.0 + a)).abs() < 1e-10, "a={a} got={got}");
        }
    }

    #[test]
    fn box_only_when_kappa_is_infinite() {
        // with a free Lipschitz budget the optimum is Σ|w|
        let w = [0.5, -0.25, 0.25, -0.5];
        let v = box_lipschitz_max(&w, &[1.0, 1.0, 1.0], 1e9);
        assert!((v - 1.5).abs() < 1e-12);
        // κ = 0 forces a constant
        let v = box_lipschitz_max(&w, &[1.0, 1.0, 1.0], 0.0);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn equal_laws_are_at_distance_zero() {
        let xs = [0.1, -2.0, 3.0, 0.1];
        assert_eq!(bl_distance_1d(&xs, &[3.0, 0.1, 0.1, -2.0]), 0.0);
    }

    #[test]
    fn empty_law_is_rejected() {
        assert!(EmpiricalLaw::new(vec![]).is_err());
    }
}
