//! Path ensembles: per-path seeds, parallel map, and mean/standard-error reductions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::seed::derive_seed;

/// Runs `f(path_index, path_seed)` for every path in parallel. Output order
/// follows the path index, so results do not depend on the thread count.
pub fn map_paths<T, F>(n_paths: usize, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    (0..n_paths).into_par_iter().map(|i| f(i, derive_seed(master_seed, i as u64))).collect()
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe { mean: f64::NAN, se: f64::NAN };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanSe { mean, se: 0.0 };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MeanSe { mean, se: (var / n as f64).sqrt() }
}

/// Per-time mean and SE of a scalar statistic: `rows[path][time]`.
pub fn column_stats(rows: &[Vec<f64>]) -> Vec<MeanSe> {
    let n_t = rows.first().map_or(0, Vec::len);
    (0..n_t)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            mean_se(&col)
        })
        .collect()
}

pub fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
