//! Sine-basis spectral Galerkin discretization of the Dirichlet Laplacian on (0,1).

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalerkinSpec {
    pub n_modes: usize,
    pub collocation_points: usize,
}

/// Basis matrix B[j][n] = √2 sin((n+1)π ξ_j) on the interior nodes ξ_j = (j+1)/(M+1),
/// with quadrature weight 1/(M+1). The discrete basis is orthonormal for N ≤ M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineBasis {
    pub n_modes: usize,
    pub nodes: Vec<f64>,
    matrix: Vec<f64>,
    weight: f64,
}

impl SineBasis {
    pub fn new(spec: GalerkinSpec) -> Result<Self> {
        let (n, m) = (spec.n_modes, spec.collocation_points);
        if n == 0 {
            return Err(Error::input("Galerkin truncation needs at least one mode"));
        }
        if m < n {
            return Err(Error::input("collocation_points must be >= n_modes"));
        }
        let h = 1.0 / (m as f64 + 1.0);
        let nodes: Vec<f64> = (1..=m).map(|j| j as f64 * h).collect();
        let mut matrix = Vec::with_capacity(m * n);
        for &xi in &nodes {
            for k in 1..=n {
                matrix.push(SQRT_2 * (k as f64 * PI * xi).sin());
            }
        }
        Ok(SineBasis { n_modes: n, nodes, matrix, weight: h })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Eigenvalues n²π² of −∂²_ξ, n = 1..N.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|k| (k as f64 * PI).powi(2)).collect()
    }

    /// Nodal values u(ξ_j) = Σ_n y_n e_n(ξ_j).
    pub fn synthesize(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n_modes;
        self.matrix
            .chunks_exact(n)
            .map(|row| row.iter().zip(y).map(|(b, c)| b * c).sum())
            .collect()
    }

    /// Modal coefficients y_n = h Σ_j v_j e_n(ξ_j).
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_modes;
        let mut y = vec![0.0; n];
        for (row, vj) in self.matrix.chunks_exact(n).zip(v) {
            for (yn, b) in y.iter_mut().zip(row) {
                *yn += b * vj;
            }
        }
        for yn in &mut y {
            *yn *= self.weight;
        }
        y
    }

    /// Discrete Gram matrix h Bᵀ B, row-major N×N.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n_modes;
        let mut g = vec![0.0; n * n];
        for row in self.matrix.chunks_exact(n) {
            for a in 0..n {
                for b in 0..n {
                    g[a * n + b] += self.weight * row[a] * row[b];
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_basis_is_orthonormal() {
        for (n, m) in [(1, 1), (4, 9), (8, 32), (16, 16)] {
            let b = SineBasis::new(GalerkinSpec { n_modes: n, collocation_points: m }).unwrap();
            let g = b.gram();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * n + j] - want).abs() < 1e-10, "n={n} m={m} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn project_inverts_synthesize() {
        let b = SineBasis::new(GalerkinSpec { n_modes: 6, collocation_points: 20 }).unwrap();
        let y = vec![0.3, -1.0, 0.0, 2.5, 0.1, -0.7];
        let back = b.project(&b.synthesize(&y));
        for (a, c) in back.iter().zip(&y) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_is_n_squared_pi_squared() {
        let b = SineBasis::new(GalerkinSpec { n_modes: 3, collocation_points: 3 }).unwrap();
        let ev = b.eigenvalues();
        assert!((ev[0] - PI * PI).abs() < 1e-12);
        assert!((ev[2] - 9.0 * PI * PI).abs() < 1e-12);
        assert!(SineBasis::new(GalerkinSpec { n_modes: 3, collocation_points: 2 }).is_err());
    }
}
