//! The symmetries `R`, `S`, the unitary process `A = R U S U*`, the bridge
//! `B_s = V_{2(t−s)} A_s` and the Hermitian Jacobi matrix `P U Q U* P`.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::rng::test_ginibre;
use crate::sim::{TimeGrid, UnitaryPath};
use crate::{Error, Result};

/// A pair of self-adjoint symmetries with their cached scalar traces
/// `α = tr R`, `β = tr S`, `ξ = tr(RS)` (normalized traces).
#[derive(Debug, Clone)]
pub struct SymmetryPair {
    pub n_dim: usize,
    pub r: ComplexMatrix,
    pub s: ComplexMatrix,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
}

impl SymmetryPair {
    pub fn new(r: ComplexMatrix, s: ComplexMatrix) -> Result<Self> {
        if r.dim() != s.dim() {
            return Err(Error::SizeMismatch(
                "R and S have different dimensions".to_string(),
            ));
        }
        if !r.is_symmetry(1e-12) || !s.is_symmetry(1e-12) {
            return Err(Error::InvalidArgument(
                "R and S must be self-adjoint symmetries (M = M†, M² = I)".to_string(),
            ));
        }
        let n_dim = r.dim();
        let alpha = r.ntrace().re;
        let beta = s.ntrace().re;
        let xi = r.mul(&s).ntrace().re;
        Ok(Self {
            n_dim,
            r,
            s,
            alpha,
            beta,
            xi,
        })
    }

    /// Diagonal ±1 fixture: `plus_r` / `plus_s` count the +1 eigenvalues.
    pub fn diagonal(n_dim: usize, plus_r: usize, plus_s: usize) -> Result<Self> {
        Self::new(
            make_symmetry(n_dim, plus_r, None)?,
            make_symmetry(n_dim, plus_s, None)?,
        )
    }

    /// Fixture conjugated by a seeded Haar rotation, to break diagonality.
    pub fn rotated(n_dim: usize, plus_r: usize, plus_s: usize, seed: u64) -> Result<Self> {
        let w_r = haar_unitary(n_dim, seed);
        let w_s = haar_unitary(n_dim, seed.wrapping_add(1));
        Self::new(
            make_symmetry(n_dim, plus_r, Some(&w_r))?,
            make_symmetry(n_dim, plus_s, Some(&w_s))?,
        )
    }
}

/// `W · diag(+1 × plus_count, −1 × (N − plus_count)) · W†`.
pub fn make_symmetry(
    n_dim: usize,
    plus_count: usize,
    conjugator: Option<&ComplexMatrix>,
) -> Result<ComplexMatrix> {
    if plus_count > n_dim {
        return Err(Error::InvalidArgument(format!(
            "plus_count {plus_count} exceeds dimension {n_dim}"
        )));
    }
    let entries: Vec<Complex64> = (0..n_dim)
        .map(|k| Complex64::new(if k < plus_count { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let d = ComplexMatrix::diagonal(&entries);
    match conjugator {
        None => Ok(d),
        Some(w) => {
            if !w.is_unitary(1e-10) {
                return Err(Error::InvalidArgument(
                    "conjugator must be unitary".to_string(),
                ));
            }
            Ok(w.mul(&d).mul(&w.adjoint()))
        }
    }
}

/// Haar-distributed unitary from the QR factorization of a complex
/// Gaussian matrix. Modified Gram-Schmidt fixes the diagonal of R to be
/// real and positive, which is the phase convention that makes the law
/// exactly Haar.
pub fn haar_unitary(n_dim: usize, seed: u64) -> ComplexMatrix {
    let g = test_ginibre(n_dim, seed);
    let mut q = g;
    for j in 0..n_dim {
        for k in 0..j {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..n_dim {
                dot += q.get(i, k).conj() * q.get(i, j);
            }
            for i in 0..n_dim {
                let v = q.get(i, j) - dot * q.get(i, k);
                q.set(i, j, v);
            }
        }
        let mut norm_sq = 0.0;
        for i in 0..n_dim {
            norm_sq += q.get(i, j).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        for i in 0..n_dim {
            let v = q.get(i, j) / norm;
            q.set(i, j, v);
        }
    }
    q
}

/// `A = R U S U†`.
pub fn evaluate_a(pair: &SymmetryPair, u: &ComplexMatrix) -> ComplexMatrix {
    pair.r.mul(u).mul(&pair.s).mul(&u.adjoint())
}

/// `J = P U Q U† P` with `P = (I + R)/2`, `Q = (I + S)/2`.
pub fn jacobi_matrix(pair: &SymmetryPair, u: &ComplexMatrix) -> ComplexMatrix {
    let half = Complex64::new(0.5, 0.0);
    let i = ComplexMatrix::identity(pair.n_dim);
    let p = i.add(&pair.r).scale(half);
    let q = i.add(&pair.s).scale(half);
    p.mul(u).mul(&q).mul(&u.adjoint()).mul(&p)
}

/// Bridge value `B_s = V_{2(t−s)} · A_s` from matrices already looked up.
pub fn bridge_from_states(
    pair: &SymmetryPair,
    u_at_s: &ComplexMatrix,
    v_at_2tms: &ComplexMatrix,
) -> ComplexMatrix {
    v_at_2tms.mul(&evaluate_a(pair, u_at_s))
}

/// Bridge value `B_s = V_{2(t−s)} · A_s` looked up on simulated paths;
/// both `s` and `2(t−s)` must be grid-aligned.
pub fn evaluate_bridge(
    pair: &SymmetryPair,
    u_path: &UnitaryPath,
    v_path: &UnitaryPath,
    s: f64,
    t: f64,
) -> Result<ComplexMatrix> {
    if !(0.0 <= s && s <= t + 1e-12) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [0, {t}]")));
    }
    let u = u_path.at_time(s)?;
    let v = v_path.at_time(2.0 * (t - s))?;
    Ok(bridge_from_states(pair, u, v))
}

/// Sub-grid of `[0, t]` used for the time quadrature of the bridge terms.
/// Nodes are equally spaced, grid-aligned, and include both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig {
    pub t: f64,
    pub s_grid: Vec<f64>,
}

impl BridgeConfig {
    pub fn uniform(t: f64, nodes: usize, grid: &TimeGrid) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least two nodes".to_string(),
            ));
        }
        let mut s_grid = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let s = t * k as f64 / (nodes - 1) as f64;
            // both s and 2(t−s) must be node times
            let ks = grid.node_of(s)?;
            grid.node_of(2.0 * (t - s))?;
            s_grid.push(grid.node_time(ks));
        }
        Ok(Self { t, s_grid })
    }

    pub fn delta_s(&self) -> f64 {
        self.s_grid[1] - self.s_grid[0]
    }

    /// Composite trapezoid weights for the node values.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.s_grid.len();
        let h = self.delta_s();
        (0..n)
            .map(|k| if k == 0 || k == n - 1 { h / 2.0 } else { h })
            .collect()
    }
}
