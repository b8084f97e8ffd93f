//! Monte Carlo estimation of the moment functionals, with standard errors
//! and common-random-number pairing.
//!
//! All estimators run through one engine: per-path evaluation is a pure
//! function of `(master_seed, path_index)`, paths are processed in
//! parallel, and the reduction is a deterministic pairwise-summation tree,
//! so results are bit-identical regardless of the number of threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::matrix::ComplexMatrix;
use crate::process::{self, SymmetryPair};
use crate::rng::V_PATH_OFFSET;
use crate::sim::{self, Scheme, TimeGrid};
use crate::{Error, Result};

/// Monte Carlo mean with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub samples: usize,
}

impl Estimate {
    /// Verdicts use the larger of the component standard errors.
    pub fn se(&self) -> f64 {
        self.se_re.max(self.se_im)
    }
}

/// Everything a Monte Carlo run needs: dimension, sample count, grid,
/// integration scheme, master seed and the symmetry fixture.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_dim: usize,
    pub paths: usize,
    pub grid: TimeGrid,
    pub scheme: Scheme,
    pub master_seed: u64,
    pub fixture: SymmetryPair,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::InvalidArgument(
                "Monte Carlo needs at least 2 paths".to_string(),
            ));
        }
        if self.fixture.n_dim != self.n_dim {
            return Err(Error::SizeMismatch(format!(
                "fixture dimension {} vs configured N = {}",
                self.fixture.n_dim, self.n_dim
            )));
        }
        Ok(())
    }

    pub fn node_of(&self, t: f64) -> Result<usize> {
        self.grid.node_of(t)
    }
}

/// Deterministic pairwise-summation tree.
pub(crate) fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_f64(&xs[..mid]) + pairwise_sum_f64(&xs[mid..])
        }
    }
}

/// Mean and standard error of one per-path column.
pub(crate) fn summarize_column(col: &[Complex64]) -> Estimate {
    let m = col.len();
    let mean = pairwise_sum(col) / m as f64;
    let dev_re: Vec<f64> = col.iter().map(|x| (x.re - mean.re).powi(2)).collect();
    let dev_im: Vec<f64> = col.iter().map(|x| (x.im - mean.im).powi(2)).collect();
    let denom = ((m - 1).max(1) * m) as f64;
    Estimate {
        mean,
        se_re: (pairwise_sum_f64(&dev_re) / denom).sqrt(),
        se_im: (pairwise_sum_f64(&dev_im) / denom).sqrt(),
        samples: m,
    }
}

/// Run `eval` over all paths with shared snapshots of the `U` path (and
/// of the independent `V` copy when `v_nodes` is non-empty). Node lists
/// must be sorted ascending; duplicates are allowed and produce repeated
/// snapshots. Returns one row of observables per path, in path order.
pub(crate) fn collect_rows<F>(
    cfg: &McConfig,
    u_nodes: &[usize],
    v_nodes: &[usize],
    eval: F,
) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&[ComplexMatrix], &[ComplexMatrix]) -> Vec<Complex64> + Sync,
{
    cfg.validate()?;
    let h = cfg.grid.h();
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|path| {
            let u_snaps =
                sim::simulate_snapshots(cfg.n_dim, h, u_nodes, cfg.scheme, cfg.master_seed, path)?;
            let v_snaps = if v_nodes.is_empty() {
                Vec::new()
            } else {
                sim::simulate_snapshots(
                    cfg.n_dim,
                    h,
                    v_nodes,
                    cfg.scheme,
                    cfg.master_seed,
                    path + V_PATH_OFFSET,
                )?
            };
            Ok(eval(&u_snaps, &v_snaps))
        })
        .collect()
}

/// Single-column convenience wrapper around [`collect_rows`].
fn estimate_scalar<F>(cfg: &McConfig, u_nodes: &[usize], v_nodes: &[usize], eval: F) -> Result<Estimate>
where
    F: Fn(&[ComplexMatrix], &[ComplexMatrix]) -> Complex64 + Sync,
{
    let rows = collect_rows(cfg, u_nodes, v_nodes, |u, v| vec![eval(u, v)])?;
    let col: Vec<Complex64> = rows.into_iter().map(|r| r[0]).collect();
    Ok(summarize_column(&col))
}

/// `F_n(t) = E tr(A_t^n)` with `A = R U S U*`.
pub fn estimate_f(n: usize, t: f64, cfg: &McConfig) -> Result<Estimate> {
    let node = cfg.node_of(t)?;
    let pair = cfg.fixture.clone();
    estimate_scalar(cfg, &[node], &[], move |u, _| {
        process::evaluate_a(&pair, &u[0]).pow(n).ntrace()
    })
}

/// `E[tr(A_t^p) tr(A_t^q)]`.
pub fn estimate_mixed(p: usize, q: usize, t: f64, cfg: &McConfig) -> Result<Estimate> {
    if p < 1 || q < 1 {
        return Err(Error::InvalidArgument("powers must be >= 1".to_string()));
    }
    let node = cfg.node_of(t)?;
    let pair = cfg.fixture.clone();
    estimate_scalar(cfg, &[node], &[], move |u, _| {
        let a = process::evaluate_a(&pair, &u[0]);
        a.pow(p).ntrace() * a.pow(q).ntrace()
    })
}

/// `ν_n(t) = E tr((R S U_t)^n)`.
pub fn estimate_nu(n: usize, t: f64, cfg: &McConfig) -> Result<Estimate> {
    let node = cfg.node_of(t)?;
    let pair = cfg.fixture.clone();
    estimate_scalar(cfg, &[node], &[], move |u, _| {
        pair.r.mul(&pair.s).mul(&u[0]).pow(n).ntrace()
    })
}

/// `μ_n(t) = E tr(U_t^n)`, the moments of the unitary Brownian motion.
pub fn estimate_mu(n: usize, t: f64, cfg: &McConfig) -> Result<Estimate> {
    let node = cfg.node_of(t)?;
    estimate_scalar(cfg, &[node], &[], move |u, _| u[0].pow(n).ntrace())
}

/// `H_n(s) = E tr(B_s^n)` with `B_s = V_{2(t−s)} A_s`.
pub fn estimate_h(n: usize, s: f64, t: f64, cfg: &McConfig) -> Result<Estimate> {
    let u_node = cfg.node_of(s)?;
    let v_node = cfg.node_of(2.0 * (t - s))?;
    let pair = cfg.fixture.clone();
    estimate_scalar(cfg, &[u_node], &[v_node], move |u, v| {
        process::bridge_from_states(&pair, &u[0], &v[0]).pow(n).ntrace()
    })
}

/// The bridge moments of the integral formula at one quadrature node:
/// first `E tr(B_s^{n−1} V_{2(t−s)} R)`, then the normalized-trace
/// products `E[tr(B_s^{n−i−1} V R) tr(B_s^{i−1} V R)]` for `i = 1..n−1`.
/// The combinatorial prefactors `n β` and `n` are applied by the verifier.
pub fn estimate_bridge_terms(
    n: usize,
    s: f64,
    t: f64,
    cfg: &McConfig,
) -> Result<(Estimate, Vec<Estimate>)> {
    if n < 1 {
        return Err(Error::InvalidArgument("order must be >= 1".to_string()));
    }
    let u_node = cfg.node_of(s)?;
    let v_node = cfg.node_of(2.0 * (t - s))?;
    let pair = cfg.fixture.clone();
    let rows = collect_rows(cfg, &[u_node], &[v_node], move |u, v| {
        bridge_term_row(n, &pair, &u[0], &v[0])
    })?;
    let width = n;
    let mut cols: Vec<Vec<Complex64>> = vec![Vec::with_capacity(rows.len()); width];
    for row in &rows {
        for (k, &x) in row.iter().enumerate() {
            cols[k].push(x);
        }
    }
    let mut it = cols.iter();
    let first = summarize_column(it.next().expect("width >= 1"));
    let products = it.map(|c| summarize_column(c)).collect();
    Ok((first, products))
}

/// Per-path bridge-term observables at one node: `tr(B^{n−1} V R)`
/// followed by the `n−1` trace products. Shared with the verifiers.
pub(crate) fn bridge_term_row(
    n: usize,
    pair: &SymmetryPair,
    u_at_s: &ComplexMatrix,
    v_at_2tms: &ComplexMatrix,
) -> Vec<Complex64> {
    let b = process::bridge_from_states(pair, u_at_s, v_at_2tms);
    let vr = v_at_2tms.mul(&pair.r);
    // tr(B^{j} V R) for j = 0..n−1
    let mut traces = Vec::with_capacity(n);
    let mut power = ComplexMatrix::identity(pair.n_dim);
    for _ in 0..n {
        traces.push(power.mul(&vr).ntrace());
        power = power.mul(&b);
    }
    let mut row = Vec::with_capacity(n);
    row.push(traces[n - 1]);
    for i in 1..n {
        row.push(traces[n - i - 1] * traces[i - 1]);
    }
    row
}

/// `E tr((P U_t Q U_t* P)^k)`, the Hermitian Jacobi moments.
pub fn estimate_jacobi_moment(k: usize, t: f64, cfg: &McConfig) -> Result<Estimate> {
    if k < 1 {
        return Err(Error::InvalidArgument("order must be >= 1".to_string()));
    }
    let node = cfg.node_of(t)?;
    let pair = cfg.fixture.clone();
    estimate_scalar(cfg, &[node], &[], move |u, _| {
        let tr = process::jacobi_matrix(&pair, &u[0]).pow(k).ntrace();
        debug_assert!(tr.im.abs() < 1e-12, "Jacobi moments are real pathwise");
        tr
    })
}
