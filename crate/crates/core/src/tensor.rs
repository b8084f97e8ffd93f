//! Tensor powers, the symmetric-group action on tensor factors, the
//! cycle-product trace formula and the matrix-unit contraction identity.
//!
//! Tensor indices use row-major mixed-radix encoding of `(i_1, …, i_n)`
//! with `i_1` most significant; this matches iterated Kronecker products
//! with the left factor most significant and is used everywhere in the
//! crate.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::perm::Permutation;
use crate::{Error, Result};

/// Memory cap for materialized tensor-space operators, in matrix rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_rows: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_rows: 4096 }
    }
}

/// `N^n`, checked against the budget.
pub fn tensor_dim(n_dim: usize, order: usize, budget: &Budget) -> Result<usize> {
    let mut rows: usize = 1;
    for _ in 0..order {
        rows = rows
            .checked_mul(n_dim)
            .ok_or(Error::BudgetExceeded {
                rows: usize::MAX,
                cap: budget.max_rows,
            })?;
        if rows > budget.max_rows {
            return Err(Error::BudgetExceeded {
                rows,
                cap: budget.max_rows,
            });
        }
    }
    Ok(rows)
}

/// `M^{⊗ n}`.
pub fn tensor_power(m: &ComplexMatrix, order: usize, budget: &Budget) -> Result<ComplexMatrix> {
    if order == 0 {
        return Err(Error::InvalidArgument("tensor power of order 0".to_string()));
    }
    tensor_dim(m.dim(), order, budget)?;
    let mut out = m.clone();
    for _ in 1..order {
        out = out.kron(m);
    }
    Ok(out)
}

/// Decompose a tensor index into factor digits, most significant first.
fn digits(mut index: usize, n_dim: usize, order: usize) -> Vec<usize> {
    let mut out = vec![0; order];
    for k in (0..order).rev() {
        out[k] = index % n_dim;
        index /= n_dim;
    }
    out
}

fn index_of(digits: &[usize], n_dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n_dim + d)
}

/// The operator `[σ]` permuting tensor factors:
/// `[σ](v_1 ⊗ … ⊗ v_n) = v_{σ^{-1}(1)} ⊗ … ⊗ v_{σ^{-1}(n)}`.
pub fn permutation_operator(
    sigma: &Permutation,
    n_dim: usize,
    budget: &Budget,
) -> Result<ComplexMatrix> {
    if n_dim < 2 {
        return Err(Error::InvalidArgument(
            "permutation operators need dimension >= 2".to_string(),
        ));
    }
    let order = sigma.n();
    let dim = tensor_dim(n_dim, order, budget)?;
    let inv = sigma.inverse();
    let mut out = ComplexMatrix::zeros(dim);
    let one = Complex64::new(1.0, 0.0);
    for col in 0..dim {
        let j = digits(col, n_dim, order);
        let i: Vec<usize> = (0..order).map(|k| j[inv.apply(k)]).collect();
        out.set(index_of(&i, n_dim), col, one);
    }
    Ok(out)
}

/// Apply `[σ]` to a tensor-space matrix without materializing the
/// operator: `([σ] M)[r, :] = M[σ^{-1} · r, :]` in digit form. Used above
/// the memory cap, where the dense operator is unavailable.
pub fn permute_tensor_rows(
    sigma: &Permutation,
    n_dim: usize,
    m: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let order = sigma.n();
    let dim = n_dim.pow(order as u32);
    if m.dim() != dim {
        return Err(Error::SizeMismatch(format!(
            "matrix of dim {} does not live on ({n_dim})^{order}",
            m.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(dim);
    for row in 0..dim {
        let i = digits(row, n_dim, order);
        // row r of [σ]M is row s of M with s_k = r_{σ(k)}
        let s: Vec<usize> = (0..order).map(|k| i[sigma.apply(k)]).collect();
        let src = index_of(&s, n_dim);
        for col in 0..dim {
            out.set(row, col, m.get(src, col));
        }
    }
    Ok(out)
}

/// `Tr([σ](M_1 ⊗ … ⊗ M_n))` evaluated through the cycle decomposition:
/// the product over cycles `(i_1 … i_l)` of `Tr(M_{i_l} ⋯ M_{i_1})`.
pub fn trace_cycle_product(sigma: &Permutation, mats: &[&ComplexMatrix]) -> Result<Complex64> {
    if mats.len() != sigma.n() {
        return Err(Error::SizeMismatch(format!(
            "{} matrices for a permutation of degree {}",
            mats.len(),
            sigma.n()
        )));
    }
    let n_dim = mats[0].dim();
    if mats.iter().any(|m| m.dim() != n_dim) {
        return Err(Error::SizeMismatch(
            "matrices of unequal dimension".to_string(),
        ));
    }
    let mut product = Complex64::new(1.0, 0.0);
    for cycle in sigma.cycles() {
        let mut acc = ComplexMatrix::identity(n_dim);
        for &idx in cycle.iter().rev() {
            acc = acc.mul(mats[idx]);
        }
        product *= acc.trace();
    }
    Ok(product)
}

/// `Σ_{k,l} E_{k,l} M E_{l,k}`, by explicit summation over matrix units.
/// Always equals `Tr(M) · I`; verifiers use it to collapse double sums.
pub fn matrix_unit_contraction(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n);
    for k in 0..n {
        for l in 0..n {
            let e_kl = ComplexMatrix::matrix_unit(n, k, l);
            let e_lk = ComplexMatrix::matrix_unit(n, l, k);
            out = out.add(&e_kl.mul(m).mul(&e_lk));
        }
    }
    out
}

/// `Σ_{i<j} [(i j)]` on `(C^N)^{⊗ n}`, the drift generator of the
/// tensor-power heat kernel.
pub fn transposition_sum(order: usize, n_dim: usize, budget: &Budget) -> Result<ComplexMatrix> {
    if order < 2 {
        return Err(Error::InvalidArgument(
            "transposition sum needs order >= 2".to_string(),
        ));
    }
    let dim = tensor_dim(n_dim, order, budget)?;
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..order {
        for j in i + 1..order {
            let tau = Permutation::transposition(order, i, j)?;
            out = out.add(&permutation_operator(&tau, n_dim, budget)?);
        }
    }
    Ok(out)
}

/// `(M)_i = I^{⊗ i} ⊗ M ⊗ I^{⊗ n-1-i}` with `i` 0-based.
pub fn factor_embed(
    m: &ComplexMatrix,
    i: usize,
    order: usize,
    budget: &Budget,
) -> Result<ComplexMatrix> {
    if i >= order {
        return Err(Error::InvalidArgument(format!(
            "factor index {i} out of range for order {order}"
        )));
    }
    let n_dim = m.dim();
    tensor_dim(n_dim, order, budget)?;
    let left = ComplexMatrix::identity(n_dim.pow(i as u32));
    let right = ComplexMatrix::identity(n_dim.pow((order - 1 - i) as u32));
    Ok(left.kron(m).kron(&right))
}

/// `(M ⊗ D)_{i,j} = I^{⊗ i} ⊗ M ⊗ I^{⊗ j-i-1} ⊗ D ⊗ I^{⊗ n-1-j}`,
/// `i < j` 0-based.
pub fn pair_embed(
    m: &ComplexMatrix,
    d: &ComplexMatrix,
    i: usize,
    j: usize,
    order: usize,
    budget: &Budget,
) -> Result<ComplexMatrix> {
    if i >= j || j >= order {
        return Err(Error::InvalidArgument(format!(
            "pair indices ({i}, {j}) out of range for order {order}"
        )));
    }
    let n_dim = m.dim();
    if d.dim() != n_dim {
        return Err(Error::SizeMismatch(
            "pair factors of unequal dimension".to_string(),
        ));
    }
    tensor_dim(n_dim, order, budget)?;
    let a = ComplexMatrix::identity(n_dim.pow(i as u32));
    let b = ComplexMatrix::identity(n_dim.pow((j - i - 1) as u32));
    let c = ComplexMatrix::identity(n_dim.pow((order - 1 - j) as u32));
    Ok(a.kron(m).kron(&b).kron(d).kron(&c))
}
