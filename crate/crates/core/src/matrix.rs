//! Dense square complex matrices.
//!
//! This is the universal carrier for `U_t`, the symmetries `R`, `S`, the
//! process `A_t` and all tensor-space operators. Storage is row-major and
//! all operations allocate fresh matrices; values are immutable once built
//! and safe to share across threads.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = e;
        }
        m
    }

    /// Matrix unit `E_{k,l}`: one at (k, l), zero elsewhere.
    pub fn matrix_unit(dim: usize, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[k * dim + l] = Complex64::new(1.0, 0.0);
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in mul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.dim;
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    /// Normalized trace `Tr / dim`.
    pub fn ntrace(&self) -> Complex64 {
        self.trace() / self.dim as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `k`-th power by repeated multiplication; `pow(0)` is the identity.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Kronecker product, row-major mixed-radix encoding with the left
    /// factor most significant.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (na, nb) = (self.dim, rhs.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for ib in 0..nb {
                    for jb in 0..nb {
                        out.data[(ia * nb + ib) * n + (ja * nb + jb)] = a * rhs.data[ib * nb + jb];
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// ‖M M† − I‖_F ≤ tol.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.mul(&self.adjoint()).sub(&Self::identity(self.dim));
        d.frobenius_norm() <= tol
    }

    /// ‖M + M†‖_F ≤ tol.
    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        self.add(&self.adjoint()).frobenius_norm() <= tol
    }

    /// ‖M − M†‖_F ≤ tol.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).frobenius_norm() <= tol
    }

    /// Self-adjoint and squares to the identity.
    pub fn is_symmetry(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && self
                .mul(self)
                .sub(&Self::identity(self.dim))
                .frobenius_norm()
                <= tol
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// series, accurate to near machine precision for the moderate norms
    /// that arise here (skew-Hermitian increments and transposition sums).
    pub fn exp(&self) -> Self {
        let norm: f64 = self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(Complex64::new(1.0 / (1u64 << s) as f64, 0.0));

        let mut result = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=30 {
            term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
            if term.frobenius_norm() <= 1e-18 * result.frobenius_norm() {
                break;
            }
        }
        for _ in 0..s {
            result = result.mul(&result);
        }
        result
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let mut pivot = col;
            let mut best = a.get(col, col).norm();
            for r in col + 1..n {
                let v = a.get(r, col).norm();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::StepFailure(
                    "singular matrix in inverse".to_string(),
                ));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.data[col * n + j] /= p;
                inv.data[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let av = a.data[col * n + j];
                    let iv = inv.data[col * n + j];
                    a.data[r * n + j] -= f * av;
                    inv.data[r * n + j] -= f * iv;
                }
            }
        }
        Ok(inv)
    }

    /// Unitary polar factor, computed by the Newton iteration
    /// `Y ← (Y + Y^{-†}) / 2`, which converges quadratically for the
    /// nearly-unitary inputs produced by the Euler step.
    pub fn polar_unitary(&self) -> Result<Self> {
        let mut y = self.clone();
        for _ in 0..40 {
            let inv_adj = y.inverse()?.adjoint();
            let next = y.add(&inv_adj).scale(Complex64::new(0.5, 0.0));
            let delta = next.sub(&y).frobenius_norm();
            y = next;
            if delta <= 1e-15 * (1.0 + y.frobenius_norm()) {
                break;
            }
        }
        if !y.is_unitary(1e-12) {
            return Err(Error::StepFailure(
                "polar iteration did not converge to a unitary factor".to_string(),
            ));
        }
        Ok(y)
    }
}
