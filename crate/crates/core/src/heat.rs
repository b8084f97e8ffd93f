//! Closed-form evaluators: the tensor heat kernel `E[(U_t)^{⊗n}]`, the
//! explicit finite-N moments of the unitary Brownian motion, and the
//! closed forms for `E[A_t]` and its first moment.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::process::SymmetryPair;
use crate::tensor::{self, Budget};
use crate::{Error, Result};

/// `E[(U_t)^{⊗n}]`, an element of the commutant of the `S_n` action.
#[derive(Debug, Clone)]
pub struct HeatKernelTensor {
    pub order: usize,
    pub n_dim: usize,
    pub t: f64,
    pub value: ComplexMatrix,
}

/// `E[(U_t)^{⊗n}] = e^{−nt/2} · exp(−(t/N) Σ_{i<j} [(ij)])`.
pub fn expected_tensor_power_ubm(
    order: usize,
    n_dim: usize,
    t: f64,
    budget: &Budget,
) -> Result<HeatKernelTensor> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    let dim = tensor::tensor_dim(n_dim, order, budget)?;
    let prefactor = Complex64::new((-(order as f64) * t / 2.0).exp(), 0.0);
    let value = if order == 1 {
        // empty transposition sum
        ComplexMatrix::identity(dim).scale(prefactor)
    } else {
        let generator = tensor::transposition_sum(order, n_dim, budget)?
            .scale(Complex64::new(-t / n_dim as f64, 0.0));
        generator.exp().scale(prefactor)
    };
    Ok(HeatKernelTensor {
        order,
        n_dim,
        t,
        value,
    })
}

/// `ln k!` by direct summation (exact integer arguments, tiny error).
fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn ln_binomial(a: usize, b: usize) -> f64 {
    debug_assert!(b <= a);
    ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b)
}

/// The explicit moment `E tr(U_t^n)` for `N ≥ n`:
/// `(e^{−nt/2}/N) Σ_{k=0}^{n−1} (−1)^k C(N+n−1−k, n) C(n−1, k)
///  e^{−t(n²−(2k+1)n)/(2N)}`.
///
/// The alternating terms are combined in the logarithm domain with sign
/// tracking, so the sum stays accurate for N up to ~50.
pub fn biane_moment(order: usize, n_dim: usize, t: f64) -> Result<f64> {
    if order < 1 || order > n_dim {
        return Err(Error::Domain(format!(
            "the explicit moment formula requires 1 <= n <= N, got n = {order}, N = {n_dim}"
        )));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("negative time {t}")));
    }
    let n = order as f64;
    let nn = n_dim as f64;
    // log-domain accumulation: track max exponent, then sum signed ratios
    let mut log_terms = Vec::with_capacity(order);
    let mut signs = Vec::with_capacity(order);
    for k in 0..order {
        let log_mag = ln_binomial(n_dim + order - 1 - k, order)
            + ln_binomial(order - 1, k)
            - t * (n * n - (2.0 * k as f64 + 1.0) * n) / (2.0 * nn);
        log_terms.push(log_mag);
        signs.push(if k % 2 == 0 { 1.0 } else { -1.0 });
    }
    let max_log = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms
        .iter()
        .zip(&signs)
        .map(|(&lm, &s)| s * (lm - max_log).exp())
        .sum();
    Ok((-n * t / 2.0).exp() / nn * max_log.exp() * sum)
}

/// `F_1(t) = e^{−t}(ξ − αβ) + αβ`.
pub fn f1_closed_form(pair: &SymmetryPair, t: f64) -> f64 {
    (-t).exp() * (pair.xi - pair.alpha * pair.beta) + pair.alpha * pair.beta
}

/// `E[A_t] = β R + e^{−t}(RS − β R)`, the solution of
/// `dE[A]/dt = β R − E[A]` started at `RS`.
pub fn expected_a_closed_form(r: &ComplexMatrix, s: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let beta = s.ntrace();
    let rs = r.mul(s);
    let br = r.scale(beta);
    br.add(&rs.sub(&br).scale(Complex64::new((-t).exp(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::process::SymmetryPair;
    use crate::tensor::permutation_operator;

    #[test]
    fn heat_kernel_degenerate_cases() {
        let b = Budget::default();
        // n = 1: e^{−t/2} I
        let hk = expected_tensor_power_ubm(1, 3, 0.7, &b).unwrap();
        let want = ComplexMatrix::identity(3).scale(Complex64::new((-0.35f64).exp(), 0.0));
        assert!(hk.value.sub(&want).frobenius_norm() < 1e-14);
        // t = 0: identity
        let hk = expected_tensor_power_ubm(3, 2, 0.0, &b).unwrap();
        assert!(hk.value.sub(&ComplexMatrix::identity(8)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn heat_kernel_n2_closed_form() {
        // diagonalize the swap by hand: eigenvalues ±1 give
        // e^{−t}(cosh(t/N) I − sinh(t/N) Swap)
        let b = Budget::default();
        for (n_dim, t) in [(2usize, 0.5f64), (3, 1.25)] {
            let hk = expected_tensor_power_ubm(2, n_dim, t, &b).unwrap();
            let swap =
                permutation_operator(&Permutation::transposition(2, 0, 1).unwrap(), n_dim, &b)
                    .unwrap();
            let x = t / n_dim as f64;
            let want = ComplexMatrix::identity(n_dim * n_dim)
                .scale(Complex64::new(x.cosh(), 0.0))
                .sub(&swap.scale(Complex64::new(x.sinh(), 0.0)))
                .scale(Complex64::new((-t).exp(), 0.0));
            assert!(hk.value.sub(&want).frobenius_norm() < 1e-13);
        }
    }

    #[test]
    fn heat_kernel_lies_in_commutant() {
        let b = Budget::default();
        for order in 2..=3usize {
            for n_dim in 2..=3usize {
                let hk = expected_tensor_power_ubm(order, n_dim, 0.8, &b).unwrap();
                for sigma in Permutation::all(order) {
                    let p = permutation_operator(&sigma, n_dim, &b).unwrap();
                    assert!(
                        hk.value.commutator(&p).frobenius_norm() <= 1e-10,
                        "order {order} N {n_dim}"
                    );
                }
            }
        }
    }

    #[test]
    fn heat_kernel_semigroup_in_time() {
        let b = Budget::default();
        let hk_s = expected_tensor_power_ubm(2, 3, 0.4, &b).unwrap();
        let hk_t = expected_tensor_power_ubm(2, 3, 0.9, &b).unwrap();
        let hk_st = expected_tensor_power_ubm(2, 3, 1.3, &b).unwrap();
        let prod = hk_s.value.mul(&hk_t.value);
        assert!(prod.sub(&hk_st.value).frobenius_norm() < 1e-12);
    }

    #[test]
    fn heat_kernel_drift_at_zero() {
        // central difference of the kernel at t = 0 equals
        // −(n/2) I − (1/N) Σ transpositions; the analytic formula extends
        // to negative t, and K(−h) = K(h)^{-1} for commuting exponentials
        let b = Budget::default();
        let h = 1e-4;
        for (order, n_dim) in [(2usize, 2usize), (3, 2), (2, 3)] {
            let plus = expected_tensor_power_ubm(order, n_dim, h, &b).unwrap().value;
            let minus = plus.inverse().unwrap();
            let deriv = plus.sub(&minus).scale(Complex64::new(1.0 / (2.0 * h), 0.0));
            let tsum = tensor::transposition_sum(order, n_dim, &b).unwrap();
            let want = ComplexMatrix::identity(n_dim.pow(order as u32))
                .scale(Complex64::new(-(order as f64) / 2.0, 0.0))
                .sub(&tsum.scale(Complex64::new(1.0 / n_dim as f64, 0.0)));
            assert!(
                deriv.sub(&want).frobenius_norm() < 100.0 * h * h,
                "order {order} N {n_dim}"
            );
        }
    }

    #[test]
    fn biane_moment_basics() {
        // n = 1 is e^{−t/2}
        for t in [0.0, 0.3, 2.0] {
            for n_dim in 1..=6usize {
                let v = biane_moment(1, n_dim, t).unwrap();
                assert!((v - (-t / 2.0).exp()).abs() < 1e-12);
            }
        }
        // t = 0 gives 1: brute-force the alternating binomial sum exactly
        for n_dim in 1..=8usize {
            for order in 1..=n_dim {
                let v = biane_moment(order, n_dim, 0.0).unwrap();
                let brute = brute_force_t0(order, n_dim);
                assert!((v - 1.0).abs() < 1e-10, "n={order} N={n_dim}: {v}");
                assert!((brute - 1.0).abs() < 1e-10);
            }
        }
        // domain error outside N >= n
        assert!(matches!(biane_moment(3, 2, 1.0), Err(Error::Domain(_))));
    }

    // exact integer binomials, independent of the log-domain path
    fn brute_force_t0(order: usize, n_dim: usize) -> f64 {
        fn binom(a: usize, b: usize) -> f64 {
            let mut v = 1.0;
            for i in 0..b {
                v = v * (a - i) as f64 / (i + 1) as f64;
            }
            v
        }
        let mut sum = 0.0;
        for k in 0..order {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom(n_dim + order - 1 - k, order) * binom(order - 1, k);
        }
        sum / n_dim as f64
    }

    #[test]
    fn biane_moment_bounded_and_decaying() {
        for (order, n_dim) in [(1usize, 3usize), (2, 3), (3, 3), (2, 4), (3, 4)] {
            assert!((biane_moment(order, n_dim, 0.0).unwrap() - 1.0).abs() < 1e-12);
            for k in 0..=50 {
                let t = k as f64 * 0.1;
                let v = biane_moment(order, n_dim, t).unwrap();
                assert!(v.abs() <= 1.0 + 1e-12, "n={order} N={n_dim} t={t}: {v}");
            }
        }
    }

    #[test]
    fn biane_matches_heat_kernel_cycle_trace() {
        let b = Budget::default();
        for order in 1..=3usize {
            for n_dim in [3usize, 4] {
                for t in [0.25, 1.0, 4.0] {
                    let hk = expected_tensor_power_ubm(order, n_dim, t, &b).unwrap();
                    let cyc = permutation_operator(&Permutation::full_cycle(order), n_dim, &b)
                        .unwrap();
                    let lhs = cyc.mul(&hk.value).trace() / n_dim as f64;
                    let rhs = biane_moment(order, n_dim, t).unwrap();
                    assert!(
                        (lhs.re - rhs).abs() <= 1e-8 * rhs.abs().max(1e-3) && lhs.im.abs() < 1e-12,
                        "n={order} N={n_dim} t={t}: {} vs {rhs}",
                        lhs.re
                    );
                }
            }
        }
    }

    #[test]
    fn biane_log_domain_is_stable_for_large_n() {
        // alternating terms reach ~ C(2N-1, N) ~ 1e28 at N = 50; the
        // log-domain sum must not overflow there (cancellation still costs
        // digits in f64, so boundedness is only asserted at moderate N)
        for t in [0.1, 1.0, 5.0] {
            let v = biane_moment(50, 50, t).unwrap();
            assert!(v.is_finite(), "t={t}: {v}");
        }
        for order in 1..=12usize {
            for k in 0..=50 {
                let t = k as f64 * 0.1;
                let v = biane_moment(order, 12, t).unwrap();
                assert!(v.abs() <= 1.0 + 1e-6, "n={order} t={t}: {v}");
            }
        }
    }

    #[test]
    fn f1_closed_form_cases() {
        let pair = SymmetryPair::diagonal(4, 3, 1).unwrap();
        // t = 0 gives ξ
        assert!((f1_closed_form(&pair, 0.0) - pair.xi).abs() < 1e-15);
        // large-time limit is αβ
        assert!((f1_closed_form(&pair, 60.0) - pair.alpha * pair.beta).abs() < 1e-15);
        // R = S = I stays at 1
        let idp = SymmetryPair::diagonal(4, 4, 4).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!((f1_closed_form(&idp, t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn expected_a_closed_form_cases() {
        let pair = SymmetryPair::diagonal(4, 3, 1).unwrap();
        let rs = pair.r.mul(&pair.s);
        // t = 0 gives RS
        assert!(expected_a_closed_form(&pair.r, &pair.s, 0.0).sub(&rs).frobenius_norm() < 1e-14);
        // t → ∞ gives β R
        let limit = expected_a_closed_form(&pair.r, &pair.s, 80.0);
        assert!(limit.sub(&pair.r.scale(Complex64::new(pair.beta, 0.0))).frobenius_norm() < 1e-12);

        // N = 2 example: R = diag(1, −1), S = I has RS = R, so E[A_t] = R
        let r = ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let s = ComplexMatrix::identity(2);
        for t in [0.0, 0.4, 2.0] {
            assert!(expected_a_closed_form(&r, &s, t).sub(&r).frobenius_norm() < 1e-14);
        }

        // normalized trace of the closed form equals F_1
        for t in [0.0, 0.3, 1.7] {
            let tr = expected_a_closed_form(&pair.r, &pair.s, t).ntrace();
            assert!((tr.re - f1_closed_form(&pair, t)).abs() < 1e-13);
            assert!(tr.im.abs() < 1e-14);
        }
    }
}
