use pbnc_core::numkit::norm::lanczos_norm;
use pbnc_core::numkit::{op_norm, sup_norm, toeplitz, ComplexMatrix, NormOptions, Polynomial};
use pbnc_core::Complex64;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut r = pbnc_core::rng::seeded(seed);
    ComplexMatrix::from_vec(rows, cols, pbnc_core::rng::complex_gaussian_vec(&mut r, rows * cols)).unwrap()
}

fn poly(deg: usize, seed: u64) -> Polynomial {
    let mut r = pbnc_core::rng::seeded(seed);
    Polynomial::new(pbnc_core::rng::complex_gaussian_vec(&mut r, deg + 1)).unwrap()
}

fn norm(a: &ComplexMatrix) -> f64 {
    op_norm(a, 1e-13).unwrap().value
}

/// Direct Horner evaluation on a 10⁶-point grid, independent of the FFT path.
fn dense_sup(p: &Polynomial) -> f64 {
    const POINTS: usize = 1_000_000;
    (0..POINTS)
        .map(|i| p.eval(Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / POINTS as f64)).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_invariant_under_transpose_conj_adjoint(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let a = matrix(rows, cols, seed);
        let n = norm(&a);
        for b in [a.transpose(), a.conj(), a.adjoint()] {
            prop_assert!((norm(&b) - n).abs() <= 1e-10 * n.max(1.0));
        }
    }

    #[test]
    fn kron_norm_is_multiplicative(p in 1usize..5, q in 1usize..5, seed in any::<u64>()) {
        let a = matrix(p, q + 1, seed);
        let b = matrix(q, p + 1, seed ^ 1);
        let lhs = norm(&a.kron(&b));
        prop_assert!((lhs - norm(&a) * norm(&b)).abs() <= 1e-10 * lhs.max(1.0));
    }

    #[test]
    fn polynomial_calculus_is_multiplicative(d1 in 0usize..5, d2 in 0usize..5, n in 1usize..7, seed in any::<u64>()) {
        let (p, q) = (poly(d1, seed), poly(d2, seed ^ 7));
        let a = matrix(n, n, seed ^ 13).scale_real(0.5);
        let lhs = p.mul(&q).unwrap().of_matrix(&a).unwrap();
        let rhs = p.of_matrix(&a).unwrap().matmul(&q.of_matrix(&a).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn toeplitz_truncation_is_multiplicative(d1 in 0usize..6, d2 in 0usize..6, d in 1usize..10, seed in any::<u64>()) {
        let (p, q) = (poly(d1, seed), poly(d2, seed ^ 3));
        let lhs = toeplitz(&p.mul(&q).unwrap(), d);
        let rhs = toeplitz(&p, d).matmul(&toeplitz(&q, d)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn lanczos_is_a_lower_bound_matching_exact(rows in 2usize..40, cols in 2usize..40, seed in any::<u64>()) {
        let a = matrix(rows, cols, seed);
        let exact = norm(&a);
        let (est, _) = lanczos_norm(&a, &NormOptions::new(1e-13)).unwrap();
        prop_assert!(est.value <= exact * (1.0 + 1e-12));
        prop_assert!((exact - est.value) <= 1e-8 * exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sup_norm_bracket_contains_dense_oracle(deg in 1usize..24, seed in any::<u64>()) {
        let p = poly(deg, seed);
        let s = sup_norm(&p, pbnc_core::numkit::poly::default_grid(deg)).unwrap();
        let oracle = dense_sup(&p);
        prop_assert!(s.grid_max <= oracle * (1.0 + 1e-12));
        prop_assert!(oracle <= s.certified_upper * (1.0 + 1e-12));
        prop_assert!(s.certified_upper <= oracle * (1.0 + 1.0 / 63.0));
    }
}

#[test]
fn monomial_and_fejer_sup_norms_are_exact() {
    for k in [0, 1, 7, 300] {
        assert!((Polynomial::monomial(k).unwrap().sup_norm_default().certified_upper - 1.0).abs() < 1e-14);
    }
    let f = pbnc_core::numkit::families::fejer(16, 3);
    assert!((f.sup_norm_default().certified_upper - 1.0).abs() < 1e-14);
}
