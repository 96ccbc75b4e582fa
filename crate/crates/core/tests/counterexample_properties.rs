use pbnc_core::coeff_systems::{car_jordan_wigner, haar_unitaries, CoefficientSystem};
use pbnc_core::counterexample::{
    build_t_default, certificate_matrix, cb_certificate, eps_for_target_c, pb_probe, similarity_lower,
    OperatorBundle, PbSearch,
};
use pbnc_core::hankel::lacunary_default;
use pbnc_core::numkit::{families, op_norm, ComplexMatrix, Polynomial};
use pbnc_core::thresholds::{Thresholds, PB_SEED};
use pbnc_core::{rng, Error};
use proptest::prelude::*;

fn bundle(system: &CoefficientSystem, eps: f64) -> OperatorBundle {
    build_t_default(system, &lacunary_default(system.n).unwrap(), eps).unwrap()
}

fn car(n: usize, eps: f64) -> OperatorBundle {
    bundle(&car_jordan_wigner(n).unwrap(), eps)
}

fn norm(a: &ComplexMatrix) -> f64 {
    op_norm(a, 1e-13).unwrap().value
}

fn seeded_poly(seed: u64, deg: usize) -> Polynomial {
    families::random_poly(&mut rng::seeded(seed), deg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn block_formula_agrees_with_horner(n in 1usize..4, deg in 0usize..20, eps in 0.0f64..3.0, seed in any::<u64>()) {
        let b = car(n, eps);
        let p = seeded_poly(seed, deg);
        let horner = p.of_matrix(&b.t_matrix()).unwrap();
        prop_assert!(b.poly_of_t(&p).max_abs_diff(&horner) <= 1e-10 * (1.0 + horner.max_abs()));
    }

    #[test]
    fn haar_bundles_are_nilpotent(n in 1usize..4, eps in 0.0f64..2.0, seed in any::<u64>()) {
        let b = bundle(&haar_unitaries(n, n, seed).unwrap(), eps);
        let t2d = Polynomial::monomial(2 * b.space.d).unwrap().of_matrix(&b.t_matrix()).unwrap();
        prop_assert!(norm(&t2d) <= 1e-10);
    }

    #[test]
    fn certificate_is_linear_in_eps(n in 1usize..5, eps in 0.0f64..4.0) {
        let base = similarity_lower(&car(n, 1.0)).unwrap();
        prop_assert!((similarity_lower(&car(n, eps)).unwrap() - eps * base).abs() <= 1e-12 * (1.0 + eps * base));
    }
}

/// A fixed probe family (no ascent) evaluated across eps: each `‖P(T_ε)‖` is
/// nondecreasing in eps, so the family maximum is as well.
#[test]
fn pb_probe_is_monotone_in_eps_on_a_fixed_family() {
    let base = car(3, 0.0);
    let search = PbSearch { restarts: 1, ascent_steps: 0, random_polys: 12, ..PbSearch::for_bundle(&base, 3) };
    let mut last = 0.0;
    for eps in [0.0, 0.1, 0.25, 0.5, 1.0, 2.0] {
        let v = pb_probe(&base.with_eps(eps).unwrap(), &search).unwrap().value;
        assert!(v >= last - 1e-10, "eps {eps}: {v} < {last}");
        last = v;
    }
}

/// Diagonal similarities `V = diag(λ^level)` with bottom levels `j` and top
/// levels `2D − i`: whenever `‖V⁻¹TV‖ ≤ 1`, `‖V‖‖V⁻¹‖ ≥ similarity_lower`.
#[test]
fn diagonal_similarities_respect_the_certificate() {
    for n in [2, 3] {
        let b = car(n, 1.0);
        let sim = similarity_lower(&b).unwrap();
        let d = b.space.d;
        let (out_dim, in_dim) = (b.space.out_dim, b.space.in_dim);
        let levels: Vec<i32> = (0..d * out_dim)
            .map(|r| (2 * d - r / out_dim) as i32)
            .chain((0..d * in_dim).map(|r| (r / in_dim) as i32))
            .collect();
        let t = b.t_matrix();
        let mut admissible = 0;
        for lambda in [1.0, 1.5, 2.0, 4.0, 8.0, 32.0, 128.0] {
            let w = ComplexMatrix::from_fn(t.rows(), t.cols(), |r, c| {
                t[(r, c)] * f64::powi(lambda, levels[c] - levels[r])
            });
            if norm(&w) <= 1.0 + 1e-12 {
                admissible += 1;
                let lo = *levels.iter().min().unwrap();
                let hi = *levels.iter().max().unwrap();
                let kappa = f64::powi(lambda, hi - lo);
                assert!(kappa >= sim - 1e-8, "λ = {lambda}: κ = {kappa} < {sim}");
            }
        }
        assert!(admissible > 0, "no admissible diagonal similarity for n = {n}");
    }
}

/// `‖W‖` of the explicit `Σ C̄_t ⊗ P_t(T)` dominates its compression.
#[test]
fn explicit_certificate_matrix_is_consistent() {
    for n in 1..=3 {
        for eps in [0.5, 1.0] {
            let b = car(n, eps);
            let cert = cb_certificate(&b).unwrap();
            let w = norm(&certificate_matrix(&b).unwrap());
            assert!(w >= cert.value - 1e-10, "n = {n}, eps = {eps}: ‖W‖ = {w} < {}", cert.value);
        }
    }
    // unnormalized unitaries: ‖W‖ ≥ ε n^{−1/2} ‖compression‖ = value · rb
    let b = bundle(&haar_unitaries(2, 2, 4).unwrap(), 1.0);
    let cert = cb_certificate(&b).unwrap();
    assert!(norm(&certificate_matrix(&b).unwrap()) >= cert.value * cert.row_bound - 1e-10);
}

#[test]
fn car_separation_grows_like_root_n() {
    let th = Thresholds::embedded().unwrap();
    let mut ratios = Vec::new();
    for n in 2..=5 {
        let b = car(n, 1.0);
        let sim = similarity_lower(&b).unwrap();
        assert!(sim >= (n as f64).sqrt() / 2.0 - 1e-8);
        ratios.push(sim / (n as f64).sqrt());
        if n <= 4 {
            let pb = pb_probe(&b, &PbSearch::for_bundle(&b, PB_SEED)).unwrap().value;
            assert!(th.separation_pb_band.contains(pb), "n = {n}: pb {pb}");
        }
    }
    assert!(ratios.iter().all(|&r| (0.5..=0.75).contains(&r)), "{ratios:?}");
}

#[test]
fn eps_zero_and_target_constant() {
    let b = car(3, 0.0);
    assert_eq!(similarity_lower(&b).unwrap(), 0.0);
    assert!((norm(&b.t_matrix()) - 1.0).abs() < 1e-12);
    let v = pb_probe(&b, &PbSearch::for_bundle(&b, 1)).unwrap().value;
    assert!(v <= 1.0 + 1e-6 && v >= 1.0 - 1e-12);
    assert_eq!(eps_for_target_c(2.0, 4.0).unwrap(), 0.25);
    assert!(eps_for_target_c(1.0 + 1e-9, 1.0).unwrap() < 1e-8);
    assert!(matches!(eps_for_target_c(1.0, 4.0), Err(Error::Domain(_))));
}

#[test]
fn pb_probe_sees_norm_of_t() {
    for eps in [0.3, 1.0] {
        let b = car(2, eps);
        let v = pb_probe(&b, &PbSearch::for_bundle(&b, 5)).unwrap().value;
        assert!(v >= norm(&b.t_matrix()) - 1e-10 && v >= 1.0);
    }
}
