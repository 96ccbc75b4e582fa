use std::sync::OnceLock;

use pbnc_core::coeff_systems::car_jordan_wigner;
use pbnc_core::hankel::{build_hankel, lacunary_default, LacunarySpec, MultiplierSeq};
use pbnc_core::martingale::{
    block_eta_sup, eta_modulus_at, eta_sup, eta_weights, fourier_extract, hankel_bridge_check, mobius,
    multiplicativity_check, multiplier_extract, orthogonality_check, radial_mean_check, radius, simulate_paths,
    MartingaleConfig, McEstimate, PathBatch, DEFAULT_SAMPLES, RADIUS_TOL,
};
use pbnc_core::numkit::{families, Polynomial};
use pbnc_core::thresholds::Thresholds;
use pbnc_core::{rng, Complex64};

const K: f64 = 4.0;
const LEVELS: usize = 6;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn paths() -> &'static PathBatch {
    static P: OnceLock<PathBatch> = OnceLock::new();
    P.get_or_init(|| simulate_paths(&MartingaleConfig::new(LEVELS, DEFAULT_SAMPLES, 404)).unwrap())
}

fn poly(tag: u64, i: usize, deg: usize) -> Polynomial {
    families::random_poly(&mut rng::seeded(rng::derive_seed(tag, i as u64)), deg)
}

#[test]
fn radius_invariant_and_uniform_limit() {
    let p = paths();
    assert!(p.max_radius_error() <= RADIUS_TOL);
    for m in 1..=4 {
        let e = radial_mean_check(p, &Polynomial::monomial(m).unwrap(), LEVELS).unwrap();
        assert!(e.within(zero(), K), "E[ψ_L^{m}] = {:?}", e);
    }
    let e = radial_mean_check(p, &Polynomial::one(), LEVELS).unwrap();
    assert_eq!(e.mean, zero());
    for k in 1..=LEVELS {
        let e = radial_mean_check(p, &poly(1, k, 6), k).unwrap();
        assert!(e.within(zero(), K));
    }
}

#[test]
fn first_level_is_uniform_on_the_half_circle() {
    let p = simulate_paths(&MartingaleConfig::new(1, 1000, 3)).unwrap();
    for i in 0..p.n_samples {
        assert!((p.psi(i, 1) - p.z(i, 1) * 0.5).norm() < 1e-15);
        assert!((p.psi(i, 1) - mobius(zero(), p.z(i, 1)).unwrap() * radius(1)).norm() < 1e-15);
    }
}

#[test]
fn eta_moduli_match_the_closed_form() {
    let spec = lacunary_default(LEVELS).unwrap();
    for n in 2..=LEVELS {
        let w = eta_weights(paths(), &spec, n).unwrap();
        let k = 1usize << n;
        let (rn, rp) = (radius(n), radius(n - 1));
        let closed = rn / ((rn * rn - rp * rp) * k as f64 * rp.powi(k as i32 - 1));
        assert!((w.modulus - closed).abs() <= 1e-12 * closed);
        assert!(w.values.iter().all(|v| (v.norm() - w.modulus).abs() <= 1e-12 * w.modulus));
    }
    let th = Thresholds::embedded().unwrap();
    assert!(eta_sup(20) <= th.eta_sup_n20);
    assert!((2..=10).map(block_eta_sup).fold(0.0, f64::max) <= th.block_eta_sup_n10);
    // the limit e²/2 is approached from above
    assert!((eta_modulus_at(40, 1 << 40) - std::f64::consts::E.powi(2) / 2.0).abs() < 1e-6);
}

#[test]
fn fourier_extraction() {
    let p = paths();
    let spec = lacunary_default(LEVELS).unwrap();
    for n in 2..=LEVELS {
        let kn = 1usize << n;
        assert!(fourier_extract(p, &Polynomial::monomial(kn).unwrap(), &spec, n).unwrap().within(one(), K));
        assert!(fourier_extract(p, &Polynomial::monomial(kn + 1).unwrap(), &spec, n).unwrap().within(zero(), K));
        for i in 0..10 {
            let f = poly(2 + n as u64, i, kn + 3);
            let e = fourier_extract(p, &f, &spec, n).unwrap();
            assert!(e.within(f.coeff(kn), K), "level {n} poly {i}: {e:?} vs {}", f.coeff(kn));
        }
    }
}

#[test]
fn extraction_is_exactly_linear_on_a_batch() {
    let p = paths();
    let spec = lacunary_default(LEVELS).unwrap();
    let (f, g) = (poly(9, 0, 20), poly(9, 1, 20));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5));
    let combo = f.scale(a).add(&g.scale(b));
    for n in 2..=LEVELS {
        let lhs = fourier_extract(p, &combo, &spec, n).unwrap().mean;
        let rhs = fourier_extract(p, &f, &spec, n).unwrap().mean * a + fourier_extract(p, &g, &spec, n).unwrap().mean * b;
        assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}

#[test]
fn multiplier_extraction_across_dyadic_blocks() {
    let p = paths();
    let spec = lacunary_default(LEVELS).unwrap();
    for n in 2..=LEVELS {
        for k in (1usize << (n - 1)) + 1..=(1 << n) {
            assert!(multiplier_extract(p, &Polynomial::monomial(k).unwrap(), n, k).unwrap().within(one(), K));
        }
        let f = poly(12, n, 1 << n);
        let same = multiplier_extract(p, &f, n, 1 << n).unwrap();
        assert_eq!(same, fourier_extract(p, &f, &spec, n).unwrap());
        assert!(multiplier_extract(p, &f, n, 1 << (n - 1)).is_err());
    }
}

#[test]
fn martingale_differences_are_orthogonal() {
    let p = paths();
    let z = Polynomial::monomial(1).unwrap();
    for n in 1..=LEVELS {
        assert!(orthogonality_check(p, &z, &z, n, &|_| one()).unwrap().within(zero(), K));
        let (f, g) = (poly(20, n, 6), poly(21, n, 6));
        assert!(orthogonality_check(p, &f, &g, n, &|w: Complex64| w.conj()).unwrap().within(zero(), K));
    }
    let e = orthogonality_check(p, &Polynomial::one(), &z, 1, &|_| one()).unwrap();
    assert_eq!(e.mean, zero());
}

#[test]
fn conditional_multiplicativity_on_bins() {
    let (f, g) = (poly(30, 0, 3), poly(30, 1, 4));
    let m = multiplicativity_check(paths(), &f, &g, 3, 64).unwrap();
    assert!(m.worst_z <= K, "worst bin {}", m.worst_z);
}

#[test]
fn halving_samples_inflates_stderr_by_about_root_two() {
    let f = Polynomial::monomial(3).unwrap();
    let mut ratios = Vec::new();
    for rep in 0..10u64 {
        let full = simulate_paths(&MartingaleConfig::new(3, 20_000, 100 + rep)).unwrap();
        let half = simulate_paths(&MartingaleConfig::new(3, 10_000, 200 + rep)).unwrap();
        let s = |b: &PathBatch| radial_mean_check(b, &f, 3).unwrap().stderr;
        ratios.push(s(&half) / s(&full));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((1.2..=1.7).contains(&mean), "{ratios:?}");
}

#[test]
fn bridge_matches_exact_hankel_contraction() {
    let spec = LacunarySpec::new(vec![1, 4, 8]).unwrap();
    let car = car_jordan_wigner(3).unwrap();
    let g = build_hankel(&MultiplierSeq::indicator(&spec), &spec, &car, 9).unwrap();
    let p = simulate_paths(&MartingaleConfig::new(3, DEFAULT_SAMPLES, 77)).unwrap();
    let mut r = rng::seeded(8);
    let x = rng::complex_gaussian_vec(&mut r, 8);
    let y = rng::complex_gaussian_vec(&mut r, 8);
    // single antidiagonal: exact = ⟨C_t x, ȳ⟩
    for (t, &k) in spec.k().iter().enumerate() {
        let res = hankel_bridge_check(&p, &g, &car, &Polynomial::monomial(k).unwrap(), &x, &y, &spec).unwrap();
        let direct: Complex64 = y.iter().zip(car.elements[t].matvec(&x)).map(|(a, b)| a * b).sum();
        assert!((res.exact - direct).norm() < 1e-12);
        assert!(res.mc.within(res.exact, K));
    }
    let res = hankel_bridge_check(&p, &g, &car, &Polynomial::one(), &x, &y, &spec).unwrap();
    assert_eq!((res.exact, res.mc.mean), (zero(), zero()));
    for i in 0..5 {
        let res = hankel_bridge_check(&p, &g, &car, &poly(40, i, 14), &x, &y, &spec).unwrap();
        assert!(res.mc.within(res.exact, K), "{res:?}");
    }
}

#[test]
fn estimates_are_reproducible_per_seed() {
    let cfg = MartingaleConfig::new(4, 10_000, 5);
    let (a, b) = (simulate_paths(&cfg).unwrap(), simulate_paths(&cfg).unwrap());
    assert_eq!(a, b);
    let f = poly(50, 0, 9);
    let ea: McEstimate = radial_mean_check(&a, &f, 4).unwrap();
    assert_eq!(ea, radial_mean_check(&b, &f, 4).unwrap());
}
