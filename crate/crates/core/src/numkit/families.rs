//! Test-polynomial families shared by the boundedness probes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::rng;

/// Analytic Fejér polynomial `z^shift · Σ_{k=0}^{2N} (1 − |k−N|/(N+1)) zᵏ / (N+1)`.
///
/// On the circle its modulus is the Fejér kernel divided by `N+1`, so the
/// sup-norm is exactly 1 (attained at `z = 1`). Products of dilated order-1
/// kernels `Π_{j<J} F₁(z^{2ʲ})` coincide with the order `2ᴶ − 1` kernel.
pub fn fejer(order: usize, shift: usize) -> Polynomial {
    let n = order as f64;
    let mut c = vec![Complex64::new(0.0, 0.0); shift + 2 * order + 1];
    for k in 0..=2 * order {
        let w = 1.0 - (k as f64 - n).abs() / (n + 1.0);
        c[shift + k] = Complex64::new(w / (n + 1.0), 0.0);
    }
    Polynomial::new(c).expect("finite coefficients")
}

/// Seeded random polynomial of the given degree: iid complex Gaussian
/// coefficients scaled by `1/deg`, then divided by the certified sup-norm.
pub fn random_poly<R: Rng + ?Sized>(r: &mut R, degree: usize) -> Polynomial {
    let scale = 1.0 / degree.max(1) as f64;
    let c: Vec<Complex64> = (0..=degree).map(|_| rng::complex_gaussian(r) * scale).collect();
    let p = Polynomial::new(c).expect("finite coefficients");
    let s = p.sup_norm_default().certified_upper;
    if s > 0.0 {
        p.scale(Complex64::new(1.0 / s, 0.0))
    } else {
        p
    }
}

/// Exponents `0..=dense` followed by a geometric grid (eight points per
/// octave) up to `max_k`, always including `max_k` itself.
pub fn monomial_grid(max_k: usize, dense: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..=dense.min(max_k)).collect();
    let mut x = dense.max(1) as f64;
    while (x as usize) < max_k {
        x *= 2f64.powf(0.125);
        let k = (x.round() as usize).min(max_k);
        if ks.last() != Some(&k) {
            ks.push(k);
        }
    }
    if ks.last() != Some(&max_k) {
        ks.push(max_k);
    }
    ks
}

/// Dyadic Fejér orders `1, 2, 4, …` whose polynomial fits in `max_degree`.
pub fn fejer_orders(max_degree: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&n| Some(n * 2)).take_while(|&n| 2 * n <= max_degree).collect()
}

/// `p / ‖p‖_∞` using the certified upper bound, or `None` for `p = 0`.
pub fn sup_normalize(p: &Polynomial) -> Option<Polynomial> {
    let s = p.sup_norm_default().certified_upper;
    (s > 0.0).then(|| p.scale(Complex64::new(1.0 / s, 0.0)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AscentResult {
    pub ratio: f64,
    pub poly: Polynomial,
    pub accepted_steps: usize,
}

/// Coefficient-space ascent for `‖Op(P)‖ / ‖P‖_∞` with `Op` linear in `P`.
///
/// `eval(P)` returns `‖Op(P)‖` and the linear functional `g_k = ⟨u, Op(zᵏ) v⟩`
/// for a top singular pair `(u, v)` of `Op(P)`, so `Re Σ P̂(k) g_k` is the
/// local linearization of the norm. Each step moves along the Fejér-damped
/// direction `Q̂(k) = conj(g_k)(1 − k/(deg+1))`, renormalizes by the certified
/// sup-norm, and is kept only when the ratio improves.
pub fn coefficient_ascent<F>(start: &Polynomial, max_degree: usize, steps: usize, mut eval: F) -> Result<AscentResult>
where
    F: FnMut(&Polynomial) -> Result<(f64, Vec<Complex64>)>,
{
    let mut p = sup_normalize(start).ok_or_else(|| Error::pre("ascent needs a nonzero start polynomial"))?;
    let (norm, mut g) = eval(&p)?;
    let mut best = norm / p.sup_norm_default().certified_upper;
    let mut eta = 0.5;
    let mut accepted = 0;
    for _ in 0..steps {
        let dir: Vec<Complex64> = (0..=max_degree)
            .map(|k| g.get(k).copied().unwrap_or_default().conj() * (1.0 - k as f64 / (max_degree + 1) as f64))
            .collect();
        let Some(q) = sup_normalize(&Polynomial::new(dir)?) else { break };
        let Some(cand) = sup_normalize(&p.add(&q.scale(Complex64::new(eta, 0.0)))) else { break };
        let (n2, g2) = eval(&cand)?;
        let r2 = n2 / cand.sup_norm_default().certified_upper;
        if r2 > best {
            p = cand;
            g = g2;
            best = r2;
            accepted += 1;
            eta = (eta * 1.5).min(4.0);
        } else {
            eta *= 0.5;
            if eta < 1e-3 {
                break;
            }
        }
    }
    Ok(AscentResult { ratio: best, poly: p, accepted_steps: accepted })
}
