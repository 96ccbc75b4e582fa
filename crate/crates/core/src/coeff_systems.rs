//! Coefficient families `C_1, …, C_n`: CAR matrices, Haar unitaries and
//! canonical basis vectors, plus the row bound and tensor certificates.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::norm::{top_singular_pair, EXACT_LIMIT};
use crate::numkit::persist::{read_cmat, write_cmat};
use crate::numkit::{op_norm, ComplexMatrix};
use crate::rng;

pub const CAR_MAX_N: usize = 12;
pub const DEFAULT_RESTARTS: usize = 32;

const ASCENT_MAX_STEPS: usize = 500;
const ASCENT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Car,
    HaarUnitary,
    BasisVector,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Car => "car",
            SystemKind::HaarUnitary => "haar_unitary",
            SystemKind::BasisVector => "basis_vector",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSystem {
    pub kind: SystemKind,
    pub n: usize,
    /// `(out_dim, in_dim)` shared by every element.
    pub op_dim: (usize, usize),
    pub elements: Vec<ComplexMatrix>,
    pub seed: Option<u64>,
    /// Common factor applied to every element after construction (1 unless rescaled).
    pub scale: f64,
}

impl CoefficientSystem {
    pub fn is_square(&self) -> bool {
        self.op_dim.0 == self.op_dim.1
    }

    /// Same family with every element multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::pre(format!("scale must be positive and finite, got {s}")));
        }
        Ok(Self {
            elements: self.elements.iter().map(|c| c.scale_real(s)).collect(),
            scale: self.scale * s,
            ..self.clone()
        })
    }

    /// Entrywise conjugate family `(C̄_k)`. Its row bound equals that of the
    /// original since `‖Σα_k C̄_k‖ = ‖Σᾱ_k C_k‖`.
    pub fn conj(&self) -> Self {
        Self { elements: self.elements.iter().map(|c| c.conj()).collect(), ..self.clone() }
    }

    /// `Σ_k α_k C_k`.
    pub fn combine(&self, alpha: &[Complex64]) -> Result<ComplexMatrix> {
        if alpha.len() != self.n {
            return Err(Error::dim(format!("{} coefficients for {} elements", alpha.len(), self.n)));
        }
        let mut m = ComplexMatrix::zeros(self.op_dim.0, self.op_dim.1);
        for (a, c) in alpha.iter().zip(&self.elements) {
            m.add_scaled(*a, c)?;
        }
        Ok(m)
    }

    /// Writes `system.json` and `c_XXX.cmat` files into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let meta = SystemMeta {
            kind: self.kind,
            n: self.n,
            dim: self.op_dim,
            seed: self.seed,
            scale: self.scale,
        };
        fs::write(dir.join("system.json"), serde_json::to_string_pretty(&meta)?)?;
        for (k, c) in self.elements.iter().enumerate() {
            write_cmat(&dir.join(format!("c_{:03}.cmat", k + 1)), c, &format!("C_{}", k + 1), self.seed)?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let meta: SystemMeta = serde_json::from_str(&fs::read_to_string(dir.join("system.json"))?)?;
        let elements = (1..=meta.n)
            .map(|k| read_cmat(&dir.join(format!("c_{k:03}.cmat"))))
            .collect::<Result<Vec<_>>>()?;
        if elements.iter().any(|c| c.shape() != meta.dim) {
            return Err(Error::Format("element shape disagrees with system.json".into()));
        }
        Ok(Self { kind: meta.kind, n: meta.n, op_dim: meta.dim, elements, seed: meta.seed, scale: meta.scale })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SystemMeta {
    kind: SystemKind,
    n: usize,
    dim: (usize, usize),
    seed: Option<u64>,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Jordan–Wigner CAR matrices `C_k = Z^{⊗(k−1)} ⊗ A ⊗ I^{⊗(n−k)}` with
/// `Z = diag(1, −1)` and `A = [[0, 1], [0, 0]]`.
pub fn car_jordan_wigner(n: usize) -> Result<CoefficientSystem> {
    if !(1..=CAR_MAX_N).contains(&n) {
        return Err(Error::config(format!("CAR size must be in 1..={CAR_MAX_N}, got {n}")));
    }
    let z = ComplexMatrix::diagonal(&[real(1.0), real(-1.0)]);
    let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])?;
    let id = ComplexMatrix::identity(2);
    let elements = (1..=n)
        .map(|k| {
            (1..=n).fold(ComplexMatrix::identity(1), |acc, j| {
                let f = match j.cmp(&k) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => &a,
                    std::cmp::Ordering::Greater => &id,
                };
                acc.kron(f)
            })
        })
        .collect();
    let d = 1usize << n;
    Ok(CoefficientSystem { kind: SystemKind::Car, n, op_dim: (d, d), elements, seed: None, scale: 1.0 })
}

/// Haar unitary of size `dim`: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(r: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_vec(dim, dim, rng::complex_gaussian_vec(r, dim * dim)).expect("finite Gaussian draws");
    let qr = g.to_faer().qr();
    let q = ComplexMatrix::from_faer(qr.compute_Q().as_ref());
    let rd = qr.R();
    let phases: Vec<Complex64> = (0..dim)
        .map(|i| {
            let x = rd[(i, i)];
            if x.norm() > 0.0 {
                x / x.norm()
            } else {
                real(1.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j])
}

/// `n` independent Haar unitaries; element `k` draws from `derive_seed(seed, k)`.
pub fn haar_unitaries(n: usize, dim: usize, seed: u64) -> Result<CoefficientSystem> {
    if n == 0 || dim == 0 {
        return Err(Error::config(format!("haar system needs n ≥ 1 and dim ≥ 1, got n={n}, dim={dim}")));
    }
    let elements = (0..n)
        .map(|k| haar_unitary(&mut rng::seeded(rng::derive_seed(seed, k as u64)), dim))
        .collect();
    Ok(CoefficientSystem {
        kind: SystemKind::HaarUnitary,
        n,
        op_dim: (dim, dim),
        elements,
        seed: Some(seed),
        scale: 1.0,
    })
}

/// Canonical basis `C_k = e_k` as `n×1` columns.
pub fn basis_vectors(n: usize) -> Result<CoefficientSystem> {
    if n == 0 {
        return Err(Error::config("basis system needs n ≥ 1"));
    }
    let elements = (0..n)
        .map(|k| ComplexMatrix::from_fn(n, 1, |i, _| if i == k { real(1.0) } else { real(0.0) }))
        .collect();
    Ok(CoefficientSystem { kind: SystemKind::BasisVector, n, op_dim: (n, 1), elements, seed: None, scale: 1.0 })
}

/// Largest entry of `C_iC_j + C_jC_i` and `C_i*C_j + C_jC_i* − δ_ij I` over all pairs.
pub fn car_residual(s: &CoefficientSystem) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::pre("CAR relations need square elements"));
    }
    let d = s.op_dim.0;
    let mut worst = 0.0f64;
    for i in 0..s.n {
        let ci = &s.elements[i];
        let ci_adj = ci.adjoint();
        for j in i..s.n {
            let cj = &s.elements[j];
            let anti = ci.matmul(cj)?.add(&cj.matmul(ci)?)?;
            worst = worst.max(anti.max_abs());
            let mut mixed = ci_adj.matmul(cj)?.add(&cj.matmul(&ci_adj)?)?;
            if i == j {
                for k in 0..d {
                    mixed[(k, k)] -= real(1.0);
                }
            }
            worst = worst.max(mixed.max_abs());
        }
    }
    Ok(worst)
}

/// Largest `‖U*U − I‖` entry over the elements.
pub fn unitarity_residual(s: &CoefficientSystem) -> Result<f64> {
    let mut worst = 0.0f64;
    for c in &s.elements {
        let g = c.adjoint().matmul(c)?;
        worst = worst.max(g.max_abs_diff(&ComplexMatrix::identity(c.cols())));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowBound {
    /// Best `‖Σα_kC_k‖` found with `‖α‖₂ = 1`: a lower bound on the supremum.
    pub value: f64,
    pub restarts: usize,
    /// Value reached by each restart, in restart order.
    pub per_restart: Vec<f64>,
    pub alpha: Vec<Complex64>,
}

/// Alternating ascent for `sup_{‖α‖₂=1} ‖Σα_kC_k‖`.
///
/// Each step takes the top singular pair `(u, v)` of `Σα_kC_k` and sets
/// `α_k ∝ conj(u*C_kv)`, which cannot decrease the objective. Restart `i`
/// starts from a Gaussian direction seeded by `derive_seed(seed, i)`, so the
/// best value is nondecreasing in `restarts`.
pub fn row_bound(s: &CoefficientSystem, restarts: usize, seed: u64) -> Result<RowBound> {
    let mut per_restart = Vec::with_capacity(restarts);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for i in 0..restarts.max(1) {
        let mut r = rng::seeded(rng::derive_seed(seed, i as u64));
        let mut alpha = rng::complex_gaussian_vec(&mut r, s.n);
        normalize(&mut alpha);
        let mut value = 0.0f64;
        for _ in 0..ASCENT_MAX_STEPS {
            let pair = top_singular_pair(&s.combine(&alpha)?, 1e-14)?;
            let mut next: Vec<Complex64> = s
                .elements
                .iter()
                .map(|c| {
                    let cv = c.matvec(&pair.v);
                    pair.u.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum::<Complex64>().conj()
                })
                .collect();
            let done = pair.value <= value * (1.0 + ASCENT_TOL);
            value = value.max(pair.value);
            if done || normalize(&mut next) == 0.0 {
                break;
            }
            alpha = next;
        }
        per_restart.push(value);
        if value > best.0 {
            best = (value, alpha);
        }
    }
    Ok(RowBound { value: best.0, restarts: restarts.max(1), per_restart, alpha: best.1 })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    n
}

/// `Σ_k C_k ⊗ conj(C_k)` on the `op_dim²` space.
pub fn tensor_conj_sum(s: &CoefficientSystem) -> Result<ComplexMatrix> {
    if !s.is_square() {
        return Err(Error::pre("tensor certificate needs square elements"));
    }
    let d2 = s.op_dim.0 * s.op_dim.0;
    if d2 > EXACT_LIMIT {
        return Err(Error::config(format!(
            "tensor space of dimension {d2} exceeds the norm budget {EXACT_LIMIT}"
        )));
    }
    let mut w = ComplexMatrix::zeros(d2, d2);
    for c in &s.elements {
        w.add_scaled(real(1.0), &c.kron(&c.conj()))?;
    }
    Ok(w)
}

/// `‖Σ_k C_k ⊗ C̄_k‖`.
pub fn tensor_conj_norm(s: &CoefficientSystem) -> Result<f64> {
    Ok(op_norm(&tensor_conj_sum(s)?, 1e-12)?.value)
}

/// `|Σ_k tr(C_k X C_k* Y)|` with `X = Y = I/√(tr I)`, i.e. `Σ_k tr(C_kC_k*)/d`.
/// This is the pairing of the tensor sum with unit vectors `vec(X)`, `vec(Y)`,
/// hence a certified lower bound on [`tensor_conj_norm`].
pub fn trace_witness(s: &CoefficientSystem) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::pre(format!("trace witness needs square elements, got {:?}", s.op_dim)));
    }
    let d = s.op_dim.0 as f64;
    let total: f64 = s.elements.iter().map(|c| c.frobenius_norm().powi(2)).sum();
    Ok(total / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn car_n1_is_the_annihilator() {
        let s = car_jordan_wigner(1).unwrap();
        assert_eq!(s.elements[0], ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap());
    }

    #[test]
    fn car_n2_matches_hand_expansion() {
        let s = car_jordan_wigner(2).unwrap();
        // A ⊗ I and Z ⊗ A written out by hand
        let c1 = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let c2 = ComplexMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(s.elements[0], c1);
        assert_eq!(s.elements[1], c2);
    }

    #[test]
    fn car_relations_and_size_cap() {
        for n in 1..=4 {
            assert!(car_residual(&car_jordan_wigner(n).unwrap()).unwrap() <= 1e-14);
        }
        assert!(matches!(car_jordan_wigner(0), Err(Error::Config(_))));
        assert!(matches!(car_jordan_wigner(13), Err(Error::Config(_))));
    }

    #[test]
    fn basis_vectors_are_an_isometry() {
        let s = basis_vectors(2).unwrap();
        let alpha = [Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        let m = s.combine(&alpha).unwrap();
        assert_eq!(m.as_slice(), &alpha);
        assert!((op_norm(&m, 1e-12).unwrap().value - 5.0).abs() < 1e-12);
        let s = basis_vectors(4).unwrap();
        let mut sum = ComplexMatrix::zeros(4, 4);
        for c in &s.elements {
            sum.add_scaled(real(1.0), &c.matmul(&c.adjoint()).unwrap()).unwrap();
        }
        assert_eq!(sum, ComplexMatrix::identity(4));
        assert_eq!(row_bound(&s, 4, 0).unwrap().value, 1.0);
    }

    #[test]
    fn haar_unitaries_are_unitary_and_reproducible() {
        let a = haar_unitaries(3, 5, 11).unwrap();
        assert!(unitarity_residual(&a).unwrap() <= 1e-10);
        let b = haar_unitaries(3, 5, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, haar_unitaries(3, 5, 12).unwrap());
        let single = haar_unitaries(1, 6, 3).unwrap();
        assert!((row_bound(&single, 4, 1).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_certificates() {
        let h = haar_unitaries(8, 8, 5).unwrap();
        assert!((tensor_conj_norm(&h).unwrap() - 8.0).abs() < 1e-8);
        assert!((trace_witness(&h).unwrap() - 8.0).abs() < 1e-12);
        for n in 2..=4 {
            let s = car_jordan_wigner(n).unwrap();
            let tw = trace_witness(&s).unwrap();
            assert!((tw - n as f64 / 2.0).abs() < 1e-12);
            assert!(tw <= tensor_conj_norm(&s).unwrap() + 1e-8);
        }
        assert!(matches!(trace_witness(&basis_vectors(3).unwrap()), Err(Error::Precondition(_))));
        assert!(matches!(tensor_conj_norm(&car_jordan_wigner(7).unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn car_row_bound_is_one() {
        for n in 2..=4 {
            let rb = row_bound(&car_jordan_wigner(n).unwrap(), 4, 9).unwrap();
            assert!((rb.value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = haar_unitaries(2, 3, 4).unwrap().scaled(0.5).unwrap();
        s.save_dir(dir.path()).unwrap();
        assert_eq!(CoefficientSystem::load_dir(dir.path()).unwrap(), s);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn row_bound_is_monotone_in_restarts(seed in any::<u64>(), k in 1usize..6) {
            let s = haar_unitaries(3, 3, seed).unwrap();
            let a = row_bound(&s, k, seed).unwrap();
            let b = row_bound(&s, k + 3, seed).unwrap();
            prop_assert!(b.value >= a.value);
            prop_assert!(a.value <= 3f64.sqrt() + 1e-9);
        }

        #[test]
        fn trace_witness_below_tensor_norm(seed in any::<u64>(), n in 1usize..5, dim in 1usize..5) {
            let s = haar_unitaries(n, dim, seed).unwrap().scaled(0.7).unwrap();
            prop_assert!(trace_witness(&s).unwrap() <= tensor_conj_norm(&s).unwrap() + 1e-8);
        }

        #[test]
        fn unitary_invariance_of_op_norm(seed in any::<u64>()) {
            let u = haar_unitaries(2, 4, seed).unwrap();
            let mut r = rng::seeded(seed ^ 1);
            let a = ComplexMatrix::from_vec(4, 4, rng::complex_gaussian_vec(&mut r, 16)).unwrap();
            let uav = u.elements[0].matmul(&a).unwrap().matmul(&u.elements[1]).unwrap();
            let x = op_norm(&a, 1e-12).unwrap().value;
            let y = op_norm(&uav, 1e-12).unwrap().value;
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
