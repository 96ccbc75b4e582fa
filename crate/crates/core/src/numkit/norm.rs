//! Spectral norm (largest singular value) estimation.
//!
//! Two routes: an exact Hermitian eigensolve of the Gram matrix, used while
//! the matrix fits the dense budget, and a seeded power iteration on `A*A`
//! for anything larger or for matrix-free operators.

use std::collections::BTreeMap;

use faer::Side;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Largest dimension handled by the dense eigensolve route.
pub const EXACT_LIMIT: usize = 4096;
/// Eigenvectors (and hence the residual check) are computed up to this Gram size.
pub const RESIDUAL_LIMIT: usize = 2048;
pub const POWER_ITERATION_CAP: usize = 100_000;
pub const DEFAULT_START_SEED: u64 = 0x5EED_0F_A11;

/// Below this fill ratio the Gram matrix is accumulated from the nonzeros.
const SPARSE_GRAM_DENSITY: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactEigensolve,
    PowerIteration,
    LanczosBidiagonalization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub tolerance: f64,
    pub iterations: usize,
    /// `‖A*Av − value²v‖` for the returned top eigenvector, when computed.
    pub residual: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    pub tol: f64,
    pub exact_limit: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl NormOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            exact_limit: EXACT_LIMIT,
            max_iterations: POWER_ITERATION_CAP,
            seed: DEFAULT_START_SEED,
        }
    }
}

/// A linear map that can be applied together with its adjoint.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOperator for ComplexMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matvec(x)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.adjoint_matvec(y)
    }
}

/// Largest singular value of `a` to relative accuracy `tol`.
pub fn op_norm(a: &ComplexMatrix, tol: f64) -> Result<NormEstimate> {
    op_norm_with(a, &NormOptions::new(tol))
}

pub fn op_norm_with(a: &ComplexMatrix, opts: &NormOptions) -> Result<NormEstimate> {
    if !(opts.tol > 0.0) {
        return Err(Error::pre(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if a.rows() == 0 || a.cols() == 0 || a.is_zero() {
        return Ok(NormEstimate {
            value: 0.0,
            method: NormMethod::ExactEigensolve,
            tolerance: opts.tol,
            iterations: 0,
            residual: Some(0.0),
        });
    }
    // The eigensolve cost is set by the Gram dimension, i.e. the smaller side.
    if a.rows().min(a.cols()) <= opts.exact_limit {
        exact_norm(a, opts.tol)
    } else {
        power_norm(a, opts).map(|(est, _)| est)
    }
}

fn is_sparse(a: &ComplexMatrix) -> bool {
    (a.nnz() as f64) < SPARSE_GRAM_DENSITY * (a.rows() * a.cols()) as f64
}

/// Gram entries on the smaller side (`A*A` when tall, `AA*` when wide),
/// accumulated from the nonzeros in row order.
fn sparse_gram_entries(a: &ComplexMatrix) -> (usize, BTreeMap<(usize, usize), Complex64>) {
    let tall = a.cols() <= a.rows();
    let n = if tall { a.cols() } else { a.rows() };
    let outer = if tall { a.rows() } else { a.cols() };
    let mut g = BTreeMap::new();
    let mut nz: Vec<(usize, Complex64)> = Vec::new();
    for r in 0..outer {
        nz.clear();
        if tall {
            nz.extend(a.row(r).iter().enumerate().filter(|(_, z)| z.norm_sqr() > 0.0).map(|(j, &z)| (j, z)));
        } else {
            // column r of A, conjugated, plays the role of a row of A*
            nz.extend((0..a.rows()).filter_map(|i| {
                let z = a[(i, r)];
                (z.norm_sqr() > 0.0).then(|| (i, z.conj()))
            }));
        }
        for &(p, zp) in &nz {
            for &(q, zq) in &nz {
                *g.entry((p, q)).or_insert(Complex64::new(0.0, 0.0)) += zp.conj() * zq;
            }
        }
    }
    (n, g)
}

fn gram(a: &ComplexMatrix) -> ComplexMatrix {
    if is_sparse(a) {
        let (n, entries) = sparse_gram_entries(a);
        let mut g = ComplexMatrix::zeros(n, n);
        for ((p, q), z) in entries {
            g[(p, q)] = z;
        }
        return g;
    }
    let f = a.to_faer();
    let g = if a.cols() <= a.rows() { f.adjoint() * &f } else { &f * f.adjoint() };
    ComplexMatrix::from_faer(g.as_ref())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Diagonal blocks of the Gram matrix after permuting its connected
/// components together. For sparse input the spectrum is the union of the
/// block spectra, so large but highly structured operators never need a
/// full-size eigensolve.
fn gram_blocks(a: &ComplexMatrix) -> Vec<ComplexMatrix> {
    if !is_sparse(a) {
        return vec![gram(a)];
    }
    let (n, entries) = sparse_gram_entries(a);
    let mut parent: Vec<usize> = (0..n).collect();
    for &(p, q) in entries.keys() {
        let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
        if rp != rq {
            parent[rp.max(rq)] = rp.min(rq);
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if entries.contains_key(&(i, i)) {
            let root = find(&mut parent, i);
            members.entry(root).or_default().push(i);
        }
    }
    members
        .into_values()
        .map(|idx| {
            let m = idx.len();
            ComplexMatrix::from_fn(m, m, |r, c| {
                entries.get(&(idx[r], idx[c])).copied().unwrap_or(Complex64::new(0.0, 0.0))
            })
        })
        .collect()
}

/// Largest eigenvalue of a Hermitian block, with the eigen-residual when the
/// block is small enough for eigenvectors.
fn top_eigen(g: &ComplexMatrix) -> Result<(f64, Option<f64>)> {
    let n = g.rows();
    let gf = g.to_faer();
    if n <= RESIDUAL_LIMIT {
        let eig = gf
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Domain(format!("eigensolve failed: {e:?}")))?;
        let lambda = eig.S().column_vector()[n - 1].re;
        let v: Vec<Complex64> = (0..n).map(|i| eig.U()[(i, n - 1)]).collect();
        let gv = g.matvec(&v);
        let res = gv
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - y * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok((lambda, Some(res)))
    } else {
        let vals = gf
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Domain(format!("eigensolve failed: {e:?}")))?;
        Ok((vals[n - 1], None))
    }
}

fn exact_norm(a: &ComplexMatrix, tol: f64) -> Result<NormEstimate> {
    let mut best = (f64::NEG_INFINITY, None);
    for block in gram_blocks(a) {
        let top = top_eigen(&block)?;
        if top.0 > best.0 {
            best = top;
        }
    }
    let (lambda, residual) = best;
    Ok(NormEstimate {
        value: lambda.max(0.0).sqrt(),
        method: NormMethod::ExactEigensolve,
        tolerance: tol,
        iterations: 1,
        residual,
    })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Power iteration on `A*A` from a seeded Gaussian start.
///
/// Returns the estimate and the final right singular vector. The Rayleigh
/// quotient never exceeds `σ_max²`, so the value is always a lower bound.
pub fn power_norm(op: &dyn LinearOperator, opts: &NormOptions) -> Result<(NormEstimate, Vec<Complex64>)> {
    let mut r = rng::seeded(opts.seed);
    let mut v = rng::complex_gaussian_vec(&mut r, op.ncols());
    normalize(&mut v);
    power_norm_from(op, v, opts)
}

pub fn power_norm_from(
    op: &dyn LinearOperator,
    mut v: Vec<Complex64>,
    opts: &NormOptions,
) -> Result<(NormEstimate, Vec<Complex64>)> {
    if normalize(&mut v) == 0.0 {
        return Err(Error::pre("power iteration start vector is zero"));
    }
    let mut prev = f64::NAN;
    for it in 1..=opts.max_iterations {
        let w = op.apply(&v);
        let rho = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if rho == 0.0 {
            return Ok((
                NormEstimate {
                    value: 0.0,
                    method: NormMethod::PowerIteration,
                    tolerance: opts.tol,
                    iterations: it,
                    residual: None,
                },
                v,
            ));
        }
        let converged = (rho - prev).abs() < opts.tol * rho;
        let mut next = op.apply_adjoint(&w);
        normalize(&mut next);
        if converged {
            return Ok((
                NormEstimate {
                    value: rho.sqrt(),
                    method: NormMethod::PowerIteration,
                    tolerance: opts.tol,
                    iterations: it,
                    residual: None,
                },
                v,
            ));
        }
        prev = rho;
        v = next;
    }
    Err(Error::NonConvergence { iterations: opts.max_iterations, last_value: prev.max(0.0).sqrt() })
}

/// Largest Krylov basis before restarting from the top Ritz vector.
const LANCZOS_BASIS: usize = 96;
/// Ritz values are recomputed every this many steps.
const LANCZOS_CHECK: usize = 4;

fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for b in basis {
            let c: Complex64 = b.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
            for (a, x) in w.iter_mut().zip(b) {
                *a -= c * x;
            }
        }
    }
}

/// Top eigenpair of `BᵀB` for the upper bidiagonal `B` with diagonal `alpha`
/// and superdiagonal `beta`.
fn bidiagonal_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = alpha.len();
    let t = faer::Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i] * alpha[i] + if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 }
        } else if j == i + 1 {
            alpha[i] * beta[i]
        } else if i == j + 1 {
            alpha[j] * beta[j]
        } else {
            0.0
        }
    });
    let eig = t.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Domain(format!("eigensolve failed: {e:?}")))?;
    let y = (0..k).map(|i| eig.U()[(i, k - 1)]).collect();
    Ok((eig.S().column_vector()[k - 1].max(0.0), y))
}

/// Golub–Kahan–Lanczos bidiagonalization with full reorthogonalization.
///
/// The top singular value of the projected bidiagonal matrix `U*AV` never
/// exceeds `σ_max(A)`, so every iterate is a lower bound. Converges when two
/// Ritz values `LANCZOS_CHECK` steps apart differ by less than `tol` relative;
/// without convergence the basis restarts from the top Ritz vector. The
/// iteration count is the number of `A` applications, capped by
/// `max_iterations`.
pub fn lanczos_norm(op: &dyn LinearOperator, opts: &NormOptions) -> Result<(NormEstimate, Vec<Complex64>)> {
    let mut r = rng::seeded(opts.seed);
    let mut start = rng::complex_gaussian_vec(&mut r, op.ncols());
    let mut applied = 0usize;
    let mut last = f64::NAN;
    let estimate = |value: f64, iterations: usize| NormEstimate {
        value,
        method: NormMethod::LanczosBidiagonalization,
        tolerance: opts.tol,
        iterations,
        residual: None,
    };
    loop {
        if normalize(&mut start) == 0.0 {
            return Err(Error::pre("Lanczos start vector is zero"));
        }
        let mut vs = vec![start.clone()];
        let mut us: Vec<Vec<Complex64>> = Vec::new();
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let mut u = op.apply(&start);
        applied += 1;
        let mut breakdown = false;
        loop {
            orthogonalize(&mut u, &us);
            let a = normalize(&mut u);
            alpha.push(a);
            us.push(u.clone());
            if a <= f64::EPSILON * alpha[0].max(1e-300) {
                breakdown = true;
            }
            let k = alpha.len();
            let full = k >= LANCZOS_BASIS || k >= op.ncols().min(op.nrows());
            if breakdown || full || k % LANCZOS_CHECK == 0 {
                let (lambda, y) = bidiagonal_top(&alpha, &beta[..k - 1])?;
                let value = lambda.sqrt();
                let ritz = |y: &[f64]| -> Vec<Complex64> {
                    let mut v = vec![Complex64::new(0.0, 0.0); op.ncols()];
                    for (coef, b) in y.iter().zip(&vs) {
                        for (a, x) in v.iter_mut().zip(b) {
                            *a += x * *coef;
                        }
                    }
                    v
                };
                if breakdown || value == 0.0 || (value - last).abs() <= opts.tol * value {
                    return Ok((estimate(value, applied), ritz(&y)));
                }
                last = value;
                if full {
                    start = ritz(&y);
                    break;
                }
            }
            if applied >= opts.max_iterations {
                return Err(Error::NonConvergence { iterations: applied, last_value: last.max(0.0) });
            }
            let mut v = op.apply_adjoint(&u);
            for (x, y) in v.iter_mut().zip(vs.last().unwrap()) {
                *x -= y * a;
            }
            orthogonalize(&mut v, &vs);
            let b = normalize(&mut v);
            if b <= f64::EPSILON * alpha[0].max(1e-300) {
                // invariant subspace: B is exact on it
                let (lambda, y) = bidiagonal_top(&alpha, &beta)?;
                let mut vv = vec![Complex64::new(0.0, 0.0); op.ncols()];
                for (coef, bvec) in y.iter().zip(&vs) {
                    for (acc, x) in vv.iter_mut().zip(bvec) {
                        *acc += x * *coef;
                    }
                }
                return Ok((estimate(lambda.sqrt(), applied), vv));
            }
            beta.push(b);
            vs.push(v.clone());
            u = op.apply(&v);
            applied += 1;
            for (x, y) in u.iter_mut().zip(us.last().unwrap()) {
                *x -= y * b;
            }
        }
    }
}

/// Top singular triple `A v = σ u`.
#[derive(Clone, Debug)]
pub struct SingularPair {
    pub value: f64,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

pub fn top_singular_pair(a: &ComplexMatrix, tol: f64) -> Result<SingularPair> {
    let (value, v) = if a.cols() <= RESIDUAL_LIMIT && a.rows() <= EXACT_LIMIT.max(a.cols()) {
        let f = a.to_faer();
        let g = f.adjoint() * &f;
        let n = a.cols();
        let eig = g
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Domain(format!("eigensolve failed: {e:?}")))?;
        let v: Vec<Complex64> = (0..n).map(|i| eig.U()[(i, n - 1)]).collect();
        (eig.S().column_vector()[n - 1].re.max(0.0).sqrt(), v)
    } else {
        let (est, v) = power_norm(a, &NormOptions::new(tol))?;
        (est.value, v)
    };
    Ok(pair_from_right(a, value, v))
}

/// Completes a right singular vector into a triple; `u` is any unit vector
/// when `σ = 0`.
pub fn pair_from_right(op: &dyn LinearOperator, value: f64, v: Vec<Complex64>) -> SingularPair {
    let mut u = op.apply(&v);
    if normalize(&mut u) == 0.0 {
        u = vec![Complex64::new(0.0, 0.0); op.nrows()];
        if let Some(first) = u.first_mut() {
            *first = Complex64::new(1.0, 0.0);
        }
    }
    SingularPair { value, u, v }
}
