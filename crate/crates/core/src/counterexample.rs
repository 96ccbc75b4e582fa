//! The truncated operator `T = [[ᵗS, εG], [0, S]]`, its polynomial calculus,
//! the polynomial-boundedness probe and the certified cb lower bound.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff_systems::{haar_unitaries, row_bound, CoefficientSystem, SystemKind, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::hankel::{
    build_hankel, probe_family, BlockHankel, LacunarySpec, MultiplierSeq, ProbeBudget, ProbeFamily,
};
use crate::numkit::families::{self, coefficient_ascent};
use crate::numkit::norm::{lanczos_norm, pair_from_right, NormOptions, EXACT_LIMIT};
use crate::numkit::persist::write_cmat;
use crate::numkit::{
    op_norm, toeplitz, toeplitz_block_apply, top_singular_pair, ComplexMatrix, LinearOperator, Polynomial,
};
use crate::{hankel, rng};

/// Bundles up to this total dimension evaluate `P(T)` densely; larger ones
/// use the structured operator with power iteration.
pub const DENSE_BUNDLE_LIMIT: usize = 1024;
const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `H²(H)` truncated to degree `< D`: coordinates `(i, j) ↔ zⁱ ⊗ e_j`, `i` major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSpace {
    #[serde(rename = "D")]
    pub d: usize,
    /// Block dimension of the dual (top) half, the Hankel output space.
    pub out_dim: usize,
    /// Block dimension of the `H²(H)` (bottom) half.
    pub in_dim: usize,
}

impl TruncatedSpace {
    pub fn total_dim(&self) -> usize {
        self.d * (self.out_dim + self.in_dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub system_kind: SystemKind,
    pub n: usize,
    pub spec: Vec<usize>,
    pub seed: Option<u64>,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct OperatorBundle {
    pub space: TruncatedSpace,
    pub g: BlockHankel,
    pub eps: f64,
    pub system: CoefficientSystem,
    pub spec: LacunarySpec,
    pub provenance: Provenance,
}

/// `2ⁿ + 1` for an `n`-element spec, so every `K_t ≤ 2ⁿ` lies in the truncation.
pub fn default_d(spec: &LacunarySpec) -> usize {
    (1usize << spec.len()).max(spec.max_frequency()) + 1
}

/// Assembles the bundle. Supported frequencies must not exceed `D`: then
/// `ᵗS G = G S` holds exactly in the truncation and `P(T)` has the closed
/// block form used throughout.
pub fn build_t(
    system: &CoefficientSystem,
    spec: &LacunarySpec,
    m: &MultiplierSeq,
    d: usize,
    eps: f64,
) -> Result<OperatorBundle> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::pre(format!("eps must be finite and nonnegative, got {eps}")));
    }
    if spec.len() != system.n {
        return Err(Error::config(format!("spec has {} frequencies but the system has {} elements", spec.len(), system.n)));
    }
    if d == 0 {
        return Err(Error::config("truncation size D must be at least 1"));
    }
    if let Some(k) = (d + 1..2 * d).find(|&k| m.get(k) != ZERO) {
        return Err(Error::config(format!("supported frequency {k} exceeds D = {d}")));
    }
    let g = build_hankel(m, spec, system, d)?;
    Ok(OperatorBundle {
        space: TruncatedSpace { d, out_dim: system.op_dim.0, in_dim: system.op_dim.1 },
        g,
        eps,
        system: system.clone(),
        spec: spec.clone(),
        provenance: Provenance {
            system_kind: system.kind,
            n: system.n,
            spec: spec.k().to_vec(),
            seed: system.seed,
            scale: system.scale,
        },
    })
}

impl OperatorBundle {
    pub fn total_dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::pre(format!("eps must be finite and nonnegative, got {eps}")));
        }
        Ok(Self { eps, ..self.clone() })
    }

    /// Truncated shift `zⁱ ↦ z^{i+1}` on `D` blocks of size `blk`.
    pub fn shift(&self, blk: usize) -> ComplexMatrix {
        let one = Complex64::new(1.0, 0.0);
        let dim = self.space.d * blk;
        ComplexMatrix::from_fn(dim, dim, |r, c| if r == c + blk { one } else { ZERO })
    }

    /// The full `N×N` matrix `T`.
    pub fn t_matrix(&self) -> ComplexMatrix {
        self.poly_of_t(&Polynomial::monomial(1).expect("degree 1"))
    }

    /// `P(T) = [[T(P)ᵀ ⊗ I, εG(T(P′) ⊗ I)], [0, T(P) ⊗ I]]`.
    pub fn poly_of_t(&self, p: &Polynomial) -> ComplexMatrix {
        let TruncatedSpace { d, out_dim, in_dim } = self.space;
        let tp = toeplitz(p, d);
        let top = d * out_dim;
        let mut m = ComplexMatrix::zeros(self.total_dim(), self.total_dim());
        m.set_block(0, 0, &tp.transpose().kron(&ComplexMatrix::identity(out_dim))).expect("fits");
        m.set_block(top, top, &tp.kron(&ComplexMatrix::identity(in_dim))).expect("fits");
        if self.eps != 0.0 {
            let tdp = toeplitz(&p.derivative(), d).kron(&ComplexMatrix::identity(in_dim));
            let corner = self.g.to_flat().matmul(&tdp).expect("conformable").scale_real(self.eps);
            m.set_block(0, top, &corner).expect("fits");
        }
        m
    }

    /// Matrix-free `P(T)`.
    pub fn poly_operator(&self, p: &Polynomial) -> BundlePolyOperator<'_> {
        let d = self.space.d;
        let mut pc = p.coeffs().to_vec();
        pc.truncate(d);
        let mut dp = p.derivative().coeffs().to_vec();
        dp.truncate(d);
        BundlePolyOperator { b: self, p: pc, dp }
    }

    /// `‖P(T)‖`, dense below [`DENSE_BUNDLE_LIMIT`], otherwise Lanczos bidiagonalization.
    pub fn poly_norm(&self, p: &Polynomial) -> Result<f64> {
        if self.total_dim() <= DENSE_BUNDLE_LIMIT {
            Ok(op_norm(&self.poly_of_t(p), NORM_TOL)?.value)
        } else {
            Ok(lanczos_norm(&self.poly_operator(p), &NormOptions::new(NORM_TOL))?.0.value)
        }
    }

    /// Writes `bundle.json` provenance and `T.cmat`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let meta = serde_json::json!({
            "space": self.space,
            "eps": self.eps,
            "N_total": self.total_dim(),
            "provenance": self.provenance,
        });
        fs::write(dir.join("bundle.json"), serde_json::to_string_pretty(&meta)?)?;
        write_cmat(&dir.join("T.cmat"), &self.t_matrix(), "T", self.provenance.seed)
    }
}

pub fn build_t_default(system: &CoefficientSystem, spec: &LacunarySpec, eps: f64) -> Result<OperatorBundle> {
    build_t(system, spec, &MultiplierSeq::indicator(spec), default_d(spec), eps)
}

pub fn poly_of_t(b: &OperatorBundle, p: &Polynomial) -> ComplexMatrix {
    b.poly_of_t(p)
}

pub struct BundlePolyOperator<'a> {
    b: &'a OperatorBundle,
    p: Vec<Complex64>,
    dp: Vec<Complex64>,
}

impl LinearOperator for BundlePolyOperator<'_> {
    fn nrows(&self) -> usize {
        self.b.total_dim()
    }

    fn ncols(&self) -> usize {
        self.b.total_dim()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let TruncatedSpace { d, out_dim, in_dim } = self.b.space;
        let (xt, xb) = x.split_at(d * out_dim);
        let mut yt = toeplitz_block_apply(&self.p, d, out_dim, xt, true, false);
        if self.b.eps != 0.0 {
            let corner = self.b.g.apply(&toeplitz_block_apply(&self.dp, d, in_dim, xb, false, false));
            for (a, c) in yt.iter_mut().zip(corner) {
                *a += c * self.b.eps;
            }
        }
        yt.extend(toeplitz_block_apply(&self.p, d, in_dim, xb, false, false));
        yt
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let TruncatedSpace { d, out_dim, in_dim } = self.b.space;
        let (yt, yb) = y.split_at(d * out_dim);
        let mut out = toeplitz_block_apply(&self.p, d, out_dim, yt, false, true);
        let mut zb = toeplitz_block_apply(&self.p, d, in_dim, yb, true, true);
        if self.b.eps != 0.0 {
            let corner = toeplitz_block_apply(&self.dp, d, in_dim, &self.b.g.apply_adjoint(yt), true, true);
            for (a, c) in zb.iter_mut().zip(corner) {
                *a += c * self.b.eps;
            }
        }
        out.append(&mut zb);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PbSearch {
    pub restarts: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub random_polys: usize,
    pub ascent_steps: usize,
    pub dense_monomials: usize,
}

impl PbSearch {
    /// Default budget for a bundle: degrees up to `D + 1` (higher ones act as zero).
    pub fn for_bundle(b: &OperatorBundle, seed: u64) -> Self {
        Self {
            restarts: 3,
            max_degree: (b.space.d + 1).min(2 * b.space.d - 1).max(1),
            seed,
            random_polys: 16,
            ascent_steps: 40,
            dense_monomials: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PbProbe {
    /// Empirical max of `‖P(T)‖ / ‖P‖_∞`, a lower bound on the pb constant.
    pub value: f64,
    pub argmax: String,
    pub argmax_poly: Polynomial,
    pub evaluations: usize,
}

/// `‖P(T)‖` and `g_k = ⟨u, Tᵏ v⟩` for a top singular pair of `P(T)`.
fn norm_and_gradient(b: &OperatorBundle, p: &Polynomial, max_degree: usize) -> Result<(f64, Vec<Complex64>)> {
    let pair = if b.total_dim() <= DENSE_BUNDLE_LIMIT {
        top_singular_pair(&b.poly_of_t(p), NORM_TOL)?
    } else {
        let op = b.poly_operator(p);
        let (est, v) = lanczos_norm(&op, &NormOptions::new(NORM_TOL))?;
        pair_from_right(&op, est.value, v)
    };
    let t = b.poly_operator(&Polynomial::monomial(1)?);
    let mut grad = Vec::with_capacity(max_degree + 1);
    let mut tv = pair.v.clone();
    for k in 0..=max_degree {
        if k > 0 {
            tv = t.apply(&tv);
        }
        grad.push(pair.u.iter().zip(&tv).map(|(a, x)| a.conj() * x).sum());
    }
    Ok((pair.value, grad))
}

/// Empirical lower bound on `sup_P ‖P(T)‖ / ‖P‖_∞` over monomials, Fejér
/// kernels, seeded random polynomials and coefficient-space ascent.
pub fn pb_probe(b: &OperatorBundle, search: &PbSearch) -> Result<PbProbe> {
    let d = b.space.d;
    if search.max_degree == 0 || search.max_degree > (2 * d).saturating_sub(2).max(1) {
        return Err(Error::pre(format!("max_degree {} must lie in 1..=2D−2 = {}", search.max_degree, 2 * d - 2)));
    }
    let maxd = search.max_degree;
    let mut best = PbProbe { value: 0.0, argmax: String::new(), argmax_poly: Polynomial::zero(), evaluations: 0 };
    let consider = |best: &mut PbProbe, p: Polynomial, id: String| -> Result<()> {
        let ratio = b.poly_norm(&p)? / p.sup_norm_default().certified_upper;
        best.evaluations += 1;
        if ratio > best.value {
            best.value = ratio;
            best.argmax = id;
            best.argmax_poly = p;
        }
        Ok(())
    };
    // z^k for k > D acts as zero, so the grid stops at min(maxd, D)
    for k in families::monomial_grid(maxd.min(d), search.dense_monomials) {
        consider(&mut best, Polynomial::monomial(k)?, format!("z^{k}"))?;
    }
    for order in families::fejer_orders(maxd) {
        for shift in [0, maxd - 2 * order] {
            consider(&mut best, families::fejer(order, shift), format!("fejer:N{order}+s{shift}"))?;
        }
    }
    let mut r = rng::seeded(search.seed);
    for i in 0..search.random_polys {
        let deg = 1 + (rand::Rng::random::<u64>(&mut r) as usize) % maxd;
        consider(&mut best, families::random_poly(&mut r, deg), format!("random:{i}:deg{deg}"))?;
    }
    let mut starts = vec![best.argmax_poly.clone()];
    for i in 1..search.restarts.max(1) {
        let mut rr = rng::seeded(rng::derive_seed(search.seed, i as u64));
        starts.push(families::random_poly(&mut rr, maxd));
    }
    for (i, start) in starts.iter().enumerate() {
        let res = coefficient_ascent(start, maxd, search.ascent_steps, |p| norm_and_gradient(b, p, maxd))?;
        consider(&mut best, res.poly, format!("ascent:{i}:steps{}", res.accepted_steps))?;
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbCertificate {
    /// Certified lower bound on `‖u_T‖_cb`.
    pub value: f64,
    /// `‖Σ_t C̄_t ⊗ m(K_t) C_t‖`, the norm of the compressed certificate.
    pub compressed_norm: f64,
    /// Sup-norm bound of the matrix polynomial `n^{−1/2} Σ_t C̄_t z^{K_t}`.
    pub row_bound: f64,
    /// Whether `row_bound` is exact (CAR and basis systems) or an ascent estimate.
    pub row_bound_exact: bool,
}

/// `Σ_t C̄_t ⊗ K_t G_{0, K_t − 1}`: the `(0, 0)` block compression of
/// `Σ_t C̄_t ⊗ (P_t(T))_{top-right}` for `P_t = zᵏᵗ`.
pub fn compressed_certificate(b: &OperatorBundle) -> Result<ComplexMatrix> {
    let s = &b.system;
    if !s.is_square() {
        return Err(Error::pre(format!("certificate needs square elements, got {:?}", s.op_dim)));
    }
    let dim2 = s.op_dim.0 * s.op_dim.0;
    if dim2 > EXACT_LIMIT {
        return Err(Error::config(format!("certificate space of dimension {dim2} exceeds the norm budget {EXACT_LIMIT}")));
    }
    let mut w = ComplexMatrix::zeros(dim2, dim2);
    for (t, &k) in b.spec.k().iter().enumerate() {
        if let Some(a) = b.g.antidiagonal(k - 1) {
            w.add_scaled(Complex64::new(k as f64, 0.0), &s.elements[t].conj().kron(a))?;
        }
    }
    Ok(w)
}

/// `ε n^{−1/2} ‖Σ_t C̄_t ⊗ m(K_t)C_t‖ / rb`.
///
/// The matrix polynomial `A(z) = n^{−1/2} Σ_t C̄_t z^{K_t}` has
/// `sup_{|z|=1} ‖A(z)‖ ≤ rb`, and compressing `Σ_t C̄_t ⊗ n^{−1/2} (zᵏᵗ)(T)`
/// to the `1 ⊗ x` coordinates yields `ε n^{−1/2} Σ_t C̄_t ⊗ m(K_t)C_t`.
/// `rb` is exactly the system scale for CAR and basis systems, and the
/// ascent estimate (seeded like the system) for Haar unitaries.
pub fn cb_certificate(b: &OperatorBundle) -> Result<CbCertificate> {
    let compressed_norm = op_norm(&compressed_certificate(b)?, NORM_TOL)?.value;
    let s = &b.system;
    let (rb, exact) = match s.kind {
        SystemKind::Car | SystemKind::BasisVector => (s.scale, true),
        SystemKind::HaarUnitary => (row_bound(s, DEFAULT_RESTARTS, s.seed.unwrap_or(0))?.value, false),
    };
    let value = b.eps * compressed_norm / ((s.n as f64).sqrt() * rb);
    Ok(CbCertificate { value, compressed_norm, row_bound: rb, row_bound_exact: exact })
}

/// Any invertible `V` with `‖V⁻¹TV‖ ≤ 1` has `‖V‖‖V⁻¹‖ ≥ ‖u_T‖_cb ≥` this value.
pub fn similarity_lower(b: &OperatorBundle) -> Result<f64> {
    Ok(cb_certificate(b)?.value)
}

/// `W = Σ_t C̄_t ⊗ P_t(T)` with `P_t = n^{−1/2} zᵏᵗ`, assembled explicitly.
pub fn certificate_matrix(b: &OperatorBundle) -> Result<ComplexMatrix> {
    let s = &b.system;
    let c = 1.0 / (s.n as f64).sqrt();
    let dim = s.op_dim.0 * b.total_dim();
    let mut w = ComplexMatrix::zeros(dim, dim);
    for (t, &k) in b.spec.k().iter().enumerate() {
        let pt = b.poly_of_t(&Polynomial::monomial(k)?.scale(Complex64::new(c, 0.0)));
        w.add_scaled(Complex64::new(1.0, 0.0), &s.elements[t].conj().kron(&pt))?;
    }
    Ok(w)
}

/// `ε = (c − 1) / C_probe`.
pub fn eps_for_target_c(c: f64, c_probe: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::Domain(format!("target constant must exceed 1, got {c}")));
    }
    if !(c_probe > 0.0 && c_probe.is_finite()) {
        return Err(Error::pre(format!("probed constant must be positive, got {c_probe}")));
    }
    Ok((c - 1.0) / c_probe)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcnOptions {
    pub restarts: usize,
    pub hankel_budget: ProbeBudget,
    pub pb_random_polys: usize,
    pub pb_ascent_steps: usize,
    pub pb_restarts: usize,
}

impl Default for FcnOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            hankel_budget: ProbeBudget::default(),
            pb_random_polys: 8,
            pb_ascent_steps: 20,
            pb_restarts: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcnRow {
    pub n: usize,
    pub c: f64,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "N")]
    pub n_total: usize,
    pub seed: u64,
    /// Empirical row bound `K₂` of the raw unitaries; the system is `U_t / K₂`.
    pub k2: f64,
    /// Empirical constant of `‖G T(f′)‖ ≤ C ‖f‖_∞` for the normalized system.
    pub c_probe: f64,
    pub eps: f64,
    pub pb_probe: f64,
    pub similarity_lower: f64,
    pub cb_over_pb: f64,
    /// `cb_over_pb / ((c − 1)√n)`.
    pub scaled: f64,
    /// `similarity_lower / ((c − 1)√ln(N + 1))`.
    pub scaled_log: f64,
}

/// Haar bundle at target constant `c`: `n` unitaries of size `n` divided by
/// their empirical `K₂`, `K_t = 2ᵗ`, `D = 2ⁿ + 1`, `ε = (c − 1)/C_probe`.
pub fn fcn_experiment(n: usize, c: f64, seed: u64, opts: &FcnOptions) -> Result<FcnRow> {
    if c <= 1.0 {
        return Err(Error::Domain(format!("target constant must exceed 1, got {c}")));
    }
    if n == 0 || n > 10 {
        return Err(Error::config(format!("fcn experiment supports 1 ≤ n ≤ 10, got {n}")));
    }
    let raw = haar_unitaries(n, n, seed)?;
    let k2 = row_bound(&raw, opts.restarts, seed)?.value;
    let system = raw.scaled(1.0 / k2)?;
    let spec = hankel::lacunary_default(n)?;
    let m = MultiplierSeq::indicator(&spec);
    let d = default_d(&spec);
    let probe = build_t(&system, &spec, &m, d, 0.0)?;
    let mut c_probe = 0.0f64;
    for (i, fam) in ProbeFamily::ALL.iter().enumerate() {
        let (r, _) = probe_family(&probe.g, *fam, &opts.hankel_budget, rng::derive_seed(seed, i as u64))?;
        c_probe = c_probe.max(r);
    }
    let eps = eps_for_target_c(c, c_probe)?;
    let bundle = probe.with_eps(eps)?;
    let search = PbSearch {
        restarts: opts.pb_restarts,
        random_polys: opts.pb_random_polys,
        ascent_steps: opts.pb_ascent_steps,
        ..PbSearch::for_bundle(&bundle, seed)
    };
    let pb = pb_probe(&bundle, &search)?.value;
    let sim = similarity_lower(&bundle)?;
    let n_total = bundle.total_dim();
    let cb_over_pb = sim / pb;
    Ok(FcnRow {
        n,
        c,
        d,
        n_total,
        seed,
        k2,
        c_probe,
        eps,
        pb_probe: pb,
        similarity_lower: sim,
        cb_over_pb,
        scaled: cb_over_pb / ((c - 1.0) * (n as f64).sqrt()),
        scaled_log: sim / ((c - 1.0) * ((n_total + 1) as f64).ln().sqrt()),
    })
}

/// Both sides of `‖(a_ij)‖ ≤ √n · max_i ‖(Σ_j a_ij a_ij*)^{1/2}‖` for an
/// `n×n` array of blocks.
pub fn row_bound_inequality(blocks: &[Vec<ComplexMatrix>]) -> Result<(f64, f64)> {
    let n = blocks.len();
    if n == 0 || blocks.iter().any(|r| r.len() != n) {
        return Err(Error::dim("row-bound inequality needs a square array of blocks"));
    }
    let full = crate::numkit::block_matrix(blocks)?;
    let lhs = op_norm(&full, NORM_TOL)?.value;
    let mut row_max = 0.0f64;
    for row in blocks {
        // ‖(Σ_j a_ij a_ij*)^{1/2}‖ is the norm of the block row [a_i1 … a_in]
        let r = crate::numkit::block_matrix(&[row.clone()])?;
        row_max = row_max.max(op_norm(&r, NORM_TOL)?.value);
    }
    Ok((lhs, (n as f64).sqrt() * row_max))
}

pub fn row_bound_check(blocks: &[Vec<ComplexMatrix>]) -> Result<bool> {
    let (lhs, rhs) = row_bound_inequality(blocks)?;
    Ok(lhs <= rhs * (1.0 + 1e-12) + 1e-12)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowBoundSuite {
    pub trials: usize,
    pub failures: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
}

/// [`row_bound_check`] on `trials` seeded complex Gaussian `n×n` arrays of
/// `dim×dim` blocks.
pub fn row_bound_suite(n: usize, dim: usize, trials: usize, seed: u64) -> Result<RowBoundSuite> {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut r = rng::seeded(rng::derive_seed(seed, t as u64));
        let blocks: Vec<Vec<ComplexMatrix>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| ComplexMatrix::from_vec(dim, dim, rng::complex_gaussian_vec(&mut r, dim * dim)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let (lhs, rhs) = row_bound_inequality(&blocks)?;
        worst = worst.max(lhs / rhs);
        if !row_bound_check(&blocks)? {
            failures += 1;
        }
    }
    Ok(RowBoundSuite { trials, failures, worst_ratio: worst })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub h_dim: (usize, usize),
    #[serde(rename = "N_total")]
    pub n_total: usize,
    pub eps: f64,
    pub system_kind: SystemKind,
    pub seed: u64,
    /// Empirical max over the probe families (a lower bound on `‖u_T‖`).
    pub pb_probe: f64,
    pub pb_argmax: String,
    /// Certified lower bound on `‖u_T‖_cb`.
    pub cb_lower: f64,
    pub similarity_lower: f64,
    pub row_bound: f64,
    pub row_bound_exact: bool,
    pub probe_budget: PbSearch,
}

pub fn certify(b: &OperatorBundle, search: &PbSearch) -> Result<CertifyReport> {
    let pb = pb_probe(b, search)?;
    let cert = cb_certificate(b)?;
    Ok(CertifyReport {
        n: b.system.n,
        d: b.space.d,
        h_dim: b.system.op_dim,
        n_total: b.total_dim(),
        eps: b.eps,
        system_kind: b.system.kind,
        seed: search.seed,
        pb_probe: pb.value,
        pb_argmax: pb.argmax,
        cb_lower: cert.value,
        similarity_lower: cert.value,
        row_bound: cert.row_bound,
        row_bound_exact: cert.row_bound_exact,
        probe_budget: search.clone(),
    })
}
