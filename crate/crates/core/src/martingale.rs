//! Monte Carlo engine for the dyadic Möbius martingale
//! `ψ_0 = 0`, `ψ_k = r_k Φ(ψ_{k−1}/r_k, Z_k)` with `r_k = 1 − 2^{−k}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff_systems::CoefficientSystem;
use crate::error::{Error, Result};
use crate::hankel::{BlockHankel, LacunarySpec};
use crate::numkit::Polynomial;
use crate::rng;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_BLOCK: usize = 4096;
pub const DEFAULT_BINS: usize = 64;
/// Drift of `|ψ_k|` from `r_k` beyond this triggers renormalization.
pub const RADIUS_TOL: f64 = 1e-12;
const POLE_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `r_k = 1 − 2^{−k}`; `r_0 = 0`.
pub fn radius(k: usize) -> f64 {
    1.0 - 0.5f64.powi(k as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleConfig {
    pub levels: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Paths per independently seeded block.
    pub block_size: usize,
}

impl MartingaleConfig {
    pub fn new(levels: usize, n_samples: usize, seed: u64) -> Self {
        Self { levels, n_samples, seed, block_size: DEFAULT_BLOCK }
    }

    pub fn radii(&self) -> Vec<f64> {
        (1..=self.levels).map(radius).collect()
    }
}

/// `Φ(z, ζ) = (ζ + z)/(1 + z̄ζ)`.
pub fn mobius(z: Complex64, zeta: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain(format!("Möbius parameter must lie in the open disc, got |z| = {}", z.norm())));
    }
    let den = Complex64::new(1.0, 0.0) + z.conj() * zeta;
    if den.norm() < POLE_TOL {
        return Err(Error::Domain("Möbius map evaluated at its pole".into()));
    }
    Ok((zeta + z) / den)
}

/// Sampled paths, row-major: `z[p·L + (k−1)] = Z_k`, `psi[p·(L+1) + k] = ψ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBatch {
    pub levels: usize,
    pub n_samples: usize,
    pub seed: u64,
    z: Vec<Complex64>,
    psi: Vec<Complex64>,
    pub renormalizations: usize,
}

impl PathBatch {
    pub fn z(&self, path: usize, k: usize) -> Complex64 {
        self.z[path * self.levels + k - 1]
    }

    pub fn psi(&self, path: usize, k: usize) -> Complex64 {
        self.psi[path * (self.levels + 1) + k]
    }

    /// `max_{p,k} ||ψ_k| − r_k|`.
    pub fn max_radius_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.n_samples {
            for k in 0..=self.levels {
                worst = worst.max((self.psi(p, k).norm() - radius(k)).abs());
            }
        }
        worst
    }

    /// Sub-batch of the first `n` paths.
    pub fn truncated(&self, n: usize) -> PathBatch {
        let n = n.min(self.n_samples);
        PathBatch {
            levels: self.levels,
            n_samples: n,
            seed: self.seed,
            z: self.z[..n * self.levels].to_vec(),
            psi: self.psi[..n * (self.levels + 1)].to_vec(),
            renormalizations: self.renormalizations,
        }
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.levels {
            return Err(Error::pre(format!("level {n} outside 1..={}", self.levels)));
        }
        Ok(())
    }
}

struct Block {
    z: Vec<Complex64>,
    psi: Vec<Complex64>,
    renorm: usize,
}

fn simulate_block(levels: usize, count: usize, seed: u64) -> Block {
    let mut r = rng::seeded(seed);
    let mut z = Vec::with_capacity(count * levels);
    let mut psi = Vec::with_capacity(count * (levels + 1));
    let mut renorm = 0;
    for _ in 0..count {
        let mut prev = ZERO;
        psi.push(prev);
        for k in 1..=levels {
            let zk = Complex64::from_polar(1.0, 2.0 * PI * r.random::<f64>());
            let rk = radius(k);
            // |ψ_{k−1}/r_k| = r_{k−1}/r_k < 1 and |Z_k| = 1, so no pole
            let mut next = mobius(prev / rk, zk).expect("inside the disc") * rk;
            if (next.norm() - rk).abs() > RADIUS_TOL {
                next *= rk / next.norm();
                renorm += 1;
            }
            z.push(zk);
            psi.push(next);
            prev = next;
        }
    }
    Block { z, psi, renorm }
}

/// Independent paths in blocks of `block_size`, block `b` seeded by
/// `derive_seed(seed, b)` and concatenated in block order.
pub fn simulate_paths(cfg: &MartingaleConfig) -> Result<PathBatch> {
    if cfg.levels == 0 || cfg.levels > 52 {
        return Err(Error::config(format!("levels must be in 1..=52, got {}", cfg.levels)));
    }
    if cfg.n_samples < 2 || cfg.block_size == 0 {
        return Err(Error::config("need at least two samples and a positive block size"));
    }
    let blocks = cfg.n_samples.div_ceil(cfg.block_size);
    let parts: Vec<Block> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = cfg.block_size.min(cfg.n_samples - b * cfg.block_size);
            simulate_block(cfg.levels, count, rng::derive_seed(cfg.seed, b as u64))
        })
        .collect();
    let mut batch = PathBatch {
        levels: cfg.levels,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        z: Vec::with_capacity(cfg.n_samples * cfg.levels),
        psi: Vec::with_capacity(cfg.n_samples * (cfg.levels + 1)),
        renormalizations: 0,
    };
    for p in parts {
        batch.z.extend(p.z);
        batch.psi.extend(p.psi);
        batch.renormalizations += p.renorm;
    }
    Ok(batch)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    /// Complex sample standard deviation over `√n_samples`.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_samples(samples: &[Complex64], seed: u64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<Complex64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n.max(2) - 1) as f64;
        Self { mean, stderr: (var / n as f64).sqrt(), n_samples: n, seed }
    }

    /// `|mean − target| ≤ k·stderr` (exact agreement always passes).
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.stderr
    }
}

/// `E[F(ψ_k)] − F̂(0)`, which vanishes since `ψ_k` is uniform on the circle of radius `r_k`.
pub fn radial_mean_check(paths: &PathBatch, f: &Polynomial, k: usize) -> Result<McEstimate> {
    if k > paths.levels {
        return Err(Error::pre(format!("level {k} exceeds {}", paths.levels)));
    }
    let c0 = f.coeff(0);
    let s: Vec<Complex64> = (0..paths.n_samples).map(|p| f.eval(paths.psi(p, k)) - c0).collect();
    Ok(McEstimate::from_samples(&s, paths.seed))
}

/// `|η_{n−1,k}| = r_n / ((r_n² − r_{n−1}²) k r_{n−1}^{k−1})` (with `0⁰ = 1`).
pub fn eta_modulus_at(n: usize, k: usize) -> f64 {
    let (rn, rp) = (radius(n), radius(n - 1));
    // r_n − r_{n−1} = 2^{−n} exactly, which avoids cancellation for large n
    let gap = 0.5f64.powi(n as i32) * (rn + rp);
    let power = if k == 1 { 1.0 } else { ((k - 1) as f64 * (-0.5f64.powi(n as i32 - 1)).ln_1p()).exp() };
    rn / (gap * k as f64 * power)
}

/// `|η_{n−1}|` for frequency `K_n`.
pub fn eta_modulus(spec: &LacunarySpec, n: usize) -> Result<f64> {
    let k = spec.get(n).ok_or_else(|| Error::pre(format!("spec has no K_{n}")))?;
    Ok(eta_modulus_at(n, k))
}

/// `η_{n−1,k} = ξ̄_{n−1}^{k−1} |η_{n−1,k}|` with `ξ_{n−1} = ψ_{n−1}/r_{n−1}`.
/// At `n = 1` the phase factor is `ξ⁰ = 1`, meaningful only for `k = 1`.
fn eta_path(paths: &PathBatch, p: usize, n: usize, k: usize, modulus: f64) -> Complex64 {
    if n == 1 {
        return Complex64::new(modulus, 0.0);
    }
    let xi = paths.psi(p, n - 1) / radius(n - 1);
    xi.conj().powu(k as u32 - 1) * modulus
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaWeights {
    pub level: usize,
    pub modulus: f64,
    pub values: Vec<Complex64>,
}

/// Per-path `η_{n−1}` for `n ≥ 2`.
pub fn eta_weights(paths: &PathBatch, spec: &LacunarySpec, n: usize) -> Result<EtaWeights> {
    if n < 2 {
        return Err(Error::pre("η weights are defined from level 2 on"));
    }
    paths.check_level(n)?;
    let k = spec.get(n).ok_or_else(|| Error::pre(format!("spec has no K_{n}")))?;
    let modulus = eta_modulus_at(n, k);
    let values = (0..paths.n_samples).map(|p| eta_path(paths, p, n, k, modulus)).collect();
    Ok(EtaWeights { level: n, modulus, values })
}

/// `max_{2 ≤ n ≤ n_max} |η_{n−1}|` for `K_n = 2ⁿ`.
pub fn eta_sup(n_max: usize) -> f64 {
    (2..=n_max).map(|n| eta_modulus_at(n, 1 << n)).fold(0.0, f64::max)
}

/// Samples `η_{n−1,k} Z̄_n (F(ψ_n) − F(ψ_{n−1}))`.
fn extraction_samples(paths: &PathBatch, f: &Polynomial, n: usize, k: usize) -> Vec<Complex64> {
    let modulus = eta_modulus_at(n, k);
    (0..paths.n_samples)
        .map(|p| {
            let df = f.eval(paths.psi(p, n)) - f.eval(paths.psi(p, n - 1));
            eta_path(paths, p, n, k, modulus) * paths.z(p, n).conj() * df
        })
        .collect()
}

/// Level-1 extraction only reaches frequency 1 since `ψ_1 = r_1 Z_1`.
fn check_extractable(n: usize, k: usize) -> Result<()> {
    if n == 1 && k != 1 {
        return Err(Error::pre(format!("level 1 extracts frequency 1 only, got {k}")));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[η_{n−1} Z̄_n (F(ψ_n) − F(ψ_{n−1}))] = F̂(K_n)`.
pub fn fourier_extract(paths: &PathBatch, f: &Polynomial, spec: &LacunarySpec, n: usize) -> Result<McEstimate> {
    paths.check_level(n)?;
    let k = spec.get(n).ok_or_else(|| Error::pre(format!("spec has no K_{n}")))?;
    check_extractable(n, k)?;
    Ok(McEstimate::from_samples(&extraction_samples(paths, f, n, k), paths.seed))
}

/// Same extraction at an arbitrary `k ∈ (2^{n−1}, 2ⁿ]`, estimating `F̂(k)`.
pub fn multiplier_extract(paths: &PathBatch, f: &Polynomial, n: usize, k: usize) -> Result<McEstimate> {
    paths.check_level(n)?;
    let lo = 1usize << (n - 1);
    let hi = 1usize << n;
    if !(k > lo && k <= hi) {
        return Err(Error::pre(format!("frequency {k} outside the level-{n} block ({lo}, {hi}]")));
    }
    check_extractable(n, k)?;
    Ok(McEstimate::from_samples(&extraction_samples(paths, f, n, k), paths.seed))
}

/// `max_{k ∈ (2^{n−1}, 2ⁿ]} |η_{n−1,k}|`.
pub fn block_eta_sup(n: usize) -> f64 {
    ((1usize << (n - 1)) + 1..=(1usize << n)).map(|k| eta_modulus_at(n, k)).fold(0.0, f64::max)
}

/// `E[Z̄_n dF_n dG_n φ(ψ_{n−1})]`, which vanishes because `dF_n` and `dG_n`
/// are analytic in `Z_n` without constant term.
pub fn orthogonality_check(
    paths: &PathBatch,
    f: &Polynomial,
    g: &Polynomial,
    n: usize,
    phi: &dyn Fn(Complex64) -> Complex64,
) -> Result<McEstimate> {
    paths.check_level(n)?;
    let s: Vec<Complex64> = (0..paths.n_samples)
        .map(|p| {
            let (a, b) = (paths.psi(p, n), paths.psi(p, n - 1));
            let df = f.eval(a) - f.eval(b);
            let dg = g.eval(a) - g.eval(b);
            paths.z(p, n).conj() * df * dg * phi(b)
        })
        .collect();
    Ok(McEstimate::from_samples(&s, paths.seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeResult {
    pub mc: McEstimate,
    pub exact: Complex64,
}

/// `Σ_n η_{n−1} Z̄_n (P(ψ_n) − P(ψ_{n−1})) · yᵀC_n x` per path against the
/// exact bilinear form `Γ[P′(1⊗x)](1⊗y) = yᵀ Σ_j G_{0j} P̂′(j) x`.
pub fn hankel_bridge_check(
    paths: &PathBatch,
    g: &BlockHankel,
    system: &CoefficientSystem,
    p: &Polynomial,
    x: &[Complex64],
    y: &[Complex64],
    spec: &LacunarySpec,
) -> Result<BridgeResult> {
    if p.degree() >= 2 * g.d {
        return Err(Error::pre(format!("deg P = {} must be below 2D = {}", p.degree(), 2 * g.d)));
    }
    if spec.len() != system.n || spec.len() > paths.levels {
        return Err(Error::pre("spec, system and path levels must agree"));
    }
    let (out_dim, in_dim) = g.block_shape;
    if x.len() != in_dim || y.len() != out_dim {
        return Err(Error::dim(format!("x, y must have lengths {in_dim}, {out_dim}")));
    }
    let bil = |c: &crate::numkit::ComplexMatrix| -> Complex64 { y.iter().zip(c.matvec(x)).map(|(a, b)| a * b).sum() };
    let dp = p.derivative();
    let exact = (0..g.d).filter_map(|j| g.block(0, j).map(|b| bil(b) * dp.coeff(j))).sum();
    let weights: Vec<Complex64> = system.elements.iter().map(bil).collect();
    let mut combined = vec![ZERO; paths.n_samples];
    for (t, &w) in weights.iter().enumerate() {
        let n = t + 1;
        let k = spec.k()[t];
        check_extractable(n, k)?;
        for (acc, s) in combined.iter_mut().zip(extraction_samples(paths, p, n, k)) {
            *acc += s * w;
        }
    }
    Ok(BridgeResult { mc: McEstimate::from_samples(&combined, paths.seed), exact })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityCheck {
    pub level: usize,
    pub bins: Vec<McEstimate>,
    /// Largest `|bin mean| / stderr`.
    pub worst_z: f64,
}

/// Binned form of `E[(FG)(ψ_L) | Z_1..Z_k] = F(ψ_k) G(ψ_k)`: paths are
/// grouped into equal-probability angular bins of `ψ_k`, and each bin mean of
/// `(FG)(ψ_L) − F(ψ_k)G(ψ_k)` should vanish.
pub fn multiplicativity_check(paths: &PathBatch, f: &Polynomial, g: &Polynomial, k: usize, bins: usize) -> Result<MultiplicativityCheck> {
    paths.check_level(k)?;
    if bins == 0 {
        return Err(Error::config("need at least one bin"));
    }
    let fg = f.mul(g)?;
    let l = paths.levels;
    let mut groups: Vec<Vec<Complex64>> = vec![Vec::new(); bins];
    for p in 0..paths.n_samples {
        let a = paths.psi(p, k);
        let theta = a.arg().rem_euclid(2.0 * PI);
        let b = ((theta / (2.0 * PI) * bins as f64) as usize).min(bins - 1);
        groups[b].push(fg.eval(paths.psi(p, l)) - f.eval(a) * g.eval(a));
    }
    let bins: Vec<McEstimate> = groups.iter().filter(|s| s.len() >= 2).map(|s| McEstimate::from_samples(s, paths.seed)).collect();
    let worst_z = bins
        .iter()
        .map(|e| if e.stderr > 0.0 { e.mean.norm() / e.stderr } else if e.mean.norm() == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max);
    Ok(MultiplicativityCheck { level: k, bins, worst_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::lacunary_default;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_examples() {
        let zeta = Complex64::from_polar(1.0, 0.7);
        assert_eq!(mobius(ZERO, zeta).unwrap(), zeta);
        let z = c(0.3, -0.4);
        assert!((mobius(z, zeta).unwrap().norm() - 1.0).abs() < 1e-15);
        assert_eq!(mobius(z, ZERO).unwrap(), z);
        assert!(matches!(mobius(c(1.0, 0.0), zeta), Err(Error::Domain(_))));
    }

    #[test]
    fn first_level_closed_form_and_radius_invariant() {
        let b = simulate_paths(&MartingaleConfig { block_size: 100, ..MartingaleConfig::new(5, 1000, 3) }).unwrap();
        for p in 0..b.n_samples {
            assert!((b.psi(p, 1) - b.z(p, 1) * 0.5).norm() < 1e-15);
        }
        assert!(b.max_radius_error() <= 1e-12);
        assert_eq!(b, simulate_paths(&MartingaleConfig { block_size: 100, ..MartingaleConfig::new(5, 1000, 3) }).unwrap());
    }

    #[test]
    fn eta_values() {
        let spec = lacunary_default(6).unwrap();
        assert!((eta_modulus(&spec, 2).unwrap() - 4.8).abs() < 1e-12);
        assert!((eta_modulus_at(1, 1) - 2.0).abs() < 1e-15);
        let limit = std::f64::consts::E.powi(2) / 2.0;
        assert!((eta_modulus_at(40, 1 << 40) - limit).abs() < 1e-6);
        let b = simulate_paths(&MartingaleConfig::new(3, 200, 1)).unwrap();
        let w = eta_weights(&b, &spec, 3).unwrap();
        assert!(w.values.iter().all(|v| (v.norm() - w.modulus).abs() < 1e-12 * w.modulus));
        assert!(eta_weights(&b, &spec, 1).is_err());
    }

    #[test]
    fn extraction_linearity_and_consistency() {
        let spec = lacunary_default(4).unwrap();
        let b = simulate_paths(&MartingaleConfig::new(4, 4000, 9)).unwrap();
        let f = Polynomial::new(vec![c(1.0, 0.0), ZERO, c(0.5, 0.5), ZERO, c(1.0, -1.0)]).unwrap();
        let g = Polynomial::monomial(8).unwrap();
        let (a, bb) = (c(2.0, 1.0), c(-0.5, 3.0));
        let lhs = fourier_extract(&b, &f.scale(a).add(&g.scale(bb)), &spec, 3).unwrap().mean;
        let rhs = fourier_extract(&b, &f, &spec, 3).unwrap().mean * a + fourier_extract(&b, &g, &spec, 3).unwrap().mean * bb;
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        assert_eq!(multiplier_extract(&b, &g, 3, 8).unwrap(), fourier_extract(&b, &g, &spec, 3).unwrap());
        assert!(matches!(multiplier_extract(&b, &g, 3, 4), Err(Error::Precondition(_))));
        assert!(matches!(fourier_extract(&b, &g, &spec, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn exact_zero_cases() {
        let b = simulate_paths(&MartingaleConfig::new(3, 500, 2)).unwrap();
        let e = radial_mean_check(&b, &Polynomial::one(), 3).unwrap();
        assert_eq!(e.mean, ZERO);
        let k = Polynomial::from_real(&[3.0]).unwrap();
        let o = orthogonality_check(&b, &k, &Polynomial::monomial(1).unwrap(), 1, &|_| c(1.0, 0.0)).unwrap();
        assert_eq!(o.mean, ZERO);
    }

    #[test]
    fn stderr_scales_like_inverse_root_n() {
        let f = Polynomial::monomial(2).unwrap();
        let spec = lacunary_default(3).unwrap();
        let mut ratios = Vec::new();
        for s in 0..10 {
            let b = simulate_paths(&MartingaleConfig::new(3, 20_000, 100 + s)).unwrap();
            let _ = &spec;
            let full = radial_mean_check(&b, &f, 3).unwrap().stderr;
            let half = radial_mean_check(&b.truncated(10_000), &f, 3).unwrap().stderr;
            ratios.push(half / full);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((1.2..=1.7).contains(&mean), "{mean}");
    }

    #[test]
    fn binned_multiplicativity() {
        let b = simulate_paths(&MartingaleConfig::new(5, 40_000, 4)).unwrap();
        let f = Polynomial::new(vec![c(0.2, 0.0), c(1.0, 0.5), c(0.0, -0.3)]).unwrap();
        let g = Polynomial::new(vec![c(1.0, 0.0), ZERO, c(0.4, 0.4)]).unwrap();
        let m = multiplicativity_check(&b, &f, &g, 2, DEFAULT_BINS).unwrap();
        assert_eq!(m.bins.len(), DEFAULT_BINS);
        assert!(m.worst_z < 4.5, "{}", m.worst_z);
    }
}
