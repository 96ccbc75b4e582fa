use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 1 << 16;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Analytic polynomial `P(z) = Σ P̂(k) zᵏ`, stored without trailing zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for Polynomial {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<Complex64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::pre("polynomial coefficients must be finite"));
        }
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::config(format!(
                "polynomial degree {} exceeds the cap {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn monomial(k: usize) -> Result<Self> {
        let mut c = vec![ZERO; k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `P̂(k)`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect();
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        Self { coeffs: self.coeffs.iter().map(|&x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::new(c).expect("sum of finite polynomials")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut c = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// `P(A)` by Horner's rule in `A`.
    pub fn of_matrix(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !a.is_square() {
            return Err(Error::dim(format!("polynomial of a non-square {:?} matrix", a.shape())));
        }
        let n = a.rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.matmul(a)?;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        Ok(acc)
    }

    /// Values at the `n`-th roots of unity `P(e^{2πij/n})`, `j = 0..n`.
    pub fn values_on_roots(&self, n: usize) -> Vec<Complex64> {
        let mut buf = vec![ZERO; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % n] += c;
        }
        FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }

    pub fn sup_norm(&self, grid_points: usize) -> Result<SupNorm> {
        sup_norm(self, grid_points)
    }

    pub fn sup_norm_default(&self) -> SupNorm {
        sup_norm(self, default_grid(self.degree())).expect("default grid satisfies the precondition")
    }
}

/// Grid maximum over the roots of unity and its Bernstein-certified upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub grid_max: f64,
    pub certified_upper: f64,
    pub grid_points: usize,
}

/// `‖P‖_∞` bracket from `grid_points` samples on the unit circle.
///
/// Every point of the circle lies within angle `π/N` of a grid point and
/// `‖P'‖_∞ ≤ deg·‖P‖_∞`, so `‖P‖_∞ ≤ grid_max / (1 − π·deg/N)`. The
/// coefficient sum `Σ|p̂_k|` is a second upper bound, exact for monomials;
/// the smaller of the two is reported.
pub fn sup_norm(p: &Polynomial, grid_points: usize) -> Result<SupNorm> {
    let deg = p.degree() as f64;
    if grid_points == 0 || grid_points as f64 <= PI * deg {
        return Err(Error::pre(format!(
            "grid of {grid_points} points is too coarse for degree {}",
            p.degree()
        )));
    }
    let grid_max = p.values_on_roots(grid_points).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SupNorm {
        grid_max,
        certified_upper: (grid_max / (1.0 - PI * deg / grid_points as f64))
            .min(p.coeffs().iter().map(|c| c.norm()).sum::<f64>())
            .max(grid_max),
        grid_points,
    })
}

/// Power-of-two grid keeping the certification factor below `1/(1 − 1/64)`.
pub fn default_grid(degree: usize) -> usize {
    let need = (64.0 * PI * degree as f64).ceil() as usize + 1;
    need.max(256).next_power_of_two()
}

pub fn poly_derivative(p: &Polynomial) -> Polynomial {
    p.derivative()
}

pub fn poly_eval(p: &Polynomial, z: Complex64) -> Complex64 {
    p.eval(z)
}

pub fn poly_of_matrix(p: &Polynomial, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.of_matrix(a)
}

/// `D×D` lower-triangular Toeplitz matrix `T(f)_{ij} = f̂(i−j)`: multiplication
/// by `f` on polynomials of degree `< D`.
pub fn toeplitz(f: &Polynomial, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i >= j { f.coeff(i - j) } else { ZERO })
}

/// `(T(c) ⊗ I_blk) x` on `d` blocks of length `blk`, or variants: `upper`
/// uses `T(c)ᵀ`, `conjugate` uses `conj(c)`. All four combinations cover
/// `T ⊗ I`, `Tᵀ ⊗ I` and their adjoints.
pub fn toeplitz_block_apply(
    c: &[Complex64],
    d: usize,
    blk: usize,
    x: &[Complex64],
    upper: bool,
    conjugate: bool,
) -> Vec<Complex64> {
    debug_assert_eq!(x.len(), d * blk);
    let mut y = vec![ZERO; d * blk];
    for (s, &cs) in c.iter().enumerate().take(d) {
        if cs == ZERO {
            continue;
        }
        let cs = if conjugate { cs.conj() } else { cs };
        for j in s..d {
            // lower: y_j += c_s x_{j−s};  upper: y_{j−s} += c_s x_j
            let (dst, src) = if upper { (j - s, j) } else { (j, j - s) };
            let (yd, xs) = (&mut y[dst * blk..(dst + 1) * blk], &x[src * blk..(src + 1) * blk]);
            for (a, b) in yd.iter_mut().zip(xs) {
                *a += cs * b;
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_of_square() {
        let p = Polynomial::monomial(2).unwrap();
        assert_eq!(p.derivative(), Polynomial::from_real(&[0.0, 2.0]).unwrap());
        assert!(Polynomial::one().derivative().is_zero());
    }

    #[test]
    fn eval_one_plus_z_at_i() {
        let p = Polynomial::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(p.eval(c(0.0, 1.0)), c(1.0, 1.0));
    }

    #[test]
    fn square_of_nilpotent_is_zero() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let p = Polynomial::monomial(2).unwrap();
        assert!(p.of_matrix(&a).unwrap().is_zero());
        assert!(p.of_matrix(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn trailing_zeros_trimmed_and_degree_cap() {
        let p = Polynomial::new(vec![c(1.0, 0.0), ZERO, ZERO]).unwrap();
        assert_eq!(p.degree(), 0);
        assert!(matches!(Polynomial::monomial(MAX_DEGREE + 1), Err(Error::Config(_))));
    }

    #[test]
    fn monomials_have_unit_grid_max() {
        for k in [0usize, 1, 5, 31] {
            let s = sup_norm(&Polynomial::monomial(k).unwrap(), 128).unwrap();
            assert!((s.grid_max - 1.0).abs() < 1e-12, "k={k}: {}", s.grid_max);
        }
    }

    #[test]
    fn one_plus_z_peaks_at_one() {
        let s = sup_norm(&Polynomial::from_real(&[1.0, 1.0]).unwrap(), 16).unwrap();
        assert!((s.grid_max - 2.0).abs() < 1e-12);
        assert!(s.certified_upper >= 2.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let p = Polynomial::monomial(10).unwrap();
        assert!(matches!(sup_norm(&p, 31), Err(Error::Precondition(_))));
        assert!(sup_norm(&p, 32).is_ok());
    }

    #[test]
    fn fft_values_match_horner() {
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(0.25, -1.0)]).unwrap();
        let n = 24;
        let vals = p.values_on_roots(n);
        for (j, v) in vals.iter().enumerate() {
            let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            assert!((v - p.eval(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(toeplitz(&Polynomial::one(), 3), ComplexMatrix::identity(3));
        let shift = toeplitz(&Polynomial::monomial(1).unwrap(), 3);
        let expected =
            ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(shift, expected);
        let t = toeplitz(&Polynomial::from_real(&[1.0, 2.0]).unwrap(), 2);
        assert_eq!(t, ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[2.0, 1.0]]).unwrap());
    }

    #[test]
    fn block_toeplitz_apply_matches_dense() {
        let f = Polynomial::new(vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 3.0)]).unwrap();
        let (d, blk) = (4, 2);
        let t = toeplitz(&f, d).kron(&ComplexMatrix::identity(blk));
        let x: Vec<Complex64> = (0..d * blk).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let cases = [(false, false, t.clone()), (true, false, t.transpose()), (false, true, t.conj()), (true, true, t.adjoint())];
        for (upper, conjugate, m) in cases {
            let y = toeplitz_block_apply(f.coeffs(), d, blk, &x, upper, conjugate);
            let z = m.matvec(&x);
            assert!(y.iter().zip(&z).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn toeplitz_is_multiplicative() {
        let f = Polynomial::new(vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 3.0)]).unwrap();
        let g = Polynomial::new(vec![c(0.2, 0.0), c(1.0, -1.0)]).unwrap();
        let lhs = toeplitz(&f.mul(&g).unwrap(), 5);
        let rhs = toeplitz(&f, 5).matmul(&toeplitz(&g, 5)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn serde_round_trip_keeps_coefficients() {
        let p = Polynomial::new(vec![c(1.0, -2.0), c(0.0, 0.5)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
