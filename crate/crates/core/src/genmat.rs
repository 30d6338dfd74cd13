//! Test matrix generators: Kahan matrices, their symmetrized form, and
//! seeded Gaussian matrices.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QrError, Result};
use crate::matrix::Matrix;
use crate::scalar::{RealScalar, Scalar};

/// Name of the generator behind [`random_gaussian`]. Bumped whenever the
/// sampled stream would change.
pub const RNG_NAME: &str = "chacha8-stdnormal-v1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KahanParams {
    n: usize,
    c: f64,
}

impl KahanParams {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(QrError::InvalidParameter("Kahan order must be at least 1"));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(QrError::InvalidParameter("Kahan parameter c must lie in [0, 1]"));
        }
        let p = Self { n, c };
        if n > 1 && p.s() <= 0.0 {
            return Err(QrError::InvalidParameter("Kahan parameter s must be positive when n > 1"));
        }
        Ok(p)
    }

    /// Parses `c` from its decimal form (e.g. `"0.44300000000000006"`).
    pub fn parse(n: usize, c: &str) -> Result<Self> {
        let c: f64 = c
            .trim()
            .parse()
            .map_err(|_| QrError::InvalidParameter("Kahan parameter c is not a number"))?;
        Self::new(n, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `sqrt(1 - c^2)`
    pub fn s(&self) -> f64 {
        (1.0 - self.c * self.c).sqrt()
    }
}

/// Rounds to the working precision, flushing results below the normal range
/// to zero.
fn round_normal<R: RealScalar>(x: f64) -> R {
    let r = R::from_f64(x);
    if r.is_normal() {
        r
    } else {
        R::zero()
    }
}

/// Upper-triangular `K_n(c)` with entries `s^i (delta_ij - c [i < j])`
/// (0-based), i.e. `K_1 = [1]`, `K_n = [[1, -c 1^T], [0, s K_{n-1}]]`.
///
/// Entries that would be subnormal in the working precision are stored as
/// zero. Rounded subnormals keep only a few bits, too few for `c^2 + s^2 = 1`
/// to survive, and the stored matrix would lose the triangular structure
/// the family exists to exercise.
pub fn kahan<T: Scalar>(p: &KahanParams) -> Matrix<T> {
    let n = p.n;
    let c = p.c;
    let s = p.s();
    let mut a = Matrix::zeros(n, n);
    let mut row_scale = 1.0_f64;
    for i in 0..n {
        let diag = round_normal::<T::Real>(row_scale);
        let off = round_normal::<T::Real>(-c * row_scale);
        a[(i, i)] = T::from_real(diag);
        for j in (i + 1)..n {
            a[(i, j)] = T::from_real(off);
        }
        row_scale *= s;
    }
    a
}

/// `K_n(c) + K_n(c)^T`
pub fn symmetrized_kahan<T: Scalar>(p: &KahanParams) -> Matrix<T> {
    let k = kahan::<T>(p);
    let n = p.n;
    Matrix::from_fn(n, n, |i, j| k[(i, j)] + k[(j, i)])
}

/// `m x n` matrix of i.i.d. standard normal entries drawn column by column
/// from ChaCha8 seeded with `seed`. Complex entries take real and imaginary
/// parts of variance 1/2 each, so `E|a_ij|^2 = 1`.
pub fn random_gaussian<T: Scalar>(m: usize, n: usize, seed: u64) -> Result<Matrix<T>> {
    if m == 0 || n == 0 {
        return Err(QrError::EmptyMatrix { rows: m, cols: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = core::f64::consts::FRAC_1_SQRT_2;
    Ok(Matrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        if T::IS_COMPLEX {
            let im: f64 = StandardNormal.sample(&mut rng);
            T::from_parts(T::Real::from_f64(re * half), T::Real::from_f64(im * half))
        } else {
            T::from_real(T::Real::from_f64(re))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn kahan_examples() {
        let k1: Matrix<f64> = kahan(&KahanParams::new(1, 0.3).unwrap());
        assert_eq!(k1.as_slice(), &[1.0]);
        let k2: Matrix<f64> = kahan(&KahanParams::new(2, 0.6).unwrap());
        assert_eq!(k2[(0, 0)], 1.0);
        assert_eq!(k2[(0, 1)], -0.6);
        assert_eq!(k2[(1, 0)], 0.0);
        assert!((k2[(1, 1)] - 0.8).abs() <= f64::EPSILON);
        let p = KahanParams::new(3, 0.6).unwrap();
        let k3: Matrix<f64> = kahan(&p);
        let s = p.s();
        assert_eq!(k3[(0, 0)], 1.0);
        assert_eq!(k3[(1, 1)], s);
        assert_eq!(k3[(2, 2)], s * s);
    }

    #[test]
    fn underflowing_rows_are_zero_not_subnormal() {
        let p = KahanParams::new(1000, 0.9).unwrap();
        let k: Matrix<f64> = kahan(&p);
        assert!(k.as_slice().iter().all(|x| *x == 0.0 || x.is_normal()));
        assert_eq!(k[(999, 999)], 0.0);
        let rep = crate::diagnostics::check_structure(&k, 1000.0 * f64::EPSILON).unwrap();
        assert!(rep.passed(), "worst dominance {}", rep.worst_dominance_ratio);

        let k32: Matrix<f32> = kahan(&KahanParams::new(300, 0.9).unwrap());
        assert!(k32.as_slice().iter().all(|x| *x == 0.0 || x.is_normal()));
    }

    #[test]
    fn kahan_param_errors() {
        assert!(KahanParams::new(0, 0.5).is_err());
        assert!(KahanParams::new(3, -0.1).is_err());
        assert!(KahanParams::new(3, 1.1).is_err());
        assert!(KahanParams::new(3, 1.0).is_err());
        assert!(KahanParams::new(1, 1.0).is_ok());
        assert!(KahanParams::parse(4, "zero").is_err());
    }

    #[test]
    fn c_survives_decimal_parse() {
        let p = KahanParams::parse(500, "0.44300000000000006").unwrap();
        assert_eq!(p.c(), 0.44300000000000006);
        assert_ne!(p.c(), 0.443);
        let q = KahanParams::parse(700, "0.41800000000000004").unwrap();
        assert_eq!(q.c().to_bits(), 0.41800000000000004_f64.to_bits());
    }

    #[test]
    fn s_and_c_on_unit_circle() {
        for i in 0..=100 {
            let p = KahanParams::new(5, i as f64 / 100.0 * 0.999).unwrap();
            let s = p.s();
            assert!((s * s + p.c() * p.c() - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn symmetrized_examples() {
        let m1: Matrix<f64> = symmetrized_kahan(&KahanParams::new(1, 0.2).unwrap());
        assert_eq!(m1.as_slice(), &[2.0]);
        let m2: Matrix<f64> = symmetrized_kahan(&KahanParams::new(2, 0.6).unwrap());
        assert_eq!(m2[(0, 0)], 2.0);
        assert_eq!(m2[(0, 1)], -0.6);
        assert_eq!(m2[(1, 0)], -0.6);
        assert!((m2[(1, 1)] - 1.6).abs() <= 2.0 * f64::EPSILON);
        let big: Matrix<f64> = symmetrized_kahan(&KahanParams::parse(500, "0.44300000000000006").unwrap());
        assert_eq!(big, big.transpose());
    }

    #[test]
    fn random_is_deterministic() {
        let a: Matrix<f64> = random_gaussian(7, 5, 42).unwrap();
        let b: Matrix<f64> = random_gaussian(7, 5, 42).unwrap();
        let c: Matrix<f64> = random_gaussian(7, 5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(random_gaussian::<f64>(0, 3, 1).is_err());
    }

    #[test]
    fn complex_entries_have_unit_variance() {
        let a: Matrix<Complex64> = random_gaussian(1000, 1000, 7).unwrap();
        let mean: f64 = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((0.99..=1.01).contains(&mean), "mean |z|^2 = {mean}");
    }
}
