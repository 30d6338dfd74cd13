//! Singular values by one-sided (Hestenes) Jacobi.
//!
//! Works directly on the columns, so it needs no QR preprocessing and is
//! independent of the pivoted factorization it is used to judge.

use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use crate::matrix::{dot_conj, Matrix};
use crate::scalar::{RealScalar, Scalar};

const MAX_SWEEPS: usize = 80;

/// Singular values of `a`, in nonincreasing order; `min(m, n)` of them.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Vec<T::Real> {
    let mut w = if a.rows() < a.cols() { a.adjoint() } else { a.clone() };
    let n = w.cols();
    let eps = T::Real::eps();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if rotate_pair(&mut w, p, q, eps) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<T::Real> = (0..n).map(|j| crate::matrix::vector_norm(w.col(j))).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Orthogonalizes columns `p` and `q`; false when they already are.
fn rotate_pair<T: Scalar>(w: &mut Matrix<T>, p: usize, q: usize, eps: T::Real) -> bool {
    let alpha = sum_sq(w.col(p));
    let beta = sum_sq(w.col(q));
    let gamma = dot_conj(w.col(p), w.col(q));
    let g = gamma.abs();
    if g.is_zero() || g <= eps * (alpha.sqrt() * beta.sqrt()) {
        return false;
    }
    let two = T::Real::one() + T::Real::one();
    let zeta = (beta - alpha) / (two * g);
    let t = zeta.signum() / (zeta.abs() + (T::Real::one() + zeta * zeta).sqrt());
    let c = T::Real::one() / (T::Real::one() + t * t).sqrt();
    let s = c * t;
    // phase that makes the pair's inner product real
    let phase = (gamma / T::from_real(g)).conj();
    let m = w.rows();
    for i in 0..m {
        let xp = w[(i, p)];
        let xq = w[(i, q)] * phase;
        w[(i, p)] = xp.scale(c) - xq.scale(s);
        w[(i, q)] = xp.scale(s) + xq.scale(c);
    }
    true
}

fn sum_sq<T: Scalar>(x: &[T]) -> T::Real {
    let mut s = T::Real::zero();
    for &v in x {
        s += v.abs_sq();
    }
    s
}

/// `sigma_max / sigma_min`; infinite for a singular matrix.
pub fn condition_number<T: Scalar>(a: &Matrix<T>) -> T::Real {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if !lo.is_zero() => hi / lo,
        (Some(_), Some(_)) => T::Real::infinity(),
        _ => T::Real::one(),
    }
}
