//! Elementary Householder reflectors `H = I - tau v v^*` with `v[0] = 1`.

use alloc::vec::Vec;

use num_traits::{Float, Zero};

use crate::error::{QrError, Result};
use crate::matrix::{reflect_columns, vector_norm, Matrix};
use crate::scalar::{RealScalar, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Reflector<T: Scalar> {
    /// Householder vector, leading entry exactly one.
    pub v: Vec<T>,
    pub tau: T,
    /// Real leading value of `H x`.
    pub beta: T::Real,
}

impl<T: Scalar> Reflector<T> {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.tau == T::zero()
    }

    /// `H z` for a single vector.
    pub fn apply_vec(&self, z: &mut [T]) -> Result<()> {
        if z.len() != self.v.len() {
            return Err(QrError::DimensionMismatch {
                expected: self.v.len(),
                found: z.len(),
            });
        }
        if self.is_identity() {
            return Ok(());
        }
        let mut w = T::zero();
        for (&a, &b) in self.v.iter().zip(z.iter()) {
            w += a.conj() * b;
        }
        let w = self.tau * w;
        for (zi, &vi) in z.iter_mut().zip(&self.v) {
            *zi -= w * vi;
        }
        Ok(())
    }
}

/// Builds `H` with `H x = (beta, 0, ..., 0)^T` and `beta` real.
///
/// `beta` carries the sign opposite to `Re x[0]`, so `x[0] - beta` never
/// cancels. A vector that is already reduced (zero tail, real head) yields
/// the identity reflector `tau = 0`, which also covers the zero vector.
pub fn reflector_generate<T: Scalar>(x: &[T]) -> Result<Reflector<T>> {
    let (&alpha, tail) = x.split_first().ok_or(QrError::EmptyVector)?;
    let mut v = Vec::with_capacity(x.len());
    v.push(T::one());
    let xnorm = vector_norm(tail);
    let (ar, ai) = (alpha.re(), alpha.im());
    if xnorm.is_zero() && ai.is_zero() {
        v.extend(core::iter::repeat(T::zero()).take(tail.len()));
        return Ok(Reflector {
            v,
            tau: T::zero(),
            beta: ar,
        });
    }
    // |x| with one overflow-safe hypot chain
    let full = ar.abs().pythag(ai.abs()).pythag(xnorm);
    let beta = if ar >= T::Real::zero() { -full } else { full };
    // Stored so that (I - tau v v^*) x = beta e1.
    let tau = T::from_parts((beta - ar) / beta, ai / beta);
    let denom = alpha - T::from_real(beta);
    v.extend(tail.iter().map(|&t| t / denom));
    Ok(Reflector { v, tau, beta })
}

/// Replaces each column `z` of `block` by `H z`.
pub fn reflector_apply<T: Scalar>(r: &Reflector<T>, block: &mut Matrix<T>) -> Result<()> {
    if block.rows() != r.v.len() {
        return Err(QrError::DimensionMismatch {
            expected: r.v.len(),
            found: block.rows(),
        });
    }
    let n = block.cols();
    reflect_columns(block, 0, 0..n, &r.v, r.tau);
    Ok(())
}
