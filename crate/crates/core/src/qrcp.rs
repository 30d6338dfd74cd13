//! Unblocked Householder QR with Businger-Golub column pivoting,
//! `A P = Q [R; 0]`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::downdating::{tracker_init_with, tracker_step, NormTracker, StrategyConfig};
use crate::error::{QrError, Result};
use crate::gridsim::{distributed_argmax_at, GridTopology};
use crate::householder::reflector_generate;
use crate::matrix::{reflect_columns, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PivotedQr<T: Scalar> {
    /// `R` in the upper triangle, Householder vectors (without their unit
    /// head) below the diagonal.
    pub factors: Matrix<T>,
    pub taus: Vec<T>,
    /// `perm[k]` is the original index of the `k`-th pivoted column.
    pub perm: Vec<usize>,
    pub tracker: NormTracker<T::Real>,
}

/// State visible to an observer right before step `step` swaps in its pivot.
pub struct PivotStep<'a, T: Scalar> {
    pub step: usize,
    /// Column (in the current working order) chosen as pivot.
    pub pivot: usize,
    /// Working matrix after `step` reflections.
    pub work: &'a Matrix<T>,
    pub tracker: &'a NormTracker<T::Real>,
    /// `perm[j]` is the original index of working column `j`.
    pub perm: &'a [usize],
}

/// Active column with the largest tracked partial norm.
///
/// Sequentially the first maximum wins; on a grid the tie is settled by
/// the reduction tree. All-zero norms select column `k`.
pub fn select_pivot<R: crate::scalar::RealScalar>(
    tracker: &NormTracker<R>,
    k: usize,
    topology: Option<&GridTopology>,
) -> usize {
    let active = &tracker.omega[k..];
    let local = match topology {
        Some(topo) => distributed_argmax_at(active, k, topo),
        None => {
            let mut best = 0;
            for (idx, &w) in active.iter().enumerate() {
                if w > active[best] {
                    best = idx;
                }
            }
            best
        }
    };
    k + local
}

pub fn factorize<T: Scalar>(a: &Matrix<T>, cfg: &StrategyConfig<T::Real>) -> Result<PivotedQr<T>> {
    factorize_observed(a, cfg, |_| {})
}

/// [`factorize`], calling `observer` once per step before the column swap.
pub fn factorize_observed<T: Scalar>(
    a: &Matrix<T>,
    cfg: &StrategyConfig<T::Real>,
    mut observer: impl FnMut(PivotStep<'_, T>),
) -> Result<PivotedQr<T>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(QrError::EmptyMatrix { rows: m, cols: n });
    }
    cfg.validate()?;
    let topo = cfg.topology.as_ref();
    let mut work = a.clone();
    let mut tracker = tracker_init_with(a, topo);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut taus = Vec::with_capacity(steps);
    let mut betas = alloc::vec![T::Real::zero(); n];

    for k in 0..steps {
        let pivot = select_pivot(&tracker, k, topo);
        observer(PivotStep {
            step: k,
            pivot,
            work: &work,
            tracker: &tracker,
            perm: &perm,
        });
        if pivot != k {
            work.swap_cols(k, pivot);
            tracker.swap(k, pivot);
            perm.swap(k, pivot);
        }

        let refl = reflector_generate(&work.col(k)[k..])?;
        {
            let col = work.col_mut(k);
            col[k] = T::from_real(refl.beta);
            col[k + 1..].copy_from_slice(&refl.v[1..]);
        }
        reflect_columns(&mut work, k, (k + 1)..n, &refl.v, refl.tau);
        taus.push(refl.tau);

        for j in (k + 1)..n {
            betas[j] = work[(k, j)].abs();
        }
        tracker_step(&mut tracker, k, &betas, &work, cfg)?;
    }

    Ok(PivotedQr {
        factors: work,
        taus,
        perm,
        tracker,
    })
}

impl<T: Scalar> PivotedQr<T> {
    pub fn rows(&self) -> usize {
        self.factors.rows()
    }

    pub fn cols(&self) -> usize {
        self.factors.cols()
    }

    /// Householder vector of step `k`, unit head included.
    pub fn reflector_vector(&self, k: usize) -> Vec<T> {
        let mut v = Vec::with_capacity(self.rows() - k);
        v.push(T::one());
        v.extend_from_slice(&self.factors.col(k)[k + 1..]);
        v
    }

    /// Explicit `m x m` unitary `Q` with `A P = Q [R; 0]`.
    pub fn form_q(&self) -> Matrix<T> {
        let m = self.rows();
        let mut q = Matrix::identity(m);
        // Q = H_0^* H_1^* ... ; apply right to left onto the identity
        for k in (0..self.taus.len()).rev() {
            let v = self.reflector_vector(k);
            reflect_columns(&mut q, k, 0..m, &v, self.taus[k].conj());
        }
        q
    }

    /// `min(m, n) x n` upper-triangular `R`, exact zeros below the diagonal.
    pub fn extract_r(&self) -> Matrix<T> {
        let p = self.rows().min(self.cols());
        Matrix::from_fn(p, self.cols(), |i, j| {
            if i <= j {
                self.factors[(i, j)]
            } else {
                T::zero()
            }
        })
    }

    /// `[R; 0]` padded to `m x n`.
    pub fn extract_r_full(&self) -> Matrix<T> {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            if i <= j {
                self.factors[(i, j)]
            } else {
                T::zero()
            }
        })
    }
}

pub fn form_q<T: Scalar>(r: &PivotedQr<T>) -> Matrix<T> {
    r.form_q()
}

pub fn extract_r<T: Scalar>(r: &PivotedQr<T>) -> Matrix<T> {
    r.extract_r()
}
