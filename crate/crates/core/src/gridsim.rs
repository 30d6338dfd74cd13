//! Deterministic stand-in for a 2-D block-cyclic process grid.
//!
//! Nothing here runs concurrently. The grid only decides the *order* in
//! which partial results are formed and combined: rows are dealt to
//! `nprow` process rows in blocks of `mb`, columns to `npcol` process
//! columns in blocks of `nb`, each process reduces its own entries in index
//! order, and process results are combined over a fixed left-leaning
//! binary tree on process rank (the left half of a range gets the extra
//! rank when the count is odd). Changing the grid changes rounding, which
//! is what makes pivot choices topology dependent.

use alloc::vec::Vec;

use crate::error::{QrError, Result};
use crate::matrix::ScaledSsq;
use crate::scalar::{RealScalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridTopology {
    pub nprow: usize,
    pub npcol: usize,
    pub mb: usize,
    pub nb: usize,
}

impl GridTopology {
    pub fn new(nprow: usize, npcol: usize, mb: usize, nb: usize) -> Result<Self> {
        if nprow == 0 || npcol == 0 || mb == 0 || nb == 0 {
            return Err(QrError::InvalidParameter(
                "grid dimensions and block sizes must be positive",
            ));
        }
        Ok(Self { nprow, npcol, mb, nb })
    }

    /// The 1x1 grid, equivalent to sequential execution.
    pub fn single() -> Self {
        Self {
            nprow: 1,
            npcol: 1,
            mb: 1,
            nb: 1,
        }
    }

    #[inline]
    pub fn row_owner(&self, global_row: usize) -> usize {
        (global_row / self.mb) % self.nprow
    }

    #[inline]
    pub fn col_owner(&self, global_col: usize) -> usize {
        (global_col / self.nb) % self.npcol
    }
}

/// Left-leaning binary tree reduction over process rank. `None` marks a
/// process with nothing to contribute.
fn tree_reduce<V: Copy>(parts: &[Option<V>], combine: &impl Fn(V, V) -> V) -> Option<V> {
    match parts.len() {
        0 => None,
        1 => parts[0],
        len => {
            let mid = len.div_ceil(2);
            match (tree_reduce(&parts[..mid], combine), tree_reduce(&parts[mid..], combine)) {
                (Some(l), Some(r)) => Some(combine(l, r)),
                (l, None) => l,
                (None, r) => r,
            }
        }
    }
}

/// Norm of `x`, where `x[0]` sits in global row `first_row` of the
/// distributed matrix.
pub fn distributed_norm_at<T: Scalar>(x: &[T], first_row: usize, topo: &GridTopology) -> T::Real {
    if topo.nprow == 1 {
        let mut acc = ScaledSsq::new();
        for &v in x {
            acc.push_scalar(v);
        }
        return acc.value();
    }
    let mut parts: Vec<Option<ScaledSsq<T::Real>>> = alloc::vec![None; topo.nprow];
    for (i, &v) in x.iter().enumerate() {
        let p = topo.row_owner(first_row + i);
        parts[p].get_or_insert_with(ScaledSsq::new).push_scalar(v);
    }
    tree_reduce(&parts, &|a, b| a.merge(b))
        .map(|acc| acc.value())
        .unwrap_or_else(<T::Real as num_traits::Zero>::zero)
}

/// Norm of a vector distributed over the process rows, starting at row 0.
pub fn distributed_norm<T: Scalar>(x: &[T], topo: &GridTopology) -> T::Real {
    distributed_norm_at(x, 0, topo)
}

/// Index (into `values`) of the maximum, where `values[0]` belongs to global
/// column `first_col`. Each process column keeps its first local maximum;
/// exact ties between processes go to the left subtree.
pub fn distributed_argmax_at<R: RealScalar>(values: &[R], first_col: usize, topo: &GridTopology) -> usize {
    let mut parts: Vec<Option<(R, usize)>> = alloc::vec![None; topo.npcol];
    for (idx, &v) in values.iter().enumerate() {
        let p = topo.col_owner(first_col + idx);
        match &mut parts[p] {
            Some((best, at)) => {
                if v > *best {
                    *best = v;
                    *at = idx;
                }
            }
            slot @ None => *slot = Some((v, idx)),
        }
    }
    tree_reduce(&parts, &|l: (R, usize), r: (R, usize)| if r.0 > l.0 { r } else { l })
        .map(|(_, idx)| idx)
        .unwrap_or(0)
}

pub fn distributed_argmax<R: RealScalar>(values: &[R], topo: &GridTopology) -> usize {
    distributed_argmax_at(values, 0, topo)
}
