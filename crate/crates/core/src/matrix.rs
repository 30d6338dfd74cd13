//! Dense column-major storage and the elementary vector kernels everything
//! else is built from.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Range};


use crate::error::{QrError, Result};
use crate::scalar::{RealScalar, Scalar};

/// Dense `rows x cols` matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(QrError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from entries listed row by row (convenient for literals).
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(QrError::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { T::zero() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i < self.rows && j < self.cols {
            Ok(())
        } else {
            Err(QrError::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Result<T> {
        self.check(i, j)?;
        Ok(self.data[i + j * self.rows])
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        self.check(i, j)?;
        self.data[i + j * self.rows] = value;
        Ok(())
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// The slice `A(i0:m, j)`.
    pub fn col_from(&self, j: usize, i0: usize) -> Result<&[T]> {
        if j >= self.cols || i0 > self.rows {
            return Err(QrError::IndexOutOfRange {
                row: i0,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(&self.col(j)[i0..])
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m = self.rows;
        let (head, tail) = self.data.split_at_mut(hi * m);
        head[lo * m..(lo + 1) * m].swap_with_slice(&mut tail[..m]);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Copy of rows `rows` and columns `cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Result<Self> {
        if rows.end > self.rows || cols.end > self.cols || rows.start > rows.end || cols.start > cols.end {
            return Err(QrError::IndexOutOfRange {
                row: rows.end,
                col: cols.end,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)]
        }))
    }

    /// Columns reordered so that column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.cols {
            return Err(QrError::DimensionMismatch {
                expected: self.cols,
                found: perm.len(),
            });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            if p >= self.cols {
                return Err(QrError::IndexOutOfRange {
                    row: 0,
                    col: p,
                    rows: self.rows,
                    cols: self.cols,
                });
            }
            data.extend_from_slice(self.col(p));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(QrError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for l in 0..self.cols {
                let b = rhs[(l, j)];
                if b == T::zero() {
                    continue;
                }
                let a = self.col(l);
                let o = out.col_mut(j);
                for i in 0..a.len() {
                    o[i] += a[i] * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(QrError::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> T::Real {
        vector_norm(&self.data)
    }

    /// True when every entry strictly below the diagonal is exactly zero.
    pub fn is_upper_triangular(&self) -> bool {
        self.first_subdiagonal_nonzero().is_none()
    }

    pub(crate) fn first_subdiagonal_nonzero(&self) -> Option<(usize, usize)> {
        for j in 0..self.cols {
            for i in (j + 1)..self.rows {
                if self[(i, j)] != T::zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of range for {}x{} matrix",
            self.rows,
            self.cols
        );
        &self.data[i + j * self.rows]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of range for {}x{} matrix",
            self.rows,
            self.cols
        );
        &mut self.data[i + j * self.rows]
    }
}

/// One-pass scaled sum of squares: the represented value is `scale^2 * ssq`.
///
/// Each nonzero magnitude is folded in with the running-maximum rescaling of
/// the reference `xNRM2`, so no intermediate square can overflow or
/// underflow to zero. Accumulators over disjoint pieces of a vector can be
/// combined with [`ScaledSsq::merge`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledSsq<R> {
    pub scale: R,
    pub ssq: R,
}

impl<R: RealScalar> Default for ScaledSsq<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: RealScalar> ScaledSsq<R> {
    pub fn new() -> Self {
        Self {
            scale: R::zero(),
            ssq: R::one(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: R) {
        if x.is_zero() {
            return;
        }
        let a = x.abs();
        if self.scale < a {
            let r = self.scale / a;
            self.ssq = R::one() + self.ssq * r * r;
            self.scale = a;
        } else {
            let r = a / self.scale;
            self.ssq += r * r;
        }
    }

    /// Folds in both parts of a scalar, as `xZNRM2` does for complex data.
    #[inline]
    pub fn push_scalar<T: Scalar<Real = R>>(&mut self, x: T) {
        self.push(x.re());
        if T::IS_COMPLEX {
            self.push(x.im());
        }
    }

    /// Combines two partial accumulations; `self` is the left operand.
    pub fn merge(self, other: Self) -> Self {
        if other.scale.is_zero() {
            return self;
        }
        if self.scale.is_zero() {
            return other;
        }
        if self.scale >= other.scale {
            let r = other.scale / self.scale;
            Self {
                scale: self.scale,
                ssq: self.ssq + other.ssq * r * r,
            }
        } else {
            let r = self.scale / other.scale;
            Self {
                scale: other.scale,
                ssq: other.ssq + self.ssq * r * r,
            }
        }
    }

    #[inline]
    pub fn value(&self) -> R {
        if self.scale.is_zero() {
            R::zero()
        } else {
            self.scale * self.ssq.sqrt()
        }
    }
}

/// Overflow-safe Euclidean norm of a vector.
pub fn vector_norm<T: Scalar>(x: &[T]) -> T::Real {
    let mut acc = ScaledSsq::new();
    for &v in x {
        acc.push_scalar(v);
    }
    acc.value()
}

/// Euclidean norm of `A(i0:m, j)`; zero for an empty range.
pub fn column_norm<T: Scalar>(a: &Matrix<T>, j: usize, i0: usize) -> Result<T::Real> {
    Ok(vector_norm(a.col_from(j, i0)?))
}

/// `v^* z`
#[inline]
pub(crate) fn dot_conj<T: Scalar>(v: &[T], z: &[T]) -> T {
    let mut s = T::zero();
    for (&a, &b) in v.iter().zip(z) {
        s += a.conj() * b;
    }
    s
}

/// Applies `I - tau v v^*` to rows `row0..row0 + v.len()` of the given columns.
pub(crate) fn reflect_columns<T: Scalar>(
    a: &mut Matrix<T>,
    row0: usize,
    cols: Range<usize>,
    v: &[T],
    tau: T,
) {
    if tau == T::zero() {
        return;
    }
    let rows = row0..row0 + v.len();
    for j in cols {
        let z = &mut a.col_mut(j)[rows.clone()];
        let w = tau * dot_conj(v, z);
        if w == T::zero() {
            continue;
        }
        for (zi, &vi) in z.iter_mut().zip(v) {
            *zi -= w * vi;
        }
    }
}

/// Trailing update of one QR step: `A(k:m, k+1:n) <- (I - tau v v^*) A(k:m, k+1:n)`.
///
/// Rows above `k` and columns up to `k` are untouched.
pub fn gemv_update<T: Scalar>(a: &mut Matrix<T>, k: usize, v: &[T], tau: T) -> Result<()> {
    if k > a.rows() || k >= a.cols().max(1) {
        return Err(QrError::IndexOutOfRange {
            row: k,
            col: k,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if v.len() != a.rows() - k {
        return Err(QrError::DimensionMismatch {
            expected: a.rows() - k,
            found: v.len(),
        });
    }
    let n = a.cols();
    reflect_columns(a, k, (k + 1)..n, v, tau);
    Ok(())
}
