//! Verification of the rank-revealing structure of `R`,
//!
//! ```text
//! |R_ii| >= |R_{i+1,i+1}|   and   |R_ii| >= ||R(i:j, j)||  for i <= j,
//! ```
//!
//! plus backward-error, conditioning and pivot-comparison metrics.
//! All reported values are widened to `f64`.

use alloc::vec::Vec;

use num_traits::{Float, Zero};

use crate::downdating::StrategyConfig;
use crate::error::{QrError, Result};
use crate::matrix::{column_norm, vector_norm, Matrix, ScaledSsq};
use crate::qrcp::{factorize_observed, PivotedQr};
use crate::scalar::{RealScalar, Scalar};
use crate::svd::{condition_number, singular_values};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// `|R_{i+1,i+1}| > |R_ii|`; reported with `j = i + 1`.
    Monotone,
    /// `||R(i:j, j)|| > |R_ii|`.
    Dominance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub i: usize,
    pub j: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub monotone_ok: bool,
    pub dominance_ok: bool,
    pub worst_monotone_ratio: f64,
    pub worst_dominance_ratio: f64,
    pub violations: Vec<Violation>,
    /// `|R_ii|`
    pub red_line: Vec<f64>,
    /// `max_{j > i} ||R(i:j, j)||`, zero where no such `j` exists.
    pub blue_line: Vec<f64>,
    pub numerical_rank: usize,
    pub slack: f64,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.monotone_ok && self.dominance_ok
    }
}

/// `100 n eps` for the working precision of `T`.
pub fn default_slack<T: Scalar>(n: usize) -> f64 {
    100.0 * n as f64 * T::eps().widen()
}

/// `sqrt(eps)` for the working precision of `T`.
pub fn default_rank_tol<T: Scalar>() -> T::Real {
    T::eps().sqrt()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn check_structure<T: Scalar>(r: &Matrix<T>, slack: f64) -> Result<StructureReport> {
    check_structure_with(r, slack, default_rank_tol::<T>())
}

/// Checks both inequality families with multiplicative slack `1 + slack`.
/// The numerical rank in the report uses `tau`.
pub fn check_structure_with<T: Scalar>(r: &Matrix<T>, slack: f64, tau: T::Real) -> Result<StructureReport> {
    if let Some((row, col)) = r.first_subdiagonal_nonzero() {
        return Err(QrError::NotUpperTriangular { row, col });
    }
    let (rows, cols) = r.shape();
    let p = rows.min(cols);
    let limit = 1.0 + slack;
    let red: Vec<f64> = (0..p).map(|i| r[(i, i)].abs().widen()).collect();
    let mut blue = alloc::vec![0.0_f64; p];
    let mut violations = Vec::new();

    let mut worst_monotone = 0.0_f64;
    for i in 0..p.saturating_sub(1) {
        let q = ratio(red[i + 1], red[i]);
        worst_monotone = worst_monotone.max(q);
        if !(q <= limit) {
            violations.push(Violation {
                kind: ViolationKind::Monotone,
                i,
                j: i + 1,
                ratio: q,
            });
        }
    }

    // suffix norms ||R(i:, j)|| built bottom-up, one pass per column
    let mut worst_dominance = 0.0_f64;
    let mut suffix = alloc::vec![0.0_f64; p];
    for j in 1..cols {
        if rows == 0 {
            break;
        }
        let top = j.min(rows - 1);
        let mut acc = ScaledSsq::<f64>::new();
        for i in (0..=top).rev() {
            let x = r[(i, j)];
            acc.push(x.re().widen());
            if T::IS_COMPLEX {
                acc.push(x.im().widen());
            }
            if i < p && i < j {
                suffix[i] = acc.value();
            }
        }
        for i in 0..p.min(j) {
            let norm = suffix[i];
            blue[i] = blue[i].max(norm);
            let q = ratio(norm, red[i]);
            worst_dominance = worst_dominance.max(q);
            if !(q <= limit) {
                violations.push(Violation {
                    kind: ViolationKind::Dominance,
                    i,
                    j,
                    ratio: q,
                });
            }
        }
    }

    let monotone_ok = !violations.iter().any(|v| v.kind == ViolationKind::Monotone);
    let dominance_ok = !violations.iter().any(|v| v.kind == ViolationKind::Dominance);
    Ok(StructureReport {
        monotone_ok,
        dominance_ok,
        worst_monotone_ratio: worst_monotone,
        worst_dominance_ratio: worst_dominance,
        violations,
        red_line: red,
        blue_line: blue,
        numerical_rank: numerical_rank(r, tau),
        slack,
    })
}

/// First `k` with `|R_{k,k}| < tau |R_{k-1,k-1}|` scanning the diagonal
/// downwards, else `min(m, n)`. A zero leading entry gives rank 0.
pub fn numerical_rank<T: Scalar>(r: &Matrix<T>, tau: T::Real) -> usize {
    let p = r.rows().min(r.cols());
    if p == 0 || r[(0, 0)].abs().is_zero() {
        return 0;
    }
    for k in 1..p {
        if r[(k, k)].abs() < tau * r[(k - 1, k - 1)].abs() {
            return k;
        }
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualMetrics {
    /// `||A P - Q R||_F / ||A||_F`, zero when `A = 0`.
    pub residual_rel: f64,
    /// `||Q^* Q - I||_F`
    pub ortho: f64,
}

pub fn residual_metrics<T: Scalar>(a: &Matrix<T>, f: &PivotedQr<T>) -> Result<ResidualMetrics> {
    if a.shape() != f.factors.shape() {
        return Err(QrError::DimensionMismatch {
            expected: a.rows() * a.cols(),
            found: f.factors.rows() * f.factors.cols(),
        });
    }
    let q = f.form_q();
    let qr = q.matmul(&f.extract_r_full())?;
    let ap = a.permute_cols(&f.perm)?;
    let a_norm = a.frobenius_norm().widen();
    let residual_rel = if a_norm == 0.0 {
        0.0
    } else {
        ap.sub(&qr)?.frobenius_norm().widen() / a_norm
    };
    let gram = q.adjoint().matmul(&q)?;
    let ortho = gram.sub(&Matrix::identity(q.rows()))?.frobenius_norm().widen();
    Ok(ResidualMetrics { residual_rel, ortho })
}

/// `kappa_2(R_r)` with `R_r = diag(1 / ||R(i, :)||) R`, over the leading
/// `min(m, n)` square block. Pass `R` truncated to its numerical rank.
pub fn row_scaled_condition<T: Scalar>(r: &Matrix<T>) -> Result<f64> {
    if let Some((row, col)) = r.first_subdiagonal_nonzero() {
        return Err(QrError::NotUpperTriangular { row, col });
    }
    let p = r.rows().min(r.cols());
    if p == 0 {
        return Ok(1.0);
    }
    let mut scales = Vec::with_capacity(p);
    for i in 0..p {
        let mut acc = ScaledSsq::new();
        for j in 0..r.cols() {
            acc.push_scalar(r[(i, j)]);
        }
        let norm = acc.value();
        if norm.is_zero() {
            return Err(QrError::ZeroRow(i));
        }
        scales.push(norm);
    }
    let rr = Matrix::from_fn(p, p, |i, j| r[(i, j)].unscale(scales[i]));
    Ok(condition_number(&rr).widen())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailurePrecondition {
    /// `||A_c^+||_2 = 1 / sigma_min(A_c)`, with unit-norm columns in `A_c`.
    pub kappa_c: f64,
    /// `kappa_c > 1 / sqrt(eps)`; only then can norm downdating mislead the pivoting.
    pub susceptible: bool,
}

pub fn failure_precondition<T: Scalar>(a: &Matrix<T>) -> Result<FailurePrecondition> {
    let mut scales = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let w = column_norm(a, j, 0)?;
        if w.is_zero() {
            return Err(QrError::ZeroColumn(j));
        }
        scales.push(w);
    }
    let ac = Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)].unscale(scales[j]));
    let sigma_min = singular_values(&ac).last().copied().unwrap_or_else(T::Real::zero);
    let kappa_c = if sigma_min.is_zero() {
        f64::INFINITY
    } else {
        1.0 / sigma_min.widen()
    };
    let threshold = 1.0 / T::eps().widen().sqrt();
    Ok(FailurePrecondition {
        kappa_c,
        susceptible: kappa_c > threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivotDivergence {
    /// First step at which the pivot orders differ.
    pub step: Option<usize>,
    /// Original column indices chosen at that step by each run.
    pub columns: Option<(usize, usize)>,
    /// True partial norms of those columns at that step.
    pub norms: Option<(f64, f64)>,
    /// `|n_a - n_b| / max(n_a, n_b)`
    pub gap_rel: f64,
}

impl PivotDivergence {
    pub fn diverged(&self) -> bool {
        self.step.is_some()
    }
}

/// Locates the first step where two factorizations of `a` pick different
/// pivots and measures how far apart the two candidates really were.
///
/// Both runs agree on the first `step` pivots, so the first `step`
/// reflectors of `x` reproduce the partial factorization both saw; the
/// candidates' true norms are recomputed from it.
pub fn compare_pivots<T: Scalar>(x: &PivotedQr<T>, y: &PivotedQr<T>, a: &Matrix<T>) -> Result<PivotDivergence> {
    if x.perm.len() != a.cols() || y.perm.len() != a.cols() || x.rows() != a.rows() {
        return Err(QrError::DimensionMismatch {
            expected: a.cols(),
            found: x.perm.len(),
        });
    }
    let steps = x.taus.len().min(y.taus.len());
    let Some(step) = (0..steps).find(|&k| x.perm[k] != y.perm[k]) else {
        return Ok(PivotDivergence {
            step: None,
            columns: None,
            norms: None,
            gap_rel: 0.0,
        });
    };
    let (ca, cb) = (x.perm[step], y.perm[step]);
    let replay = |c: usize| -> Result<f64> {
        let mut z = a.col(c).to_vec();
        for k in 0..step {
            let v = x.reflector_vector(k);
            let tail = &mut z[k..];
            let mut w = T::zero();
            for (&vi, &zi) in v.iter().zip(tail.iter()) {
                w += vi.conj() * zi;
            }
            let w = x.taus[k] * w;
            for (zi, &vi) in tail.iter_mut().zip(&v) {
                *zi -= w * vi;
            }
        }
        Ok(vector_norm(&z[step..]).widen())
    };
    let (na, nb) = (replay(ca)?, replay(cb)?);
    let top = na.max(nb);
    let gap_rel = if top == 0.0 { 0.0 } else { (na - nb).abs() / top };
    Ok(PivotDivergence {
        step: Some(step),
        columns: Some((ca, cb)),
        norms: Some((na, nb)),
        gap_rel,
    })
}

/// True norm of the chosen pivot against the true largest active norm,
/// recomputed from the working matrix at one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PivotCheck {
    pub step: usize,
    pub chosen: f64,
    pub best: f64,
}

/// Factorizes `a` under `cfg` and recomputes, at every step, all active
/// partial norms from scratch to judge the pivot the tracker picked.
pub fn pivot_quality<T: Scalar>(
    a: &Matrix<T>,
    cfg: &StrategyConfig<T::Real>,
) -> Result<(PivotedQr<T>, Vec<PivotCheck>)> {
    let mut checks = Vec::new();
    let f = factorize_observed(a, cfg, |s| {
        let m = s.work.rows();
        let mut best = 0.0_f64;
        let mut chosen = 0.0_f64;
        for j in s.step..s.work.cols() {
            let w = vector_norm(&s.work.col(j)[s.step.min(m)..]).widen();
            best = best.max(w);
            if j == s.pivot {
                chosen = w;
            }
        }
        checks.push(PivotCheck {
            step: s.step,
            chosen,
            best,
        });
    })?;
    Ok((f, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmat::{kahan, random_gaussian, KahanParams};
    use crate::qrcp::factorize;
    use num_complex::Complex64;

    #[test]
    fn identity_structure() {
        let rep = check_structure(&Matrix::<f64>::identity(4), 0.0).unwrap();
        assert!(rep.monotone_ok && rep.dominance_ok);
        assert_eq!(rep.red_line, [1.0; 4]);
        // the last row has no column to its right
        assert_eq!(rep.blue_line, [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(rep.worst_monotone_ratio, 1.0);
    }

    #[test]
    fn unit_upper_blue_line() {
        // R = [[1, 0], [0, 1]] with an extra column e1: blue[0] = 1 = red[0]
        let r = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let rep = check_structure(&r, 0.0).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.red_line, [1.0, 1.0]);
        assert_eq!(rep.blue_line, [1.0, 0.0]);
    }

    #[test]
    fn increasing_diagonal_flags_monotone() {
        let rep = check_structure(&Matrix::diagonal(&[1.0, 2.0]), 1e-10).unwrap();
        assert!(!rep.monotone_ok);
        assert_eq!(rep.worst_monotone_ratio, 2.0);
        assert_eq!(
            rep.violations[0],
            Violation {
                kind: ViolationKind::Monotone,
                i: 0,
                j: 1,
                ratio: 2.0
            }
        );
        // ||R(0:1, 1)|| = 2 > |R_00| as well
        assert!(!rep.dominance_ok);
    }

    #[test]
    fn dominance_violation_detected() {
        let r = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 0.5]).unwrap();
        let rep = check_structure(&r, 0.0).unwrap();
        assert!(rep.monotone_ok);
        assert!(!rep.dominance_ok);
        let expect = (9.0_f64 + 0.25).sqrt();
        assert!((rep.worst_dominance_ratio - expect).abs() < 1e-15);
        assert!((rep.blue_line[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn non_triangular_rejected() {
        let r = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1e-30, 1.0]).unwrap();
        assert_eq!(
            check_structure(&r, 0.0),
            Err(QrError::NotUpperTriangular { row: 1, col: 0 })
        );
    }

    #[test]
    fn raw_kahan_has_the_structure() {
        for n in [1, 2, 10, 100] {
            for c in [0.1, 0.5, 0.9] {
                let k: Matrix<f64> = kahan(&KahanParams::new(n, c).unwrap());
                let rep = check_structure(&k, n as f64 * f64::EPSILON).unwrap();
                assert!(rep.passed(), "n={n} c={c}: {:?}", rep.worst_dominance_ratio);
            }
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&Matrix::diagonal(&[1.0, 1e-20]), 1e-10), 1);
        assert_eq!(numerical_rank(&Matrix::<f64>::identity(5), 0.999), 5);
        assert_eq!(numerical_rank(&Matrix::diagonal(&[1.0, 0.5, 1e-12, 1e-13]), 1e-8), 2);
        assert_eq!(numerical_rank(&Matrix::diagonal(&[0.0, 1.0]), 0.5), 0);
    }

    #[test]
    fn residual_examples() {
        let i3 = Matrix::<f64>::identity(3);
        let f = factorize(&i3, &StrategyConfig::robust()).unwrap();
        let m = residual_metrics(&i3, &f).unwrap();
        assert_eq!(m.residual_rel, 0.0);
        assert!(m.ortho <= f64::EPSILON);
        let z = Matrix::<f64>::zeros(3, 2);
        let fz = factorize(&z, &StrategyConfig::robust()).unwrap();
        assert_eq!(residual_metrics(&z, &fz).unwrap().residual_rel, 0.0);
        let a: Matrix<f64> = random_gaussian(50, 30, 5).unwrap();
        let fa = factorize(&a, &StrategyConfig::robust()).unwrap();
        let ma = residual_metrics(&a, &fa).unwrap();
        assert!(ma.residual_rel <= 50.0 * 50.0 * f64::EPSILON);
    }

    #[test]
    fn row_scaling_examples() {
        assert_eq!(row_scaled_condition(&Matrix::<f64>::identity(3)).unwrap(), 1.0);
        for d in [1e-300, 1e-8, 3.0, 1e200] {
            assert_eq!(row_scaled_condition(&Matrix::diagonal(&[1.0, d])).unwrap(), 1.0);
        }
        assert_eq!(
            row_scaled_condition(&Matrix::diagonal(&[1.0, 0.0])),
            Err(QrError::ZeroRow(1))
        );
    }

    #[test]
    fn precondition_examples() {
        let fp = failure_precondition(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(fp.kappa_c, 1.0);
        assert!(!fp.susceptible);
        assert_eq!(
            failure_precondition(&Matrix::diagonal(&[1.0, 0.0])),
            Err(QrError::ZeroColumn(1))
        );
        // orthogonal (rotation) times column scaling
        let (c, s) = (0.6, 0.8);
        let a = Matrix::from_row_slice(2, 2, &[c * 5.0, -s * 1e-3, s * 5.0, c * 1e-3]).unwrap();
        let fp = failure_precondition(&a).unwrap();
        assert!((fp.kappa_c - 1.0).abs() < 1e-14);
        assert!(!fp.susceptible);
    }

    #[test]
    fn compare_identical_runs() {
        let a: Matrix<Complex64> = random_gaussian(6, 6, 1).unwrap();
        let f = factorize(&a, &StrategyConfig::robust()).unwrap();
        let d = compare_pivots(&f, &f, &a).unwrap();
        assert!(!d.diverged());
        assert_eq!(d.gap_rel, 0.0);
    }

    #[test]
    fn compare_reports_true_gap() {
        // both columns have norm 2 at step 0; forced different choice
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]).unwrap();
        let x = factorize(&a, &StrategyConfig::robust()).unwrap();
        let mut y = x.clone();
        y.perm = alloc::vec![1, 0];
        let d = compare_pivots(&x, &y, &a).unwrap();
        assert_eq!(d.step, Some(0));
        assert_eq!(d.columns, Some((0, 1)));
        assert_eq!(d.gap_rel, 0.0);
    }

    #[test]
    fn pivot_quality_on_kahan() {
        let k: Matrix<f64> = kahan(&KahanParams::new(30, 0.5).unwrap());
        let (_, checks) = pivot_quality(&k, &StrategyConfig::robust()).unwrap();
        assert_eq!(checks.len(), 30);
        for c in checks {
            assert!(c.chosen >= (1.0 - 10.0 * f64::EPSILON.sqrt()) * c.best);
        }
    }
}
