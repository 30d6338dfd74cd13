//! Partial column norm tracking for column-pivoted QR.
//!
//! After each Householder step the trailing partial norms shrink by the
//! eliminated component `beta`:
//!
//! ```text
//! omega' = omega * sqrt((1 + beta/omega) * (1 - beta/omega))
//! ```
//!
//! Repeated downdating loses relative accuracy through cancellation, so a
//! switch decides per column whether the update can be trusted or the norm
//! must be recomputed from the matrix. `nu` keeps the last explicitly
//! computed value as the reference the accumulated loss is measured against.
//!
//! Three switches are provided:
//! * [`StrategyKind::Classic`]: recompute when `1 + 0.05 * temp * (omega/nu)^2`
//!   rounds to exactly one. Whether that happens depends on the precision
//!   the comparison is carried out in.
//! * [`StrategyKind::Robust`]: recompute when `temp * (omega/nu)^2 <= tol`,
//!   with `tol = sqrt(eps)` by default.
//! * [`StrategyKind::ExactRecompute`]: always recompute. Used as the oracle.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{QrError, Result};
use crate::gridsim::{distributed_norm_at, GridTopology};
use crate::matrix::{vector_norm, Matrix};
use crate::scalar::{Precision, RealScalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Downdate,
    ExplicitRecompute,
    /// No rows left below the current step; the norm is set to zero.
    FlushZero,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Downdate => "downdate",
            Decision::ExplicitRecompute => "recompute",
            Decision::FlushZero => "flush",
        }
    }
}

/// One action of the tracker. Real values are widened to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DowndateEvent {
    pub step: usize,
    pub column: usize,
    pub beta: f64,
    pub temp: f64,
    pub temp2: f64,
    pub decision: Decision,
    pub omega_before: f64,
    pub omega_after: f64,
}

/// Control values and verdict of one switch evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchOutcome {
    pub decision: Decision,
    pub temp: f64,
    pub temp2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Classic,
    Robust,
    ExactRecompute,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Classic => "classic",
            StrategyKind::Robust => "robust",
            StrategyKind::ExactRecompute => "exact",
        }
    }
}

/// Deliberate reproductions of historical defects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Injection {
    /// Evaluate the classic switch in `f64` while the data is `f32`, as a
    /// long register would.
    ExcessPrecisionControl,
    /// Explicit recomputes read column `j + offset` instead of `j`.
    WrongColumnRecompute { offset: isize },
}

impl Injection {
    pub const DEFAULT_WRONG_COLUMN_OFFSET: isize = -1;

    pub fn wrong_column() -> Self {
        Injection::WrongColumnRecompute {
            offset: Self::DEFAULT_WRONG_COLUMN_OFFSET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyConfig<R> {
    pub kind: StrategyKind,
    pub tol: R,
    pub injections: Vec<Injection>,
    pub topology: Option<GridTopology>,
}

impl<R: RealScalar> StrategyConfig<R> {
    /// Strategy with the default tolerance `sqrt(eps)`.
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            tol: default_tol::<R>(),
            injections: Vec::new(),
            topology: None,
        }
    }

    pub fn classic() -> Self {
        Self::new(StrategyKind::Classic)
    }

    pub fn robust() -> Self {
        Self::new(StrategyKind::Robust)
    }

    pub fn exact() -> Self {
        Self::new(StrategyKind::ExactRecompute)
    }

    pub fn with_tol(mut self, tol: R) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_injection(mut self, injection: Injection) -> Self {
        self.injections.push(injection);
        self
    }

    pub fn with_topology(mut self, topology: GridTopology) -> Self {
        self.topology = Some(topology);
        self
    }

    pub fn excess_precision(&self) -> bool {
        self.injections.contains(&Injection::ExcessPrecisionControl)
    }

    pub fn wrong_column_offset(&self) -> Option<isize> {
        self.injections.iter().find_map(|inj| match inj {
            Injection::WrongColumnRecompute { offset } => Some(*offset),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > R::zero()) {
            return Err(QrError::InvalidParameter("tolerance must be positive"));
        }
        if self.excess_precision() && R::PRECISION != Precision::Single {
            return Err(QrError::UnsupportedInjection);
        }
        Ok(())
    }
}

/// `sqrt(eps)` of the working precision.
pub fn default_tol<R: RealScalar>() -> R {
    R::eps().sqrt()
}

/// Running partial norms `omega` and last explicit norms `nu`, per column.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTracker<R> {
    pub omega: Vec<R>,
    pub nu: Vec<R>,
    pub events: Vec<DowndateEvent>,
}

impl<R: RealScalar> NormTracker<R> {
    pub fn swap(&mut self, a: usize, b: usize) {
        self.omega.swap(a, b);
        self.nu.swap(a, b);
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

fn norm_from<T: Scalar>(x: &[T], first_row: usize, topo: Option<&GridTopology>) -> T::Real {
    match topo {
        Some(t) => distributed_norm_at(x, first_row, t),
        None => vector_norm(x),
    }
}

/// Initial full column norms: `omega[j] = nu[j] = |A(:, j)|`.
pub fn tracker_init<T: Scalar>(a: &Matrix<T>) -> NormTracker<T::Real> {
    tracker_init_with(a, None)
}

pub fn tracker_init_with<T: Scalar>(a: &Matrix<T>, topo: Option<&GridTopology>) -> NormTracker<T::Real> {
    let omega: Vec<T::Real> = (0..a.cols()).map(|j| norm_from(a.col(j), 0, topo)).collect();
    NormTracker {
        nu: omega.clone(),
        omega,
        events: Vec::new(),
    }
}

/// `omega * sqrt(max(0, (1 + t)(1 - t)))` with `t = beta / omega`.
pub fn downdate_formula<R: RealScalar>(omega: R, beta: R) -> Result<R> {
    if omega.is_zero() {
        return Err(QrError::ZeroNorm);
    }
    Ok(omega * predicted_loss(omega, beta).sqrt())
}

/// `max(0, (1 + t)(1 - t))`, the factored form that avoids squaring `t`.
#[inline]
fn predicted_loss<R: RealScalar>(omega: R, beta: R) -> R {
    let t = beta / omega;
    R::zero().max((R::one() + t) * (R::one() - t))
}

fn check_positive<R: RealScalar>(omega: R, nu: R) -> Result<()> {
    if omega.is_zero() || nu.is_zero() {
        Err(QrError::ZeroNorm)
    } else {
        Ok(())
    }
}

/// The historical switch: recompute iff `1 + 0.05 * temp * (omega/nu)^2 == 1`
/// with `temp = max(0, 1 - (beta/omega)^2)`.
///
/// With `excess_precision` the control values are formed in `f64` from the
/// widened `f32` inputs. Only meaningful for single working precision.
pub fn classic_decide<R: RealScalar>(omega: R, nu: R, beta: R, excess_precision: bool) -> Result<SwitchOutcome> {
    check_positive(omega, nu)?;
    if excess_precision {
        if R::PRECISION != Precision::Single {
            return Err(QrError::UnsupportedInjection);
        }
        return Ok(classic_control(omega.widen(), nu.widen(), beta.widen()));
    }
    let out = classic_control(omega, nu, beta);
    Ok(out)
}

fn classic_control<C: RealScalar>(omega: C, nu: C, beta: C) -> SwitchOutcome {
    let ratio = beta / omega;
    let temp = (C::one() - ratio * ratio).max(C::zero());
    let memo = omega / nu;
    let temp2 = C::one() + C::from_f64(0.05) * temp * (memo * memo);
    let decision = if temp2 == C::one() {
        Decision::ExplicitRecompute
    } else {
        Decision::Downdate
    };
    SwitchOutcome {
        decision,
        temp: temp.widen(),
        temp2: temp2.widen(),
    }
}

/// The corrected switch: recompute iff `temp * (omega/nu)^2 <= tol`, all in
/// working precision.
pub fn robust_decide<R: RealScalar>(omega: R, nu: R, beta: R, tol: R) -> Result<SwitchOutcome> {
    check_positive(omega, nu)?;
    if !(tol > R::zero()) {
        return Err(QrError::InvalidParameter("tolerance must be positive"));
    }
    let temp = predicted_loss(omega, beta);
    let memo = omega / nu;
    let temp2 = temp * (memo * memo);
    let decision = if temp2 <= tol {
        Decision::ExplicitRecompute
    } else {
        Decision::Downdate
    };
    Ok(SwitchOutcome {
        decision,
        temp: temp.widen(),
        temp2: temp2.widen(),
    })
}

fn source_column(j: usize, offset: Option<isize>, cols: usize) -> Result<usize> {
    match offset {
        None => Ok(j),
        Some(off) => {
            let src = j as isize + off;
            if src < 0 || src as usize >= cols {
                Err(QrError::InjectionOutOfRange {
                    column: j,
                    offset: off,
                    cols,
                })
            } else {
                Ok(src as usize)
            }
        }
    }
}

/// Updates the partial norms of every column right of step `k` after the
/// step-`k` reflector has been applied to `a`.
///
/// `betas` is indexed by absolute column: `betas[j] = |a[(k, j)]|` for `j > k`.
/// Columns whose tracked norm is already zero are skipped.
pub fn tracker_step<T: Scalar>(
    tracker: &mut NormTracker<T::Real>,
    k: usize,
    betas: &[T::Real],
    a: &Matrix<T>,
    cfg: &StrategyConfig<T::Real>,
) -> Result<()> {
    let n = a.cols();
    if tracker.len() != n {
        return Err(QrError::DimensionMismatch {
            expected: n,
            found: tracker.len(),
        });
    }
    if betas.len() != n {
        return Err(QrError::DimensionMismatch {
            expected: n,
            found: betas.len(),
        });
    }
    let excess = cfg.excess_precision();
    let offset = cfg.wrong_column_offset();
    let rows_left = k + 1 < a.rows();
    for j in (k + 1)..n {
        let omega = tracker.omega[j];
        if omega.is_zero() {
            continue;
        }
        let nu = tracker.nu[j];
        let beta = betas[j];
        let outcome = match cfg.kind {
            StrategyKind::Classic => classic_decide(omega, nu, beta, excess)?,
            StrategyKind::Robust => robust_decide(omega, nu, beta, cfg.tol)?,
            StrategyKind::ExactRecompute => {
                let informative = robust_decide(omega, nu, beta, cfg.tol)?;
                SwitchOutcome {
                    decision: Decision::ExplicitRecompute,
                    ..informative
                }
            }
        };
        let (decision, after) = match outcome.decision {
            Decision::ExplicitRecompute if rows_left => {
                let src = source_column(j, offset, n)?;
                let fresh = norm_from(&a.col(src)[k + 1..], k + 1, cfg.topology.as_ref());
                tracker.nu[j] = fresh;
                (Decision::ExplicitRecompute, fresh)
            }
            Decision::ExplicitRecompute | Decision::FlushZero => {
                tracker.nu[j] = T::Real::zero();
                (Decision::FlushZero, T::Real::zero())
            }
            Decision::Downdate => (Decision::Downdate, downdate_formula(omega, beta)?),
        };
        tracker.omega[j] = after;
        tracker.events.push(DowndateEvent {
            step: k,
            column: j,
            beta: beta.widen(),
            temp: outcome.temp,
            temp2: outcome.temp2,
            decision,
            omega_before: omega.widen(),
            omega_after: after.widen(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmat::{kahan, KahanParams};
    use crate::matrix::column_norm;

    #[test]
    fn init_examples() {
        let t = tracker_init(&Matrix::<f64>::identity(3));
        assert_eq!(t.omega, [1.0, 1.0, 1.0]);
        assert_eq!(t.nu, t.omega);
        assert!(t.events.is_empty());
        let z = tracker_init(&Matrix::<f64>::zeros(3, 3));
        assert_eq!(z.omega, [0.0; 3]);
        let k: Matrix<f64> = kahan(&KahanParams::new(2, 0.6).unwrap());
        let t = tracker_init(&k);
        for w in t.omega {
            assert!((w - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn downdate_formula_examples() {
        assert_eq!(downdate_formula(5.0, 3.0).unwrap(), 4.0);
        assert_eq!(downdate_formula(2.5_f64, 0.0).unwrap(), 2.5);
        assert_eq!(downdate_formula(1.0_f64, 1.0 + 1e-17).unwrap(), 0.0);
        assert_eq!(downdate_formula(1.0_f64, 1.5).unwrap(), 0.0);
        assert_eq!(downdate_formula(0.0_f64, 1.0), Err(QrError::ZeroNorm));
    }

    #[test]
    fn classic_examples() {
        let full = classic_decide(2.0_f64, 3.0, 2.0, false).unwrap();
        assert_eq!(full.temp, 0.0);
        assert_eq!(full.temp2, 1.0);
        assert_eq!(full.decision, Decision::ExplicitRecompute);

        let none = classic_decide(1.0_f64, 1.0, 0.0, false).unwrap();
        assert_eq!(none.temp2, 1.05);
        assert_eq!(none.decision, Decision::Downdate);

        let tiny = classic_decide(1e-9_f64, 1.0, 0.0, false).unwrap();
        assert_eq!(tiny.decision, Decision::ExplicitRecompute);
        // single data, double control: 1 + 5e-20 still rounds to one
        let tiny32 = classic_decide(1e-9_f32, 1.0, 0.0, true).unwrap();
        assert_eq!(tiny32.decision, Decision::ExplicitRecompute);

        assert_eq!(classic_decide(1.0_f64, 1.0, 0.0, true), Err(QrError::UnsupportedInjection));
        assert_eq!(classic_decide(0.0_f64, 1.0, 0.0, false), Err(QrError::ZeroNorm));
    }

    #[test]
    fn excess_precision_flips_the_classic_branch() {
        let (omega, nu, beta) = (1e-4_f32, 1.0_f32, 0.0_f32);
        let single = classic_decide(omega, nu, beta, false).unwrap();
        let wide = classic_decide(omega, nu, beta, true).unwrap();
        assert_eq!(single.decision, Decision::ExplicitRecompute);
        assert_eq!(single.temp2, 1.0);
        assert_eq!(wide.decision, Decision::Downdate);
        assert!(wide.temp2 > 1.0 && wide.temp2 < 1.000_000_001);
        let robust = robust_decide(omega, nu, beta, default_tol::<f32>()).unwrap();
        assert_eq!(robust.decision, Decision::ExplicitRecompute);
    }

    #[test]
    fn robust_examples() {
        let tol = default_tol::<f64>();
        assert_eq!(tol, f64::EPSILON.sqrt());
        let full = robust_decide(2.0_f64, 3.0, 2.0, tol).unwrap();
        assert_eq!(full.temp2, 0.0);
        assert_eq!(full.decision, Decision::ExplicitRecompute);
        let none = robust_decide(1.0_f64, 1.0, 0.0, tol).unwrap();
        assert_eq!(none.temp2, 1.0);
        assert_eq!(none.decision, Decision::Downdate);
        let small = robust_decide(1e-8_f64, 1.0, 0.0, tol).unwrap();
        assert!((small.temp2 - 1e-16).abs() < 1e-30);
        assert_eq!(small.decision, Decision::ExplicitRecompute);
        assert!(robust_decide(1.0_f64, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(StrategyConfig::<f64>::robust().validate().is_ok());
        assert_eq!(
            StrategyConfig::<f64>::classic()
                .with_injection(Injection::ExcessPrecisionControl)
                .validate(),
            Err(QrError::UnsupportedInjection)
        );
        assert!(StrategyConfig::<f32>::classic()
            .with_injection(Injection::ExcessPrecisionControl)
            .validate()
            .is_ok());
        assert!(StrategyConfig::<f64>::robust().with_tol(0.0).validate().is_err());
        assert_eq!(
            StrategyConfig::<f64>::exact().with_injection(Injection::wrong_column()).wrong_column_offset(),
            Some(-1)
        );
    }

    fn step_once(a: &Matrix<f64>, cfg: &StrategyConfig<f64>) -> Result<NormTracker<f64>> {
        let mut t = tracker_init(a);
        let betas: Vec<f64> = (0..a.cols()).map(|j| a[(0, j)].abs()).collect();
        tracker_step(&mut t, 0, &betas, a, cfg)?;
        Ok(t)
    }

    #[test]
    fn exact_strategy_tracks_true_norms() {
        let a = Matrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        let t = step_once(&a, &StrategyConfig::exact()).unwrap();
        for j in 1..3 {
            assert_eq!(t.omega[j], column_norm(&a, j, 1).unwrap());
            assert_eq!(t.nu[j], t.omega[j]);
        }
        assert!(t.events.iter().all(|e| e.decision == Decision::ExplicitRecompute));
    }

    #[test]
    fn zero_column_is_skipped() {
        let mut a = Matrix::<f64>::identity(3);
        a[(0, 1)] = 0.0;
        a[(1, 1)] = 0.0;
        let t = step_once(&a, &StrategyConfig::robust()).unwrap();
        assert_eq!(t.omega[1], 0.0);
        assert!(t.events.iter().all(|e| e.column != 1));
    }

    #[test]
    fn last_row_flushes() {
        let a = Matrix::from_fn(1, 3, |_, j| j as f64 + 1.0);
        let t = step_once(&a, &StrategyConfig::classic()).unwrap();
        assert_eq!(t.omega[1..], [0.0, 0.0]);
        assert_eq!(t.nu[1..], [0.0, 0.0]);
        assert!(t.events.iter().all(|e| e.decision == Decision::FlushZero));
    }

    #[test]
    fn wrong_column_reads_neighbour() {
        let a = Matrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 2)) as f64);
        let cfg = StrategyConfig::exact().with_injection(Injection::wrong_column());
        let t = step_once(&a, &cfg).unwrap();
        assert_eq!(t.omega[1], column_norm(&a, 0, 1).unwrap());
        assert_eq!(t.omega[2], column_norm(&a, 1, 1).unwrap());

        let cfg = StrategyConfig::exact().with_injection(Injection::WrongColumnRecompute { offset: 1 });
        assert!(matches!(
            step_once(&a, &cfg),
            Err(QrError::InjectionOutOfRange { column: 2, offset: 1, cols: 3 })
        ));
    }
}
