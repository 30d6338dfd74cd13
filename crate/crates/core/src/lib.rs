//! Householder QR with Businger-Golub column pivoting, with interchangeable
//! partial column norm downdating switches and the tooling to tell a
//! correctly pivoted `R` from a wrongly pivoted one.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use qrcp_core::{factorize, check_structure, default_slack, kahan, KahanParams, Matrix, StrategyConfig};
//!
//! let a: Matrix<f64> = kahan(&KahanParams::new(40, 0.3).unwrap());
//! let f = factorize(&a, &StrategyConfig::robust()).unwrap();
//! let report = check_structure(&f.extract_r(), default_slack::<f64>(40)).unwrap();
//! assert!(report.passed());
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod downdating;
pub mod error;
pub mod genmat;
pub mod gridsim;
pub mod householder;
pub mod matrix;
pub mod qrcp;
pub mod scalar;
pub mod svd;

pub use diagnostics::{
    check_structure, check_structure_with, compare_pivots, default_rank_tol, default_slack, failure_precondition,
    numerical_rank, pivot_quality, residual_metrics, row_scaled_condition, FailurePrecondition, PivotCheck,
    PivotDivergence, ResidualMetrics, StructureReport, Violation, ViolationKind,
};
pub use downdating::{
    classic_decide, default_tol, downdate_formula, robust_decide, tracker_init, tracker_init_with, tracker_step,
    Decision, DowndateEvent, Injection, NormTracker, StrategyConfig, StrategyKind, SwitchOutcome,
};
pub use error::{QrError, Result};
pub use genmat::{kahan, random_gaussian, symmetrized_kahan, KahanParams, RNG_NAME};
pub use gridsim::{distributed_argmax, distributed_argmax_at, distributed_norm, distributed_norm_at, GridTopology};
pub use householder::{reflector_apply, reflector_generate, Reflector};
pub use matrix::{column_norm, gemv_update, vector_norm, Matrix, ScaledSsq};
pub use num_complex::Complex;
pub use qrcp::{extract_r, factorize, factorize_observed, form_q, select_pivot, PivotStep, PivotedQr};
pub use scalar::{Precision, RealScalar, Scalar};
pub use svd::{condition_number, singular_values};
