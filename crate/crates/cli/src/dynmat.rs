//! Runtime choice among the four element types.

use qrcp_core::{Complex, Matrix, Precision};

use crate::mtx::{self, Field, MtxError};

#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    F32(Matrix<f32>),
    F64(Matrix<f64>),
    C32(Matrix<Complex<f32>>),
    C64(Matrix<Complex<f64>>),
}

/// Runs `$body` with `$m` bound to the typed matrix inside an [`AnyMatrix`].
#[macro_export]
macro_rules! with_matrix {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            $crate::dynmat::AnyMatrix::F32($m) => $body,
            $crate::dynmat::AnyMatrix::F64($m) => $body,
            $crate::dynmat::AnyMatrix::C32($m) => $body,
            $crate::dynmat::AnyMatrix::C64($m) => $body,
        }
    };
}

impl AnyMatrix {
    pub fn precision(&self) -> Precision {
        match self {
            AnyMatrix::F32(_) | AnyMatrix::C32(_) => Precision::Single,
            AnyMatrix::F64(_) | AnyMatrix::C64(_) => Precision::Double,
        }
    }

    pub fn field(&self) -> Field {
        match self {
            AnyMatrix::F32(_) | AnyMatrix::F64(_) => Field::Real,
            AnyMatrix::C32(_) | AnyMatrix::C64(_) => Field::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        with_matrix!(self, m => m.shape())
    }

    /// Parses `text`, taking the field from the header and the precision from
    /// `precision`, else from the file's own precision comment, else double.
    pub fn parse(text: &str, precision: Option<Precision>) -> Result<Self, MtxError> {
        let h = mtx::read_header(text)?;
        let p = precision.or(h.precision).unwrap_or(Precision::Double);
        Ok(match (h.field, p) {
            (Field::Real, Precision::Single) => AnyMatrix::F32(mtx::parse(text)?),
            (Field::Real, Precision::Double) => AnyMatrix::F64(mtx::parse(text)?),
            (Field::Complex, Precision::Single) => AnyMatrix::C32(mtx::parse(text)?),
            (Field::Complex, Precision::Double) => AnyMatrix::C64(mtx::parse(text)?),
        })
    }

    pub fn to_mtx_string(&self) -> String {
        with_matrix!(self, m => mtx::to_string(m))
    }
}
