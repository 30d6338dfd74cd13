//! Dense Matrix Market (`array`, `general`) reader and writer.
//!
//! Entries are written column by column in scientific notation with 17
//! significant digits for `f64` and 9 for `f32`, which is enough for the
//! reader to recover every finite value bit for bit. Complex entries take
//! one line each as `re im`.
//!
//! Files produced here carry a `% qrcp precision=single|double` comment so
//! that later commands can pick the working precision without a flag.

use std::fmt::Write as _;
use std::path::Path;

use qrcp_core::{Matrix, Precision, RealScalar, Scalar};
use thiserror::Error;

use crate::files::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub field: Field,
    pub rows: usize,
    pub cols: usize,
    /// Precision recorded by the writer, if the file came from this tool.
    pub precision: Option<Precision>,
    /// Line (1-based) holding the size line.
    size_line: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct MtxError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> MtxError {
    MtxError { line, msg: msg.into() }
}

pub fn precision_name(p: Precision) -> &'static str {
    match p {
        Precision::Single => "single",
        Precision::Double => "double",
    }
}

/// Number of digits after the point in `{:.*e}` output that round-trips.
fn exp_digits<R: RealScalar>() -> usize {
    match R::PRECISION {
        Precision::Single => 8,
        Precision::Double => 16,
    }
}

/// Formats a real in the round-tripping scientific form used in files.
pub fn format_real<R: RealScalar>(x: R) -> String {
    format!("{:.*e}", exp_digits::<R>(), x)
}

pub fn read_header(text: &str) -> Result<Header, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(err(1, "header must start with %%MatrixMarket"));
    }
    if words.len() != 5 {
        return Err(err(1, "header must read `%%MatrixMarket matrix array <real|complex> general`"));
    }
    if words[1] != "matrix" {
        return Err(err(1, format!("unsupported object `{}`", words[1])));
    }
    if words[2] != "array" {
        return Err(err(1, format!("unsupported format `{}`, only dense `array` is read", words[2])));
    }
    let field = match words[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(err(1, format!("unsupported field `{other}`"))),
    };
    if words[4] != "general" {
        return Err(err(1, format!("unsupported symmetry `{}`", words[4])));
    }

    let mut precision = None;
    for (no, line) in lines {
        let t = line.trim();
        if let Some(comment) = t.strip_prefix('%') {
            match comment.trim() {
                "qrcp precision=single" => precision = Some(Precision::Single),
                "qrcp precision=double" => precision = Some(Precision::Double),
                _ => {}
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let dims: Vec<&str> = t.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(err(no, "size line must hold exactly `rows cols`"));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| err(no, format!("bad dimension `{s}`")));
        return Ok(Header {
            field,
            rows: parse(dims[0])?,
            cols: parse(dims[1])?,
            precision,
            size_line: no,
        });
    }
    Err(err(text.lines().count() + 1, "file ended before the size line"))
}

fn parse_real<R: RealScalar>(tok: &str, line: usize) -> Result<R, MtxError> {
    let x: R = tok.parse().map_err(|_| err(line, format!("cannot parse `{tok}` as a number")))?;
    if !x.is_finite() {
        return Err(err(line, format!("non-finite entry `{tok}`")));
    }
    Ok(x)
}

/// Parses a dense Matrix Market file straight into `T`.
///
/// A real file may be read into a complex type; the reverse is an error.
pub fn parse<T: Scalar>(text: &str) -> Result<Matrix<T>, MtxError> {
    let h = read_header(text)?;
    if h.field == Field::Complex && !T::IS_COMPLEX {
        return Err(err(1, "complex file cannot be read as a real matrix"));
    }
    let want = h
        .rows
        .checked_mul(h.cols)
        .ok_or_else(|| err(h.size_line, "matrix dimensions overflow"))?;
    let mut data = Vec::with_capacity(want);
    let mut last = h.size_line;
    for (idx, line) in text.lines().enumerate().skip(h.size_line) {
        let no = idx + 1;
        last = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if data.len() == want {
            return Err(err(no, format!("more than the {want} entries announced by the size line")));
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let value = match (h.field, toks.as_slice()) {
            (Field::Real, [re]) => T::from_real(parse_real(re, no)?),
            (Field::Complex, [re, im]) => T::from_parts(parse_real(re, no)?, parse_real(im, no)?),
            (Field::Real, _) => return Err(err(no, "expected one value per line")),
            (Field::Complex, _) => return Err(err(no, "expected `re im` per line")),
        };
        data.push(value);
    }
    if data.len() != want {
        return Err(err(
            last + 1,
            format!("truncated file: found {} of {want} entries", data.len()),
        ));
    }
    Matrix::from_col_major(h.rows, h.cols, data).map_err(|e| err(h.size_line, e.to_string()))
}

pub fn to_string<T: Scalar>(a: &Matrix<T>) -> String {
    let field = if T::IS_COMPLEX { Field::Complex } else { Field::Real };
    let mut out = String::with_capacity(a.as_slice().len() * if T::IS_COMPLEX { 52 } else { 26 } + 96);
    out.push_str("%%MatrixMarket matrix array ");
    out.push_str(field.as_str());
    out.push_str(" general\n");
    let _ = writeln!(out, "% qrcp precision={}", precision_name(<T::Real as RealScalar>::PRECISION));
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for &x in a.as_slice() {
        out.push_str(&format_real(x.re()));
        if T::IS_COMPLEX {
            out.push(' ');
            out.push_str(&format_real(x.im()));
        }
        out.push('\n');
    }
    out
}

pub fn write_path<T: Scalar>(path: &Path, a: &Matrix<T>) -> std::io::Result<()> {
    write_atomic(path, to_string(a).as_bytes())
}
