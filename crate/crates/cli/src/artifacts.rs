//! CSV artifacts and the JSON pieces shared between commands.
//!
//! Floating-point fields use Rust's shortest round-trip scientific form
//! (`{:e}`), which is a pure function of the value, so identical runs give
//! identical bytes.

use std::path::Path;

use qrcp_core::{Decision, DowndateEvent, RealScalar, Scalar, StructureReport};
use serde::Serialize;

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    // writing into a Vec cannot fail
    w.into_inner().expect("in-memory CSV writer")
}

fn table<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV writer");
    for row in rows {
        w.write_record(row).expect("in-memory CSV writer");
    }
    finish(w)
}

pub const EVENTS_HEADER: [&str; 8] = ["k", "j", "beta", "temp", "temp2", "decision", "omega_before", "omega_after"];

pub fn events_csv(events: &[DowndateEvent]) -> Vec<u8> {
    table(
        &EVENTS_HEADER,
        events.iter().map(|e| {
            [
                e.step.to_string(),
                e.column.to_string(),
                num(e.beta),
                num(e.temp),
                num(e.temp2),
                e.decision.as_str().to_owned(),
                num(e.omega_before),
                num(e.omega_after),
            ]
        }),
    )
}

pub fn profile_csv(rep: &StructureReport) -> Vec<u8> {
    table(
        &["i", "red", "blue"],
        rep.red_line
            .iter()
            .zip(&rep.blue_line)
            .enumerate()
            .map(|(i, (&r, &b))| [i.to_string(), num(r), num(b)]),
    )
}

pub fn red_blue_csv(perm: &[usize], rep: &StructureReport) -> Vec<u8> {
    table(
        &["i", "pivot", "red", "blue"],
        rep.red_line
            .iter()
            .zip(&rep.blue_line)
            .enumerate()
            .map(|(i, (&r, &b))| {
                let p = perm.get(i).map_or_else(String::new, usize::to_string);
                [i.to_string(), p, num(r), num(b)]
            }),
    )
}

pub fn perm_csv(perm: &[usize]) -> Vec<u8> {
    table(
        &["k", "column"],
        perm.iter().enumerate().map(|(k, &c)| [k.to_string(), c.to_string()]),
    )
}

pub fn perm_pair_csv(a: &[usize], b: &[usize]) -> Vec<u8> {
    table(
        &["k", "perm_a", "perm_b"],
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (&x, &y))| [k.to_string(), x.to_string(), y.to_string()]),
    )
}

pub fn tau_csv<T: Scalar>(taus: &[T]) -> Vec<u8> {
    table(
        &["k", "tau_re", "tau_im"],
        taus.iter()
            .enumerate()
            .map(|(k, t)| [k.to_string(), num(t.re().widen()), num(t.im().widen())]),
    )
}

/// Reads the `k,column` file written by [`perm_csv`].
pub fn read_perm_csv(path: &Path) -> Result<Vec<usize>, CliError> {
    let bad = |msg: String| CliError::Csv {
        path: path.to_owned(),
        msg,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["k", "column"] {
        return Err(bad("expected header `k,column`".to_owned()));
    }
    let mut perm = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = idx + 2;
        let k: usize = rec[0].parse().map_err(|_| bad(format!("line {line}: bad step index")))?;
        if k != perm.len() {
            return Err(bad(format!("line {line}: steps out of order")));
        }
        perm.push(rec[1].parse().map_err(|_| bad(format!("line {line}: bad column index")))?);
    }
    Ok(perm)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecisionCounts {
    pub downdate: usize,
    pub recompute: usize,
    pub flush_zero: usize,
}

impl DecisionCounts {
    pub fn tally(events: &[DowndateEvent]) -> Self {
        let mut c = Self::default();
        for e in events {
            match e.decision {
                Decision::Downdate => c.downdate += 1,
                Decision::ExplicitRecompute => c.recompute += 1,
                Decision::FlushZero => c.flush_zero += 1,
            }
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstViolation {
    pub kind: &'static str,
    pub i: usize,
    pub j: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureSummary {
    pub passed: bool,
    pub monotone_ok: bool,
    pub dominance_ok: bool,
    pub worst_monotone_ratio: f64,
    pub worst_dominance_ratio: f64,
    pub violations: usize,
    pub first_violation: Option<FirstViolation>,
    pub numerical_rank: usize,
    pub slack: f64,
}

impl From<&StructureReport> for StructureSummary {
    fn from(r: &StructureReport) -> Self {
        Self {
            passed: r.passed(),
            monotone_ok: r.monotone_ok,
            dominance_ok: r.dominance_ok,
            worst_monotone_ratio: r.worst_monotone_ratio,
            worst_dominance_ratio: r.worst_dominance_ratio,
            violations: r.violations.len(),
            first_violation: r.violations.first().map(|v| FirstViolation {
                kind: match v.kind {
                    qrcp_core::ViolationKind::Monotone => "monotone",
                    qrcp_core::ViolationKind::Dominance => "dominance",
                },
                i: v.i,
                j: v.j,
                ratio: v.ratio,
            }),
            numerical_rank: r.numerical_rank,
            slack: r.slack,
        }
    }
}
