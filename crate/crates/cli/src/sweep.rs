//! Kahan-family parameter sweeps.

use qrcp_core::{
    check_structure, default_slack, factorize, kahan, symmetrized_kahan, KahanParams, Matrix, Precision, Scalar,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{GridShape, RunStrategy, SweepFamily};
use crate::artifacts::{num, DecisionCounts};
use crate::error::CliError;

/// Parses a non-negative decimal like `0.10` into units of `10^-scale`.
fn decimal_units(s: &str, scale: u32) -> Option<u64> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > scale as usize {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let mut f: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    f *= 10u64.pow(scale - frac.len() as u32);
    int.checked_mul(10u64.pow(scale))?.checked_add(f)
}

fn frac_digits(s: &str) -> usize {
    s.split_once('.').map_or(0, |(_, f)| f.len())
}

/// The c values `from, from + step, ..., <= to`, each formed from its exact
/// decimal string, so that `0.10:0.90:0.01` gives the doubles nearest to
/// 0.1, 0.11, ..., 0.9 with no accumulated drift.
pub fn c_grid(from: &str, to: &str, step: &str) -> Result<Vec<f64>, CliError> {
    let (from, to, step) = (from.trim(), to.trim(), step.trim());
    let scale = frac_digits(from).max(frac_digits(to)).max(frac_digits(step));
    if scale > 15 {
        return Err(CliError::usage("c grid needs at most 15 decimal places"));
    }
    let scale = scale as u32;
    let parse = |s: &str| {
        decimal_units(s, scale).ok_or_else(|| CliError::usage(format!("`{s}` is not a plain decimal number")))
    };
    let (a, b, h) = (parse(from)?, parse(to)?, parse(step)?);
    if h == 0 {
        return Err(CliError::usage("c step must be positive"));
    }
    if a > b {
        return Err(CliError::usage("c range is empty"));
    }
    let denom = 10u64.pow(scale);
    let mut out = Vec::new();
    let mut u = a;
    while u <= b {
        let text = format!("{}.{:0width$}", u / denom, u % denom, width = scale as usize);
        let c: f64 = text.parse().expect("formatted decimal parses");
        out.push(c);
        u += h;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub ns: Vec<usize>,
    pub cs: Vec<f64>,
    /// `None` is the sequential (1x1) run.
    pub grids: Vec<Option<GridShape>>,
    pub strategy: RunStrategy,
    pub precision: Precision,
    /// Absolute slack; `None` means `100 n eps` for each case.
    pub slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: &'static str,
    pub n: usize,
    pub c: f64,
    pub grid: String,
    pub passed: bool,
    pub monotone_ok: bool,
    pub dominance_ok: bool,
    pub worst_monotone_ratio: f64,
    pub worst_dominance_ratio: f64,
    pub violations: usize,
    pub numerical_rank: usize,
    pub recomputes: usize,
    /// First step whose pivot is not the column already in place.
    pub first_swap: Option<usize>,
    /// Row of the first violation and `|R_ii|` there.
    pub first_violation: Option<(usize, f64)>,
}

pub const SWEEP_HEADER: [&str; 15] = [
    "family",
    "n",
    "c",
    "grid",
    "passed",
    "monotone_ok",
    "dominance_ok",
    "worst_monotone_ratio",
    "worst_dominance_ratio",
    "violations",
    "numerical_rank",
    "recomputes",
    "first_swap",
    "first_violation_i",
    "first_violation_red",
];

fn run_case_typed<T: Scalar>(spec: &SweepSpec, n: usize, c: f64, grid: Option<GridShape>) -> Result<SweepRow, CliError> {
    let p = KahanParams::new(n, c)?;
    let a: Matrix<T> = match spec.family {
        SweepFamily::Kahan => kahan(&p),
        SweepFamily::Symkahan => symmetrized_kahan(&p),
    };
    let cfg = spec.strategy.clone().with_grid(grid).build::<T::Real>()?;
    let f = factorize(&a, &cfg)?;
    let slack = spec.slack.unwrap_or_else(|| default_slack::<T>(n));
    let rep = check_structure(&f.extract_r(), slack)?;
    Ok(SweepRow {
        family: spec.family.as_str(),
        n,
        c,
        grid: grid.map_or_else(|| "1x1".to_owned(), |g| g.to_string()),
        passed: rep.passed(),
        monotone_ok: rep.monotone_ok,
        dominance_ok: rep.dominance_ok,
        worst_monotone_ratio: rep.worst_monotone_ratio,
        worst_dominance_ratio: rep.worst_dominance_ratio,
        violations: rep.violations.len(),
        numerical_rank: rep.numerical_rank,
        recomputes: DecisionCounts::tally(&f.tracker.events).recompute,
        first_swap: f.perm.iter().enumerate().position(|(k, &p)| k != p),
        first_violation: rep.violations.first().map(|v| (v.i, rep.red_line[v.i])),
    })
}

/// One sweep case; Kahan matrices are real, so only the precision matters.
pub fn run_case(spec: &SweepSpec, n: usize, c: f64, grid: Option<GridShape>) -> Result<SweepRow, CliError> {
    match spec.precision {
        Precision::Single => run_case_typed::<f32>(spec, n, c, grid),
        Precision::Double => run_case_typed::<f64>(spec, n, c, grid),
    }
}

/// Runs every `(n, grid, c)` case, in parallel, and returns the rows in
/// that nested order regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    spec.strategy.validate_for(spec.precision)?;
    if spec.ns.is_empty() || spec.cs.is_empty() {
        return Err(CliError::usage("sweep needs at least one n and one c"));
    }
    let grids: Vec<Option<GridShape>> = if spec.grids.is_empty() {
        vec![None]
    } else {
        spec.grids.clone()
    };
    let cases: Vec<(usize, Option<GridShape>, f64)> = spec
        .ns
        .iter()
        .flat_map(|&n| grids.iter().flat_map(move |&g| spec.cs.iter().map(move |&c| (n, g, c))))
        .collect();
    cases
        .into_par_iter()
        .map(|(n, g, c)| run_case(spec, n, c, g))
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory CSV writer");
    for r in rows {
        w.write_record([
            r.family.to_owned(),
            r.n.to_string(),
            // shortest round-trip form, e.g. 0.41800000000000004
            format!("{:?}", r.c),
            r.grid.clone(),
            r.passed.to_string(),
            r.monotone_ok.to_string(),
            r.dominance_ok.to_string(),
            num(r.worst_monotone_ratio),
            num(r.worst_dominance_ratio),
            r.violations.to_string(),
            r.numerical_rank.to_string(),
            r.recomputes.to_string(),
            r.first_swap.map_or_else(String::new, |k| k.to_string()),
            r.first_violation.map_or_else(String::new, |(i, _)| i.to_string()),
            r.first_violation.map_or_else(String::new, |(_, red)| num(red)),
        ])
        .expect("in-memory CSV writer");
    }
    w.into_inner().expect("in-memory CSV writer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrcp_core::StrategyKind;

    #[test]
    fn grid_is_decimal_exact() {
        let cs = c_grid("0.10", "0.90", "0.01").unwrap();
        assert_eq!(cs.len(), 81);
        assert_eq!(cs[0], 0.1);
        assert_eq!(cs[32], 0.42);
        assert_eq!(cs[80], 0.9);
        assert_eq!(c_grid("0.5", "0.5", "0.1").unwrap(), [0.5]);
        assert_eq!(c_grid(".25", "0.75", "0.25").unwrap(), [0.25, 0.5, 0.75]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(c_grid("0.9", "0.1", "0.1").is_err());
        assert!(c_grid("0.1", "0.9", "0").is_err());
        assert!(c_grid("-0.1", "0.9", "0.1").is_err());
        assert!(c_grid("1e-2", "0.9", "0.1").is_err());
    }

    #[test]
    fn small_sweep_keeps_case_order() {
        let spec = SweepSpec {
            family: SweepFamily::Kahan,
            ns: vec![8, 12],
            cs: c_grid("0.2", "0.4", "0.1").unwrap(),
            grids: vec![None, Some(GridShape { nprow: 2, npcol: 3 })],
            strategy: RunStrategy::new(StrategyKind::Robust),
            precision: Precision::Double,
            slack: None,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.passed));
        assert_eq!((rows[0].n, rows[0].grid.as_str(), rows[0].c), (8, "1x1", 0.2));
        assert_eq!((rows[4].n, rows[4].grid.as_str(), rows[4].c), (8, "2x3", 0.3));
        assert_eq!(rows[11].n, 12);
        let csv = String::from_utf8(sweep_csv(&rows)).unwrap();
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.starts_with("family,n,c,grid,passed"));
    }
}
