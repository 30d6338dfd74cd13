//! Command implementations behind the `qrcp` binary.

use std::path::{Path, PathBuf};

use qrcp_core::{
    check_structure_with, compare_pivots, default_rank_tol, default_slack, factorize, kahan, random_gaussian,
    residual_metrics, symmetrized_kahan, Complex, KahanParams, Matrix, Precision, RealScalar, Scalar, RNG_NAME,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    CheckArgs, Cli, Command, CompareArgs, FactorArgs, FieldArg, GenArgs, GenFamily, ReportArgs, RunStrategy,
    SweepArgs,
};
use crate::artifacts::{
    events_csv, perm_csv, perm_pair_csv, profile_csv, read_perm_csv, red_blue_csv, tau_csv, DecisionCounts,
    StructureSummary,
};
use crate::dynmat::AnyMatrix;
use crate::error::CliError;
use crate::files::write_atomic;
use crate::mtx::precision_name;
use crate::sweep::{c_grid, run_sweep, sweep_csv, SweepSpec};
use crate::with_matrix;

/// What a command produced: a JSON summary for stdout, a line of human
/// text for stderr, and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub note: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(summary: Value, note: String) -> Self {
        Self {
            summary,
            note,
            exit_code: 0,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Factor(a) => factor(a),
        Command::Check(a) => check(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
    }
}

fn save(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::io(path, e))
}

fn save_json(path: Option<&PathBuf>, v: &Value) -> Result<(), CliError> {
    if let Some(p) = path {
        save(p, pretty(v).as_bytes())?;
    }
    Ok(())
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn load(path: &Path, precision: Option<Precision>) -> Result<AnyMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    AnyMatrix::parse(&text, precision).map_err(|source| CliError::Mtx {
        path: path.to_owned(),
        source,
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn slack_for<T: Scalar>(slack: Option<f64>, n: usize) -> f64 {
    slack.unwrap_or_else(|| default_slack::<T>(n))
}

fn tau_for<T: Scalar>(tau: Option<f64>) -> T::Real {
    tau.map_or_else(default_rank_tol::<T>, T::Real::from_f64)
}

fn gen(a: &GenArgs) -> Result<Outcome, CliError> {
    let precision: Precision = a.precision.into();
    let complex = a.field == FieldArg::Complex;
    if a.n == 0 || a.m == Some(0) {
        return Err(CliError::usage("matrix dimensions must be positive"));
    }
    let mut params = json!({
        "family": a.family,
        "n": a.n,
        "field": a.field,
        "precision": precision_name(precision),
        "output": path_str(&a.output),
    });
    let matrix = match a.family {
        GenFamily::Kahan | GenFamily::Symkahan => {
            let c = a
                .c
                .as_deref()
                .ok_or_else(|| CliError::usage("kahan and symkahan need --c"))?;
            if a.m.is_some() {
                return Err(CliError::usage("--m only applies to random matrices"));
            }
            let p = KahanParams::parse(a.n, c).map_err(|e| CliError::usage(e.to_string()))?;
            params["c"] = json!(format!("{:?}", p.c()));
            let sym = a.family == GenFamily::Symkahan;
            fn build<T: Scalar>(p: &KahanParams, sym: bool) -> Matrix<T> {
                if sym {
                    symmetrized_kahan(p)
                } else {
                    kahan(p)
                }
            }
            match (complex, precision) {
                (false, Precision::Single) => AnyMatrix::F32(build(&p, sym)),
                (false, Precision::Double) => AnyMatrix::F64(build(&p, sym)),
                (true, Precision::Single) => AnyMatrix::C32(build(&p, sym)),
                (true, Precision::Double) => AnyMatrix::C64(build(&p, sym)),
            }
        }
        GenFamily::Random => {
            if a.c.is_some() {
                return Err(CliError::usage("--c only applies to kahan and symkahan"));
            }
            let m = a.m.unwrap_or(a.n);
            params["m"] = json!(m);
            params["seed"] = json!(a.seed);
            params["rng"] = json!(RNG_NAME);
            let (n, s) = (a.n, a.seed);
            match (complex, precision) {
                (false, Precision::Single) => AnyMatrix::F32(random_gaussian(m, n, s)?),
                (false, Precision::Double) => AnyMatrix::F64(random_gaussian(m, n, s)?),
                (true, Precision::Single) => AnyMatrix::C32(random_gaussian::<Complex<f32>>(m, n, s)?),
                (true, Precision::Double) => AnyMatrix::C64(random_gaussian::<Complex<f64>>(m, n, s)?),
            }
        }
    };
    save(&a.output, matrix.to_mtx_string().as_bytes())?;
    let (rows, cols) = matrix.shape();
    let summary = json!({
        "command": "gen",
        "config": params,
        "result": { "rows": rows, "cols": cols },
    });
    save_json(a.json.as_ref(), &summary)?;
    Ok(Outcome::ok(summary, format!("gen: wrote {rows}x{cols} matrix to {}", a.output.display())))
}

#[derive(Serialize)]
struct FactorResult {
    rows: usize,
    cols: usize,
    field: &'static str,
    residual_rel: f64,
    ortho: f64,
    residual_bound: f64,
    ortho_bound: f64,
    decisions: DecisionCounts,
    structure: StructureSummary,
}

fn factor_typed<T: Scalar>(a: &FactorArgs, st: &RunStrategy, m: &Matrix<T>) -> Result<FactorResult, CliError> {
    let cfg = st.build::<T::Real>()?;
    let f = factorize(m, &cfg)?;
    let r = f.extract_r();
    let metrics = residual_metrics(m, &f)?;
    let (rows, cols) = m.shape();
    let rep = check_structure_with(&r, slack_for::<T>(a.slack, cols), tau_for::<T>(a.tau))?;

    let dir = &a.output;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    crate::mtx::write_path(&dir.join("R.mtx"), &r).map_err(|e| CliError::io(dir.join("R.mtx"), e))?;
    save(&dir.join("perm.csv"), &perm_csv(&f.perm))?;
    save(&dir.join("tau.csv"), &tau_csv(&f.taus))?;
    save(&dir.join("events.csv"), &events_csv(&f.tracker.events))?;

    let eps = T::eps().widen();
    Ok(FactorResult {
        rows,
        cols,
        field: if T::IS_COMPLEX { "complex" } else { "real" },
        residual_rel: metrics.residual_rel,
        ortho: metrics.ortho,
        residual_bound: 50.0 * rows.max(cols) as f64 * eps,
        ortho_bound: 50.0 * rows as f64 * eps,
        decisions: DecisionCounts::tally(&f.tracker.events),
        structure: StructureSummary::from(&rep),
    })
}

fn factor(a: &FactorArgs) -> Result<Outcome, CliError> {
    let st = RunStrategy::from_args(&a.switch, &a.grid);
    let m = load(&a.input, a.precision.map(Into::into))?;
    let precision = m.precision();
    st.validate_for(precision)?;
    let result = with_matrix!(&m, mat => factor_typed(a, &st, mat))?;
    let summary = json!({
        "command": "factor",
        "config": {
            "input": path_str(&a.input),
            "output": path_str(&a.output),
            "precision": precision_name(precision),
            "strategy": st.resolved(precision),
            "slack": a.slack,
            "tau": a.tau,
        },
        "result": result,
    });
    save(&a.output.join("summary.json"), pretty(&summary).as_bytes())?;
    save_json(a.json.as_ref(), &summary)?;
    let s = &result.structure;
    let note = format!(
        "factor: residual {:e}, ortho {:e}, structure {}, {} recomputes",
        result.residual_rel,
        result.ortho,
        if s.passed { "ok" } else { "VIOLATED" },
        result.decisions.recompute
    );
    Ok(Outcome::ok(summary, note))
}

fn check(a: &CheckArgs) -> Result<Outcome, CliError> {
    let path = if a.input.is_dir() {
        a.input.join("R.mtx")
    } else {
        a.input.clone()
    };
    let m = load(&path, a.precision.map(Into::into))?;
    let precision = m.precision();
    fn typed<T: Scalar>(r: &Matrix<T>, a: &CheckArgs) -> Result<qrcp_core::StructureReport, CliError> {
        Ok(check_structure_with(r, slack_for::<T>(a.slack, r.cols()), tau_for::<T>(a.tau))?)
    }
    let rep = with_matrix!(&m, r => typed(r, a))?;
    if let Some(p) = &a.csv {
        save(p, &profile_csv(&rep))?;
    }
    let s = StructureSummary::from(&rep);
    let summary = json!({
        "command": "check",
        "config": {
            "input": path_str(&path),
            "precision": precision_name(precision),
            "slack": rep.slack,
            "tau": a.tau,
        },
        "result": s,
    });
    save_json(a.json.as_ref(), &summary)?;
    let note = if s.passed {
        format!("check: PASS (rank {})", s.numerical_rank)
    } else {
        let first = s.first_violation.as_ref().expect("failed report has a violation");
        format!(
            "check: FAIL, {} violations, first {} at ({}, {}) ratio {:e}",
            s.violations, first.kind, first.i, first.j, first.ratio
        )
    };
    Ok(Outcome {
        exit_code: if s.passed { 0 } else { 1 },
        summary,
        note,
    })
}

fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let mut st = RunStrategy::new(a.switch.strategy.into());
    st.tol = a.switch.tol;
    st.injections = a.switch.inject.iter().map(|i| i.0).collect();
    st.mb = a.mb;
    st.nb = a.nb;
    let precision: Precision = a.precision.into();
    let spec = SweepSpec {
        family: a.family,
        ns: a.n.clone(),
        cs: c_grid(&a.c_from, &a.c_to, &a.c_step)?,
        grids: a.grid.iter().copied().map(Some).collect(),
        strategy: st.clone(),
        precision,
        slack: a.slack,
    };
    let rows = run_sweep(&spec)?;
    if let Some(p) = &a.csv {
        save(p, &sweep_csv(&rows))?;
    }
    let failures: Vec<Value> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| json!({ "n": r.n, "c": r.c, "grid": r.grid }))
        .collect();
    let grids: Vec<String> = if a.grid.is_empty() {
        vec!["1x1".to_owned()]
    } else {
        a.grid.iter().map(ToString::to_string).collect()
    };
    let mut resolved = st.resolved(precision);
    resolved.grid = grids.join(",");
    let summary = json!({
        "command": "sweep",
        "config": {
            "family": a.family,
            "n": a.n,
            "c_from": a.c_from,
            "c_to": a.c_to,
            "c_step": a.c_step,
            "c_count": spec.cs.len(),
            "precision": precision_name(precision),
            "strategy": resolved,
            "slack": a.slack,
        },
        "result": {
            "cases": rows.len(),
            "failed": failures.len(),
            "failures": failures,
        },
    });
    save_json(a.json.as_ref(), &summary)?;
    let note = format!("sweep: {} cases, {} failed", rows.len(), failures.len());
    Ok(Outcome::ok(summary, note))
}

fn compare(a: &CompareArgs) -> Result<Outcome, CliError> {
    let first = RunStrategy::from_args(&a.switch, &a.grid);
    let second = RunStrategy {
        kind: a.strategy2.map_or(first.kind, Into::into),
        tol: a.tol2.or(first.tol),
        injections: a.inject2.iter().map(|i| i.0).collect(),
        grid: a.grid2.or(first.grid),
        mb: a.mb2.unwrap_or(first.mb),
        nb: a.nb2.unwrap_or(first.nb),
    };
    let m = load(&a.input, a.precision.map(Into::into))?;
    let precision = m.precision();
    first.validate_for(precision)?;
    second.validate_for(precision)?;

    fn typed<T: Scalar>(
        m: &Matrix<T>,
        x: &RunStrategy,
        y: &RunStrategy,
    ) -> Result<(Vec<usize>, Vec<usize>, qrcp_core::PivotDivergence), CliError> {
        let fx = factorize(m, &x.build::<T::Real>()?)?;
        let fy = factorize(m, &y.build::<T::Real>()?)?;
        let d = compare_pivots(&fx, &fy, m)?;
        Ok((fx.perm, fy.perm, d))
    }
    let (pa, pb, d) = with_matrix!(&m, mat => typed(mat, &first, &second))?;
    if let Some(p) = &a.csv {
        save(p, &perm_pair_csv(&pa, &pb))?;
    }
    let differing = pa.iter().zip(&pb).filter(|(x, y)| x != y).count();
    let summary = json!({
        "command": "compare",
        "config": {
            "input": path_str(&a.input),
            "precision": precision_name(precision),
            "a": first.resolved(precision),
            "b": second.resolved(precision),
        },
        "result": {
            "identical": pa == pb,
            "differing_positions": differing,
            "divergence_step": d.step,
            "columns": d.columns,
            "norms": d.norms,
            "gap_rel": d.gap_rel,
        },
    });
    save_json(a.json.as_ref(), &summary)?;
    let note = match d.step {
        None => "compare: identical pivot sequences".to_owned(),
        Some(k) => format!("compare: pivots diverge at step {k}, relative norm gap {:e}", d.gap_rel),
    };
    Ok(Outcome::ok(summary, note))
}

fn report(a: &ReportArgs) -> Result<Outcome, CliError> {
    let dir = &a.factor_dir;
    let r = load(&dir.join("R.mtx"), None)?;
    let perm = read_perm_csv(&dir.join("perm.csv"))?;
    let (_, cols) = r.shape();
    if perm.len() != cols {
        return Err(CliError::Csv {
            path: dir.join("perm.csv"),
            msg: format!("{} entries for an R with {cols} columns", perm.len()),
        });
    }
    fn typed<T: Scalar>(r: &Matrix<T>, a: &ReportArgs) -> Result<qrcp_core::StructureReport, CliError> {
        Ok(check_structure_with(r, slack_for::<T>(a.slack, r.cols()), tau_for::<T>(a.tau))?)
    }
    let rep = with_matrix!(&r, m => typed(m, a))?;
    save(&a.csv, &red_blue_csv(&perm, &rep))?;
    let s = StructureSummary::from(&rep);
    let summary = json!({
        "command": "report",
        "config": {
            "factor": path_str(dir),
            "precision": precision_name(r.precision()),
            "slack": rep.slack,
            "tau": a.tau,
            "csv": path_str(&a.csv),
        },
        "result": s,
    });
    save_json(a.json.as_ref(), &summary)?;
    Ok(Outcome::ok(summary, format!("report: wrote {} rows to {}", rep.red_line.len(), a.csv.display())))
}
