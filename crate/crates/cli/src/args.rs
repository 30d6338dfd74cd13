//! Command-line surface.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrcp_core::{default_tol, GridTopology, Injection, Precision, RealScalar, StrategyConfig, StrategyKind};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qrcp",
    version,
    about = "Column-pivoted QR stress tester: generate, factor, check, sweep, compare, report",
    long_about = "Column-pivoted QR stress tester.\n\n\
        Every command prints a JSON summary (including the resolved configuration) on stdout; \
        human-readable notes go to stderr. Exit status: 0 success, 1 structure check failed \
        (check only), 2 usage error, 3 input or runtime error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a test matrix in Matrix Market format.
    Gen(GenArgs),
    /// Factor a matrix and write R, perm, tau and the downdating event log.
    Factor(FactorArgs),
    /// Verify the rank-revealing structure of an R factor.
    Check(CheckArgs),
    /// Factor Kahan-type matrices over a grid of c values and tabulate verdicts.
    Sweep(SweepArgs),
    /// Factor one matrix under two configurations and report pivot divergence.
    Compare(CompareArgs),
    /// Merge the outputs of `factor` into red/blue profile data.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenFamily {
    Kahan,
    Symkahan,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepFamily {
    Kahan,
    Symkahan,
}

impl SweepFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepFamily::Kahan => "kahan",
            SweepFamily::Symkahan => "symkahan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Single,
    Double,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Single => Precision::Single,
            PrecisionArg::Double => Precision::Double,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Classic,
    Robust,
    Exact,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Classic => StrategyKind::Classic,
            StrategyArg::Robust => StrategyKind::Robust,
            StrategyArg::Exact => StrategyKind::ExactRecompute,
        }
    }
}

/// `excess-control`, `wrong-column` or `wrong-column:<offset>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InjectArg(pub Injection);

impl FromStr for InjectArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "excess-control" => Ok(InjectArg(Injection::ExcessPrecisionControl)),
            "wrong-column" => Ok(InjectArg(Injection::wrong_column())),
            other => match other.strip_prefix("wrong-column:") {
                Some(off) => off
                    .parse::<isize>()
                    .map(|offset| InjectArg(Injection::WrongColumnRecompute { offset }))
                    .map_err(|_| format!("bad wrong-column offset `{off}`")),
                None => Err(format!(
                    "unknown injection `{other}` (expected excess-control or wrong-column[:offset])"
                )),
            },
        }
    }
}

impl fmt::Display for InjectArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Injection::ExcessPrecisionControl => f.write_str("excess-control"),
            Injection::WrongColumnRecompute { offset } => write!(f, "wrong-column:{offset}"),
        }
    }
}

/// Process grid shape written `RxC`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridShape {
    pub nprow: usize,
    pub npcol: usize,
}

impl FromStr for GridShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid `{s}` is not of the form RxC"))?;
        let dim = |t: &str| match t.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(format!("grid `{s}` needs positive integers")),
        };
        Ok(GridShape {
            nprow: dim(r)?,
            npcol: dim(c)?,
        })
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nprow, self.npcol)
    }
}

#[derive(Clone, Debug, Args)]
pub struct SwitchArgs {
    /// Norm-downdating switch.
    #[arg(long, value_enum, default_value = "robust")]
    pub strategy: StrategyArg,
    /// Recompute threshold of the robust switch [default: sqrt(eps)].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Failure injection; may be repeated.
    #[arg(long = "inject", value_name = "INJECTION")]
    pub inject: Vec<InjectArg>,
}

#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    /// Simulated process grid `RxC` [default: sequential].
    #[arg(long, value_name = "RxC")]
    pub grid: Option<GridShape>,
    /// Row block size of the simulated grid.
    #[arg(long, default_value_t = 1)]
    pub mb: usize,
    /// Column block size of the simulated grid.
    #[arg(long, default_value_t = 1)]
    pub nb: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: GenFamily,
    /// Order (columns for `random`).
    #[arg(long)]
    pub n: usize,
    /// Rows for `random` [default: n].
    #[arg(long)]
    pub m: Option<usize>,
    /// Kahan parameter, parsed as a double (e.g. 0.41800000000000004).
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value = "double")]
    pub precision: PrecisionArg,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Directory receiving R.mtx, perm.csv, tau.csv, events.csv, summary.json.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub switch: SwitchArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Working precision [default: from the file, else double].
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    /// Structure slack [default: 100 n eps].
    #[arg(long)]
    pub slack: Option<f64>,
    /// Numerical rank threshold [default: sqrt(eps)].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// An R factor in Matrix Market format, or a directory written by `factor`.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Write the `i,red,blue` profile here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "kahan")]
    pub family: SweepFamily,
    /// Matrix orders; may be repeated or comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value = "0.10")]
    pub c_from: String,
    #[arg(long, default_value = "0.90")]
    pub c_to: String,
    #[arg(long, default_value = "0.01")]
    pub c_step: String,
    #[command(flatten)]
    pub switch: SwitchArgs,
    /// Grids to run; may be repeated or comma separated [default: sequential].
    #[arg(long, value_name = "RxC", value_delimiter = ',')]
    pub grid: Vec<GridShape>,
    #[arg(long, default_value_t = 1)]
    pub mb: usize,
    #[arg(long, default_value_t = 1)]
    pub nb: usize,
    #[arg(long, value_enum, default_value = "double")]
    pub precision: PrecisionArg,
    /// Structure slack [default: 100 n eps per case].
    #[arg(long)]
    pub slack: Option<f64>,
    /// Write one row per case here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    #[command(flatten)]
    pub switch: SwitchArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Second strategy [default: same as the first].
    #[arg(long, value_enum)]
    pub strategy2: Option<StrategyArg>,
    #[arg(long)]
    pub tol2: Option<f64>,
    /// Injections of the second run (none unless given).
    #[arg(long = "inject2", value_name = "INJECTION")]
    pub inject2: Vec<InjectArg>,
    /// Second grid [default: same as the first].
    #[arg(long, value_name = "RxC")]
    pub grid2: Option<GridShape>,
    #[arg(long)]
    pub mb2: Option<usize>,
    #[arg(long)]
    pub nb2: Option<usize>,
    /// Write `k,perm_a,perm_b` here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `factor`.
    #[arg(long = "factor")]
    pub factor_dir: PathBuf,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Write `i,pivot,red,blue` here.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Precision-independent description of one factorization setup.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStrategy {
    pub kind: StrategyKind,
    pub tol: Option<f64>,
    pub injections: Vec<Injection>,
    pub grid: Option<GridShape>,
    pub mb: usize,
    pub nb: usize,
}

/// The same, with every default filled in, as echoed in summaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedStrategy {
    pub strategy: &'static str,
    pub tol: f64,
    pub inject: Vec<String>,
    pub grid: String,
    pub mb: usize,
    pub nb: usize,
}

impl RunStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            tol: None,
            injections: Vec::new(),
            grid: None,
            mb: 1,
            nb: 1,
        }
    }

    pub fn from_args(s: &SwitchArgs, g: &GridArgs) -> Self {
        Self {
            kind: s.strategy.into(),
            tol: s.tol,
            injections: s.inject.iter().map(|i| i.0).collect(),
            grid: g.grid,
            mb: g.mb,
            nb: g.nb,
        }
    }

    pub fn with_injection(mut self, inj: Injection) -> Self {
        self.injections.push(inj);
        self
    }

    pub fn with_grid(mut self, grid: Option<GridShape>) -> Self {
        self.grid = grid;
        self
    }

    pub fn topology(&self) -> Result<Option<GridTopology>, CliError> {
        match self.grid {
            None => Ok(None),
            Some(g) => GridTopology::new(g.nprow, g.npcol, self.mb, self.nb)
                .map(Some)
                .map_err(|e| CliError::usage(e.to_string())),
        }
    }

    /// Builds the core configuration in working precision `R`. Combinations
    /// the core rejects (a non-positive tolerance, the excess-control
    /// injection in double precision) are usage errors.
    pub fn build<R: RealScalar>(&self) -> Result<StrategyConfig<R>, CliError> {
        let mut cfg = StrategyConfig::<R>::new(self.kind);
        if let Some(t) = self.tol {
            cfg = cfg.with_tol(R::from_f64(t));
        }
        for &inj in &self.injections {
            cfg = cfg.with_injection(inj);
        }
        if let Some(topo) = self.topology()? {
            cfg = cfg.with_topology(topo);
        }
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Fails early with a usage error if the setup is invalid in `precision`.
    pub fn validate_for(&self, precision: Precision) -> Result<(), CliError> {
        match precision {
            Precision::Single => self.build::<f32>().map(|_| ()),
            Precision::Double => self.build::<f64>().map(|_| ()),
        }
    }

    pub fn resolved(&self, precision: Precision) -> ResolvedStrategy {
        let tol = self.tol.unwrap_or(match precision {
            Precision::Single => default_tol::<f32>() as f64,
            Precision::Double => default_tol::<f64>(),
        });
        ResolvedStrategy {
            strategy: self.kind.as_str(),
            tol,
            inject: self.injections.iter().map(|&i| InjectArg(i).to_string()).collect(),
            grid: self.grid.map_or_else(|| "1x1".to_owned(), |g| g.to_string()),
            mb: self.mb,
            nb: self.nb,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn injection_syntax() {
        assert_eq!("excess-control".parse::<InjectArg>().unwrap().0, Injection::ExcessPrecisionControl);
        assert_eq!(
            "wrong-column".parse::<InjectArg>().unwrap().0,
            Injection::WrongColumnRecompute { offset: -1 }
        );
        assert_eq!(
            "wrong-column:2".parse::<InjectArg>().unwrap().0,
            Injection::WrongColumnRecompute { offset: 2 }
        );
        assert!("wrong-column:x".parse::<InjectArg>().is_err());
        assert!("bitflip".parse::<InjectArg>().is_err());
        assert_eq!("wrong-column:-3".parse::<InjectArg>().unwrap().to_string(), "wrong-column:-3");
    }

    #[test]
    fn grid_syntax() {
        assert_eq!("6x4".parse::<GridShape>().unwrap(), GridShape { nprow: 6, npcol: 4 });
        assert!("6".parse::<GridShape>().is_err());
        assert!("0x4".parse::<GridShape>().is_err());
    }

    #[test]
    fn excess_control_in_double_is_usage_error() {
        let s = RunStrategy::new(StrategyKind::Classic).with_injection(Injection::ExcessPrecisionControl);
        assert!(s.validate_for(Precision::Single).is_ok());
        let e = s.validate_for(Precision::Double).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn resolved_defaults() {
        let r = RunStrategy::new(StrategyKind::Robust).resolved(Precision::Double);
        assert_eq!(r.tol, f64::EPSILON.sqrt());
        assert_eq!(r.grid, "1x1");
        assert_eq!(r.strategy, "robust");
    }
}
