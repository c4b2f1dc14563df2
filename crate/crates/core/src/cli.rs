//! Command-line front end: argument model, dispatch and table output.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::Error;
use crate::expansions::{
    chi, i0_closed, i_k, kappa1, kappa1_from_integrals, kappa2, kappa2_from_integral, mu, nu, tau, theorem_limit,
};
use crate::finite_law::{joint_powered_max_cdf, DeltaResult, RateProblem};
use crate::hr::{gumbel, hr_cdf_at, hr_exponent_at};
use crate::montecarlo::{empirical_vs_exact, Sampler, SimConfig};
use crate::norming::{
    make_norming_with, BnConvention, DependenceRegime, Lambda, NormingScheme, RhoSequence, SampleSize,
};
use crate::quadrature::verify_identity_32;

/// Accuracy estimates above this make a run unreliable.
pub const ACCURACY_LIMIT: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNRELIABLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_UNRELIABLE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Sample size given as a float literal such as `1e16`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NArg(pub f64);

impl FromStr for NArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.trim().parse::<f64>().map(NArg).map_err(|e| format!("invalid sample size {s:?}: {e}"))
    }
}

/// Dependence strength; accepts `inf` for independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaArg(pub f64);

impl FromStr for LambdaArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(LambdaArg(f64::INFINITY)),
            other => other.parse::<f64>().map(LambdaArg).map_err(|e| format!("invalid lambda {s:?}: {e}")),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

macro_rules! number_or_text {
    ($ty:ident) => {
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                match NumOrText::deserialize(d)? {
                    NumOrText::Num(v) => Ok($ty(v)),
                    NumOrText::Text(s) => s.parse().map_err(serde::de::Error::custom),
                }
            }
        }
    };
}
number_or_text!(NArg);
number_or_text!(LambdaArg);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Standard,
    Starred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    /// 1 − Φ(b_n) = 1/n
    Tail,
    /// n φ(b_n) = b_n
    Hall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoSeqArg {
    LambdaAlpha,
    Constant,
    Power6,
    Power14,
    LogRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityArg {
    /// Limiting joint-exceedance integral against its closed form
    #[value(alias = "eq32")]
    #[serde(alias = "eq32")]
    JointTail,
    Kappa1,
    Kappa2,
    /// `μ + κ₁ − κ₂` from quadrature against the closed-form `τ`
    TauSplit,
    I0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistArg {
    Gumbel,
    Hr,
    HrExponent,
    Mu,
    Nu,
    Tau,
    Chi,
    Kappa1,
    Kappa2,
    Limit,
    Law,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerArg {
    Thinned,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Parameters shared by all commands. A `--config` JSON file may supply
/// any of them under the same kebab-case names; flags take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Dependence strength (0, positive, or inf)
    #[arg(long)]
    pub lambda: Option<LambdaArg>,
    /// Second-order dependence parameter
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Power index
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub bn_convention: Option<ConventionArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Grid points as `x:y,x:y,...`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Sample size, scientific notation allowed
    #[arg(long)]
    pub n: Option<NArg>,
    /// Comma-separated increasing sample sizes
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<NArg>>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub rho_seq: Option<RhoSeqArg>,
    /// Constant of the power correlation sequences
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub identity: Option<IdentityArg>,
    #[arg(long, value_enum)]
    pub dist: Option<DistArg>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerArg>,
    /// Maximum n * reps pair draws
    #[arg(long)]
    pub budget: Option<f64>,
    /// Also write (1/log n, scaled delta) plot data to this file
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($a:ident, $b:ident; $($f:ident),* $(,)?) => {
        Params { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Params {
    /// Fields set here win over `other`.
    pub fn or(self, other: Params) -> Params {
        let a = self;
        let b = other;
        merge_fields!(a, b; lambda, alpha, t, scheme, bn_convention, x, y, grid, n, ladder, rho, rho_seq, c,
            identity, dist, reps, seed, sampler, budget, plot)
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate a distribution or correction term
    Eval(Params),
    /// Norming constants for one sample size
    Norming(Params),
    /// Discrepancy to the limit law at one sample size
    Delta(Params),
    /// Scaled discrepancies over a ladder of sample sizes
    RateTable(Params),
    /// Monte Carlo check of the exact finite-n law
    Simulate(Params),
    /// Check an integral identity against quadrature
    Verify(Params),
}

impl Command {
    fn params(&self) -> &Params {
        match self {
            Command::Eval(p)
            | Command::Norming(p)
            | Command::Delta(p)
            | Command::RateTable(p)
            | Command::Simulate(p)
            | Command::Verify(p) => p,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "powmax", version, about = "Limit laws and convergence rates of powered Gaussian maxima")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value = "csv")]
    pub format: OutputFormat,
    /// Write data here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// JSON file with default parameters
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) if v.is_finite() => write!(f, "{v:.16e}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(|c| c.to_string()))?;
        }
        wr.flush()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
                            Cell::Text(s) => serde_json::Value::String(s.clone()),
                            Cell::Missing => serde_json::Value::Null,
                        };
                        (k.to_string(), v)
                    })
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }
}

/// Result of a command before serialization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub table: Table,
    /// A quadrature failed to converge or an accuracy estimate was too large.
    pub unreliable: bool,
    /// Per-row failures that did not stop the command.
    pub row_errors: Vec<String>,
    /// Extra human-readable lines for the error stream.
    pub notes: Vec<String>,
}

fn lambda_of(p: &Params) -> Result<Option<Lambda>, CliError> {
    p.lambda.map(|l| Lambda::new(l.0).map_err(CliError::from)).transpose()
}

fn scheme_of(p: &Params) -> Result<NormingScheme, CliError> {
    match p.scheme.unwrap_or(SchemeArg::Standard) {
        SchemeArg::Standard => Ok(NormingScheme::standard(p.t.unwrap_or(1.0))?),
        SchemeArg::Starred => match p.t {
            None | Some(2.0) => Ok(NormingScheme::starred()),
            Some(t) => Err(invalid(format!("starred norming requires t = 2, got t = {t}"))),
        },
    }
}

fn convention_of(p: &Params) -> BnConvention {
    match p.bn_convention {
        Some(ConventionArg::Hall) => BnConvention::HallDensity,
        _ => BnConvention::TailProbability,
    }
}

fn sample_size(v: f64) -> Result<SampleSize, CliError> {
    Ok(SampleSize::new(v)?)
}

fn grid_of(p: &Params) -> Result<Vec<(f64, f64)>, CliError> {
    if let Some(g) = &p.grid {
        if p.x.is_some() || p.y.is_some() {
            return Err(invalid("use either --grid or --x/--y"));
        }
        return parse_grid(g);
    }
    match (p.x, p.y) {
        (Some(x), Some(y)) => Ok(vec![(x, y)]),
        (None, None) => Ok(default_grid()),
        _ => Err(invalid("--x and --y must be given together")),
    }
}

pub fn default_grid() -> Vec<(f64, f64)> {
    let v = [-1.0, 0.0, 1.0];
    v.iter().flat_map(|&x| v.iter().map(move |&y| (x, y))).collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let pts = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| invalid(format!("grid point {pair:?} must look like x:y")))?;
            let x = a.trim().parse::<f64>().map_err(|e| invalid(format!("grid x {a:?}: {e}")))?;
            let y = b.trim().parse::<f64>().map_err(|e| invalid(format!("grid y {b:?}: {e}")))?;
            if !(x.is_finite() && y.is_finite()) {
                return Err(invalid(format!("grid point {pair:?} is not finite")));
            }
            Ok((x, y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if pts.is_empty() {
        return Err(invalid("grid is empty"));
    }
    Ok(pts)
}

/// Correlation sequence and limiting regime, filling whichever is implied.
fn problem_regime(p: &Params) -> Result<(RhoSequence, DependenceRegime), CliError> {
    let lambda = lambda_of(p)?;
    let alpha = p.alpha.unwrap_or(0.0);
    let seq = match p.rho_seq {
        Some(RhoSeqArg::LambdaAlpha) => RhoSequence::FromLambdaAlpha,
        Some(RhoSeqArg::Constant) => RhoSequence::Constant(p.rho.ok_or_else(|| invalid("--rho-seq constant needs --rho"))?),
        Some(RhoSeqArg::Power6) => RhoSequence::PowerSix {
            c: p.c.ok_or_else(|| invalid("--rho-seq power6 needs --c"))?,
        },
        Some(RhoSeqArg::Power14) => RhoSequence::PowerFourteen {
            c: p.c.ok_or_else(|| invalid("--rho-seq power14 needs --c"))?,
        },
        Some(RhoSeqArg::LogRatio) => RhoSequence::LogRatioNull,
        None => match (lambda, p.rho) {
            (_, Some(r)) => RhoSequence::Constant(r),
            (Some(Lambda::Finite(_)), None) => RhoSequence::FromLambdaAlpha,
            (Some(Lambda::Infinite), None) => RhoSequence::Constant(0.0),
            (Some(Lambda::Zero), None) => RhoSequence::Constant(1.0),
            (None, None) => return Err(invalid("give --lambda, --rho or --rho-seq")),
        },
    };
    let lambda = match lambda {
        Some(l) => l,
        None => match seq {
            RhoSequence::Constant(1.0) => Lambda::Zero,
            RhoSequence::Constant(_) | RhoSequence::LogRatioNull => Lambda::Infinite,
            RhoSequence::PowerSix { .. } | RhoSequence::PowerFourteen { .. } => Lambda::Zero,
            RhoSequence::FromLambdaAlpha => return Err(invalid("--rho-seq lambda-alpha needs a finite --lambda")),
        },
    };
    Ok((seq, DependenceRegime::new(lambda, alpha)?))
}

fn finite_lambda(p: &Params) -> Result<f64, CliError> {
    match lambda_of(p)? {
        Some(Lambda::Finite(l)) => Ok(l),
        _ => Err(invalid("this quantity needs a finite positive --lambda")),
    }
}

const RATE_COLUMNS: &[&str] = &[
    "kind",
    "x",
    "y",
    "log10_n",
    "b_n",
    "rho_n",
    "delta",
    "delta_tilde",
    "scaled",
    "scaled_bn2",
    "limit",
    "residual",
    "accuracy_estimate",
];

fn rate_row(x: f64, y: f64, r: &DeltaResult) -> Vec<Cell> {
    vec![
        "row".into(),
        x.into(),
        y.into(),
        r.n.log10().into(),
        r.b_n.into(),
        r.rho.into(),
        r.delta.into(),
        r.delta_tilde.into(),
        r.scaled_logn.into(),
        r.scaled_bn2.into(),
        r.limit.into(),
        r.residual.into(),
        r.accuracy_estimate.into(),
    ]
}

fn breach(acc: f64) -> bool {
    !(acc <= ACCURACY_LIMIT)
}

fn cmd_eval(p: &Params) -> Result<Report, CliError> {
    let dist = p.dist.ok_or_else(|| invalid("eval needs --dist"))?;
    let grid = grid_of(p)?;
    let alpha = p.alpha.unwrap_or(0.0);
    let t = p.t.unwrap_or(1.0);
    let mut rep = Report {
        table: Table::new(&["quantity", "x", "y", "value", "accuracy_estimate"]),
        ..Report::default()
    };
    for (x, y) in grid {
        let mut acc = None;
        let value = match dist {
            DistArg::Gumbel => gumbel(x),
            DistArg::Hr | DistArg::HrExponent => {
                let l = lambda_of(p)?.ok_or_else(|| invalid("--dist hr needs --lambda"))?;
                if dist == DistArg::Hr {
                    hr_cdf_at(l, x, y)
                } else {
                    hr_exponent_at(l, x, y)
                }
            }
            DistArg::Mu => mu(t, x),
            DistArg::Nu => nu(x),
            DistArg::Tau => tau(alpha, finite_lambda(p)?, x, y, t),
            DistArg::Chi => chi(alpha, finite_lambda(p)?, x, y),
            DistArg::Kappa1 => kappa1(alpha, finite_lambda(p)?, x, y, t),
            DistArg::Kappa2 => kappa2(alpha, finite_lambda(p)?, x, y, t),
            DistArg::Limit => {
                let l = lambda_of(p)?.ok_or_else(|| invalid("--dist limit needs --lambda"))?;
                theorem_limit(DependenceRegime::new(l, alpha)?, scheme_of(p)?, x, y)?.limit_value
            }
            DistArg::Law => {
                let n = sample_size(p.n.ok_or_else(|| invalid("--dist law needs --n"))?.0)?;
                let rho = p.rho.ok_or_else(|| invalid("--dist law needs --rho"))?;
                let nc = make_norming_with(n, scheme_of(p)?, convention_of(p));
                let law = joint_powered_max_cdf(&nc, rho, x, y)?;
                acc = Some(law.accuracy_estimate);
                rep.unreliable |= breach(law.accuracy_estimate);
                law.prob
            }
        };
        let name = dist.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        rep.table.push(vec![Cell::Text(name), x.into(), y.into(), value.into(), acc.into()]);
    }
    Ok(rep)
}

fn cmd_norming(p: &Params) -> Result<Report, CliError> {
    let n = sample_size(p.n.ok_or_else(|| invalid("norming needs --n"))?.0)?;
    let nc = make_norming_with(n, scheme_of(p)?, convention_of(p));
    let x = p.x.unwrap_or(0.0);
    let mut table = Table::new(&["log10_n", "b_n", "a_n", "c", "d", "x", "omega"]);
    table.push(vec![
        n.log10().into(),
        nc.b_n.into(),
        nc.a_n().into(),
        nc.c.into(),
        nc.d.into(),
        x.into(),
        nc.omega(x)?.into(),
    ]);
    Ok(Report {
        table,
        ..Report::default()
    })
}

fn problems(p: &Params) -> Result<Vec<RateProblem>, CliError> {
    let (seq, regime) = problem_regime(p)?;
    let scheme = scheme_of(p)?;
    let conv = convention_of(p);
    grid_of(p)?
        .into_iter()
        .map(|(x, y)| Ok(RateProblem::new(seq, regime, scheme, x, y)?.with_convention(conv)))
        .collect()
}

fn cmd_delta(p: &Params) -> Result<Report, CliError> {
    let n = sample_size(p.n.ok_or_else(|| invalid("delta needs --n"))?.0)?;
    let mut rep = Report {
        table: Table::new(RATE_COLUMNS),
        ..Report::default()
    };
    for prob in problems(p)? {
        let r = prob.delta_at(n)?;
        rep.unreliable |= breach(r.accuracy_estimate);
        rep.table.push(rate_row(prob.x, prob.y, &r));
    }
    Ok(rep)
}

pub const DEFAULT_LADDER: [f64; 3] = [1e4, 1e8, 1e16];

fn cmd_rate_table(p: &Params) -> Result<Report, CliError> {
    let ladder = match &p.ladder {
        Some(l) => l.iter().map(|v| sample_size(v.0)).collect::<Result<Vec<_>, _>>()?,
        None => DEFAULT_LADDER.iter().map(|&v| sample_size(v)).collect::<Result<Vec<_>, _>>()?,
    };
    let probs = problems(p)?;
    if p.plot.is_some() && probs.len() != 1 {
        return Err(invalid("--plot needs a single grid point (--x and --y)"));
    }
    let mut rep = Report {
        table: Table::new(RATE_COLUMNS),
        ..Report::default()
    };
    for prob in &probs {
        let table = prob.rate_table(&ladder)?;
        let mut ok_rows = Vec::new();
        for (n, row) in ladder.iter().zip(&table.rows) {
            match row {
                Ok(r) => {
                    rep.unreliable |= breach(r.accuracy_estimate);
                    rep.table.push(rate_row(prob.x, prob.y, r));
                    ok_rows.push(*r);
                }
                Err(e) => rep.row_errors.push(format!(
                    "row n={:e} at ({}, {}): {e}",
                    n.value(),
                    prob.x,
                    prob.y
                )),
            }
        }
        if let Some(ext) = table.extrapolated {
            let lim = table.limit.limit_value;
            let mut row = vec![Cell::Missing; RATE_COLUMNS.len()];
            row[0] = "extrapolated".into();
            row[1] = prob.x.into();
            row[2] = prob.y.into();
            row[8] = ext.into();
            row[10] = lim.into();
            row[11] = (ext - lim).into();
            rep.table.push(row);
        }
        if let Some(path) = &p.plot {
            emit_plot_data(&ok_rows, table.limit.limit_value, path)?;
        }
    }
    Ok(rep)
}

fn cmd_simulate(p: &Params) -> Result<Report, CliError> {
    let n = p.n.map(|v| v.0).unwrap_or(1e4);
    if !(n >= 3.0 && n.fract() == 0.0 && n < 9.0e15) {
        return Err(invalid(format!("simulation needs an integer n >= 3, got {n}")));
    }
    let rho = p.rho.ok_or_else(|| invalid("simulate needs --rho"))?;
    let mut cfg = SimConfig::new(
        n as u64,
        p.reps.unwrap_or(10_000),
        rho,
        scheme_of(p)?,
        grid_of(p)?,
        p.seed.unwrap_or(0x5eed),
    );
    cfg.sampler = match p.sampler {
        Some(SamplerArg::Direct) => Sampler::Direct,
        _ => Sampler::Thinned,
    };
    cfg.budget = p.budget;
    let summary = empirical_vs_exact(&cfg)?;
    let mut table = Table::new(&["x", "y", "empirical_prob", "standard_error", "exact_prob", "z_score"]);
    for e in &summary.estimates {
        table.push(vec![
            e.point.0.into(),
            e.point.1.into(),
            e.empirical_prob.into(),
            e.standard_error.into(),
            e.exact_prob.into(),
            e.z_score.into(),
        ]);
    }
    let mut notes = vec![format!(
        "max |z| = {}, fraction |z| > 3 = {}",
        summary.max_abs_z.map_or("n/a".to_string(), |z| format!("{z:.3}")),
        summary.fraction_above_3
    )];
    if summary.degenerate {
        notes.push("some grid points have zero standard error; their z-scores are omitted".into());
    }
    Ok(Report {
        table,
        notes,
        ..Report::default()
    })
}

fn cmd_verify(p: &Params) -> Result<Report, CliError> {
    let identity = p.identity.ok_or_else(|| invalid("verify needs --identity"))?;
    let lambda = finite_lambda(p)?;
    let alpha = p.alpha.unwrap_or(0.0);
    let t = p.t.unwrap_or(1.0);
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let mut rep = Report {
        table: Table::new(&[
            "identity", "lambda", "alpha", "t", "x", "y", "lhs", "rhs", "abs_diff", "error_estimate",
        ]),
        ..Report::default()
    };
    let name = identity.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    for (x, y) in grid_of(p)? {
        let (lhs, rhs, err) = match identity {
            IdentityArg::JointTail => {
                let (q, rhs) = verify_identity_32(lambda, x, y)?;
                rep.unreliable |= !q.converged;
                (q.value, rhs, Some(q.error_estimate))
            }
            IdentityArg::I0 => {
                let q = i_k(lambda, x, y, 0)?;
                (q.value, i0_closed(lambda, x, y), Some(q.error_estimate))
            }
            IdentityArg::Kappa1 => (
                kappa1(alpha, lambda, x, y, t),
                kappa1_from_integrals(alpha, lambda, x, y, t)?,
                None,
            ),
            IdentityArg::Kappa2 => (kappa2(alpha, lambda, x, y, t), kappa2_from_integral(lambda, x, y, t)?, None),
            IdentityArg::TauSplit => {
                let assembled = mu(t, x) + kappa1_from_integrals(alpha, lambda, x, y, t)?
                    - kappa2_from_integral(lambda, x, y, t)?;
                (assembled, tau(alpha, lambda, x, y, t), None)
            }
        };
        rep.table.push(vec![
            Cell::Text(name.clone()),
            lambda.into(),
            alpha.into(),
            t.into(),
            x.into(),
            y.into(),
            lhs.into(),
            rhs.into(),
            (lhs - rhs).abs().into(),
            err.into(),
        ]);
    }
    Ok(rep)
}

/// Writes `(1/ln n, scaled Δ)` lines after one comment line carrying the limit.
pub fn emit_plot_data(rows: &[DeltaResult], limit: f64, path: &Path) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(invalid("no rows to plot"));
    }
    let mut f = io::BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
    let mut body = format!("# columns: inv_log_n,scaled limit={limit:.16e}\n");
    for r in rows {
        body.push_str(&format!("{:.16e},{:.16e}\n", 1.0 / r.n.ln(), r.scaled_logn));
    }
    f.write_all(body.as_bytes()).map_err(|e| CliError::io(path, e))?;
    f.flush().map_err(|e| CliError::io(path, e))
}

/// Resolves the config file and runs the command.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let file_params = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str::<Params>(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => Params::default(),
    };
    let p = cli.command.params().clone().or(file_params);
    match &cli.command {
        Command::Eval(_) => cmd_eval(&p),
        Command::Norming(_) => cmd_norming(&p),
        Command::Delta(_) => cmd_delta(&p),
        Command::RateTable(_) => cmd_rate_table(&p),
        Command::Simulate(_) => cmd_simulate(&p),
        Command::Verify(_) => cmd_verify(&p),
    }
}

fn write_report(cli: &Cli, table: &Table) -> Result<(), CliError> {
    let write = |w: &mut dyn Write| match cli.format {
        OutputFormat::Csv => table.write_csv(w),
        OutputFormat::Json => table.write_json(w),
    };
    match &cli.output {
        Some(path) => {
            let mut f = io::BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
            write(&mut f).and_then(|_| f.flush()).map_err(|e| CliError::io(path, e))
        }
        None => write(&mut io::stdout().lock()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Parses arguments, runs, writes output, and returns the exit status.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_report(&cli, &report.table) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    for err in &report.row_errors {
        eprintln!("error: {err}");
    }
    if report.unreliable {
        eprintln!("warning: numerical reliability check failed");
        EXIT_UNRELIABLE
    } else if !report.row_errors.is_empty() {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    }
}
