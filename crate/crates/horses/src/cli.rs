//! `horses fit | tune | path | simulate`.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input or flags, 3 dimension
//! mismatch, 4 solver did not converge (output is still written and
//! flagged), 5 unknown simulation model.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use horses_core::data::StandardizationReport;
use horses_core::penalty::default_d;
use horses_core::solver::{self, constraint_to_lagrangian_with_d};
use horses_core::tuning::{
    fit_at, kfold_cv, log_descending, select_information, Criterion, GridRule, Method,
    TuningGrid,
};
use horses_core::{standardize, Dataset, Error as CoreError, FitResult, PenaltySpec, SolverConfig};

use crate::error::CliError;
use crate::io::{read_response, read_table};
use crate::parallel::run_study_parallel;
use crate::report::{
    replicate_docs, summary_docs, write_path_csv, write_replicates_csv, write_summary_csv,
    FitContext, FitDoc, PathPoint, TuneDoc,
};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "horses", version, about = "Sparse regression with exact coefficient grouping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit at one penalty.
    Fit(FitArgs),
    /// Select (alpha, lambda) by cross-validation, GCV or BIC and refit.
    Tune(TuneArgs),
    /// Warm-started coefficient path over a descending lambda grid.
    Path(PathArgs),
    /// Monte-Carlo study on the built-in simulation models.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Horses,
    Ridge,
    Lasso,
    Enet,
}

impl From<Estimator> for Method {
    fn from(e: Estimator) -> Method {
        match e {
            Estimator::Horses => Method::Horses,
            Estimator::Ridge => Method::Ridge,
            Estimator::Lasso => Method::Lasso,
            Estimator::Enet => Method::ElasticNet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TuneMethod {
    Cv,
    Gcv,
    Bic,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Predictor CSV (n rows, p columns, optional header).
    #[arg(long)]
    pub x: PathBuf,
    /// Response CSV (n rows, one column).
    #[arg(long)]
    pub y: PathBuf,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Mixing weight (HORSES: in [1/d, 1]; Elastic Net: in [0, 1]).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Lagrangian penalty level.
    #[arg(long, conflicts_with = "t", required_unless_present = "t")]
    pub lambda: Option<f64>,
    /// Constraint bound; converted to the matching lambda (HORSES only).
    #[arg(long)]
    pub t: Option<f64>,
    /// Threshold bounding alpha from below; defaults to sqrt(p).
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, value_enum, default_value_t = Estimator::Horses)]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Comma-separated ascending alpha values.
    #[arg(long, value_delimiter = ',')]
    pub grid_alphas: Option<Vec<f64>>,
    /// Comma-separated descending lambda values.
    #[arg(long, value_delimiter = ',')]
    pub grid_lambdas: Option<Vec<f64>>,
}

impl GridArgs {
    fn rule(&self) -> GridRule {
        GridRule {
            alphas: self.grid_alphas.clone(),
            lambdas: self.grid_lambdas.clone(),
            ..GridRule::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = TuneMethod::Cv)]
    pub method: TuneMethod,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, value_enum, default_value_t = Estimator::Horses)]
    pub estimator: Estimator,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PathArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub d: Option<f64>,
    /// Comma-separated descending lambda values; defaults to 30 values
    /// log-spaced from lambda_max down to 1e-4 lambda_max.
    #[arg(long, value_delimiter = ',')]
    pub grid_lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Comma-separated model ids (1 to 6).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub models: Vec<u32>,
    /// Comma-separated methods: ridge, lasso, enet, horses.
    #[arg(long, value_delimiter = ',', default_value = "ridge,lasso,enet,horses")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Summary table; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-replicate records; defaults to `<out>.replicates.csv` when `--out`
    /// is given.
    #[arg(long)]
    pub replicates: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("horses: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `Ok(4)` signals output written for a fit that did
/// not converge.
pub fn execute(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Path(a) => cmd_path(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Other(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

struct Loaded {
    raw: Dataset,
    data: Dataset,
    report: StandardizationReport,
    names: Vec<String>,
}

fn load(args: &DataArgs) -> Result<Loaded, CliError> {
    let table = read_table(&args.x)?;
    let y = read_response(&args.y)?;
    if y.len() != table.rows.len() {
        return Err(CliError::Dimension(format!(
            "{} has {} rows but {} has {}",
            args.x.display(),
            table.rows.len(),
            args.y.display(),
            y.len()
        )));
    }
    let x = table.to_matrix()?;
    let raw = Dataset::new(x, y)?;
    let (data, report) = standardize(raw.x(), raw.y())?;
    Ok(Loaded {
        raw,
        data,
        report,
        names: table.names(),
    })
}

/// Keeps the partial fit of a solver that hit its iteration limit.
fn allow_partial(r: horses_core::Result<FitResult>) -> Result<FitResult, CliError> {
    match r {
        Ok(f) => Ok(f),
        Err(CoreError::MaxSweepsExceeded(f)) | Err(CoreError::MaxItersExceeded(f)) => Ok(*f),
        Err(e) => Err(e.into()),
    }
}

fn status(converged: bool) -> i32 {
    if converged {
        0
    } else {
        eprintln!("horses: warning: solver did not converge; result flagged");
        4
    }
}

pub fn cmd_fit(a: &FitArgs) -> Result<i32, CliError> {
    let l = load(&a.data)?;
    let p = l.data.p();
    let d = a.d.unwrap_or_else(|| default_d(p));
    let method = Method::from(a.estimator);
    let lambda = match (a.lambda, a.t) {
        (Some(lambda), _) => lambda,
        (None, Some(t)) => {
            if method != Method::Horses {
                return Err(CliError::parse("--t is only supported for the horses estimator"));
            }
            constraint_to_lagrangian_with_d(&l.data, a.alpha, t, d)?.lambda()
        }
        (None, None) => return Err(CliError::parse("one of --lambda or --t is required")),
    };
    let config = SolverConfig {
        max_sweeps: a.max_sweeps,
        ..SolverConfig::default()
    };
    let fit = allow_partial(fit_at(method, &l.data, a.alpha, lambda, d, &config))?;
    let ctx = FitContext {
        estimator: method,
        n: l.data.n(),
        alpha: a.alpha,
        lambda,
        d,
        names: &l.names,
        report: &l.report,
    };
    let doc = FitDoc::new(&fit, &ctx)?;
    match a.output.format {
        Format::Json => write_json(&doc, a.output.out.as_deref())?,
        Format::Csv => doc.write_csv(writer(a.output.out.as_deref())?)?,
    }
    Ok(status(fit.converged))
}

pub fn cmd_tune(a: &TuneArgs) -> Result<i32, CliError> {
    let l = load(&a.data)?;
    let method = Method::from(a.estimator);
    let mut grid = TuningGrid::for_method(method, &l.data, &a.grid.rule())?;
    if let Some(d) = a.d {
        grid.d = d;
        if method == Method::Horses {
            grid.validate_horses()?;
        }
    }
    let config = SolverConfig::default();
    let (res, folds) = match a.method {
        TuneMethod::Cv => (
            kfold_cv(&l.raw, &grid, a.folds, a.seed, method, &config)?,
            Some(a.folds),
        ),
        TuneMethod::Gcv => (
            select_information(&l.data, &grid, Criterion::GCV, method, &config)?,
            None,
        ),
        TuneMethod::Bic => (
            select_information(&l.data, &grid, Criterion::BIC, method, &config)?,
            None,
        ),
    };
    let fit = allow_partial(fit_at(
        method,
        &l.data,
        res.best_alpha,
        res.best_lambda,
        grid.d,
        &config,
    ))?;
    let ctx = FitContext {
        estimator: method,
        n: l.data.n(),
        alpha: res.best_alpha,
        lambda: res.best_lambda,
        d: grid.d,
        names: &l.names,
        report: &l.report,
    };
    let doc = TuneDoc::new(&res, &grid, method, folds, FitDoc::new(&fit, &ctx)?);
    match a.output.format {
        Format::Json => write_json(&doc, a.output.out.as_deref())?,
        Format::Csv => doc.write_csv(writer(a.output.out.as_deref())?)?,
    }
    Ok(status(fit.converged))
}

pub fn cmd_path(a: &PathArgs) -> Result<i32, CliError> {
    let l = load(&a.data)?;
    let d = a.d.unwrap_or_else(|| default_d(l.data.p()));
    PenaltySpec::new(a.alpha, 0.0, d)?;
    let lambdas = match &a.grid_lambdas {
        Some(v) => v.clone(),
        None => log_descending(solver::lambda_max(&l.data, a.alpha), 1e-4, 30),
    };
    if lambdas.is_empty() {
        return Err(CliError::parse("empty lambda grid"));
    }
    if lambdas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(CliError::parse("--grid-lambdas must be strictly descending"));
    }
    let fits = solver::solve_path(&l.data, a.alpha, d, &lambdas, &SolverConfig::default())?;
    let points: Vec<PathPoint> = fits
        .iter()
        .zip(&lambdas)
        .map(|(f, &lambda)| PathPoint {
            lambda,
            coefficients: f.beta.0.clone(),
            groups: f.groups.labels(f.beta.len()),
            converged: f.converged,
        })
        .collect();
    match a.format {
        Format::Json => write_json(&points, a.out.as_deref())?,
        Format::Csv => write_path_csv(&points, writer(a.out.as_deref())?)?,
    }
    Ok(status(points.iter().all(|p| p.converged)))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32, CliError> {
    if a.reps == 0 {
        return Err(CliError::parse("--reps must be at least 1"));
    }
    let methods = a
        .methods
        .iter()
        .map(|s| Method::parse(s).ok_or_else(|| CliError::parse(format!("unknown method {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (summary, results) = run_study_parallel(
        &a.models,
        &methods,
        a.reps,
        a.seed,
        &a.grid.rule(),
        &SolverConfig::default(),
    )?;
    for row in summary.rows.iter().filter(|r| r.n_failed > 0) {
        eprintln!(
            "horses: warning: model {} {}: {} of {} replicates failed",
            row.model_id,
            row.method.name(),
            row.n_failed,
            row.n_failed + row.n_ok
        );
    }
    let replicates_path = a.replicates.clone().or_else(|| {
        a.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".replicates.csv");
            PathBuf::from(s)
        })
    });
    match a.format {
        Format::Json => write_json(&summary_docs(&summary), a.out.as_deref())?,
        Format::Csv => write_summary_csv(&summary, writer(a.out.as_deref())?)?,
    }
    if let Some(path) = replicates_path {
        match a.format {
            Format::Json => write_json(&replicate_docs(&results), Some(&path))?,
            Format::Csv => write_replicates_csv(&results, writer(Some(&path))?)?,
        }
    }
    let all_converged = results
        .iter()
        .flat_map(|r| r.outcomes.iter())
        .all(|(_, o)| o.as_ref().map_or(true, |o| o.converged));
    Ok(status(all_converged))
}
