//! Command-line front end: problem ingestion, experiment orchestration,
//! and report emission.
//!
//! Exit codes: 0 success, 2 usage, 10 I/O, 11 parse, 12 dimension,
//! 13 singular matrix, 14 super-optimal undefined, 15 cap exceeded,
//! 16 fidelity assertion failed, 17 internal. Failures also print a
//! machine-readable JSON object on stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::matcore::io as mio;
use crate::matcore::toeplitz::{toeplitz_from_symbol, SymbolSpec, ToeplitzSpec};
use crate::precond::circulant::{
    chan_optimal, strang, super_optimal, CirculantSpec, StrangEvenRule,
};
use crate::precond::spectrum::spectrum_report;
use crate::qsim::state::StateVector;
use crate::qsim::sve::{sve_distribution, sve_forward, SveConfig};
use crate::solver::cost::{cost_report, CostReport, PrecondKindForCost};
use crate::solver::pipeline::{general_preconditioned_solve, preconditioned_solve};
use crate::solver::report::SolveReport;

pub const EXIT_IO: i32 = 10;
pub const EXIT_PARSE: i32 = 11;
pub const EXIT_DIMENSION: i32 = 12;
pub const EXIT_SINGULAR: i32 = 13;
pub const EXIT_SUPEROPTIMAL: i32 = 14;
pub const EXIT_CAP: i32 = 15;
pub const EXIT_FIDELITY: i32 = 16;
pub const EXIT_INTERNAL: i32 = 17;

#[derive(Parser, Debug)]
#[command(
    name = "circulant-sve",
    about = "Circulant preconditioners and an exact statevector simulation of an SVE-based linear solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a circulant preconditioner and write its first column and eigenvalues
    Precondition(PrecondArgs),
    /// Analyze the spectrum of the preconditioned matrix
    Spectrum(SpectrumArgs),
    /// Dump the singular value estimation distribution for one input state
    Sve(SveArgs),
    /// Run the circulant-preconditioned solver end to end
    Solve(SolveArgs),
    /// Run the general-preconditioner pipeline with an explicit M
    GeneralSolve(GeneralSolveArgs),
    /// Evaluate the cost-model table over a matrix family sweep
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Output directory (default: env CIRCULANT_SVE_OUT_DIR, else ".")
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output formats, comma separated (json,csv)
    #[arg(long, default_value = "json,csv", value_delimiter = ',')]
    pub emit: Vec<EmitKind>,
    /// RNG seed recorded in reports and used by sampling modes
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shard independent sweep instances over this many worker threads
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitKind {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    /// sniff by content: Matrix Market header or JSON keys
    Auto,
    Market,
    Json,
    Toeplitz,
    Symbol,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    Strang,
    Optimal,
    Superoptimal,
    Identity,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrangEvenFlag {
    Copy,
    Average,
}

impl From<StrangEvenFlag> for StrangEvenRule {
    fn from(f: StrangEvenFlag) -> Self {
        match f {
            StrangEvenFlag::Copy => StrangEvenRule::Copy,
            StrangEvenFlag::Average => StrangEvenRule::Average,
        }
    }
}

#[derive(Args, Debug)]
pub struct PrecondArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub format: MatrixFormat,
    #[arg(long, value_enum, default_value_t = PrecondKind::Optimal)]
    pub kind: PrecondKind,
    #[arg(long, value_enum, default_value_t = StrangEvenFlag::Copy)]
    pub strang_even: StrangEvenFlag,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub format: MatrixFormat,
    #[arg(long, value_enum, default_value_t = PrecondKind::Optimal)]
    pub kind: PrecondKind,
    #[arg(long, value_enum, default_value_t = StrangEvenFlag::Copy)]
    pub strang_even: StrangEvenFlag,
    /// Outlier thresholds, comma separated
    #[arg(long, default_value = "0.01,0.05,0.1,0.2", value_delimiter = ',')]
    pub eps_grid: Vec<f64>,
    /// Matrix sizes for a family sweep (requires a symbol source)
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SveArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub format: MatrixFormat,
    /// Input state: "basis:K" or "uniform"
    #[arg(long, default_value = "uniform")]
    pub input: String,
    #[arg(long, default_value_t = 8)]
    pub phase_bits: usize,
    /// When positive, also report a median-of-shots estimate
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub format: MatrixFormat,
    /// Right-hand side as StateVector JSON; defaults to e₀
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub phase_bits: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps0: f64,
    /// Exit nonzero when the solve fidelity falls below this value
    #[arg(long)]
    pub assert_fidelity: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct GeneralSolveArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub format: MatrixFormat,
    /// Preconditioner matrix M
    #[arg(long)]
    pub precond: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Auto)]
    pub precond_format: MatrixFormat,
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub phase_bits: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps0: f64,
    #[arg(long)]
    pub assert_fidelity: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Band-limited symbol JSON generating the Toeplitz family
    #[arg(long)]
    pub symbol: PathBuf,
    #[arg(long, default_value = "8,16,32,64", value_delimiter = ',')]
    pub sweep: Vec<usize>,
    #[arg(long, value_enum, default_value_t = PrecondKind::Optimal)]
    pub kind: PrecondKind,
    #[arg(long, value_enum, default_value_t = StrangEvenFlag::Copy)]
    pub strang_even: StrangEvenFlag,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Parse(_) | Error::Json(_) => EXIT_PARSE,
        Error::Dimension(_) | Error::IndexOutOfRange(_) | Error::NonFinite(_) => EXIT_DIMENSION,
        Error::Singular(_) | Error::NumericallySingular(_) | Error::ZeroColumn { .. }
        | Error::EmptyPostSelection(_) => EXIT_SINGULAR,
        Error::SuperOptimalUndefined { .. } => EXIT_SUPEROPTIMAL,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::FidelityAssertion { .. } => EXIT_FIDELITY,
        _ => EXIT_INTERNAL,
    }
}

#[derive(Serialize)]
struct ErrorJson {
    error: String,
    code: i32,
    message: String,
}

pub fn report_error(err: &Error) -> i32 {
    let code = exit_code(err);
    let kind = match err {
        Error::Io(_) => "io",
        Error::Parse(_) | Error::Json(_) => "parse",
        Error::Dimension(_) | Error::IndexOutOfRange(_) | Error::NonFinite(_) => "dimension",
        Error::Singular(_) | Error::NumericallySingular(_) => "singular",
        Error::ZeroColumn { .. } => "zero-column",
        Error::EmptyPostSelection(_) => "empty-post-selection",
        Error::SuperOptimalUndefined { .. } => "superoptimal-undefined",
        Error::CapExceeded { .. } => "cap-exceeded",
        Error::FidelityAssertion { .. } => "fidelity-assertion",
        _ => "internal",
    };
    let payload = ErrorJson {
        error: kind.to_string(),
        code,
        message: err.to_string(),
    };
    eprintln!("{}", serde_json::to_string(&payload).unwrap_or_default());
    code
}

fn out_dir(common: &CommonArgs) -> PathBuf {
    common
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("CIRCULANT_SVE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

/// Parsed matrix source: either a concrete matrix or a symbol that can
/// generate a family.
enum Source {
    Matrix(DenseMatrix, Option<ToeplitzSpec>),
    Symbol(SymbolSpec),
}

fn load_source(path: &Path, format: MatrixFormat) -> Result<Source> {
    let text = std::fs::read_to_string(path)?;
    let format = match format {
        MatrixFormat::Auto => sniff_format(&text),
        f => f,
    };
    match format {
        MatrixFormat::Market => Ok(Source::Matrix(mio::read_matrix_market(text.as_bytes())?, None)),
        MatrixFormat::Json => Ok(Source::Matrix(mio::matrix_from_json(&text)?, None)),
        MatrixFormat::Toeplitz => {
            let t = mio::toeplitz_from_json(&text)?;
            Ok(Source::Matrix(t.materialize()?, Some(t)))
        }
        MatrixFormat::Symbol => Ok(Source::Symbol(mio::symbol_from_json(&text)?)),
        MatrixFormat::Auto => unreachable!(),
    }
}

fn sniff_format(text: &str) -> MatrixFormat {
    let head = text.trim_start();
    if head.starts_with("%%MatrixMarket") {
        return MatrixFormat::Market;
    }
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(head) {
        if v.get("rows").is_some() {
            return MatrixFormat::Json;
        }
        if v.get("t").is_some() {
            return MatrixFormat::Toeplitz;
        }
        if v.get("coeffs").is_some() {
            return MatrixFormat::Symbol;
        }
    }
    MatrixFormat::Market
}

fn require_matrix(src: Source) -> Result<(DenseMatrix, Option<ToeplitzSpec>)> {
    match src {
        Source::Matrix(m, t) => Ok((m, t)),
        Source::Symbol(_) => Err(Error::Parse(
            "this command needs a concrete matrix; symbol sources require --sweep".into(),
        )),
    }
}

fn build_preconditioner(
    kind: PrecondKind,
    even: StrangEvenFlag,
    a: &DenseMatrix,
    t: Option<&ToeplitzSpec>,
) -> Result<CirculantSpec> {
    match kind {
        PrecondKind::Identity => Ok(CirculantSpec::identity(a.n())),
        PrecondKind::Optimal => Ok(chan_optimal(a)),
        PrecondKind::Superoptimal => super_optimal(a),
        PrecondKind::Strang => {
            let t = t.cloned().or_else(|| toeplitz_of(a)).ok_or_else(|| {
                Error::Parse("strang preconditioner needs Toeplitz input".into())
            })?;
            Ok(strang(&t, even.into()))
        }
    }
}

/// Recover the Toeplitz diagonals when the matrix actually is Toeplitz.
fn toeplitz_of(a: &DenseMatrix) -> Option<ToeplitzSpec> {
    let n = a.n();
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for k in -(n as i64 - 1)..n as i64 {
        let (i, j) = if k >= 0 { (k as usize, 0) } else { (0, (-k) as usize) };
        coeffs[(k + n as i64 - 1) as usize] = a.entry(i, j);
    }
    let t = ToeplitzSpec::from_coeffs(n, coeffs).ok()?;
    let m = t.materialize().ok()?;
    let scale = a.frob().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if (m.entry(i, j) - a.entry(i, j)).norm() > 1e-12 * scale {
                return None;
            }
        }
    }
    Some(t)
}

fn load_rhs(path: Option<&PathBuf>, n: usize) -> Result<Vec<C64>> {
    match path {
        None => {
            let mut b = vec![C64::new(0.0, 0.0); n];
            b[0] = C64::new(1.0, 0.0);
            Ok(b)
        }
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let state = StateVector::from_json(&text)?;
            if state.total_dim() != n {
                return Err(Error::Dimension(format!(
                    "rhs has dimension {}, matrix is {n}×{n}",
                    state.total_dim()
                )));
            }
            Ok(state.amps().to_vec())
        }
    }
}

#[derive(Serialize)]
struct PrecondJson {
    kind: String,
    n: usize,
    first_col: Vec<[f64; 2]>,
    eigvals: Vec<[f64; 2]>,
    frob: f64,
    condition_number: f64,
}

pub fn cmd_precondition(args: &PrecondArgs) -> Result<()> {
    let (a, t) = require_matrix(load_source(&args.matrix, args.format)?)?;
    let spec = build_preconditioner(args.kind, args.strang_even, &a, t.as_ref())?;
    let doc = PrecondJson {
        kind: format!("{:?}", args.kind).to_lowercase(),
        n: spec.n(),
        first_col: spec.first_col().iter().map(|z| [z.re, z.im]).collect(),
        eigvals: spec.eigvals().iter().map(|z| [z.re, z.im]).collect(),
        frob: spec.frob(),
        condition_number: spec.condition_number(),
    };
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "precondition.json", &serde_json::to_string_pretty(&doc)?)?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let mut csv = String::from("k,first_col_re,first_col_im,eig_re,eig_im\n");
        for k in 0..spec.n() {
            let c0 = spec.first_col()[k];
            let ev = spec.eigvals()[k];
            csv.push_str(&format!("{k},{:.17e},{:.17e},{:.17e},{:.17e}\n", c0.re, c0.im, ev.re, ev.im));
        }
        write_out(&dir, "precondition.csv", &csv)?;
    }
    println!(
        "{} preconditioner n={} kappa={:.6e}",
        doc.kind, doc.n, doc.condition_number
    );
    Ok(())
}

fn spectrum_instance(
    kind: PrecondKind,
    even: StrangEvenFlag,
    a: &DenseMatrix,
    t: Option<&ToeplitzSpec>,
    eps_grid: &[f64],
) -> Result<crate::precond::spectrum::SpectrumReport> {
    let spec = build_preconditioner(kind, even, a, t)?;
    spectrum_report(&spec, a, eps_grid)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let src = load_source(&args.matrix, args.format)?;
    let reports: Vec<crate::precond::spectrum::SpectrumReport> = match (&src, &args.sweep) {
        (Source::Symbol(sym), Some(sizes)) => run_sharded(sizes, args.common.workers, |&n| {
            let t = toeplitz_from_symbol(sym, n)?;
            spectrum_instance(args.kind, args.strang_even, &t.materialize()?, Some(&t), &args.eps_grid)
        })?,
        (Source::Symbol(_), None) => {
            return Err(Error::Parse("symbol sources require --sweep".into()))
        }
        (_, Some(_)) => {
            return Err(Error::Parse("--sweep requires a symbol source".into()))
        }
        _ => {
            let (a, t) = require_matrix(src)?;
            vec![spectrum_instance(args.kind, args.strang_even, &a, t.as_ref(), &args.eps_grid)?]
        }
    };
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "spectrum.json", &serde_json::to_string_pretty(&reports)?)?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let mut csv = String::new();
        for r in &reports {
            csv.push_str(&r.to_csv());
        }
        write_out(&dir, "spectrum.csv", &csv)?;
    }
    for r in &reports {
        println!(
            "n={} kappa_a={:.6e} kappa_precond={:.6e} min_abs_eig={:.6e} outliers={:?}",
            r.n, r.kappa_a, r.kappa_precond, r.min_abs_eig, r.outlier_counts
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SveJson {
    n: usize,
    phase_bits: usize,
    frob: f64,
    epsilon: f64,
    input: String,
    sigma_values: Vec<f64>,
    distribution: Vec<f64>,
    mode_sigma: f64,
    median_sigma: Option<f64>,
    singular_values_exact: Vec<f64>,
    seed: u64,
}

pub fn cmd_sve(args: &SveArgs) -> Result<()> {
    let (a, _) = require_matrix(load_source(&args.matrix, args.format)?)?;
    let n = a.n();
    let input = if args.input == "uniform" {
        let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        StateVector::from_vector("col", vec![amp; n])?
    } else if let Some(k) = args.input.strip_prefix("basis:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad basis index '{k}'")))?;
        if k >= n {
            return Err(Error::IndexOutOfRange(format!("basis index {k} for n={n}")));
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[k] = C64::new(1.0, 0.0);
        StateVector::from_vector("col", v)?
    } else {
        return Err(Error::Parse(format!("unknown input spec '{}'", args.input)));
    };
    let mut cfg = SveConfig::with_phase_bits(args.phase_bits);
    cfg.seed = args.common.seed;
    cfg.shots = args.shots;
    let (dist, sigmas) = sve_distribution(&a, &input, &cfg)?;
    let mode = dist
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(m, _)| m)
        .unwrap_or(0);
    let median_sigma = if args.shots > 0 {
        let outcome = sve_forward(&a, &input, &cfg)?;
        Some(outcome.median_of_shots(args.shots, args.common.seed))
    } else {
        None
    };
    let doc = SveJson {
        n,
        phase_bits: args.phase_bits,
        frob: a.frob(),
        epsilon: cfg.epsilon(),
        input: args.input.clone(),
        sigma_values: sigmas.clone(),
        distribution: dist.clone(),
        mode_sigma: sigmas[mode],
        median_sigma,
        singular_values_exact: a.svd().sigma.clone(),
        seed: args.common.seed,
    };
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "sve.json", &serde_json::to_string_pretty(&doc)?)?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let mut csv = String::from("outcome,probability,sigma\n");
        for (m, p) in dist.iter().enumerate() {
            csv.push_str(&format!("{m},{p:.17e},{:.17e}\n", sigmas[m]));
        }
        write_out(&dir, "sve_distribution.csv", &csv)?;
    }
    println!(
        "sve n={n} t={}: mode sigma = {:.8} (true sigmas {:?})",
        args.phase_bits, doc.mode_sigma, doc.singular_values_exact
    );
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let (a, _) = require_matrix(load_source(&args.matrix, args.format)?)?;
    let b = load_rhs(args.rhs.as_ref(), a.n())?;
    let mut cfg = SveConfig::with_phase_bits(args.phase_bits);
    cfg.seed = args.common.seed;
    let outcome = preconditioned_solve(&a, &b, &cfg, args.eps0)?;
    let report = SolveReport::from_outcome(&outcome, args.phase_bits, args.common.seed);
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "solve.json", &report.to_json())?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let csv = format!("{}\n{}\n", SolveReport::csv_header(), report.csv_row());
        write_out(&dir, "solve.csv", &csv)?;
    }
    println!("{}", report.summary_line());
    if let Some(th) = args.assert_fidelity {
        if report.fidelity < th {
            return Err(Error::FidelityAssertion {
                fidelity: report.fidelity,
                threshold: th,
            });
        }
    }
    Ok(())
}

pub fn cmd_general_solve(args: &GeneralSolveArgs) -> Result<()> {
    let (a, _) = require_matrix(load_source(&args.matrix, args.format)?)?;
    let (m, _) = require_matrix(load_source(&args.precond, args.precond_format)?)?;
    let b = load_rhs(args.rhs.as_ref(), a.n())?;
    let mut cfg = SveConfig::with_phase_bits(args.phase_bits);
    cfg.seed = args.common.seed;
    let outcome = general_preconditioned_solve(&a, &m, &b, &cfg, args.eps0)?;
    let report = SolveReport::from_outcome(&outcome, args.phase_bits, args.common.seed);
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "general_solve.json", &report.to_json())?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let csv = format!("{}\n{}\n", SolveReport::csv_header(), report.csv_row());
        write_out(&dir, "general_solve.csv", &csv)?;
    }
    println!("{}", report.summary_line());
    if let Some(th) = args.assert_fidelity {
        if report.fidelity < th {
            return Err(Error::FidelityAssertion {
                fidelity: report.fidelity,
                threshold: th,
            });
        }
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.symbol)?;
    let sym = mio::symbol_from_json(&text)?;
    let kind = args.kind;
    let even = args.strang_even;
    let eps = args.eps;
    let reports: Vec<CostReport> = run_sharded(&args.sweep, args.common.workers, |&n| {
        let t = toeplitz_from_symbol(&sym, n)?;
        let a = t.materialize()?;
        let spec = build_preconditioner(kind, even, &a, Some(&t))?;
        cost_report(&a, PrecondKindForCost::Circulant(&spec), eps, &BTreeMap::new())
    })?;
    let dir = out_dir(&args.common);
    if args.common.emit.contains(&EmitKind::Json) {
        write_out(&dir, "bench.json", &serde_json::to_string_pretty(&reports)?)?;
    }
    if args.common.emit.contains(&EmitKind::Csv) {
        let mut csv = format!("{}\n", CostReport::csv_header());
        for r in &reports {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        write_out(&dir, "bench.csv", &csv)?;
    }
    for r in &reports {
        println!(
            "n={} kappa_a={:.6e} kappa_preconditioned={:.6e}",
            r.n, r.kappa_a, r.kappa_preconditioned
        );
    }
    Ok(())
}

/// Shard independent instances across `workers` threads; results are
/// joined in instance order so output is deterministic.
fn run_sharded<I: Sync, O: Send>(
    items: &[I],
    workers: usize,
    f: impl Fn(&I) -> Result<O> + Sync,
) -> Result<Vec<O>> {
    let workers = workers.max(1).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<Result<O>>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<Result<O>>] = &mut slots;
        let chunk = items.len().div_ceil(workers);
        let mut start = 0;
        let mut handles = Vec::new();
        while start < items.len() {
            let take = chunk.min(items.len() - start);
            let (head, tail) = rest.split_at_mut(take);
            rest = tail;
            let slice = &items[start..start + take];
            let fref = &f;
            handles.push(scope.spawn(move || {
                for (slot, item) in head.iter_mut().zip(slice) {
                    *slot = Some(fref(item));
                }
            }));
            start += take;
        }
        for h in handles {
            let _ = h.join();
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every slot visited"))
        .collect()
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Precondition(a) => cmd_precondition(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Sve(a) => cmd_sve(a),
        Command::Solve(a) => cmd_solve(a),
        Command::GeneralSolve(a) => cmd_general_solve(a),
        Command::Bench(a) => cmd_bench(a),
    }
}
