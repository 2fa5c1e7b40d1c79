//! Command-line front end for the momord library.
//!
//! Four subcommands: `estimate` fits θ from a CSV sample by inverting the
//! moment function, `check-family` evaluates the sufficient conditions
//! (total positivity, logconcavity, moment monotonicity) on grids,
//! `check-order` compares the distributions at two parameter values, and
//! `simulate` runs the Monte Carlo order-preservation harness.
//!
//! Reports are JSON documents carrying a `spec_version` and the fully
//! resolved request, so a run can be reproduced from its own output. Exit
//! codes are a stable contract: 0 success, 2 domain or infeasibility errors,
//! 3 input or format errors, 4 internal numeric failures.

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use momord::families::{make_builtin, Builtin, FamilyError};
use momord::mc::{self, EstimatorKind, McConfig, McError, OrderClaim};
use momord::moments::{Direction, GKind, MomentError, MomentSpec};
use momord::orders::{
    check_disp, check_logconcave, check_lr, check_st, check_tp2_mixed, Grid, GridError,
    OrderError, OrderReport, Verdict, QUANTILE_CLIP,
};
use momord::quad::QuadError;

const SPEC_VERSION: &str = "1.0.0";
const DEFAULT_SEED: u64 = 20240915;
const DEFAULT_GRID_SIZE: usize = 512;

const EXIT_DOMAIN: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "momord",
    version,
    about = "Method-of-moments estimation and order-preservation checks for one-parameter families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate theta from CSV data by inverting the moment function.
    Estimate(EstimateArgs),
    /// Check total positivity, logconcavity, and moment monotonicity.
    CheckFamily(CheckFamilyArgs),
    /// Compare the distributions at two parameter values (st, lr, disp).
    CheckOrder(CheckOrderArgs),
    /// Monte Carlo verification of an order-preservation claim.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FamilySelect {
    /// Catalog family name (see the README for the list).
    #[arg(long)]
    family: String,
    /// Fixed family constant as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct OutputSelect {
    /// Write the report to this file (atomically) instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format; `csv` (per-replicate table) applies to `simulate` only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn token(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    family: FamilySelect,
    /// Moment function g: mean, log, T, k-th:<k>, or abs-log.
    #[arg(long)]
    spec: String,
    /// CSV input: one value per line, optional single header line `x`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    out: OutputSelect,
}

#[derive(Args)]
struct CheckFamilyArgs {
    #[command(flatten)]
    family: FamilySelect,
    /// Lower end of the parameter interval to scan.
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Upper end of the parameter interval to scan.
    #[arg(long, allow_negative_numbers = true)]
    theta2: f64,
    /// Moment function whose monotonicity is reported.
    #[arg(long, default_value = "mean")]
    spec: String,
    /// Points per axis for the check grids.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[command(flatten)]
    out: OutputSelect,
}

#[derive(Args)]
struct CheckOrderArgs {
    #[command(flatten)]
    family: FamilySelect,
    /// First (smaller) parameter value.
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Second (larger) parameter value.
    #[arg(long, allow_negative_numbers = true)]
    theta2: f64,
    /// Points per axis for the check grids.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[command(flatten)]
    out: OutputSelect,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    family: FamilySelect,
    /// Estimator token, e.g. moment-spec:mean, location-mean,
    /// scale-kth-moment:2, scale-sample-sd, weibull-abslog-mean.
    #[arg(long)]
    estimator: Option<String>,
    /// Shorthand for --estimator moment-spec:<spec>.
    #[arg(long)]
    spec: Option<String>,
    /// Order-preservation claim to verify: mean-lr, mean-st, suff-st,
    /// location-lr, or scale-st. Defaults to the natural claim for the
    /// estimator.
    #[arg(long)]
    claim: Option<String>,
    /// First (smaller) parameter value.
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Second (larger) parameter value.
    #[arg(long, allow_negative_numbers = true)]
    theta2: f64,
    /// Sample size per replicate.
    #[arg(long)]
    n: usize,
    /// Number of replicates per parameter value (at least 1000).
    #[arg(long)]
    reps: usize,
    /// RNG seed; fixed default, never time-based.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Confidence level of the empirical dominance band.
    #[arg(long, default_value_t = mc::DEFAULT_CONFIDENCE)]
    confidence: f64,
    #[command(flatten)]
    out: OutputSelect,
}

/// A classified failure: exit code, machine-readable kind, message.
#[derive(Debug, Serialize)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn failure(code: u8, message: impl Into<String>) -> Failure {
    let kind = match code {
        EXIT_DOMAIN => "domain",
        EXIT_INPUT => "input",
        _ => "numeric",
    };
    Failure {
        code,
        kind,
        message: message.into(),
    }
}

impl From<FamilyError> for Failure {
    fn from(e: FamilyError) -> Failure {
        let code = match &e {
            FamilyError::UnknownFamily { .. } | FamilyError::UnknownParam { .. } => EXIT_INPUT,
            FamilyError::InvalidParam { .. } | FamilyError::ThetaOutOfDomain { .. } => EXIT_DOMAIN,
        };
        failure(code, e.to_string())
    }
}

impl From<MomentError> for Failure {
    fn from(e: MomentError) -> Failure {
        match e {
            MomentError::Family(inner) => inner.into(),
            MomentError::InvalidSpec { .. } | MomentError::EmptySample => {
                failure(EXIT_INPUT, e.to_string())
            }
            MomentError::NonMonotone { .. }
            | MomentError::OutOfRange { .. }
            | MomentError::OutsideSupport { .. }
            | MomentError::Infeasible { .. }
            | MomentError::BracketFailed { .. } => failure(EXIT_DOMAIN, e.to_string()),
            MomentError::ExpFamily(_) | MomentError::Integration(_) => {
                failure(EXIT_NUMERIC, e.to_string())
            }
        }
    }
}

impl From<GridError> for Failure {
    fn from(e: GridError) -> Failure {
        failure(EXIT_INPUT, e.to_string())
    }
}

impl From<QuadError> for Failure {
    fn from(e: QuadError) -> Failure {
        failure(EXIT_NUMERIC, e.to_string())
    }
}

impl From<OrderError> for Failure {
    fn from(e: OrderError) -> Failure {
        match e {
            OrderError::Family(inner) => inner.into(),
            OrderError::Grid(inner) => inner.into(),
            OrderError::AlphaOutOfRange { .. }
            | OrderError::InvalidMinorOrder { .. }
            | OrderError::GridTooSmall { .. } => failure(EXIT_INPUT, e.to_string()),
            OrderError::InvalidCdf { .. }
            | OrderError::NegativeDensity { .. }
            | OrderError::InvalidSupport { .. }
            | OrderError::InvalidQuantile { .. } => failure(EXIT_NUMERIC, e.to_string()),
        }
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Failure {
        match e {
            McError::Family(inner) => inner.into(),
            McError::Moment(inner) => inner.into(),
            McError::Order(inner) => inner.into(),
            McError::Grid(inner) => inner.into(),
            McError::Quad(inner) => inner.into(),
            McError::UnorderedPair(..)
            | McError::SampleTooSmall { .. }
            | McError::TooFewReps { .. }
            | McError::BadConfidence { .. }
            | McError::TooFewBins { .. }
            | McError::IncompatibleEstimator { .. }
            | McError::ClaimMismatch { .. }
            | McError::UnknownEstimator { .. }
            | McError::UnknownClaim { .. } => failure(EXIT_INPUT, e.to_string()),
            McError::ExperimentInvalid { .. } | McError::NegativeSample { .. } => {
                failure(EXIT_DOMAIN, e.to_string())
            }
            McError::NegativeVariance { .. } => failure(EXIT_NUMERIC, e.to_string()),
        }
    }
}

/// The request as actually executed, defaults applied; embedded in every
/// JSON report so runs can be replayed.
#[derive(Serialize)]
struct ResolvedRequest {
    command: &'static str,
    family: String,
    params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    format: &'static str,
}

impl ResolvedRequest {
    fn new(command: &'static str, family: &FamilySelect, out: &OutputSelect) -> Result<Self, Failure> {
        Ok(ResolvedRequest {
            command,
            family: family.family.clone(),
            params: parse_params(&family.params)?,
            spec: None,
            estimator: None,
            claim: None,
            theta: None,
            theta2: None,
            n: None,
            reps: None,
            seed: None,
            confidence: None,
            grid_size: None,
            input: None,
            format: out.format.token(),
        })
    }
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    spec_version: &'static str,
    request: &'a ResolvedRequest,
    result: R,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    spec_version: &'static str,
    error: &'a Failure,
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    for item in items {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| failure(EXIT_INPUT, format!("--param `{item}` is not key=value")))?;
        let value: f64 = raw.parse().map_err(|_| {
            failure(EXIT_INPUT, format!("--param `{item}`: `{raw}` is not a number"))
        })?;
        if map.insert(key.to_string(), value).is_some() {
            return Err(failure(EXIT_INPUT, format!("--param `{key}` given twice")));
        }
    }
    Ok(map)
}

fn build_family(select: &FamilySelect) -> Result<Builtin<f64>, Failure> {
    let params = parse_params(&select.params)?;
    Ok(make_builtin(&select.family, &params)?)
}

fn parse_spec(token: &str) -> Result<GKind, Failure> {
    token
        .parse::<GKind>()
        .map_err(|e| failure(EXIT_INPUT, format!("invalid --spec `{token}`: {e}")))
}

/// Read a CSV sample: UTF-8, one value per line, `.` decimal separator,
/// optional single header line `x`.
fn read_csv(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| failure(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut values = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if index == 0 && line == "x" {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(failure(
                    EXIT_INPUT,
                    format!(
                        "{}: line {}: `{raw}` is not a finite number",
                        path.display(),
                        index + 1
                    ),
                ))
            }
        }
    }
    if values.is_empty() {
        return Err(failure(
            EXIT_INPUT,
            format!("{}: no data values", path.display()),
        ));
    }
    Ok(values)
}

/// Write to stdout, or atomically (temp file + rename) to `path`.
fn write_out(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| failure(EXIT_INPUT, format!("cannot write to stdout: {e}"))),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let attempt = || -> io::Result<()> {
                let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
                tmp.write_all(bytes)?;
                tmp.flush()?;
                tmp.persist(path).map_err(|e| e.error)?;
                Ok(())
            };
            attempt()
                .map_err(|e| failure(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))
        }
    }
}

fn emit_json<R: Serialize>(
    request: &ResolvedRequest,
    result: R,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let report = Report {
        spec_version: SPEC_VERSION,
        request,
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&report)
        .map_err(|e| failure(EXIT_NUMERIC, format!("report serialization failed: {e}")))?;
    bytes.push(b'\n');
    write_out(output, &bytes)
}

fn require_json(out: &OutputSelect, command: &str) -> Result<(), Failure> {
    if out.format == Format::Csv {
        return Err(failure(
            EXIT_INPUT,
            format!("`{command}` only produces JSON; csv applies to `simulate`"),
        ));
    }
    Ok(())
}

fn dir_str(d: Direction) -> &'static str {
    match d {
        Direction::Increasing => "increasing",
        Direction::Decreasing => "decreasing",
    }
}

// ---------------------------------------------------------------- estimate

#[derive(Serialize)]
struct EstimateReport {
    theta_hat: f64,
    gbar: f64,
    residual: f64,
    n: usize,
    family: String,
    spec: String,
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    require_json(&args.out, "estimate")?;
    let mut request = ResolvedRequest::new("estimate", &args.family, &args.out)?;
    request.spec = Some(args.spec.clone());
    request.input = Some(args.input.display().to_string());

    let builtin = build_family(&args.family)?;
    let g = parse_spec(&args.spec)?;
    let data = read_csv(&args.input)?;
    let spec = MomentSpec::new(&builtin, g).map_err(Failure::from)?;
    let est = spec.estimate(&data).map_err(Failure::from)?;

    let result = EstimateReport {
        theta_hat: est.theta_hat,
        gbar: est.gbar,
        residual: est.residual,
        n: data.len(),
        family: builtin.family.name().to_string(),
        spec: g.to_string(),
    };
    eprintln!(
        "estimate: theta_hat = {} (gbar = {}, n = {})",
        result.theta_hat, result.gbar, result.n
    );
    emit_json(&request, result, args.out.output.as_deref())
}

// ------------------------------------------------------------ check-family

#[derive(Serialize)]
struct LogconcaveAt {
    theta: f64,
    report: OrderReport<f64>,
}

#[derive(Serialize)]
struct MonotoneReport {
    spec: String,
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct CheckFamilyReport {
    family: String,
    theta_interval: (f64, f64),
    tp2: OrderReport<f64>,
    logconcave: Vec<LogconcaveAt>,
    moment_monotone: MonotoneReport,
}

fn cmd_check_family(args: CheckFamilyArgs) -> Result<(), Failure> {
    require_json(&args.out, "check-family")?;
    let mut request = ResolvedRequest::new("check-family", &args.family, &args.out)?;
    request.spec = Some(args.spec.clone());
    request.theta = Some(args.theta);
    request.theta2 = Some(args.theta2);
    request.grid_size = Some(args.grid_size);

    let (t1, t2) = (args.theta, args.theta2);
    if !(t1 < t2) {
        return Err(failure(
            EXIT_INPUT,
            format!("--theta {t1} must be below --theta2 {t2}"),
        ));
    }
    let builtin = build_family(&args.family)?;
    let fam = builtin.family;
    fam.check_theta(t1).map_err(Failure::from)?;
    fam.check_theta(t2).map_err(Failure::from)?;

    let g1 = Grid::from_quantiles(|u| fam.quantile(u, t1), args.grid_size)?;
    let g2 = Grid::from_quantiles(|u| fam.quantile(u, t2), args.grid_size)?;
    let x_grid = g1.merge(&g2);
    let theta_grid = Grid::linspace(t1, t2, 33)?;
    let tp2 = check_tp2_mixed(&fam, &x_grid, &theta_grid).map_err(Failure::from)?;

    let mut logconcave = Vec::new();
    for theta in [t1, 0.5 * (t1 + t2), t2] {
        let grid = Grid::from_quantiles(|u| fam.quantile(u, theta), args.grid_size)?;
        let report = check_logconcave(|x| fam.density(x, theta), &grid).map_err(Failure::from)?;
        logconcave.push(LogconcaveAt { theta, report });
    }

    let g = parse_spec(&args.spec)?;
    let moment_monotone = match MomentSpec::new(&builtin, g) {
        Ok(spec) => MonotoneReport {
            spec: g.to_string(),
            verdict: Verdict::Holds,
            direction: Some(spec.direction()),
            detail: None,
        },
        Err(MomentError::NonMonotone { .. }) => MonotoneReport {
            spec: g.to_string(),
            verdict: Verdict::Fails,
            direction: None,
            detail: Some("moment function changes direction on the detection grid".into()),
        },
        Err(e) => return Err(e.into()),
    };

    eprintln!("tp2: {}", tp2.verdict);
    for l in &logconcave {
        eprintln!("logconcave(theta={}): {}", l.theta, l.report.verdict);
    }
    match moment_monotone.direction {
        Some(d) => eprintln!("moment-monotone({}): {}", moment_monotone.spec, dir_str(d)),
        None => eprintln!("moment-monotone({}): fails", moment_monotone.spec),
    }

    let result = CheckFamilyReport {
        family: fam.name().to_string(),
        theta_interval: (t1, t2),
        tp2,
        logconcave,
        moment_monotone,
    };
    emit_json(&request, result, args.out.output.as_deref())
}

// ------------------------------------------------------------- check-order

#[derive(Serialize)]
struct CheckOrderReport {
    family: String,
    theta: f64,
    theta2: f64,
    st: OrderReport<f64>,
    lr: OrderReport<f64>,
    disp: OrderReport<f64>,
}

fn cmd_check_order(args: CheckOrderArgs) -> Result<(), Failure> {
    require_json(&args.out, "check-order")?;
    let mut request = ResolvedRequest::new("check-order", &args.family, &args.out)?;
    request.theta = Some(args.theta);
    request.theta2 = Some(args.theta2);
    request.grid_size = Some(args.grid_size);

    let (t1, t2) = (args.theta, args.theta2);
    if !(t1 < t2) {
        return Err(failure(
            EXIT_INPUT,
            format!("--theta {t1} must be below --theta2 {t2}"),
        ));
    }
    let builtin = build_family(&args.family)?;
    let fam = builtin.family;
    fam.check_theta(t1).map_err(Failure::from)?;
    fam.check_theta(t2).map_err(Failure::from)?;

    let g1 = Grid::from_quantiles(|u| fam.quantile(u, t1), args.grid_size)?;
    let g2 = Grid::from_quantiles(|u| fam.quantile(u, t2), args.grid_size)?;
    let x_grid = g1.merge(&g2);
    let st = check_st(|x| fam.cdf(x, t1), |x| fam.cdf(x, t2), &x_grid).map_err(Failure::from)?;
    let lr = check_lr(
        |x| fam.density(x, t1),
        |x| fam.density(x, t2),
        &x_grid,
    )
    .map_err(Failure::from)?;
    let alpha_grid = Grid::linspace(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP, args.grid_size)?;
    let disp = check_disp(
        |u| fam.quantile(u, t1),
        |u| fam.quantile(u, t2),
        &alpha_grid,
    )
    .map_err(Failure::from)?;

    eprintln!("st: {}", st.verdict);
    eprintln!("lr: {}", lr.verdict);
    eprintln!("disp: {}", disp.verdict);

    let result = CheckOrderReport {
        family: fam.name().to_string(),
        theta: t1,
        theta2: t2,
        st,
        lr,
        disp,
    };
    emit_json(&request, result, args.out.output.as_deref())
}

// ---------------------------------------------------------------- simulate

fn default_claim(estimator: EstimatorKind) -> OrderClaim {
    match estimator {
        EstimatorKind::MomentSpec(GKind::SufficientT) => OrderClaim::SuffSt,
        EstimatorKind::MomentSpec(_) => OrderClaim::MeanSt,
        EstimatorKind::LocationMean => OrderClaim::LocationLr,
        EstimatorKind::ScaleKthMoment(_)
        | EstimatorKind::ScaleSampleSd
        | EstimatorKind::WeibullAbslogMean
        | EstimatorKind::WeibullAbslogSd => OrderClaim::ScaleSt,
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let estimator = match (&args.estimator, &args.spec) {
        (Some(token), _) => token.parse::<EstimatorKind>().map_err(Failure::from)?,
        (None, Some(spec)) => EstimatorKind::MomentSpec(parse_spec(spec)?),
        (None, None) => {
            return Err(failure(
                EXIT_INPUT,
                "simulate needs --estimator or --spec to select the estimator",
            ))
        }
    };
    let claim = match &args.claim {
        Some(token) => token.parse::<OrderClaim>().map_err(Failure::from)?,
        None => default_claim(estimator),
    };

    let mut request = ResolvedRequest::new("simulate", &args.family, &args.out)?;
    request.estimator = Some(estimator.to_string());
    request.claim = Some(claim.to_string());
    request.theta = Some(args.theta);
    request.theta2 = Some(args.theta2);
    request.n = Some(args.n);
    request.reps = Some(args.reps);
    request.seed = Some(args.seed);
    request.confidence = Some(args.confidence);

    let builtin = build_family(&args.family)?;
    let mut cfg = McConfig::new(
        builtin,
        estimator,
        (args.theta, args.theta2),
        args.n,
        args.reps,
        args.seed,
    )
    .map_err(Failure::from)?;
    cfg.confidence = args.confidence;
    cfg.validate().map_err(Failure::from)?;

    let result = mc::verify_claim(&cfg, claim).map_err(Failure::from)?;

    for h in &result.hypotheses {
        eprintln!("hypothesis {}: {}", h.name, h.verdict);
    }
    eprintln!(
        "st: {} (max deviation {:.6}, threshold {:.6})",
        result.st_report.verdict, result.st_report.max_deviation, result.st_report.threshold
    );
    if let Some(lr) = &result.lr_report {
        eprintln!(
            "lr: {} (inversion measure {:.6}, threshold {:.6})",
            lr.verdict, lr.inversion_measure, lr.threshold
        );
    }

    match args.out.format {
        Format::Json => emit_json(&request, &result, args.out.output.as_deref()),
        Format::Csv => {
            let mut bytes = Vec::new();
            mc::write_csv(&result, &mut bytes)
                .map_err(|e| failure(EXIT_NUMERIC, format!("csv serialization failed: {e}")))?;
            write_out(args.out.output.as_deref(), &bytes)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::CheckFamily(args) => cmd_check_family(args),
        Command::CheckOrder(args) => cmd_check_order(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let doc = ErrorReport {
                spec_version: SPEC_VERSION,
                error: &f,
            };
            if let Ok(mut bytes) = serde_json::to_vec_pretty(&doc) {
                bytes.push(b'\n');
                let _ = io::stdout().write_all(&bytes);
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
