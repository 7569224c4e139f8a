//! Command-line front end.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 on runtime errors, and
//! 3 when `certify` ends in `refuted` or `heuristic_fail`.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use epsrand_core::cert::{
    build_net, certify_randomizing, heuristic_net_size_estimate, net_size_bound, volumetric_bound, CertMethod,
    CertificationReport, CertifyParams, EstimatorParams, NetParams, NetSizePlan, DEFAULT_DELTA, DEFAULT_PROBES,
};
use epsrand_core::ensembles::{check_isotropy_exact, check_isotropy_sampled, IsotropyReport, EXACT_ISOTROPY_MAX_DIM};
use epsrand_core::experiments::{run_concentration, run_coupon, run_scaling_scan, ExperimentRecord};
use epsrand_core::rng::stream;
use epsrand_core::{EnsembleSpec, Error as CoreError, KrausChannel, UnitaryEnsemble};

use crate::exec::RayonExecutor;
use crate::io::{self, kind, Envelope, IoError, Sidecar};
use crate::{export, plot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

/// Stream keys used under the master seed.
const CHANNEL_STREAM: u64 = 0;
const CERTIFY_STREAM: u64 = 1;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "epsrand",
    version,
    about = "Random-unitary channels close to the completely depolarizing channel",
    propagate_version = true
)]
pub struct Cli {
    /// Worker threads for trial-level parallelism [default: machine parallelism]
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw N unitaries from an ensemble and write the resulting channel
    Sample(SampleArgs),
    /// Compare the second moments of an ensemble with those of an isotropic measure
    CheckIsotropy(IsotropyArgs),
    /// Decide whether a channel is epsilon-randomizing
    Certify(CertifyArgs),
    /// Mean sup-norm deviation over a grid of dimensions and channel sizes
    Scan(ScanArgs),
    /// Fourier–Weyl draws needed until the image of a pure state has full rank
    Coupon(CouponArgs),
    /// Failure frequency of the single-pair concentration bound
    Concentration(ConcentrationArgs),
    /// Net-size and covering-number planning numbers, optionally building the net
    PlanNet(PlanNetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Net,
    Estimator,
    Both,
}

impl From<MethodArg> for CertMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Net => CertMethod::Net,
            MethodArg::Estimator => CertMethod::Estimator,
            MethodArg::Both => CertMethod::Both,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    /// Ensemble: haar, fourier, pauli (with --qubits) or file:<path>
    #[arg(long)]
    pub ensemble: String,
    /// Number of qubits for the pauli ensemble (d = 2^qubits)
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Use every element of a finite family once instead of i.i.d. draws.
    /// For fourier this is implied when N = d^2
    #[arg(long)]
    pub full_family: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; without it the result is printed to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv when --out ends in .csv, json otherwise]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn format(&self) -> Format {
        match (self.format, &self.out) {
            (Some(f), _) => f,
            (None, Some(p)) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EstimatorArgs {
    /// Random restarts of the sup-norm estimator
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Iteration cap per restart
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Stop a restart when the objective changes by less than this
    #[arg(long, default_value_t = 1e-10)]
    pub conv_tol: f64,
}

impl EstimatorArgs {
    fn params(&self) -> EstimatorParams {
        EstimatorParams {
            restarts: self.restarts,
            max_iters: self.max_iters,
            conv_tol: self.conv_tol,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Dimension (implied by --qubits or a file ensemble)
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Number of Kraus unitaries
    #[arg(long)]
    pub n: usize,
    /// Master seed (required)
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IsotropyArgs {
    /// Dimension (implied by --qubits or a file ensemble)
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Monte Carlo samples when the exact check is not available
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Master seed; required when the check is sampled (Haar, or d > 16)
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    /// Dimension (implied by --qubits, a file ensemble or --channel)
    #[arg(long)]
    pub d: Option<usize>,
    /// Ensemble: haar, fourier, pauli (with --qubits) or file:<path>
    #[arg(long, required_unless_present = "channel")]
    pub ensemble: Option<String>,
    /// Number of qubits for the pauli ensemble (d = 2^qubits)
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Use every element of a finite family once; implied for fourier when N = d^2
    #[arg(long)]
    pub full_family: bool,
    /// Number of Kraus unitaries
    #[arg(long, required_unless_present = "channel")]
    pub n: Option<usize>,
    /// Certify a channel file written by `sample` instead of drawing one
    #[arg(long, conflicts_with_all = ["ensemble", "n", "qubits", "full_family"])]
    pub channel: Option<PathBuf>,
    /// Target epsilon in (0, 1); the threshold is epsilon/d
    #[arg(long)]
    pub eps: f64,
    /// Master seed (required)
    #[arg(long)]
    pub seed: u64,
    /// Bounds to compute
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Covering radius of the net, below 1/2
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Random probes per growth round of a heuristic (d >= 3) net
    #[arg(long, default_value_t = DEFAULT_PROBES)]
    pub probes: usize,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Comma-separated dimensions (default for pauli: 2^qubits)
    #[arg(long, value_delimiter = ',')]
    pub d_list: Vec<usize>,
    /// Comma-separated channel sizes
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Trials per cell
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Master seed (required)
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Also write a log-log SVG chart here
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CouponArgs {
    /// Dimension
    #[arg(long)]
    pub d: usize,
    /// Trials
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Master seed (required)
    #[arg(long)]
    pub seed: u64,
    /// Also write an SVG histogram here
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    /// Dimension
    #[arg(long)]
    pub d: usize,
    /// Comma-separated channel sizes
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Relative deviation delta in (0, 1); a trial fails when |mean - 1/d| >= delta/d
    #[arg(long)]
    pub delta: f64,
    /// Trials per channel size
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Master seed (required)
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PlanNetArgs {
    /// Dimension
    #[arg(long)]
    pub d: usize,
    /// Covering radius in (0, 1)
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Real dimension n for the volumetric bound (1 + 2/eps)^n
    #[arg(long)]
    pub volumetric_n: Option<usize>,
    /// eps for the volumetric bound
    #[arg(long, default_value_t = 1.0)]
    pub volumetric_eps: f64,
    /// Build the net and write it instead of only planning
    #[arg(long)]
    pub build: bool,
    /// Seed for building a heuristic (d >= 3) net
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random probes per growth round of a heuristic net
    #[arg(long, default_value_t = DEFAULT_PROBES)]
    pub probes: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::ResourceLimit(_) | CoreError::Unsupported(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(format!("csv: {e}"))
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv_strings: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    match dispatch(&cli, argv_strings) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

struct Ctx {
    started: Instant,
    argv: Vec<String>,
    threads: Option<usize>,
}

impl Ctx {
    fn executor(&self) -> Result<RayonExecutor, Failure> {
        RayonExecutor::new(self.threads).map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
    }

    /// Writes the primary output (and its sidecar) or prints it.
    fn emit(&self, output: &OutputArgs, text: &str, summary: &str) -> Result<(), Failure> {
        match &output.out {
            Some(path) => {
                io::write_text(path, text)?;
                io::write_sidecar(path, &Sidecar::now(self.started.elapsed().as_secs_f64(), self.argv.clone()))?;
                println!("{summary}");
                println!("wrote {}", path.display());
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(text.as_bytes());
                eprintln!("{summary}");
            }
        }
        Ok(())
    }
}

fn dispatch(cli: &Cli, argv: Vec<String>) -> Outcome {
    let ctx = Ctx {
        started: Instant::now(),
        argv,
        threads: cli.threads,
    };
    if cli.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let config = serde_json::to_value(&cli.command).map_err(|e| Failure::Runtime(e.to_string()))?;
    match &cli.command {
        Command::Sample(a) => cmd_sample(&ctx, a, config),
        Command::CheckIsotropy(a) => cmd_isotropy(&ctx, a, config),
        Command::Certify(a) => cmd_certify(&ctx, a, config),
        Command::Scan(a) => cmd_scan(&ctx, a, config),
        Command::Coupon(a) => cmd_coupon(&ctx, a, config),
        Command::Concentration(a) => cmd_concentration(&ctx, a, config),
        Command::PlanNet(a) => cmd_plan_net(&ctx, a, config),
    }
}

/// An ensemble name resolved against the dimension flags.
struct Resolved {
    spec: EnsembleSpec,
    d: usize,
}

fn resolve_ensemble(
    name: &str,
    d: Option<usize>,
    qubits: Option<usize>,
    full_family: bool,
    n: Option<usize>,
) -> Result<Resolved, Failure> {
    let check_d = |implied: usize, what: &str| -> Result<usize, Failure> {
        match d {
            Some(d) if d != implied => Err(Failure::Usage(format!("--d {d} contradicts {what} (d = {implied})"))),
            _ => Ok(implied),
        }
    };
    let need_d = || d.ok_or_else(|| Failure::Usage(format!("--d is required for the {name} ensemble")));
    if qubits.is_some() && name != "pauli" {
        return Err(Failure::Usage("--qubits only applies to the pauli ensemble".into()));
    }
    match name {
        "haar" => {
            if full_family {
                return Err(Failure::Usage("--full-family needs a finite ensemble (fourier, pauli or a discrete file)".into()));
            }
            Ok(Resolved {
                spec: EnsembleSpec::Haar,
                d: need_d()?,
            })
        }
        "fourier" => {
            let d = need_d()?;
            let full_family = full_family || n == Some(d * d);
            Ok(Resolved {
                spec: EnsembleSpec::Fourier { full_family },
                d,
            })
        }
        "pauli" => {
            let k = qubits.ok_or_else(|| Failure::Usage("the pauli ensemble needs --qubits k".into()))?;
            if k == 0 || k > epsrand_core::ensembles::MAX_PAULI_QUBITS {
                return Err(Failure::Usage(format!(
                    "--qubits must lie in 1..={}",
                    epsrand_core::ensembles::MAX_PAULI_QUBITS
                )));
            }
            Ok(Resolved {
                spec: EnsembleSpec::Pauli { full_family },
                d: check_d(1 << k, "--qubits")?,
            })
        }
        other => {
            let Some(path) = other.strip_prefix("file:") else {
                return Err(Failure::Usage(format!(
                    "unknown ensemble `{other}`; use haar, fourier, pauli or file:<path>"
                )));
            };
            let env: Envelope<UnitaryEnsemble> = io::load(Path::new(path), kind::ENSEMBLE)?;
            let ensemble = env.payload;
            let d = check_d(ensemble.dim(), "the ensemble file")?;
            Ok(Resolved {
                spec: EnsembleSpec::Custom { ensemble, full_family },
                d,
            })
        }
    }
}

fn json<T: Serialize>(kind: &str, payload: &T, config: serde_json::Value) -> Result<String, Failure> {
    Ok(io::to_json_string(&Envelope::new(kind, payload).with_config(config))?)
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Failure::Runtime(e.to_string()))
}

fn cmd_sample(ctx: &Ctx, a: &SampleArgs, config: serde_json::Value) -> Outcome {
    let r = resolve_ensemble(
        &a.ensemble.ensemble,
        a.d,
        a.ensemble.qubits,
        a.ensemble.full_family,
        Some(a.n),
    )?;
    let source = r.spec.instantiate(r.d)?;
    let channel = source.build_channel(a.n, &mut stream(a.seed, CHANNEL_STREAM))?;
    let text = match a.output.format() {
        Format::Json => json(kind::CHANNEL, &channel, config)?,
        Format::Csv => csv_string(|b| export::write_channel(&channel, b))?,
    };
    let summary = format!("sampled {} unitaries of size {} from {}", channel.len(), channel.dim(), r.spec.descriptor());
    ctx.emit(&a.output, &text, &summary)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct IsotropyOutput<'a> {
    ensemble: String,
    report: &'a IsotropyReport,
    /// Deviation within four standard-error scales; sampled checks only.
    passes_four_sigma: Option<bool>,
}

fn cmd_isotropy(ctx: &Ctx, a: &IsotropyArgs, config: serde_json::Value) -> Outcome {
    let r = resolve_ensemble(&a.ensemble.ensemble, a.d, a.ensemble.qubits, false, None)?;
    let ensemble = match &r.spec {
        EnsembleSpec::Haar => UnitaryEnsemble::haar(r.d)?,
        EnsembleSpec::Fourier { .. } => UnitaryEnsemble::fourier(r.d)?,
        EnsembleSpec::Pauli { .. } => epsrand_core::ensembles::pauli_tensor_ensemble(r.d.trailing_zeros() as usize)?,
        EnsembleSpec::Custom { ensemble, .. } => ensemble.clone(),
    };
    let report = match ensemble.as_discrete() {
        Some(x) if r.d <= EXACT_ISOTROPY_MAX_DIM => check_isotropy_exact(x)?,
        _ => {
            let seed = a.seed.ok_or_else(|| {
                Failure::Usage("--seed is required for a sampled isotropy check (Haar or d > 16)".into())
            })?;
            check_isotropy_sampled(&ensemble, a.samples, &mut stream(seed, CHANNEL_STREAM))?
        }
    };
    let passes = report
        .standard_error_scale
        .map(|s| report.max_deviation <= 4.0 * s);
    let out = IsotropyOutput {
        ensemble: r.spec.descriptor(),
        report: &report,
        passes_four_sigma: passes,
    };
    let text = match a.output.format() {
        Format::Json => json(kind::ISOTROPY, &out, config)?,
        Format::Csv => {
            return Err(Failure::Usage("check-isotropy writes JSON only".into()));
        }
    };
    let summary = format!("{}: max deviation {:.3e} ({:?})", out.ensemble, report.max_deviation, report.mode);
    ctx.emit(&a.output, &text, &summary)?;
    Ok(EXIT_OK)
}

fn cmd_certify(ctx: &Ctx, a: &CertifyArgs, config: serde_json::Value) -> Outcome {
    let channel: KrausChannel = match &a.channel {
        Some(path) => {
            let env: Envelope<KrausChannel> = io::load(path, kind::CHANNEL)?;
            if let Some(d) = a.d.filter(|&d| d != env.payload.dim()) {
                return Err(Failure::Usage(format!(
                    "--d {d} contradicts the channel file (d = {})",
                    env.payload.dim()
                )));
            }
            env.payload
        }
        None => {
            let name = a.ensemble.as_deref().expect("clap enforces --ensemble");
            let n = a.n.expect("clap enforces --n");
            let r = resolve_ensemble(name, a.d, a.qubits, a.full_family, Some(n))?;
            r.spec.instantiate(r.d)?.build_channel(n, &mut stream(a.seed, CHANNEL_STREAM))?
        }
    };
    let params = CertifyParams {
        delta: a.delta,
        estimator: a.estimator.params(),
        probes: a.probes,
    };
    let mut report: CertificationReport = certify_randomizing(
        &channel,
        a.eps,
        a.method.into(),
        params,
        &mut stream(a.seed, CERTIFY_STREAM),
    )?;
    report.seed = Some(a.seed);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = match a.output.format() {
        Format::Json => json(kind::CERTIFICATION, &report, config)?,
        Format::Csv => csv_string(|b| export::write_certification(&report, b))?,
    };
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into());
    let summary = format!(
        "{}: d = {}, N = {}, eps/d = {:.3e}, lower = {}, upper = {}",
        report.verdict.as_str(),
        report.dim,
        report.n,
        report.threshold,
        fmt(report.estimator_value),
        fmt(report.certified_upper_bound)
    );
    ctx.emit(&a.output, &text, &summary)?;
    Ok(if report.verdict.is_pass() { EXIT_OK } else { EXIT_VERDICT })
}

fn cmd_scan(ctx: &Ctx, a: &ScanArgs, config: serde_json::Value) -> Outcome {
    let d_list = if a.d_list.is_empty() {
        match a.ensemble.qubits {
            Some(k) if a.ensemble.ensemble == "pauli" => vec![1usize << k.min(16)],
            _ => return Err(Failure::Usage("--d-list is required".into())),
        }
    } else {
        a.d_list.clone()
    };
    // Dimension checks happen per cell; resolve against the first entry for
    // name and flag validation only.
    let probe = resolve_ensemble(
        &a.ensemble.ensemble,
        if a.ensemble.ensemble == "pauli" { None } else { Some(d_list[0]) },
        a.ensemble.qubits,
        a.ensemble.full_family,
        None,
    )?;
    let record = run_scaling_scan(
        &probe.spec,
        &d_list,
        &a.n_list,
        a.trials,
        a.seed,
        a.estimator.params(),
        &ctx.executor()?,
    )?;
    for c in record.cells.iter().filter(|c| c.skipped.is_some()) {
        eprintln!("skipped d = {}, N = {}: {}", c.d, c.n, c.skipped.as_deref().unwrap_or(""));
    }
    if let Some(p) = &a.plot {
        io::write_text(p, &plot::scaling_svg(&record))?;
    }
    let fits: Vec<String> = record
        .fits
        .iter()
        .map(|f| match f.fit {
            Some(fit) => format!("d = {}: slope {:.3}", f.d, fit.slope),
            None => format!("d = {}: no fit", f.d),
        })
        .collect();
    let record = ExperimentRecord::Scaling(record);
    let text = match a.output.format() {
        Format::Json => json(kind::EXPERIMENT, &record, config)?,
        Format::Csv => csv_string(|b| export::write_experiment(&record, b))?,
    };
    ctx.emit(&a.output, &text, &format!("scan finished; {}", fits.join("; ")))?;
    Ok(EXIT_OK)
}

fn cmd_coupon(ctx: &Ctx, a: &CouponArgs, config: serde_json::Value) -> Outcome {
    let record = run_coupon(a.d, a.trials, a.seed, &ctx.executor()?)?;
    if let Some(p) = &a.plot {
        io::write_text(p, &plot::coupon_svg(&record))?;
    }
    let summary = format!(
        "mean draws {:.2}, median {:.1}, analytic d H_d = {:.2}",
        record.summary.mean, record.summary.median, record.analytic_mean
    );
    let record = ExperimentRecord::Coupon(record);
    let text = match a.output.format() {
        Format::Json => json(kind::EXPERIMENT, &record, config)?,
        Format::Csv => csv_string(|b| export::write_experiment(&record, b))?,
    };
    ctx.emit(&a.output, &text, &summary)?;
    Ok(EXIT_OK)
}

fn cmd_concentration(ctx: &Ctx, a: &ConcentrationArgs, config: serde_json::Value) -> Outcome {
    let record = run_concentration(a.d, &a.n_list, a.delta, a.trials, a.seed, &ctx.executor()?)?;
    let cells: Vec<String> = record
        .cells
        .iter()
        .map(|c| {
            if c.censored {
                format!("N = {}: 0/{} (< {:.1e})", c.n, c.trials, 1.0 / c.trials as f64)
            } else {
                format!("N = {}: {}/{}", c.n, c.failures, c.trials)
            }
        })
        .collect();
    let record = ExperimentRecord::Concentration(record);
    let text = match a.output.format() {
        Format::Json => json(kind::EXPERIMENT, &record, config)?,
        Format::Csv => csv_string(|b| export::write_experiment(&record, b))?,
    };
    ctx.emit(&a.output, &text, &format!("failures {}", cells.join(", ")))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NetPlan {
    d: usize,
    delta: f64,
    net_size_bound: NetSizePlan,
    /// Expected size of a random net (Haar measure of a ball).
    heuristic_estimate: f64,
    volumetric: Option<NetSizePlan>,
}

fn cmd_plan_net(ctx: &Ctx, a: &PlanNetArgs, config: serde_json::Value) -> Outcome {
    if a.build {
        let seed = match (a.d, a.seed) {
            (1 | 2, s) => s.unwrap_or(0),
            (_, Some(s)) => s,
            (_, None) => return Err(Failure::Usage("--seed is required to build a net for d >= 3".into())),
        };
        let mut net = build_net(a.d, a.delta, NetParams { probes: a.probes }, &mut stream(seed, CHANNEL_STREAM))?;
        if a.d >= 3 {
            net.construction.seed = Some(seed);
        }
        if a.output.format() == Format::Csv {
            return Err(Failure::Usage("nets are written as JSON only".into()));
        }
        let text = json(kind::NET, &net, config)?;
        let summary = format!(
            "{:?} net with {} states, radius {:.4}",
            net.certificate,
            net.len(),
            net.construction.achieved_radius
        );
        ctx.emit(&a.output, &text, &summary)?;
        return Ok(EXIT_OK);
    }
    let plan = NetPlan {
        d: a.d,
        delta: a.delta,
        net_size_bound: net_size_bound(a.d, a.delta)?,
        heuristic_estimate: heuristic_net_size_estimate(a.d.max(1), a.delta),
        volumetric: a
            .volumetric_n
            .map(|n| volumetric_bound(n, a.volumetric_eps))
            .transpose()?,
    };
    if a.output.format() == Format::Csv {
        return Err(Failure::Usage("plan-net writes JSON only".into()));
    }
    let text = json(kind::NET_PLAN, &plan, config)?;
    let summary = format!(
        "(5/delta)^(2d) = 10^{:.2}{}",
        plan.net_size_bound.log10_bound,
        if plan.net_size_bound.feasible { "" } else { " (infeasible)" }
    );
    ctx.emit(&a.output, &text, &summary)?;
    Ok(EXIT_OK)
}
