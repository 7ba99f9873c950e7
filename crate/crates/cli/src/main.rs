//! `gausswalk`: sign a stream of vectors online, verify the walks, run experiments.
//!
//! Exit codes: 0 success, 1 verification or run failure, 2 configuration
//! error, 3 input error.

mod format;

use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gausswalk::harness::experiment::{run_experiment, run_experiment_traced};
use gausswalk::harness::verify::{run_verification, Suite};
use gausswalk::harness::{Algorithm, ExperimentConfig, Generator};
use gausswalk::rng::RNG_NAME;
use gausswalk::{Balancer, DyadicRouter, FullColoring, Mode, Signer, WalkError};
use serde::Serialize;

use crate::format::{format_line, parse_line, LineFormat};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "gausswalk", version, about = "Online vector balancing with Gaussian-preserving lattice walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Signs in {-1, 0, +1} (partial coloring).
    Partial(StreamArgs),
    /// Signs in {-1, +1, +2}; requires --sigma >= 1.
    Balance(StreamArgs),
    /// Signs in {-1, +1}, rerunning partial coloring on zero-signed vectors.
    Full(StreamArgs),
    /// Routes vectors by dyadic norm class to independent balancers.
    Dyadic(DyadicArgs),
    /// Checks kernel identities, exact stationarity, and the +2 walk inequality.
    Verify(VerifyArgs),
    /// Runs one experiment against a synthetic vector stream.
    Simulate(SimulateArgs),
    /// Prints a synthetic vector stream in the input line format.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Failure budget delta in (0, 1/2).
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Random seed; GAUSSWALK_SEED is used when the flag is absent.
    #[arg(long, env = "GAUSSWALK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LineFormat::Dense)]
    format: LineFormat,
    /// Write the summary JSON here instead of stderr.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    /// Gaussian scale of the walk.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DyadicArgs {
    /// Walk used inside every norm class.
    #[arg(long, value_enum, default_value_t = WalkMode::Balance)]
    mode: WalkMode,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkMode {
    Partial,
    Balance,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Identities,
    Stationarity,
    Inequality,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Json,
    Csv,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "gen", value_parser = parse_generator)]
    generator: Generator,
    #[arg(long, value_parser = parse_algorithm)]
    mode: Algorithm,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Number of vectors.
    #[arg(long)]
    t: usize,
    /// Dimension.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Nonzeros per vector for sparse_random.
    #[arg(long, default_value_t = 10)]
    nnz: usize,
    #[arg(long, env = "GAUSSWALK_SEED", default_value_t = 0)]
    seed: u64,
    /// `json` for the summary report, `csv` for the running discrepancy per step.
    #[arg(long, value_enum, default_value_t = ReportKind::Json)]
    report: ReportKind,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall time in the JSON report (breaks byte-reproducibility).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "gen", value_parser = parse_generator)]
    generator: Generator,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    nnz: usize,
    #[arg(long, env = "GAUSSWALK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LineFormat::Sparse)]
    format: LineFormat,
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// An error paired with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(err: io::Error) -> Self {
        Self::new(EXIT_FAILURE, format!("i/o error: {err}"))
    }
}

fn config_error(err: WalkError) -> Failure {
    Failure::new(EXIT_CONFIG, format!("invalid configuration: {err}"))
}

#[derive(Serialize)]
struct StreamSummary {
    mode: &'static str,
    sigma: Option<f64>,
    delta: f64,
    seed: u64,
    rng: &'static str,
    vectors: u64,
    max_running_discrepancy: f64,
    final_discrepancy: f64,
    used_fraction: f64,
    sign_minus_one: u64,
    sign_zero: u64,
    sign_plus_one: u64,
    sign_plus_two: u64,
    filtered: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    active_scales: Option<usize>,
}

struct StreamOutcome {
    vectors: u64,
    filtered: u64,
}

/// Reads vectors from `input`, writing and flushing each sign before reading
/// the next line.
fn stream_signs(
    signer: &mut dyn Signer,
    format: LineFormat,
    input: impl BufRead,
    output: &mut impl Write,
) -> Result<StreamOutcome, Failure> {
    let mut outcome = StreamOutcome {
        vectors: 0,
        filtered: 0,
    };
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(Failure::io)?;
        let v = parse_line(&line, format).map_err(|e| {
            Failure::new(EXIT_INPUT, format!("line {}: {e}", lineno + 1))
        })?;
        let record = signer
            .sign(&v)
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("line {}: {e}", lineno + 1)))?;
        writeln!(output, "{}", record.sign).map_err(Failure::io)?;
        output.flush().map_err(Failure::io)?;
        outcome.vectors += 1;
        outcome.filtered += u64::from(record.filtered);
    }
    Ok(outcome)
}

fn write_summary(summary: &StreamSummary, path: Option<&PathBuf>) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    match path {
        Some(path) => std::fs::write(path, json + "\n").map_err(Failure::io),
        None => {
            eprintln!("{json}");
            Ok(())
        }
    }
}

#[derive(Clone, Copy)]
enum StreamKind {
    Partial,
    Balance,
    Full,
    Dyadic(WalkMode),
}

impl StreamKind {
    fn name(self) -> &'static str {
        match self {
            StreamKind::Partial => "partial",
            StreamKind::Balance => "balance",
            StreamKind::Full => "full",
            StreamKind::Dyadic(_) => "dyadic",
        }
    }
}

enum AnySigner {
    Walk(Balancer),
    Full(FullColoring),
    Dyadic(DyadicRouter),
}

impl AnySigner {
    fn as_signer(&mut self) -> &mut dyn Signer {
        match self {
            AnySigner::Walk(s) => s,
            AnySigner::Full(s) => s,
            AnySigner::Dyadic(s) => s,
        }
    }

    /// Full-coloring rounds and active dyadic scales, where they apply.
    fn extras(&self) -> (Option<usize>, Option<usize>) {
        match self {
            AnySigner::Full(f) => (Some(f.rounds()), None),
            AnySigner::Dyadic(d) => (None, Some(d.active_scales())),
            AnySigner::Walk(_) => (None, None),
        }
    }
}

fn run_stream(kind: StreamKind, sigma: Option<f64>, common: &CommonArgs) -> Result<(), Failure> {
    let CommonArgs {
        delta, seed, format, ..
    } = *common;
    let scale = sigma.unwrap_or(1.0);
    let mut signer = match kind {
        StreamKind::Partial => AnySigner::Walk(Balancer::new(Mode::Partial, scale, delta, seed).map_err(config_error)?),
        StreamKind::Balance => AnySigner::Walk(Balancer::new(Mode::Balance, scale, delta, seed).map_err(config_error)?),
        StreamKind::Full => AnySigner::Full(FullColoring::new(scale, delta, seed).map_err(config_error)?),
        StreamKind::Dyadic(mode) => {
            let mode = match mode {
                WalkMode::Partial => Mode::Partial,
                WalkMode::Balance => Mode::Balance,
            };
            AnySigner::Dyadic(DyadicRouter::new(mode, delta, seed).map_err(config_error)?)
        }
    };
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let outcome = stream_signs(signer.as_signer(), format, stdin.lock(), &mut out)?;

    let (rounds, active_scales) = signer.extras();
    let dyn_signer = signer.as_signer();
    let counts = dyn_signer.counts();
    let sum = dyn_signer.signed_sum();
    let summary = StreamSummary {
        mode: kind.name(),
        sigma,
        delta,
        seed,
        rng: RNG_NAME,
        vectors: outcome.vectors,
        max_running_discrepancy: sum.max_running(),
        final_discrepancy: sum.snapshot().max_abs,
        used_fraction: counts.used_fraction(),
        sign_minus_one: counts.minus_one,
        sign_zero: counts.zero,
        sign_plus_one: counts.plus_one,
        sign_plus_two: counts.plus_two,
        filtered: outcome.filtered,
        rounds,
        active_scales,
    };
    write_summary(&summary, common.stats_out.as_ref())
}

fn write_output(path: Option<&PathBuf>, body: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, body).map_err(Failure::io),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(Failure::io)?;
            out.flush().map_err(Failure::io)
        }
    }
}

fn run_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::Identities => vec![Suite::Identities],
        SuiteArg::Stationarity => vec![Suite::Stationarity],
        SuiteArg::Inequality => vec![Suite::Inequality],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let report = run_verification(&suites).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_output(args.out.as_ref(), &json)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::new(EXIT_FAILURE, "verification failed"))
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::new(EXIT_CONFIG, "invalid configuration: --n must be positive"));
    }
    let config = ExperimentConfig::new(args.generator, args.mode, args.t, args.n, args.seed)
        .sigma(args.sigma)
        .delta(args.delta)
        .nnz(args.nnz);
    let run_error = |e: WalkError| match e {
        WalkError::Domain { .. } => config_error(e),
        other => Failure::new(EXIT_FAILURE, other.to_string()),
    };
    let (mut report, body) = match args.report {
        ReportKind::Json => {
            let report = run_experiment(&config).map_err(run_error)?;
            (report, None)
        }
        ReportKind::Csv => {
            let (report, trace) = run_experiment_traced(&config).map_err(run_error)?;
            let mut csv = String::from("step,max_running_discrepancy\n");
            for (i, m) in trace.iter().enumerate() {
                csv.push_str(&format!("{},{m:.17e}\n", i + 1));
            }
            (report, Some(csv))
        }
    };
    let wall = report.wall_time_secs.take().unwrap_or(0.0);
    if args.timing {
        report.wall_time_secs = Some(wall);
    }
    let body = body.unwrap_or_else(|| serde_json::to_string_pretty(&report).expect("report serializes") + "\n");
    write_output(args.out.as_ref(), &body)?;
    eprintln!(
        "{} {} t={} n={} seed={}: max running discrepancy {:.4} (bound {:.4}), used fraction {:.5}, {:.2}s",
        report.mode,
        report.generator,
        report.t,
        report.n,
        report.seed,
        report.max_running_discrepancy,
        report.running_bound,
        report.used_fraction,
        wall
    );
    Ok(())
}

fn run_generate(args: &GenerateArgs) -> Result<(), Failure> {
    if args.n == 0 {
        return Err(Failure::new(EXIT_CONFIG, "invalid configuration: --n must be positive"));
    }
    let mut out = BufWriter::new(io::stdout().lock());
    for v in args.generator.stream(args.n, args.nnz, args.seed).take(args.t) {
        writeln!(out, "{}", format_line(&v, args.format, args.n)).map_err(Failure::io)?;
    }
    out.flush().map_err(Failure::io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Partial(a) => run_stream(StreamKind::Partial, Some(a.sigma), &a.common),
        Command::Balance(a) => run_stream(StreamKind::Balance, Some(a.sigma), &a.common),
        Command::Full(a) => run_stream(StreamKind::Full, Some(a.sigma), &a.common),
        Command::Dyadic(a) => run_stream(StreamKind::Dyadic(a.mode), None, &a.common),
        Command::Verify(a) => run_verify(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Generate(a) => run_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gausswalk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
