//! `dynmatch`: generate, replay and benchmark matching traces.
//!
//! Exit status is 0 when everything passed, 1 when a verified replay found a
//! disagreement, and 2 for unreadable or invalid input.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynmatch::trace::{
    bench, generate, parse_trace, replay, write_csv, write_trace, Baseline, GenSpec, Mode, ReplayError,
    ReplayOptions, Trace,
};

#[derive(Parser, Debug)]
#[command(name = "dynmatch", version, about = "Dynamic bottleneck matching traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random trace.
    Gen(GenArgs),
    /// Apply a trace, optionally checking every answer against the oracles.
    Replay(ReplayArgs),
    /// Time every operation of a trace and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// line-bottleneck, line-minweight or plane
    #[arg(long)]
    mode: Mode,
    /// Largest number of live points.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum distance between plane points.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Lower-left box corner as `x,y`.
    #[arg(long, default_value = "0,0", value_parser = parse_pair)]
    bbox_origin: (f64, f64),
    #[arg(long, default_value_t = 64.0)]
    bbox_side: f64,
    /// Update rounds (default: 2n).
    #[arg(long)]
    rounds: Option<usize>,
    /// Query after every single update instead of every pair.
    #[arg(long)]
    odd_queries: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Trace file (default: stdin).
    input: Option<PathBuf>,
    /// Cross-check against the brute-force oracles.
    #[arg(long)]
    verify: bool,
    /// Check only steps divisible by this (default: 1 up to 256 points, else 16).
    #[arg(long)]
    check_every: Option<usize>,
    /// Step reports as JSON lines (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Trace file (default: stdin).
    input: Option<PathBuf>,
    /// dynamic or rebuild
    #[arg(long, default_value = "dynamic")]
    baseline: Baseline,
    /// CSV file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

enum Failure {
    Verification(String),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdin().lock()),
    })
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_trace(path: &Option<PathBuf>) -> Result<Trace, Failure> {
    Ok(parse_trace(open_input(path)?)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(a) => {
            let spec = GenSpec {
                mode: a.mode,
                n: a.n,
                seed: a.seed,
                lambda: a.lambda,
                bbox_origin: a.bbox_origin,
                bbox_side: a.bbox_side,
                rounds: a.rounds,
                odd_queries: a.odd_queries,
            };
            let trace = generate(&spec)?;
            let mut out = open_output(&a.out)?;
            write_trace(&trace, &mut out)?;
            out.flush()?;
        }
        Command::Replay(a) => {
            let trace = read_trace(&a.input)?;
            let opts = ReplayOptions {
                verify: a.verify,
                check_every: a.check_every,
                fault: None,
            };
            let reports = replay(&trace, &opts).map_err(|e| match e {
                ReplayError::Setup(msg) => Failure::Input(msg),
                other => Failure::Verification(other.to_string()),
            })?;
            let mut out = open_output(&a.out)?;
            for r in &reports {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
            if a.verify {
                eprintln!("verified {} steps", reports.len());
            }
        }
        Command::Bench(a) => {
            let trace = read_trace(&a.input)?;
            let rows = bench(&trace, a.baseline)?;
            let mut out = open_output(&a.out)?;
            write_csv(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
