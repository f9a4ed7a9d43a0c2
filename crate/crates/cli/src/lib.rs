//! Command-line front end: factor integers with the classical or simulated
//! sieve, write step-by-step state traces, validate them, and benchmark the
//! classical sieve.
//!
//! Every command writes its report to `out` and one-line diagnostics to
//! `err`, and returns an [`Exit`] code: 0 on success, 1 when factoring
//! failed (prime input, escalation exhausted, pipelines disagree), 2 on
//! invalid input.

pub mod bench;
pub mod config;
pub mod factor;
pub mod trace;
pub mod validate;

use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_natural, BitRange, Format, Mode, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failed = 1,
    Invalid = 2,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// The worse of two outcomes.
    pub fn max(self, other: Exit) -> Exit {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qsieve",
    version,
    about = "Quadratic sieve factorization, classical and simulated"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor an integer given in decimal or 0x-hex.
    Factor(FactorArgs),
    /// Run the simulated pipeline and write every intermediate state as JSON lines.
    Trace(TraceArgs),
    /// Time the classical sieve on seeded random semiprimes.
    Bench(BenchArgs),
    /// Re-read a trace file and check per-step normalization.
    ValidateTrace(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SieveArgs {
    /// Smoothness bound B.
    #[arg(long, short = 'B')]
    pub smoothness_bound: Option<u64>,
    /// Sieve interval half-width M.
    #[arg(long, short = 'M')]
    pub interval_half_width: Option<u64>,
    /// Parameter escalations allowed after a failed attempt.
    #[arg(long)]
    pub max_retries: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    pub n: String,
    #[arg(long, value_enum, default_value_t = Mode::Classical)]
    pub mode: Mode,
    #[command(flatten)]
    pub sieve: SieveArgs,
    /// Sample the simulated measurements from this seed instead of post-selecting.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the simulated pipeline's trace here.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    /// Omit wall-clock times from the report.
    #[arg(long)]
    pub no_timing: bool,
    /// Keep factoring composite factors until only primes remain.
    #[arg(long)]
    pub recurse: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    pub n: String,
    #[arg(long, value_enum, default_value_t = Mode::QuantumSim)]
    pub mode: Mode,
    #[command(flatten)]
    pub sieve: SieveArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub trace: PathBuf,
    /// Basis terms written per snapshot.
    #[arg(long, default_value_t = 100_000)]
    pub max_terms: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Semiprime sizes, `A..B` inclusive or a single size.
    #[arg(long, default_value = "32..48")]
    pub bits: String,
    #[arg(long, default_value_t = 8)]
    pub step: u32,
    /// Semiprimes timed per size.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_retries: Option<usize>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub json: bool,
}

fn format_of(json: bool) -> Format {
    if json {
        Format::Json
    } else {
        Format::Text
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let result = match cli.command {
        Command::Factor(args) => factor::run(&args, out, err),
        Command::Trace(args) => trace::run(&args, out, err),
        Command::Bench(args) => bench::run(&args, out, err),
        Command::ValidateTrace(args) => validate::run(&args, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        Exit::Failed
    })
}

/// Writes `message` as a one-line diagnostic and returns `exit`.
pub(crate) fn fail(
    err: &mut dyn Write,
    exit: Exit,
    message: impl std::fmt::Display,
) -> io::Result<Exit> {
    writeln!(err, "error: {message}")?;
    Ok(exit)
}

/// Milliseconds rounded to three decimals.
pub(crate) fn millis(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

pub(crate) fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}
