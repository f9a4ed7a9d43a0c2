use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use qsieve::classical::{factor, factor_with, FactorError, FactorResult, SieveError};
use qsieve::quantum::{
    run_pipeline_traced, Measurement, PipelineOptions, PipelineTrace, QuantumError,
};
use qsieve::Natural;
use serde::Serialize;

use crate::config::{parse_natural, Format, RunConfig};
use crate::{fail, format_of, millis, write_json, Exit, FactorArgs};

impl RunConfig {
    pub fn from_factor_args(args: &FactorArgs) -> Result<Self, String> {
        Ok(RunConfig {
            n: parse_natural(&args.n)?,
            mode: args.mode,
            smoothness_bound: args.sieve.smoothness_bound,
            interval_half_width: args.sieve.interval_half_width,
            max_retries: args.sieve.max_retries,
            seed: args.seed,
            trace: args.trace.clone(),
            format: format_of(args.json),
            timing: !args.no_timing,
            recurse: args.recurse,
        })
    }

    pub fn measurement(&self) -> Measurement {
        match self.seed {
            Some(seed) => Measurement::Sampled { seed },
            None => Measurement::PostSelect,
        }
    }
}

/// A pipeline failure and the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub exit: Exit,
    pub message: String,
}

fn classify_factor(e: &FactorError) -> Exit {
    match e {
        FactorError::InvalidInput(_) | FactorError::Sieve(SieveError::InvalidParams(_)) => {
            Exit::Invalid
        }
        _ => Exit::Failed,
    }
}

fn failure_of(e: &QuantumError) -> RunFailure {
    let exit = match e {
        QuantumError::Factor(f) => classify_factor(f),
        QuantumError::Sieve(SieveError::InvalidParams(_)) => Exit::Invalid,
        _ => Exit::Failed,
    };
    RunFailure {
        exit,
        message: e.to_string(),
    }
}

/// Inputs 2 and 3 are prime, not invalid.
fn tiny_prime(n: &Natural) -> Option<RunFailure> {
    (*n == Natural::from(2u32) || *n == Natural::from(3u32)).then(|| RunFailure {
        exit: Exit::Failed,
        message: FactorError::Prime(n.clone()).to_string(),
    })
}

/// One pipeline's outcome and wall time.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub pipeline: &'static str,
    pub outcome: Result<FactorResult, RunFailure>,
    pub elapsed: Duration,
}

pub fn run_classical(cfg: &RunConfig) -> Result<PipelineRun, String> {
    let params = cfg.sieve_params()?;
    let start = Instant::now();
    let outcome = match tiny_prime(&cfg.n) {
        Some(f) => Err(f),
        None => factor_with(&cfg.n, params).map_err(|e| RunFailure {
            exit: classify_factor(&e),
            message: e.to_string(),
        }),
    };
    Ok(PipelineRun {
        pipeline: "classical",
        outcome,
        elapsed: start.elapsed(),
    })
}

pub fn run_quantum(
    cfg: &RunConfig,
    snapshot_cap: usize,
) -> Result<(PipelineRun, PipelineTrace), String> {
    let params = cfg.sieve_params()?;
    let options = PipelineOptions {
        snapshot_cap,
        measurement: cfg.measurement(),
    };
    let start = Instant::now();
    let (outcome, trace) = match tiny_prime(&cfg.n) {
        Some(f) => (Err(f), PipelineTrace::default()),
        None => {
            let (result, trace) = run_pipeline_traced(&cfg.n, params, &options);
            (result.map_err(|e| failure_of(&e)), trace)
        }
    };
    Ok((
        PipelineRun {
            pipeline: "quantum-sim",
            outcome,
            elapsed: start.elapsed(),
        },
        trace,
    ))
}

/// Creates the trace file up front so an unwritable path is reported before
/// any work is done.
pub(crate) fn open_trace(path: &Path) -> Result<File, String> {
    File::create(path).map_err(|e| format!("cannot write trace {}: {e}", path.display()))
}

/// Writes `trace` and returns the number of records.
pub(crate) fn write_trace(file: File, trace: &PipelineTrace) -> io::Result<usize> {
    let mut buf = Vec::new();
    trace.write_jsonl(&mut buf)?;
    let mut w = BufWriter::new(file);
    w.write_all(&buf)?;
    w.flush()?;
    Ok(buf.iter().filter(|&&b| b == b'\n').count())
}

#[derive(Debug, Serialize)]
struct Witness {
    x: String,
    y: String,
}

#[derive(Debug, Serialize)]
struct ParamsReport {
    smoothness_bound: u64,
    interval_half_width: u64,
    extra_relations: usize,
    max_retries: usize,
}

#[derive(Debug, Serialize)]
struct PipelineReport {
    pipeline: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factor_base_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dependencies_tried: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_ms: Option<f64>,
}

impl PipelineReport {
    fn new(run: &PipelineRun, timing: bool) -> Self {
        let mut report = PipelineReport {
            pipeline: run.pipeline,
            status: "ok",
            error: None,
            f1: None,
            f2: None,
            witness: None,
            params: None,
            factor_base_size: None,
            relations: None,
            retries: None,
            dependencies_tried: None,
            time_ms: timing.then(|| millis(run.elapsed)),
        };
        match &run.outcome {
            Err(f) => {
                report.status = "error";
                report.error = Some(f.message.clone());
            }
            Ok(r) => {
                report.f1 = Some(r.f1.to_string());
                report.f2 = Some(r.f2.to_string());
                report.witness = r.witness.as_ref().map(|(x, y)| Witness {
                    x: x.to_string(),
                    y: y.to_string(),
                });
                report.dependencies_tried = Some(r.attempts);
                if let Some(s) = &r.stats {
                    report.params = Some(ParamsReport {
                        smoothness_bound: s.params.smoothness_bound(),
                        interval_half_width: s.params.interval_half_width(),
                        extra_relations: s.params.extra_relations(),
                        max_retries: s.params.max_retries(),
                    });
                    report.factor_base_size = Some(s.factor_base_size);
                    report.relations = Some(s.relations);
                    report.retries = Some(s.retries);
                }
            }
        }
        report
    }
}

#[derive(Debug, Serialize)]
struct FactorReport {
    n: String,
    mode: &'static str,
    pipelines: Vec<PipelineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factorization: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unfactored: Option<Vec<String>>,
}

fn factor_set(r: &FactorResult) -> BTreeSet<Natural> {
    [r.f1.clone(), r.f2.clone()].into()
}

/// `EQUAL` when both pipelines produced the same factor set. `None` when
/// both failed.
pub fn verdict(a: &PipelineRun, b: &PipelineRun) -> Option<&'static str> {
    match (&a.outcome, &b.outcome) {
        (Ok(x), Ok(y)) if factor_set(x) == factor_set(y) => Some("EQUAL"),
        (Err(_), Err(_)) => None,
        _ => Some("DIFFER"),
    }
}

/// Prime factors of `n` found by repeated classical splitting, plus the
/// composite parts that could not be split.
pub fn factor_completely(n: &Natural) -> (Vec<Natural>, Vec<Natural>) {
    let mut primes = Vec::new();
    let mut stuck = Vec::new();
    let mut pending = vec![n.clone()];
    while let Some(m) = pending.pop() {
        if m <= Natural::from(1u32) {
            continue;
        }
        if tiny_prime(&m).is_some() {
            primes.push(m);
            continue;
        }
        match factor(&m) {
            Ok(r) => {
                pending.push(r.f1);
                pending.push(r.f2);
            }
            Err(FactorError::Prime(p)) => primes.push(p),
            Err(_) => stuck.push(m),
        }
    }
    primes.sort();
    stuck.sort();
    (primes, stuck)
}

fn write_text(out: &mut dyn Write, runs: &[PipelineRun], timing: bool) -> io::Result<()> {
    for run in runs {
        let r = match &run.outcome {
            Ok(r) => r,
            Err(f) => {
                writeln!(out, "{}: failed ({})", run.pipeline, f.message)?;
                continue;
            }
        };
        writeln!(out, "{}: {} * {}", run.pipeline, r.f1, r.f2)?;
        match &r.witness {
            Some((x, y)) => writeln!(out, "  witness: x = {x}, y = {y}")?,
            None => writeln!(out, "  witness: none")?,
        }
        match &r.stats {
            Some(s) => {
                writeln!(
                    out,
                    "  params: B = {}, M = {}, factor base {} primes, {} relations",
                    s.params.smoothness_bound(),
                    s.params.interval_half_width(),
                    s.factor_base_size,
                    s.relations
                )?;
                writeln!(
                    out,
                    "  attempts: {} retries, {} dependencies tried",
                    s.retries, r.attempts
                )?;
            }
            None => writeln!(out, "  params: none (split without sieving)")?,
        }
        if timing {
            writeln!(out, "  time: {:.3} ms", millis(run.elapsed))?;
        }
    }
    Ok(())
}

pub fn run(args: &FactorArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Exit> {
    let cfg = match RunConfig::from_factor_args(args) {
        Ok(c) => c,
        Err(e) => return fail(err, Exit::Invalid, e),
    };
    cmd_factor(&cfg, out, err)
}

/// Factors `cfg.n` with the configured pipeline(s) and reports the result.
pub fn cmd_factor(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Exit> {
    if cfg.trace.is_some() && !cfg.mode.runs_quantum() {
        return fail(
            err,
            Exit::Invalid,
            "--trace needs --mode quantum-sim or both",
        );
    }
    let trace_file = match cfg.trace.as_deref().map(open_trace).transpose() {
        Ok(f) => f,
        Err(e) => return fail(err, Exit::Invalid, e),
    };

    let mut runs = Vec::new();
    if cfg.mode.runs_classical() {
        match run_classical(cfg) {
            Ok(r) => runs.push(r),
            Err(e) => return fail(err, Exit::Invalid, e),
        }
    }
    if cfg.mode.runs_quantum() {
        let cap = if trace_file.is_some() { 100_000 } else { 0 };
        match run_quantum(cfg, cap) {
            Ok((r, trace)) => {
                if let Some(file) = trace_file {
                    write_trace(file, &trace)?;
                }
                runs.push(r);
            }
            Err(e) => return fail(err, Exit::Invalid, e),
        }
    }

    let mut exit = Exit::Success;
    for run in &runs {
        if let Err(f) = &run.outcome {
            writeln!(err, "{}: {}", run.pipeline, f.message)?;
            exit = exit.max(f.exit);
        }
    }
    let verdict = match runs.as_slice() {
        [a, b] => verdict(a, b),
        _ => None,
    };
    if verdict == Some("DIFFER") {
        exit = exit.max(Exit::Failed);
    }
    let full = match (
        cfg.recurse,
        runs.iter().find_map(|r| r.outcome.as_ref().ok()),
    ) {
        (true, Some(_)) => Some(factor_completely(&cfg.n)),
        _ => None,
    };

    match cfg.format {
        Format::Json => {
            let to_strings = |v: &[Natural]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            let report = FactorReport {
                n: cfg.n.to_string(),
                mode: cfg.mode.as_str(),
                pipelines: runs
                    .iter()
                    .map(|r| PipelineReport::new(r, cfg.timing))
                    .collect(),
                verdict,
                factorization: full.as_ref().map(|(p, _)| to_strings(p)),
                unfactored: full
                    .as_ref()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(_, s)| to_strings(s)),
            };
            write_json(out, &report)?;
        }
        Format::Text => {
            writeln!(out, "n = {}", cfg.n)?;
            write_text(out, &runs, cfg.timing)?;
            if let Some(v) = verdict {
                writeln!(out, "verdict: {v}")?;
            }
            if let Some((primes, stuck)) = &full {
                let parts: Vec<String> = primes.iter().map(|p| p.to_string()).collect();
                writeln!(out, "factorization: {}", parts.join(" * "))?;
                if !stuck.is_empty() {
                    let parts: Vec<String> = stuck.iter().map(|p| p.to_string()).collect();
                    writeln!(out, "unfactored: {}", parts.join(" * "))?;
                }
            }
        }
    }
    Ok(exit)
}
