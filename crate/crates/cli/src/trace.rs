use std::io::{self, Write};

use qsieve::quantum::PipelineTrace;
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_natural, Format, Mode, RunConfig};
use crate::factor::{open_trace, run_quantum, write_trace};
use crate::{fail, format_of, write_json, Exit, TraceArgs};

#[derive(Debug, Serialize)]
struct StepLine {
    step: String,
    support: usize,
    norm: f64,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct AttemptLine {
    smoothness_bound: u64,
    interval_half_width: u64,
    steps: Vec<StepLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn summarize(trace: &PipelineTrace) -> Vec<AttemptLine> {
    trace
        .attempts
        .iter()
        .map(|a| AttemptLine {
            smoothness_bound: a.smoothness_bound,
            interval_half_width: a.interval_half_width,
            failure: a.failure.clone(),
            steps: a
                .steps
                .iter()
                .filter_map(|s| s.snapshot.as_ref())
                .map(|s| StepLine {
                    step: s.header.step.clone(),
                    support: s.header.support,
                    norm: s.header.norm,
                    truncated: s.header.truncated,
                    probability: s.header.probability,
                    note: s.header.note.clone(),
                })
                .collect(),
        })
        .collect()
}

pub fn run(args: &TraceArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Exit> {
    if args.mode != Mode::QuantumSim {
        return fail(err, Exit::Invalid, "trace needs --mode quantum-sim");
    }
    let n = match parse_natural(&args.n) {
        Ok(n) => n,
        Err(e) => return fail(err, Exit::Invalid, e),
    };
    let cfg = RunConfig {
        n,
        mode: Mode::QuantumSim,
        smoothness_bound: args.sieve.smoothness_bound,
        interval_half_width: args.sieve.interval_half_width,
        max_retries: args.sieve.max_retries,
        seed: args.seed,
        trace: Some(args.trace.clone()),
        format: format_of(args.json),
        timing: false,
        recurse: false,
    };
    cmd_trace(&cfg, args.max_terms, out, err)
}

/// Runs the simulated pipeline and writes its trace to `cfg.trace`. The
/// trace is written also when factoring fails.
pub fn cmd_trace(
    cfg: &RunConfig,
    max_terms: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<Exit> {
    let Some(path) = cfg.trace.as_deref() else {
        return fail(err, Exit::Invalid, "no trace path given");
    };
    let file = match open_trace(path) {
        Ok(f) => f,
        Err(e) => return fail(err, Exit::Invalid, e),
    };
    let (run, trace) = match run_quantum(cfg, max_terms) {
        Ok(r) => r,
        Err(e) => return fail(err, Exit::Invalid, e),
    };
    let records = write_trace(file, &trace)?;
    let exit = match &run.outcome {
        Ok(_) => Exit::Success,
        Err(f) => {
            writeln!(err, "{}: {}", run.pipeline, f.message)?;
            f.exit
        }
    };
    let attempts = summarize(&trace);
    match cfg.format {
        Format::Json => {
            let result = match &run.outcome {
                Ok(r) => json!({"f1": r.f1.to_string(), "f2": r.f2.to_string()}),
                Err(f) => json!({"error": f.message}),
            };
            write_json(
                out,
                &json!({
                    "n": cfg.n.to_string(),
                    "trace": path.display().to_string(),
                    "records": records,
                    "attempts": attempts,
                    "result": result,
                }),
            )?;
        }
        Format::Text => {
            for (i, a) in attempts.iter().enumerate() {
                write!(
                    out,
                    "attempt {i}: B = {}, M = {}",
                    a.smoothness_bound, a.interval_half_width
                )?;
                match &a.failure {
                    Some(f) => writeln!(out, " ({f})")?,
                    None => writeln!(out)?,
                }
                for s in &a.steps {
                    write!(
                        out,
                        "  step {:<4} support {:<8} norm {:.12}",
                        s.step, s.support, s.norm
                    )?;
                    if let Some(p) = s.probability {
                        write!(out, "  p = {p}")?;
                    }
                    if s.truncated {
                        write!(out, "  (truncated)")?;
                    }
                    writeln!(out)?;
                }
            }
            if let Ok(r) = &run.outcome {
                writeln!(out, "result: {} = {} * {}", cfg.n, r.f1, r.f2)?;
            }
            writeln!(out, "wrote {records} records to {}", path.display())?;
        }
    }
    Ok(exit)
}
