use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::qsim::{Snapshot, SnapshotHeader, TermRecord};

use super::steps::StepMeasurement;

/// Pipeline step labels, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StepLabel {
    Setup,
    PrimeSuperposition,
    LegendreOracle,
    LegendreMeasure,
    SequencePrepare,
    SequenceEvaluate,
    Tensor,
    Divide,
    SmoothMeasure,
    Classical,
}

impl StepLabel {
    pub const ALL: [StepLabel; 10] = [
        StepLabel::Setup,
        StepLabel::PrimeSuperposition,
        StepLabel::LegendreOracle,
        StepLabel::LegendreMeasure,
        StepLabel::SequencePrepare,
        StepLabel::SequenceEvaluate,
        StepLabel::Tensor,
        StepLabel::Divide,
        StepLabel::SmoothMeasure,
        StepLabel::Classical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StepLabel::Setup => "1",
            StepLabel::PrimeSuperposition => "1.1",
            StepLabel::LegendreOracle => "1.2",
            StepLabel::LegendreMeasure => "1.3",
            StepLabel::SequencePrepare => "2",
            StepLabel::SequenceEvaluate => "2.1",
            StepLabel::Tensor => "2.3",
            StepLabel::Divide => "2.4",
            StepLabel::SmoothMeasure => "2.5",
            StepLabel::Classical => "3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step of an attempt: a state snapshot, or for Step 3 a classical
/// result summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub label: StepLabel,
    pub snapshot: Option<Snapshot>,
    pub measurement: Option<StepMeasurement>,
    pub artifact: Option<serde_json::Value>,
}

/// The steps run under one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptTrace {
    pub smoothness_bound: u64,
    pub interval_half_width: u64,
    pub steps: Vec<TraceStep>,
    /// Why the attempt stopped, `None` if it produced the factors.
    pub failure: Option<String>,
}

impl AttemptTrace {
    pub(super) fn new(smoothness_bound: u64, interval_half_width: u64) -> Self {
        Self {
            smoothness_bound,
            interval_half_width,
            steps: Vec::new(),
            failure: None,
        }
    }

    pub fn labels(&self) -> Vec<StepLabel> {
        self.steps.iter().map(|s| s.label).collect()
    }

    pub fn step(&self, label: StepLabel) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.label == label)
    }

    pub(super) fn push_state(
        &mut self,
        label: StepLabel,
        snapshot: Snapshot,
        measurement: Option<StepMeasurement>,
    ) {
        self.steps.push(TraceStep {
            label,
            snapshot: Some(snapshot),
            measurement,
            artifact: None,
        });
    }

    pub(super) fn push_artifact(&mut self, label: StepLabel, artifact: serde_json::Value) {
        self.steps.push(TraceStep {
            label,
            snapshot: None,
            measurement: None,
            artifact: Some(artifact),
        });
    }
}

/// Every attempt of a pipeline run, escalations included.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineTrace {
    pub attempts: Vec<AttemptTrace>,
}

impl PipelineTrace {
    /// The last attempt (the successful one when the run succeeded).
    pub fn last_attempt(&self) -> Option<&AttemptTrace> {
        self.attempts.last()
    }

    /// Labels of the last attempt.
    pub fn labels(&self) -> Vec<StepLabel> {
        self.last_attempt()
            .map(AttemptTrace::labels)
            .unwrap_or_default()
    }

    /// A step of the last attempt.
    pub fn step(&self, label: StepLabel) -> Option<&TraceStep> {
        self.last_attempt().and_then(|a| a.step(label))
    }

    /// Parameter escalations before the last attempt.
    pub fn retries(&self) -> usize {
        self.attempts.len().saturating_sub(1)
    }

    /// JSON-lines: per attempt an `attempt` record, then per step a header
    /// and its term records, or an `artifact` record for Step 3.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let line = |out: &mut W, rec: &TraceRecord| -> io::Result<()> {
            serde_json::to_writer(&mut *out, rec)?;
            out.write_all(b"\n")
        };
        for (i, attempt) in self.attempts.iter().enumerate() {
            line(
                out,
                &TraceRecord::Attempt(AttemptRecord {
                    attempt: i,
                    smoothness_bound: attempt.smoothness_bound,
                    interval_half_width: attempt.interval_half_width,
                    failure: attempt.failure.clone(),
                }),
            )?;
            for step in &attempt.steps {
                if let Some(snap) = &step.snapshot {
                    snap.write_jsonl(out)?;
                }
                if let Some(data) = &step.artifact {
                    line(
                        out,
                        &TraceRecord::Artifact(ArtifactRecord {
                            step: step.label.to_string(),
                            data: data.clone(),
                        }),
                    )?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub smoothness_bound: u64,
    pub interval_half_width: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Data attached to a step without a quantum state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub step: String,
    pub data: serde_json::Value,
}

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum TraceRecord {
    Attempt(AttemptRecord),
    Header(SnapshotHeader),
    Term(TermRecord),
    Artifact(ArtifactRecord),
}

/// Parses a JSON-lines trace; blank lines are skipped.
pub fn read_trace<R: BufRead>(input: R) -> io::Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", no + 1))
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// What [`validate_trace`] checked for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub attempt: usize,
    pub step: String,
    pub support: usize,
    pub terms: usize,
    pub truncated: bool,
    /// `Σ |a|^2` over the written terms.
    pub weight: f64,
}

/// Re-reads a trace and checks it: attempts numbered consecutively, known
/// step labels strictly increasing inside each attempt, every term under a
/// header of its own step, and for complete snapshots a term count equal to
/// the support with unit total weight within `tol`. Truncated snapshots
/// must not exceed unit weight.
pub fn validate_trace(records: &[TraceRecord], tol: f64) -> Result<Vec<StepSummary>, String> {
    let mut summaries: Vec<StepSummary> = Vec::new();
    let mut attempt = 0usize;
    let mut started = false;
    let mut last: Option<StepLabel> = None;
    let advance = |step: &str, last: &mut Option<StepLabel>| -> Result<(), String> {
        let label = StepLabel::parse(step).ok_or_else(|| format!("unknown step label {step:?}"))?;
        if last.is_some_and(|l| l >= label) {
            return Err(format!("step {step} out of order"));
        }
        *last = Some(label);
        Ok(())
    };
    for rec in records {
        match rec {
            TraceRecord::Attempt(a) => {
                let expected = if started { attempt + 1 } else { 0 };
                if a.attempt != expected {
                    return Err(format!(
                        "attempt {} where {expected} was expected",
                        a.attempt
                    ));
                }
                attempt = a.attempt;
                started = true;
                last = None;
            }
            TraceRecord::Header(h) => {
                advance(&h.step, &mut last)?;
                if (h.norm - 1.0).abs() > tol {
                    return Err(format!("step {}: header norm {} is not 1", h.step, h.norm));
                }
                summaries.push(StepSummary {
                    attempt,
                    step: h.step.clone(),
                    support: h.support,
                    terms: 0,
                    truncated: h.truncated,
                    weight: 0.0,
                });
            }
            TraceRecord::Term(t) => {
                let cur = summaries
                    .last_mut()
                    .filter(|s| {
                        s.step == t.step
                            && s.attempt == attempt
                            && last.map(|l| l.as_str()) == Some(&*t.step)
                    })
                    .ok_or_else(|| format!("term for step {} without a header", t.step))?;
                if t.values.len() != t.registers.len() {
                    return Err(format!(
                        "step {}: {} values for {} registers",
                        t.step,
                        t.values.len(),
                        t.registers.len()
                    ));
                }
                cur.terms += 1;
                cur.weight += t.amp_re * t.amp_re + t.amp_im * t.amp_im;
            }
            TraceRecord::Artifact(a) => advance(&a.step, &mut last)?,
        }
    }
    for s in &summaries {
        if s.truncated {
            if s.terms > s.support || s.weight > 1.0 + tol {
                return Err(format!("step {}: truncated snapshot inconsistent", s.step));
            }
        } else if s.terms != s.support {
            return Err(format!(
                "step {}: {} terms for support {}",
                s.step, s.terms, s.support
            ));
        } else if (s.weight - 1.0).abs() > tol {
            return Err(format!(
                "step {}: total weight {} is not 1",
                s.step, s.weight
            ));
        }
    }
    Ok(summaries)
}
