use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::steps::{
    step1_legendre_oracle, step1_measure, step1_registers, step2_divide, step2_evaluate,
    step2_measure, step2_prepare_interval, step2_tensor, step3_classical_postprocess, Observation,
};
use super::trace::{AttemptTrace, PipelineTrace, StepLabel};
use super::QuantumError;
use crate::classical::{
    resolve_params, short_circuit, sieve_interval, with_escalation, AttemptError, FactorResult,
    SieveError, SieveParams, SieveStats,
};
use crate::numtheory::Natural;
use crate::qsim::Snapshot;

/// How Steps 1.3 and 2.5 are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measurement {
    #[default]
    PostSelect,
    /// Born-rule sampling from a generator seeded with `seed`, repeating the
    /// step until outcome 1 is drawn.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Terms kept per trace snapshot.
    pub snapshot_cap: usize,
    pub measurement: Measurement,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            snapshot_cap: 100_000,
            measurement: Measurement::PostSelect,
        }
    }
}

/// Factors `n` through the simulated pipeline with default options.
pub fn run_pipeline(
    n: &Natural,
    params: Option<SieveParams>,
) -> Result<(FactorResult, PipelineTrace), QuantumError> {
    run_pipeline_with(n, params, &PipelineOptions::default())
}

/// Like [`run_pipeline_traced`], discarding the trace on failure.
pub fn run_pipeline_with(
    n: &Natural,
    params: Option<SieveParams>,
    options: &PipelineOptions,
) -> Result<(FactorResult, PipelineTrace), QuantumError> {
    let (result, trace) = run_pipeline_traced(n, params, options);
    result.map(|r| (r, trace))
}

/// Factors `n` through the simulated pipeline and returns the trace of every
/// attempt, also when the run fails. Degenerate inputs are answered
/// classically with an empty trace; failed attempts escalate the parameters
/// exactly as the classical sieve does.
pub fn run_pipeline_traced(
    n: &Natural,
    params: Option<SieveParams>,
    options: &PipelineOptions,
) -> (Result<FactorResult, QuantumError>, PipelineTrace) {
    let mut trace = PipelineTrace::default();
    if let Some(done) = short_circuit(n) {
        return (done.map_err(Into::into), trace);
    }
    let params = match resolve_params(n, params) {
        Ok(p) => p,
        Err(e) => return (Err(e.into()), trace),
    };
    let mut observation = match options.measurement {
        Measurement::PostSelect => Observation::PostSelect,
        Measurement::Sampled { seed } => {
            Observation::Sampled(Box::new(ChaCha8Rng::seed_from_u64(seed)))
        }
    };
    let outcome = with_escalation(params, |p| {
        let mut record = AttemptTrace::new(p.smoothness_bound(), p.interval_half_width());
        let result = attempt(p, options.snapshot_cap, &mut observation, &mut record);
        if let Err(e) = &result {
            record.failure = Some(match e {
                AttemptError::Sieve(e, _) => e.to_string(),
                AttemptError::Other(e) => e.to_string(),
            });
        }
        trace.attempts.push(record);
        result
    });
    let result = outcome.map(|(mut result, _, retries)| {
        if let Some(stats) = result.stats.as_mut() {
            stats.retries = retries;
        }
        result
    });
    (result, trace)
}

fn sieve_failure(e: SieveError, found: usize) -> AttemptError<QuantumError> {
    AttemptError::Sieve(e, found)
}

fn attempt(
    params: &SieveParams,
    cap: usize,
    observation: &mut Observation,
    trace: &mut AttemptTrace,
) -> Result<FactorResult, AttemptError<QuantumError>> {
    let other = |e: QuantumError| match e {
        QuantumError::Sieve(s) => AttemptError::Sieve(s, 0),
        e => AttemptError::Other(e),
    };
    let n = params.n();
    let bound = params.smoothness_bound();

    let (state, primes) = step1_registers(bound).map_err(other)?;
    trace.push_state(
        StepLabel::Setup,
        Snapshot::capture("1", &state, cap).with_note(format!("B = {bound}")),
        None,
    );
    let state = state
        .load_uniform(super::R1, &primes)
        .map_err(|e| other(e.into()))?;
    trace.push_state(
        StepLabel::PrimeSuperposition,
        Snapshot::capture("1.1", &state, cap),
        None,
    );
    let state = step1_legendre_oracle(state, n).map_err(other)?;
    trace.push_state(
        StepLabel::LegendreOracle,
        Snapshot::capture("1.2", &state, cap),
        None,
    );
    let (primes_state, fb, m) = step1_measure(state, n, bound, observation).map_err(other)?;
    trace.push_state(
        StepLabel::LegendreMeasure,
        Snapshot::capture("1.3", &primes_state, cap)
            .with_probability(m.record.probability)
            .with_note(format!(
                "factor base {:?}; outcome 1 after {} run(s)",
                fb.primes(),
                m.draws
            )),
        Some(m),
    );

    let (a, b) = sieve_interval(params);
    let (seq, prep) = step2_prepare_interval(n, &a, &b, fb.len()).map_err(other)?;
    trace.push_state(
        StepLabel::SequencePrepare,
        Snapshot::capture("2", &seq, cap).with_note(format!(
            "R3 uniform over [{}, {}] from a {}-qubit QFT, window acceptance {:.12}",
            prep.a, prep.b, prep.qft_width, prep.acceptance
        )),
        None,
    );
    let seq = step2_evaluate(seq, n).map_err(other)?;
    trace.push_state(
        StepLabel::SequenceEvaluate,
        Snapshot::capture("2.1", &seq, cap),
        None,
    );
    let joint = step2_tensor(primes_state, seq).map_err(other)?;
    trace.push_state(
        StepLabel::Tensor,
        Snapshot::capture("2.3", &joint, cap).with_note("step 2.3-qft: skipped (under-specified)"),
        None,
    );
    let (joint, passes) = step2_divide(joint, &fb).map_err(other)?;
    trace.push_state(
        StepLabel::Divide,
        Snapshot::capture("2.4", &joint, cap).with_note(format!("{passes} division passes")),
        None,
    );
    let needed = fb.len() + 1;
    let (joint, smooth, m) = match step2_measure(joint, &fb, observation) {
        Err(QuantumError::NoSmoothValues { .. }) => {
            return Err(sieve_failure(
                SieveError::InsufficientRelations { found: 0, needed },
                0,
            ));
        }
        other_result => other_result.map_err(other)?,
    };
    trace.push_state(
        StepLabel::SmoothMeasure,
        Snapshot::capture("2.5", &joint, cap)
            .with_probability(m.record.probability)
            .with_note(format!(
                "{} smooth values; outcome 1 after {} run(s)",
                smooth.len(),
                m.draws
            )),
        Some(m),
    );
    if smooth.len() < needed {
        return Err(sieve_failure(
            SieveError::InsufficientRelations {
                found: smooth.len(),
                needed,
            },
            smooth.len(),
        ));
    }

    let limit = needed + params.extra_relations();
    let used = smooth.len().min(limit);
    let mut result = step3_classical_postprocess(&smooth, &fb, n, Some(limit))
        .map_err(|e| sieve_failure(e, used))?;
    result.stats = Some(SieveStats {
        params: params.clone(),
        factor_base_size: fb.len(),
        relations: used,
        retries: 0,
    });
    let witness = result
        .witness
        .as_ref()
        .map(|(x, y)| json!({"x": x.to_string(), "y": y.to_string()}));
    trace.push_artifact(
        StepLabel::Classical,
        json!({
            "f1": result.f1.to_string(),
            "f2": result.f2.to_string(),
            "witness": witness,
            "relations_used": used,
            "smooth_values": smooth.len(),
            "dependencies_tried": result.attempts,
        }),
    );
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{factor, FactorError};

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn worked_example() {
        let (r, trace) = run_pipeline(&nat(15347), None).unwrap();
        assert_eq!((r.f1.clone(), r.f2.clone()), (nat(103), nat(149)));
        assert_eq!(trace.labels(), StepLabel::ALL.to_vec());
        assert_eq!(trace.retries(), 1);
        let first = &trace.attempts[0];
        assert_eq!(first.smoothness_bound, 30);
        assert_eq!(
            first
                .step(StepLabel::PrimeSuperposition)
                .unwrap()
                .snapshot
                .as_ref()
                .unwrap()
                .terms
                .len(),
            10
        );
        let m = first
            .step(StepLabel::LegendreMeasure)
            .unwrap()
            .snapshot
            .as_ref()
            .unwrap();
        assert_eq!(m.header.probability, Some(0.3));
        assert_eq!(first.labels().last(), Some(&StepLabel::SmoothMeasure));
        assert!(first
            .failure
            .as_deref()
            .unwrap()
            .contains("insufficient relations"));
        assert_eq!(r, factor(&nat(15347)).unwrap());
        for step in trace.attempts.iter().flat_map(|a| &a.steps) {
            if let Some(s) = &step.snapshot {
                assert!((s.header.norm - 1.0).abs() < 1e-9, "step {}", step.label);
            }
        }
        let tensor = trace
            .step(StepLabel::Tensor)
            .unwrap()
            .snapshot
            .as_ref()
            .unwrap();
        assert_eq!(
            tensor.header.note.as_deref(),
            Some("step 2.3-qft: skipped (under-specified)")
        );
    }

    #[test]
    fn first_attempt_trace_probability() {
        let p = SieveParams::new(nat(15347), 30, 143)
            .unwrap()
            .with_max_retries(0);
        let (result, trace) =
            run_pipeline_traced(&nat(15347), Some(p), &PipelineOptions::default());
        assert_eq!(trace.attempts.len(), 1);
        match result.unwrap_err() {
            QuantumError::Factor(FactorError::Failed { attempts }) => {
                assert_eq!(attempts[0].relations_found, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_inputs_short_circuit() {
        let (r, trace) = run_pipeline(&nat(1000), None).unwrap();
        assert_eq!((r.f1, r.f2), (nat(2), nat(500)));
        assert!(trace.attempts.is_empty());
        assert!(matches!(
            run_pipeline(&nat(13), None),
            Err(QuantumError::Factor(FactorError::Prime(_)))
        ));
    }

    #[test]
    fn sampled_mode_reaches_the_same_factors() {
        let opts = PipelineOptions {
            snapshot_cap: 0,
            measurement: Measurement::Sampled { seed: 11 },
        };
        let (r, trace) = run_pipeline_with(&nat(15347), None, &opts).unwrap();
        assert_eq!((r.f1, r.f2), (nat(103), nat(149)));
        let m = trace
            .step(StepLabel::LegendreMeasure)
            .unwrap()
            .measurement
            .as_ref()
            .unwrap();
        assert_eq!(m.record.mode, crate::qsim::MeasureKind::Sampled);
        let last = trace.last_attempt().unwrap();
        assert!(last
            .steps
            .iter()
            .filter_map(|s| s.snapshot.as_ref())
            .all(|s| s.terms.is_empty()));
    }

    #[test]
    fn agrees_with_classical_on_small_semiprimes() {
        for (p, q) in [(1009u64, 1013u64), (2003, 3001), (4999, 7919)] {
            let n = nat(p * q);
            let (r, _) = run_pipeline_with(
                &n,
                None,
                &PipelineOptions {
                    snapshot_cap: 0,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(r, factor(&n).unwrap(), "n = {n}");
        }
    }
}
