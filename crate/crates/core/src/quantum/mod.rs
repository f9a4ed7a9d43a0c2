//! The quantized quadratic sieve, run step by step on the [`qsim`](crate::qsim)
//! simulator.
//!
//! | label | registers touched | effect |
//! |-------|-------------------|--------|
//! | 1     | R1, R2            | allocate, all zero |
//! | 1.1   | R1                | uniform superposition of primes `<= B` |
//! | 1.2   | R1 → R2           | Euler criterion `n^((p-1)/2) mod p` |
//! | 1.3   | R2                | measure `R2 = 1`; R1 now spans the factor base |
//! | 2     | R3, R4, R5        | R3 uniform over the sieve interval |
//! | 2.1   | R3 → R4           | `R4 = x^2 - n` |
//! | 2.3   | all               | tensor product of both halves |
//! | 2.4   | R4, R5            | divide out each base prime, counting exponents in R5 |
//! | 2.5   | R4, R5            | measure `R4 = 1`, reduce R5 mod 2 |
//! | 3     | classical         | GF(2) dependency and gcd |
//!
//! The prime half (R1, R2) never interacts with the interval half after
//! Step 1.3, so the tensor product is kept factored.

mod pipeline;
mod steps;
mod trace;

use thiserror::Error;

use crate::classical::{FactorError, SieveError};
use crate::qsim::SimError;

pub use pipeline::{
    run_pipeline, run_pipeline_traced, run_pipeline_with, Measurement, PipelineOptions,
};
pub use steps::{
    step1_legendre_and_measure, step1_legendre_oracle, step1_measure, step1_prime_superposition,
    step1_registers, step2_divide, step2_divide_and_measure, step2_evaluate, step2_measure,
    step2_prepare_interval, step2_sequence_superposition, step2_tensor,
    step3_classical_postprocess, IntervalPrep, Observation, SmoothEntry, SmoothSet,
    StepMeasurement, R1, R2, R3, R4, R5,
};
pub use trace::{
    read_trace, validate_trace, ArtifactRecord, AttemptRecord, AttemptTrace, PipelineTrace,
    StepLabel, StepSummary, TraceRecord, TraceStep,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("no primes up to {bound}")]
    NoPrimes { bound: u64 },
    #[error("no smooth values in interval [{a}, {b}]")]
    NoSmoothValues { a: u64, b: u64 },
    #[error("interval end {b} is too large to simulate (x^2 - n must fit 64 bits)")]
    IntervalTooLarge { b: String },
    #[error("outcome 1 of register {register} not observed in {draws} draws")]
    NotObserved { register: String, draws: usize },
}
