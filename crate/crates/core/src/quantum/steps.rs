use std::cell::Cell;

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::QuantumError;
use crate::classical::{factor_from_relations, FactorBase, FactorResult, Relation, SieveError};
use crate::numtheory::{mod_pow_u64, sieve_of_eratosthenes, Natural};
use crate::qsim::{
    Combine, MeasureKind, MeasureMode, MeasurementRecord, ProductState, QuantumState, RegisterSpec,
    SimError, Value,
};

/// Prime register.
pub const R1: &str = "R1";
/// Legendre-symbol register.
pub const R2: &str = "R2";
/// Sequence register `x`.
pub const R3: &str = "R3";
/// Value register `x^2 - n`.
pub const R4: &str = "R4";
/// Exponent tuple, one slot per factor-base prime.
pub const R5: &str = "R5";

const SCRATCH: &str = "S";
const FLAG: &str = "F";
const EXPONENT_WIDTH: u32 = 7;
const MAX_DRAWS: usize = 1 << 20;

/// How the measurements at Steps 1.3 and 2.5 obtain outcome 1.
#[derive(Debug, Clone)]
pub enum Observation {
    /// Project onto the outcome directly.
    PostSelect,
    /// Repeat the experiment, drawing Born-rule outcomes, until 1 comes up.
    Sampled(Box<ChaCha8Rng>),
}

/// A measurement and how many runs it took.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasurement {
    pub record: MeasurementRecord,
    pub draws: usize,
}

/// One smooth `x` with its exponent vector over the factor base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothEntry {
    pub x: Natural,
    /// Exponents mod 2 as read from R5 after the final map.
    pub parity: Vec<u8>,
    pub exponents: Vec<u32>,
}

/// The smooth values surviving Step 2.5, ascending in `x`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SmoothSet {
    pub entries: Vec<SmoothEntry>,
}

impl SmoothSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn xs(&self) -> Vec<Natural> {
        self.entries.iter().map(|e| e.x.clone()).collect()
    }

    /// Classical relations `(x, x^2 - n, exponents)`.
    pub fn relations(&self, n: &Natural) -> Vec<Relation> {
        self.entries
            .iter()
            .map(|e| Relation {
                x: e.x.clone(),
                value: &e.x * &e.x - n,
                exponents: e.exponents.clone(),
            })
            .collect()
    }
}

/// How Step 2 produced the uniform interval state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPrep {
    pub a: u64,
    pub b: u64,
    /// Width of the scratch register transformed by the QFT.
    pub qft_width: u32,
    /// Probability that the transformed scratch value fell inside the interval.
    pub acceptance: f64,
}

fn observe(
    state: ProductState,
    id: &str,
    observation: &mut Observation,
) -> Result<(ProductState, StepMeasurement), QuantumError> {
    match observation {
        Observation::PostSelect => {
            let (s, record) = state.partial_measure(id, MeasureMode::PostSelect(1))?;
            Ok((s, StepMeasurement { record, draws: 1 }))
        }
        Observation::Sampled(rng) => {
            let probs = state.probabilities(id)?;
            let target = probs.get(&vec![1]).copied().unwrap_or(0.0);
            if target <= crate::qsim::MIN_POST_SELECT_PROBABILITY {
                return Err(SimError::ImpossibleOutcome {
                    register: id.to_string(),
                    value: vec![1],
                }
                .into());
            }
            let total: f64 = probs.values().sum();
            for draws in 1..=MAX_DRAWS {
                let r = rng.gen::<f64>() * total;
                let mut acc = 0.0;
                let mut outcome = probs.keys().next_back().expect("nonempty");
                for (value, p) in &probs {
                    acc += p;
                    if r < acc {
                        outcome = value;
                        break;
                    }
                }
                if outcome == &vec![1] {
                    let (s, mut record) = state.partial_measure(id, MeasureMode::PostSelect(1))?;
                    record.mode = MeasureKind::Sampled;
                    return Ok((s, StepMeasurement { record, draws }));
                }
            }
            Err(QuantumError::NotObserved {
                register: id.to_string(),
                draws: MAX_DRAWS,
            })
        }
    }
}

/// Step 1: R1 over the primes `<= bound` (plus the idle value 0) and R2, both zero.
pub fn step1_registers(bound: u64) -> Result<(QuantumState, Vec<u64>), QuantumError> {
    let primes = sieve_of_eratosthenes(bound);
    if primes.is_empty() {
        return Err(QuantumError::NoPrimes { bound });
    }
    let state = QuantumState::init(vec![
        RegisterSpec::values(R1, primes.iter().copied()),
        RegisterSpec::qubits(R2, RegisterSpec::width_for(bound)),
    ])?;
    Ok((state, primes))
}

/// Step 1.1: `π(B)^(-1/2) Σ_p |p⟩|0⟩`.
pub fn step1_prime_superposition(bound: u64) -> Result<QuantumState, QuantumError> {
    let (state, primes) = step1_registers(bound)?;
    Ok(state.load_uniform(R1, &primes)?)
}

/// Step 1.2: `|p⟩|0⟩ ↦ |p⟩|n^((p-1)/2) mod p⟩`. The exponent is zero for
/// `p = 2`, where R2 receives 0; 2 joins the factor base unconditionally.
pub fn step1_legendre_oracle(
    state: QuantumState,
    n: &Natural,
) -> Result<QuantumState, QuantumError> {
    Ok(state.apply_oracle(&[R1], R2, Combine::Overwrite, |r, out| {
        let p = r[0];
        out[0] = if p == 2 {
            0
        } else {
            let residue = (n % p).to_u64().expect("residue below p");
            mod_pow_u64(residue, (p - 1) / 2, p)
        };
    })?)
}

/// Step 1.3: measure R2 = 1 and read the factor base off R1.
pub fn step1_measure(
    state: QuantumState,
    n: &Natural,
    bound: u64,
    observation: &mut Observation,
) -> Result<(QuantumState, FactorBase, StepMeasurement), QuantumError> {
    let (state, m) = match observe(ProductState::from(state), R2, observation) {
        Err(QuantumError::Sim(SimError::ImpossibleOutcome { .. })) => {
            return Err(SieveError::EmptyFactorBase { bound }.into());
        }
        other => other?,
    };
    let state = state.expand()?;
    let mut primes = vec![2];
    primes.extend(state.probabilities(R1)?.keys().map(|v| v[0]));
    let fb = FactorBase::from_primes(n, bound, primes)?;
    Ok((state, fb, m))
}

/// Steps 1.2 and 1.3 together.
pub fn step1_legendre_and_measure(
    state: QuantumState,
    n: &Natural,
    bound: u64,
) -> Result<(QuantumState, FactorBase, StepMeasurement), QuantumError> {
    let state = step1_legendre_oracle(state, n)?;
    step1_measure(state, n, bound, &mut Observation::PostSelect)
}

fn interval_words(n: &Natural, a: &Natural, b: &Natural) -> Result<(u64, u64, u64), QuantumError> {
    let too_large = || QuantumError::IntervalTooLarge { b: b.to_string() };
    let bw = b.to_u64().filter(|&b| b < 1 << 32).ok_or_else(too_large)?;
    let aw = a.to_u64().ok_or_else(too_large)?;
    let nw = n.to_u64().ok_or_else(too_large)?;
    if aw > bw || aw.checked_mul(aw).is_none_or(|sq| sq <= nw) {
        return Err(SieveError::InvalidParams(format!(
            "interval [{a}, {b}] must start above sqrt(n)"
        ))
        .into());
    }
    Ok((nw, aw, bw))
}

/// Step 2: R3 uniform over `[a, b]`, R4 and R5 zero.
///
/// A QFT on a zeroed scratch register of `w = ceil(log2(b - a + 1))` qubits
/// gives the uniform superposition over `0..2^w`; a flag marking values
/// inside the interval is measured, the survivor is shifted into R3, and the
/// scratch is uncomputed and dropped.
pub fn step2_prepare_interval(
    n: &Natural,
    a: &Natural,
    b: &Natural,
    fb_len: usize,
) -> Result<(QuantumState, IntervalPrep), QuantumError> {
    let (nw, a, b) = interval_words(n, a, b)?;
    let size = b - a + 1;
    let w = RegisterSpec::width_for(size - 1);
    let state = QuantumState::init(vec![
        RegisterSpec::qubits(R3, RegisterSpec::width_for(b)),
        RegisterSpec::qubits(R4, RegisterSpec::width_for(b * b - nw)),
        RegisterSpec::tuple(R5, fb_len, EXPONENT_WIDTH),
        RegisterSpec::qubits(SCRATCH, w),
        RegisterSpec::qubits(FLAG, 1),
    ])?;
    let state = state.qft(SCRATCH)?;
    let state = state.apply_oracle(&[SCRATCH], FLAG, Combine::Overwrite, |s, f| {
        f[0] = (s[0] < size) as Value
    })?;
    let (state, rec) = state.partial_measure(FLAG, MeasureMode::PostSelect(1))?;
    let state = state
        .apply_oracle(&[SCRATCH], R3, Combine::Xor, |s, x| x[0] = a + s[0])?
        .apply_oracle(&[R3], SCRATCH, Combine::Xor, |x, s| s[0] = x[0] - a)?
        .discard_register(SCRATCH)?
        .discard_register(FLAG)?;
    Ok((
        state,
        IntervalPrep {
            a,
            b,
            qft_width: w,
            acceptance: rec.probability,
        },
    ))
}

/// Step 2.1: `|x⟩|0⟩ ↦ |x⟩|x^2 - n⟩`.
pub fn step2_evaluate(state: QuantumState, n: &Natural) -> Result<QuantumState, QuantumError> {
    let nw = n
        .to_u64()
        .ok_or_else(|| QuantumError::IntervalTooLarge { b: n.to_string() })?;
    Ok(state.apply_oracle(&[R3], R4, Combine::Overwrite, |x, v| {
        v[0] = x[0] * x[0] - nw
    })?)
}

/// Steps 2 and 2.1 together.
pub fn step2_sequence_superposition(
    n: &Natural,
    a: &Natural,
    b: &Natural,
    fb_len: usize,
) -> Result<QuantumState, QuantumError> {
    let (state, _) = step2_prepare_interval(n, a, b, fb_len)?;
    step2_evaluate(state, n)
}

/// Step 2.3: `|ψ₂⟩ ⊗ |ψ₃⟩`, kept factored.
pub fn step2_tensor(
    primes: QuantumState,
    sequence: QuantumState,
) -> Result<ProductState, QuantumError> {
    Ok(ProductState::from(primes).tensor(sequence)?)
}

/// Step 2.4: for each base prime `p_i`, repeatedly apply
/// `|v⟩|e⟩ ↦ |v/p_i⟩|e + δ_i⟩` to every term with `p_i | v` until none is
/// left. Returns the state and the number of oracle passes.
pub fn step2_divide(
    state: ProductState,
    fb: &FactorBase,
) -> Result<(ProductState, usize), QuantumError> {
    let mut state = state;
    let mut passes = 0;
    for (i, &p) in fb.primes().iter().enumerate() {
        loop {
            let divided = Cell::new(0usize);
            state = state.map_registers(&[R4, R5], |input, out| {
                let v = input[0];
                if v != 0 && v % p == 0 {
                    out[0] = v / p;
                    out[1 + i] += 1;
                    divided.set(divided.get() + 1);
                }
            })?;
            passes += 1;
            if divided.get() == 0 {
                break;
            }
        }
    }
    Ok((state, passes))
}

/// Step 2.5: measure R4 = 1, read the surviving `(x, exponents)`, and reduce
/// R5 modulo 2.
pub fn step2_measure(
    state: ProductState,
    fb: &FactorBase,
    observation: &mut Observation,
) -> Result<(ProductState, SmoothSet, StepMeasurement), QuantumError> {
    if state.factor_with(R5)?.register(R5)?.slots != fb.len() {
        return Err(SieveError::InconsistentFactorBase.into());
    }
    let (a, b) = {
        let seq = state.factor_with(R3)?;
        let xs = seq.probabilities(R3)?;
        (
            xs.keys().next().map_or(0, |v| v[0]),
            xs.keys().next_back().map_or(0, |v| v[0]),
        )
    };
    let (state, m) = match observe(state, R4, observation) {
        Err(QuantumError::Sim(SimError::ImpossibleOutcome { .. })) => {
            return Err(QuantumError::NoSmoothValues { a, b });
        }
        other => other?,
    };
    let full = read_exponents(state.factor_with(R3)?)?;
    let state = state.map_registers(&[R5], |e, out| {
        for (o, v) in out.iter_mut().zip(e) {
            *o = v % 2;
        }
    })?;
    let parity = read_exponents(state.factor_with(R3)?)?;
    let entries = full
        .into_iter()
        .zip(parity)
        .map(|((x, exps), (px, bits))| {
            debug_assert_eq!(x, px);
            SmoothEntry {
                x: Natural::from(x),
                parity: bits.iter().map(|&b| b as u8).collect(),
                exponents: exps.iter().map(|&e| e as u32).collect(),
            }
        })
        .collect();
    Ok((state, SmoothSet { entries }, m))
}

fn read_exponents(seq: &QuantumState) -> Result<Vec<(u64, Vec<u64>)>, QuantumError> {
    let r3 = seq.index_of(R3)?;
    let r5 = seq.index_of(R5)?;
    let mut out: Vec<(u64, Vec<u64>)> = (0..seq.support())
        .map(|i| (seq.value_of(i, r3)[0], seq.value_of(i, r5).to_vec()))
        .collect();
    out.sort_unstable_by_key(|(x, _)| *x);
    Ok(out)
}

/// Steps 2.3 to 2.5 together, with post-selection.
pub fn step2_divide_and_measure(
    sequence: QuantumState,
    primes: QuantumState,
    fb: &FactorBase,
) -> Result<(ProductState, SmoothSet, StepMeasurement), QuantumError> {
    let state = step2_tensor(primes, sequence)?;
    let (state, _) = step2_divide(state, fb)?;
    step2_measure(state, fb, &mut Observation::PostSelect)
}

/// Step 3: GF(2) dependencies and gcd over the first `limit` smooth values
/// (all of them when `None`).
pub fn step3_classical_postprocess(
    smooth: &SmoothSet,
    fb: &FactorBase,
    n: &Natural,
    limit: Option<usize>,
) -> Result<FactorResult, SieveError> {
    if smooth.len() < 2 {
        return Err(SieveError::InsufficientRelations {
            found: smooth.len(),
            needed: 2,
        });
    }
    let mut relations = smooth.relations(n);
    if let Some(limit) = limit {
        relations.truncate(limit);
    }
    factor_from_relations(n, fb, &relations)
}
