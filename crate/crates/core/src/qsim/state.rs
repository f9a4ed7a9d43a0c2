use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::SimError;

/// Integer content of one register slot.
pub type Value = u64;

/// Amplitudes below this modulus are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Outcomes at or below this probability cannot be post-selected.
pub const MIN_POST_SELECT_PROBABILITY: f64 = 1e-12;
/// Upper bound on stored basis terms.
pub const MAX_SUPPORT: usize = 1 << 22;

/// Values a register slot may hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// `0 .. 2^w`.
    Qubits(u32),
    /// An explicit finite set (kept sorted).
    Values(Vec<Value>),
}

impl Domain {
    pub fn contains(&self, v: Value) -> bool {
        match self {
            Domain::Qubits(w) => *w >= 64 || v >> w == 0,
            Domain::Values(set) => set.binary_search(&v).is_ok(),
        }
    }

    /// Number of values, saturating at `u64::MAX`.
    pub fn size(&self) -> u64 {
        match self {
            Domain::Qubits(w) if *w >= 64 => u64::MAX,
            Domain::Qubits(w) => 1 << w,
            Domain::Values(set) => set.len() as u64,
        }
    }
}

/// A named register of one or more slots sharing a domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterSpec {
    pub id: String,
    pub domain: Domain,
    pub slots: usize,
}

impl RegisterSpec {
    pub fn qubits(id: impl Into<String>, width: u32) -> Self {
        Self {
            id: id.into(),
            domain: Domain::Qubits(width),
            slots: 1,
        }
    }

    /// Register over an explicit value set. Zero is added so the register can
    /// start in `|0⟩`.
    pub fn values(id: impl Into<String>, values: impl IntoIterator<Item = Value>) -> Self {
        let set: BTreeSet<Value> = values.into_iter().chain([0]).collect();
        Self {
            id: id.into(),
            domain: Domain::Values(set.into_iter().collect()),
            slots: 1,
        }
    }

    /// `slots` independent sub-registers of `width` qubits each.
    pub fn tuple(id: impl Into<String>, slots: usize, width: u32) -> Self {
        Self {
            id: id.into(),
            domain: Domain::Qubits(width),
            slots,
        }
    }

    /// Bits needed to hold `max`.
    pub fn width_for(max: Value) -> u32 {
        (64 - max.leading_zeros()).max(1)
    }
}

/// How an oracle's output combines with the target register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// Target must be `|0⟩` in every term; it receives `f(reads)`.
    Overwrite,
    /// `t ↦ t ⊕ f(reads)`, slot by slot.
    Xor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureMode {
    /// Draw an outcome from the Born distribution with a seeded generator.
    Sample { seed: u64 },
    /// Project onto a given single-slot value.
    PostSelect(Value),
    /// Project onto a given value of a multi-slot register.
    PostSelectTuple(Vec<Value>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Sampled,
    PostSelected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub register: String,
    pub value: Vec<Value>,
    /// Born probability of `value` before the measurement.
    pub probability: f64,
    pub mode: MeasureKind,
}

/// Sparse superposition over tuples of register values.
///
/// Terms are stored row-major in `keys` (one row of `stride` slots per term)
/// in strictly ascending lexicographic order, which is the canonical term
/// order everywhere (dumps, comparisons, sampling).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    registers: Vec<RegisterSpec>,
    offsets: Vec<usize>,
    stride: usize,
    keys: Vec<Value>,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0, 0, ..., 0⟩` with amplitude 1.
    pub fn init(specs: Vec<RegisterSpec>) -> Result<Self, SimError> {
        let mut seen = BTreeSet::new();
        for spec in &specs {
            if !seen.insert(spec.id.clone()) {
                return Err(SimError::DuplicateRegister(spec.id.clone()));
            }
            if spec.slots == 0 || spec.domain.size() == 0 {
                return Err(SimError::EmptyDomain(spec.id.clone()));
            }
            if !spec.domain.contains(0) {
                return Err(SimError::DomainOverflow {
                    register: spec.id.clone(),
                    tuple: vec![0],
                });
            }
        }
        let mut offsets = Vec::with_capacity(specs.len());
        let mut stride = 0;
        for spec in &specs {
            offsets.push(stride);
            stride += spec.slots;
        }
        Ok(Self {
            registers: specs,
            offsets,
            stride,
            keys: vec![0; stride],
            amps: vec![Complex64::new(1.0, 0.0)],
        })
    }

    /// A state with the given (unnormalized) amplitudes, rescaled to unit
    /// norm. Repeated keys are summed.
    pub fn from_terms<I>(specs: Vec<RegisterSpec>, terms: I) -> Result<Self, SimError>
    where
        I: IntoIterator<Item = (Vec<Value>, Complex64)>,
    {
        let template = Self::init(specs)?;
        let stride = template.stride;
        let mut keys = Vec::new();
        let mut amps = Vec::new();
        for (key, amp) in terms {
            if key.len() != stride {
                return Err(SimError::KeyLength {
                    expected: stride,
                    found: key.len(),
                });
            }
            for (r, spec) in template.registers.iter().enumerate() {
                let part = &key[template.offsets[r]..template.offsets[r] + spec.slots];
                if part.iter().any(|&v| !spec.domain.contains(v)) {
                    return Err(SimError::DomainOverflow {
                        register: spec.id.clone(),
                        tuple: key.clone(),
                    });
                }
            }
            keys.extend_from_slice(&key);
            amps.push(amp);
        }
        if amps.len() > MAX_SUPPORT {
            return Err(SimError::SupportTooLarge(amps.len()));
        }
        let mut state = template.rebuilt(keys, amps, Merge::Sum)?;
        let norm = state.norm_sqr().sqrt();
        if state.amps.is_empty() || norm == 0.0 {
            return Err(SimError::ZeroNorm);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    pub fn registers(&self) -> &[RegisterSpec] {
        &self.registers
    }

    pub fn register(&self, id: &str) -> Result<&RegisterSpec, SimError> {
        Ok(&self.registers[self.index_of(id)?])
    }

    pub fn support(&self) -> usize {
        self.amps.len()
    }

    /// `Σ |a|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Slots of term `i`, all registers concatenated.
    pub fn key(&self, i: usize) -> &[Value] {
        &self.keys[i * self.stride..(i + 1) * self.stride]
    }

    /// Slots of register `reg` in term `i`.
    pub fn value_of(&self, i: usize, reg: usize) -> &[Value] {
        let start = i * self.stride + self.offsets[reg];
        &self.keys[start..start + self.registers[reg].slots]
    }

    /// Terms in canonical order as `(per-register values, amplitude)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<&[Value]>, Complex64)> + '_ {
        (0..self.support()).map(move |i| {
            let values = (0..self.registers.len())
                .map(|r| self.value_of(i, r))
                .collect();
            (values, self.amps[i])
        })
    }

    /// Amplitude of the basis tuple `key` (all slots concatenated), zero when absent.
    pub fn amplitude(&self, key: &[Value]) -> Complex64 {
        assert_eq!(key.len(), self.stride, "key has wrong number of slots");
        self.search(key)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amps[i])
    }

    fn search(&self, key: &[Value]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.support());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.key(mid).cmp(key) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn index_of(&self, id: &str) -> Result<usize, SimError> {
        self.registers
            .iter()
            .position(|r| r.id == id)
            .ok_or_else(|| SimError::UnknownRegister(id.to_string()))
    }

    fn slot_range(&self, reg: usize) -> std::ops::Range<usize> {
        self.offsets[reg]..self.offsets[reg] + self.registers[reg].slots
    }

    /// Born probability of every value of `id`, keyed by value.
    pub fn probabilities(&self, id: &str) -> Result<BTreeMap<Vec<Value>, f64>, SimError> {
        let reg = self.index_of(id)?;
        let mut out: BTreeMap<Vec<Value>, f64> = BTreeMap::new();
        for i in 0..self.support() {
            *out.entry(self.value_of(i, reg).to_vec()).or_default() += self.amps[i].norm_sqr();
        }
        Ok(out)
    }

    /// Splits every term uniformly over `values` in register `id`, which must
    /// be `|0⟩` in every term.
    pub fn load_uniform(self, id: &str, values: &[Value]) -> Result<Self, SimError> {
        let reg = self.index_of(id)?;
        let spec = &self.registers[reg];
        if spec.slots != 1 {
            return Err(SimError::NotScalar(id.to_string()));
        }
        let set: BTreeSet<Value> = values.iter().copied().collect();
        if set.is_empty() {
            return Err(SimError::EmptyValueSet(id.to_string()));
        }
        if let Some(&bad) = set.iter().find(|&&v| !spec.domain.contains(v)) {
            return Err(SimError::DomainOverflow {
                register: id.to_string(),
                tuple: vec![bad],
            });
        }
        let slot = self.offsets[reg];
        if (0..self.support()).any(|i| self.key(i)[slot] != 0) {
            return Err(SimError::NotZeroed(id.to_string()));
        }
        let total = self.support() * set.len();
        if total > MAX_SUPPORT {
            return Err(SimError::SupportTooLarge(total));
        }
        let scale = 1.0 / (set.len() as f64).sqrt();
        let mut keys = Vec::with_capacity(total * self.stride);
        let mut amps = Vec::with_capacity(total);
        for i in 0..self.support() {
            for &v in &set {
                let start = keys.len();
                keys.extend_from_slice(self.key(i));
                keys[start + slot] = v;
                amps.push(self.amps[i] * scale);
            }
        }
        self.rebuilt(keys, amps, Merge::Reject)
    }

    /// Reversible oracle `|reads⟩|t⟩ ↦ |reads⟩|t ∘ f(reads)⟩`.
    ///
    /// `f` receives the slots of `reads` concatenated and writes one value
    /// per target slot. Amplitudes are left untouched.
    pub fn apply_oracle<F>(
        self,
        reads: &[&str],
        target: &str,
        combine: Combine,
        f: F,
    ) -> Result<Self, SimError>
    where
        F: Fn(&[Value], &mut [Value]),
    {
        let t = self.index_of(target)?;
        let read_idx = reads
            .iter()
            .map(|r| self.index_of(r))
            .collect::<Result<Vec<_>, _>>()?;
        if read_idx.contains(&t) {
            return Err(SimError::TargetIsRead(target.to_string()));
        }
        let ranges: Vec<_> = read_idx.iter().map(|&r| self.slot_range(r)).collect();
        let trange = self.slot_range(t);
        let domain = self.registers[t].domain.clone();
        let mut state = self;
        let stride = state.stride;
        let mut input = Vec::new();
        let mut out = vec![0; trange.len()];
        for row in state.keys.chunks_exact_mut(stride) {
            input.clear();
            for r in &ranges {
                input.extend_from_slice(&row[r.clone()]);
            }
            out.iter_mut().for_each(|v| *v = 0);
            f(&input, &mut out);
            let tslots = &mut row[trange.clone()];
            if combine == Combine::Overwrite && tslots.iter().any(|&v| v != 0) {
                return Err(SimError::NotZeroed(target.to_string()));
            }
            for (slot, &o) in tslots.iter_mut().zip(&out) {
                *slot ^= o;
            }
            if tslots.iter().any(|&v| !domain.contains(v)) {
                return Err(SimError::DomainOverflow {
                    register: target.to_string(),
                    tuple: row.to_vec(),
                });
            }
        }
        state.resort_after_relabel()
    }

    /// Relabels the values of one register in place.
    pub fn map_register<G>(self, id: &str, g: G) -> Result<Self, SimError>
    where
        G: Fn(&[Value], &mut [Value]),
    {
        self.map_registers(&[id], g)
    }

    /// Relabels several registers jointly; `g` sees their slots concatenated
    /// and overwrites them. Two terms mapping onto the same tuple is a
    /// reversibility violation and fails.
    pub fn map_registers<G>(self, ids: &[&str], g: G) -> Result<Self, SimError>
    where
        G: Fn(&[Value], &mut [Value]),
    {
        let regs = ids
            .iter()
            .map(|r| self.index_of(r))
            .collect::<Result<Vec<_>, _>>()?;
        let ranges: Vec<_> = regs.iter().map(|&r| self.slot_range(r)).collect();
        let width: usize = ranges.iter().map(|r| r.len()).sum();
        let mut state = self;
        let stride = state.stride;
        let mut input = vec![0; width];
        let mut output = vec![0; width];
        let mut changed = false;
        for row in state.keys.chunks_exact_mut(stride) {
            let mut at = 0;
            for r in &ranges {
                input[at..at + r.len()].copy_from_slice(&row[r.clone()]);
                at += r.len();
            }
            output.copy_from_slice(&input);
            g(&input, &mut output);
            if output == input {
                continue;
            }
            changed = true;
            let mut at = 0;
            for (r, &reg) in ranges.iter().zip(&regs) {
                let dom = &state.registers[reg].domain;
                if output[at..at + r.len()].iter().any(|&v| !dom.contains(v)) {
                    return Err(SimError::DomainOverflow {
                        register: state.registers[reg].id.clone(),
                        tuple: row.to_vec(),
                    });
                }
                row[r.clone()].copy_from_slice(&output[at..at + r.len()]);
                at += r.len();
            }
        }
        if !changed {
            return Ok(state);
        }
        state.resort_after_relabel()
    }

    /// Drops a register that holds the same value in every term (and is
    /// therefore unentangled with the rest).
    pub fn discard_register(self, id: &str) -> Result<Self, SimError> {
        let reg = self.index_of(id)?;
        let range = self.slot_range(reg);
        let first = self.key(0)[range.clone()].to_vec();
        if (0..self.support()).any(|i| self.key(i)[range.clone()] != first[..]) {
            return Err(SimError::NotConstant(id.to_string()));
        }
        let mut registers = self.registers.clone();
        registers.remove(reg);
        let stride = self.stride - range.len();
        let mut keys = Vec::with_capacity(self.support() * stride);
        for i in 0..self.support() {
            let k = self.key(i);
            keys.extend_from_slice(&k[..range.start]);
            keys.extend_from_slice(&k[range.end..]);
        }
        Ok(Self::assemble(registers, keys, self.amps))
    }

    /// `|a⟩ ⊗ |b⟩`, registers of `a` first.
    pub fn tensor(a: &Self, b: &Self) -> Result<Self, SimError> {
        if let Some(dup) = a
            .registers
            .iter()
            .find(|r| b.registers.iter().any(|s| s.id == r.id))
        {
            return Err(SimError::DuplicateRegister(dup.id.clone()));
        }
        let total = a.support() * b.support();
        if total > MAX_SUPPORT {
            return Err(SimError::SupportTooLarge(total));
        }
        let registers: Vec<RegisterSpec> =
            a.registers.iter().chain(&b.registers).cloned().collect();
        let mut keys = Vec::with_capacity(total * (a.stride + b.stride));
        let mut amps = Vec::with_capacity(total);
        for i in 0..a.support() {
            for j in 0..b.support() {
                keys.extend_from_slice(a.key(i));
                keys.extend_from_slice(b.key(j));
                amps.push(a.amps[i] * b.amps[j]);
            }
        }
        // a-major order of two sorted lists is already sorted
        let mut state = Self::assemble(registers, keys, amps);
        state.prune();
        Ok(state)
    }

    /// Partial measurement of register `id`.
    pub fn partial_measure(
        self,
        id: &str,
        mode: MeasureMode,
    ) -> Result<(Self, MeasurementRecord), SimError> {
        match mode {
            MeasureMode::Sample { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                self.measure_with(id, &mut rng)
            }
            MeasureMode::PostSelect(v) => self.post_select(id, &[v]),
            MeasureMode::PostSelectTuple(v) => self.post_select(id, &v),
        }
    }

    /// Samples register `id` with the caller's generator.
    pub fn measure_with<R: Rng>(
        self,
        id: &str,
        rng: &mut R,
    ) -> Result<(Self, MeasurementRecord), SimError> {
        let probs = self.probabilities(id)?;
        let total: f64 = probs.values().sum();
        let draw = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = probs
            .keys()
            .next_back()
            .cloned()
            .expect("state has at least one term");
        for (value, &p) in &probs {
            acc += p;
            if draw < acc {
                chosen = value.clone();
                break;
            }
        }
        let (state, mut record) = self.project(id, &chosen)?;
        record.mode = MeasureKind::Sampled;
        Ok((state, record))
    }

    fn post_select(self, id: &str, value: &[Value]) -> Result<(Self, MeasurementRecord), SimError> {
        self.project(id, value)
    }

    fn project(self, id: &str, value: &[Value]) -> Result<(Self, MeasurementRecord), SimError> {
        let reg = self.index_of(id)?;
        if value.len() != self.registers[reg].slots {
            return Err(SimError::NotScalar(id.to_string()));
        }
        let probability: f64 = (0..self.support())
            .filter(|&i| self.value_of(i, reg) == value)
            .map(|i| self.amps[i].norm_sqr())
            .sum();
        if probability <= MIN_POST_SELECT_PROBABILITY {
            return Err(SimError::ImpossibleOutcome {
                register: id.to_string(),
                value: value.to_vec(),
            });
        }
        let scale = 1.0 / probability.sqrt();
        let mut keys = Vec::new();
        let mut amps = Vec::new();
        for i in 0..self.support() {
            if self.value_of(i, reg) == value {
                keys.extend_from_slice(self.key(i));
                amps.push(self.amps[i] * scale);
            }
        }
        let record = MeasurementRecord {
            register: id.to_string(),
            value: value.to_vec(),
            probability,
            mode: MeasureKind::PostSelected,
        };
        let mut state = Self::assemble(self.registers, keys, amps);
        state.prune();
        Ok((state, record))
    }

    pub(super) fn assemble(
        registers: Vec<RegisterSpec>,
        keys: Vec<Value>,
        amps: Vec<Complex64>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(registers.len());
        let mut stride = 0;
        for spec in &registers {
            offsets.push(stride);
            stride += spec.slots;
        }
        Self {
            registers,
            offsets,
            stride,
            keys,
            amps,
        }
    }

    pub(super) fn stride(&self) -> usize {
        self.stride
    }

    pub(super) fn offset(&self, reg: usize) -> usize {
        self.offsets[reg]
    }

    pub(super) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(super) fn keys_mut(&mut self) -> &mut [Value] {
        &mut self.keys
    }

    /// Replaces the term list with `keys`/`amps` (any order), sorting and
    /// either merging or rejecting duplicate tuples, then pruning.
    pub(super) fn rebuilt(
        self,
        keys: Vec<Value>,
        amps: Vec<Complex64>,
        merge: Merge,
    ) -> Result<Self, SimError> {
        let mut state = Self::assemble(self.registers, keys, amps);
        state.canonicalize(merge)?;
        state.prune();
        Ok(state)
    }

    pub(super) fn resort_after_relabel(mut self) -> Result<Self, SimError> {
        let sorted = (1..self.support()).all(|i| self.key(i - 1) < self.key(i));
        if !sorted {
            self.canonicalize(Merge::Reject)?;
        }
        Ok(self)
    }

    fn canonicalize(&mut self, merge: Merge) -> Result<(), SimError> {
        let stride = self.stride;
        let keys = &self.keys;
        let mut order: Vec<usize> = (0..self.amps.len()).collect();
        let cmp = |&a: &usize, &b: &usize| {
            keys[a * stride..(a + 1) * stride].cmp(&keys[b * stride..(b + 1) * stride])
        };
        #[cfg(feature = "parallel")]
        order.par_sort_by(cmp);
        #[cfg(not(feature = "parallel"))]
        order.sort_by(cmp);

        let mut new_keys: Vec<Value> = Vec::with_capacity(self.keys.len());
        let mut new_amps: Vec<Complex64> = Vec::with_capacity(self.amps.len());
        for idx in order {
            let k = &self.keys[idx * stride..(idx + 1) * stride];
            if let Some(last) = new_keys.len().checked_sub(stride) {
                if &new_keys[last..] == k {
                    match merge {
                        Merge::Sum => {
                            *new_amps.last_mut().expect("nonempty") += self.amps[idx];
                            continue;
                        }
                        Merge::Reject => return Err(SimError::Collision { tuple: k.to_vec() }),
                    }
                }
            }
            new_keys.extend_from_slice(k);
            new_amps.push(self.amps[idx]);
        }
        self.keys = new_keys;
        self.amps = new_amps;
        Ok(())
    }

    /// Drops negligible amplitudes; renormalizes if anything was dropped.
    fn prune(&mut self) {
        if self.amps.iter().all(|a| a.norm() >= PRUNE_THRESHOLD) {
            return;
        }
        let stride = self.stride;
        let mut keys = Vec::with_capacity(self.keys.len());
        let mut amps = Vec::with_capacity(self.amps.len());
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() >= PRUNE_THRESHOLD {
                keys.extend_from_slice(&self.keys[i * stride..(i + 1) * stride]);
                amps.push(*a);
            }
        }
        self.keys = keys;
        self.amps = amps;
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in &mut self.amps {
                *a /= norm;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Merge {
    Sum,
    Reject,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn two_regs() -> QuantumState {
        QuantumState::init(vec![
            RegisterSpec::qubits("R1", 4),
            RegisterSpec::qubits("R2", 4),
        ])
        .unwrap()
    }

    #[test]
    fn from_terms_normalizes_and_merges() {
        let specs = vec![
            RegisterSpec::qubits("A", 2),
            RegisterSpec::values("B", [3, 5]),
        ];
        let s = QuantumState::from_terms(
            specs.clone(),
            vec![
                (vec![1, 3], Complex64::new(1.0, 0.0)),
                (vec![0, 5], Complex64::new(0.0, 1.0)),
                (vec![1, 3], Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(s.support(), 2);
        assert!(close(s.norm_sqr(), 1.0));
        assert!(close(s.amplitude(&[1, 3]).re, 2.0 / 5f64.sqrt()));
        assert_eq!(s.key(0), &[0, 5]);
        assert!(matches!(
            QuantumState::from_terms(specs.clone(), vec![(vec![4, 3], Complex64::new(1.0, 0.0))]),
            Err(SimError::DomainOverflow { .. })
        ));
        assert_eq!(
            QuantumState::from_terms(specs.clone(), vec![(vec![1], Complex64::new(1.0, 0.0))]),
            Err(SimError::KeyLength {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            QuantumState::from_terms(specs, Vec::new()),
            Err(SimError::ZeroNorm)
        );
    }

    #[test]
    fn init_is_all_zero() {
        let s = two_regs();
        assert_eq!(s.support(), 1);
        assert_eq!(s.amplitude(&[0, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitude(&[1, 0]), Complex64::new(0.0, 0.0));
        assert!(close(s.norm_sqr(), 1.0));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = QuantumState::init(vec![
            RegisterSpec::qubits("R", 2),
            RegisterSpec::qubits("R", 3),
        ])
        .unwrap_err();
        assert_eq!(err, SimError::DuplicateRegister("R".into()));
    }

    #[test]
    fn uniform_over_primes() {
        let s = QuantumState::init(vec![
            RegisterSpec::values("R1", [2, 3, 5, 7]),
            RegisterSpec::qubits("R2", 3),
        ])
        .unwrap();
        let s = s.load_uniform("R1", &[2, 3, 5, 7]).unwrap();
        assert_eq!(s.support(), 4);
        for a in s.amplitudes() {
            assert!(close(a.re, 0.5) && close(a.im, 0.0));
        }
        assert!(close(s.norm_sqr(), 1.0));
        assert!(matches!(
            s.clone().load_uniform("R1", &[2]),
            Err(SimError::NotZeroed(_))
        ));
    }

    #[test]
    fn load_errors() {
        let s = two_regs();
        assert_eq!(
            s.clone().load_uniform("R1", &[]),
            Err(SimError::EmptyValueSet("R1".into()))
        );
        assert_eq!(
            s.clone().load_uniform("R9", &[1]),
            Err(SimError::UnknownRegister("R9".into()))
        );
        assert!(matches!(
            s.clone().load_uniform("R1", &[16]),
            Err(SimError::DomainOverflow { .. })
        ));
        let single = s.load_uniform("R1", &[9]).unwrap();
        assert_eq!(single.support(), 1);
        assert_eq!(single.amplitude(&[9, 0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn oracle_entangles_and_preserves_amplitudes() {
        let s = two_regs().load_uniform("R1", &[3, 5, 6]).unwrap();
        let before: Vec<f64> = s.amplitudes().iter().map(|a| a.norm()).collect();
        let s = s
            .apply_oracle(&["R1"], "R2", Combine::Overwrite, |r, t| t[0] = r[0] % 2)
            .unwrap();
        assert!(close(s.amplitude(&[3, 1]).re, 1.0 / 3f64.sqrt()));
        assert!(close(s.amplitude(&[6, 0]).re, 1.0 / 3f64.sqrt()));
        let after: Vec<f64> = s.amplitudes().iter().map(|a| a.norm()).collect();
        assert_eq!(before, after);
        // constant zero oracle leaves the state alone
        let same = s
            .clone()
            .apply_oracle(&["R1"], "R2", Combine::Xor, |_, t| t[0] = 0)
            .unwrap();
        assert_eq!(same, s);
        // overwrite needs a zero target
        assert!(matches!(
            s.clone()
                .apply_oracle(&["R1"], "R2", Combine::Overwrite, |_, t| t[0] = 1),
            Err(SimError::NotZeroed(_))
        ));
        // xor twice uncomputes
        let back = s
            .clone()
            .apply_oracle(&["R1"], "R2", Combine::Xor, |r, t| t[0] = r[0] % 2)
            .unwrap();
        assert!(back.key(0)[1] == 0 && back.key(1)[1] == 0 && back.key(2)[1] == 0);
        assert!(matches!(
            s.apply_oracle(&["R1"], "R1", Combine::Xor, |_, _| {}),
            Err(SimError::TargetIsRead(_))
        ));
    }

    #[test]
    fn oracle_domain_overflow_names_tuple() {
        let s = two_regs().load_uniform("R1", &[3, 5]).unwrap();
        let err = s
            .apply_oracle(&["R1"], "R2", Combine::Overwrite, |r, t| t[0] = r[0] * 4)
            .unwrap_err();
        assert_eq!(
            err,
            SimError::DomainOverflow {
                register: "R2".into(),
                tuple: vec![5, 20]
            }
        );
    }

    #[test]
    fn post_selection_formula() {
        // (|3,1⟩ + |5,0⟩)/√2, measure R2 = 1
        let s = two_regs()
            .load_uniform("R1", &[3, 5])
            .unwrap()
            .apply_oracle(&["R1"], "R2", Combine::Overwrite, |r, t| {
                t[0] = (r[0] == 3) as u64
            })
            .unwrap();
        let (post, rec) = s.partial_measure("R2", MeasureMode::PostSelect(1)).unwrap();
        assert!(close(rec.probability, 0.5));
        assert_eq!(rec.mode, MeasureKind::PostSelected);
        assert_eq!(post.support(), 1);
        assert!(close(post.amplitude(&[3, 1]).re, 1.0));
        assert!(close(post.norm_sqr(), 1.0));
        // idempotent
        let (again, rec2) = post
            .partial_measure("R2", MeasureMode::PostSelect(1))
            .unwrap();
        assert!(close(rec2.probability, 1.0));
        assert_eq!(again.support(), 1);
    }

    #[test]
    fn impossible_outcome() {
        let s = two_regs();
        assert!(matches!(
            s.partial_measure("R2", MeasureMode::PostSelect(3)),
            Err(SimError::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let s = two_regs()
            .load_uniform("R1", &[1, 2, 3, 4, 5, 6, 7])
            .unwrap();
        let a = s
            .clone()
            .partial_measure("R1", MeasureMode::Sample { seed: 42 })
            .unwrap();
        let b = s
            .partial_measure("R1", MeasureMode::Sample { seed: 42 })
            .unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.1.mode, MeasureKind::Sampled);
        assert!(close(a.1.probability, 1.0 / 7.0));
        assert!(close(a.0.norm_sqr(), 1.0));
    }

    #[test]
    fn tensor_product_structure() {
        let a = two_regs().load_uniform("R1", &[1, 2]).unwrap();
        let b = QuantumState::init(vec![RegisterSpec::qubits("R3", 2)])
            .unwrap()
            .load_uniform("R3", &[0, 1, 3])
            .unwrap();
        let ab = QuantumState::tensor(&a, &b).unwrap();
        assert_eq!(ab.support(), 6);
        assert!(close(ab.norm_sqr(), 1.0));
        assert!(close(ab.amplitude(&[2, 0, 3]).re, 1.0 / 6f64.sqrt()));
        assert_eq!(ab.registers().len(), 3);
        let zero = QuantumState::init(vec![RegisterSpec::qubits("Z", 1)]).unwrap();
        let padded = QuantumState::tensor(&zero, &b).unwrap();
        assert_eq!(padded.support(), b.support());
        assert!(matches!(
            QuantumState::tensor(&a, &a),
            Err(SimError::DuplicateRegister(_))
        ));
    }

    #[test]
    fn map_register_relabels_and_detects_collisions() {
        let s = QuantumState::init(vec![
            RegisterSpec::qubits("A", 2),
            RegisterSpec::tuple("E", 4, 3),
        ])
        .unwrap();
        let s = s.load_uniform("A", &[1, 2]).unwrap();
        let s = s
            .apply_oracle(&["A"], "E", Combine::Overwrite, |a, e| {
                if a[0] == 1 {
                    e.copy_from_slice(&[3, 0, 2, 1]);
                } else {
                    e.copy_from_slice(&[1, 0, 0, 1]);
                }
            })
            .unwrap();
        let same = s
            .clone()
            .map_register("E", |i, o| o.copy_from_slice(i))
            .unwrap();
        assert_eq!(same, s);
        let parity = s.clone().map_register("E", |i, o| {
            for (o, i) in o.iter_mut().zip(i) {
                *o = i % 2;
            }
        });
        // A still distinguishes the two terms, so the parity map is reversible here
        let parity = parity.unwrap();
        assert_eq!(parity.key(0), &[1, 1, 0, 0, 1]);
        // dropping A's distinction makes two terms collide
        let err = s
            .map_registers(&["A", "E"], |_, o| o.copy_from_slice(&[0, 1, 0, 0, 1]))
            .unwrap_err();
        assert!(matches!(err, SimError::Collision { .. }));
    }

    #[test]
    fn discard_constant_register() {
        let s = two_regs().load_uniform("R1", &[1, 2]).unwrap();
        let d = s.clone().discard_register("R2").unwrap();
        assert_eq!(d.registers().len(), 1);
        assert_eq!(d.support(), 2);
        assert_eq!(
            s.discard_register("R1"),
            Err(SimError::NotConstant("R1".into()))
        );
    }
}
