use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::state::{Combine, MeasureMode, MeasurementRecord, QuantumState, RegisterSpec, Value};
use super::SimError;

/// A tensor product of independent [`QuantumState`] factors.
///
/// Operations touching registers of several factors first merge the
/// contiguous run of factors involved, so register order (and hence the
/// canonical term order) is the concatenation of the factors' orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<QuantumState>,
}

impl From<QuantumState> for ProductState {
    fn from(s: QuantumState) -> Self {
        Self { factors: vec![s] }
    }
}

impl ProductState {
    /// `self ⊗ other` without expanding either side.
    pub fn tensor(self, other: impl Into<ProductState>) -> Result<Self, SimError> {
        let other = other.into();
        for r in other.registers() {
            if self.registers().any(|s| s.id == r.id) {
                return Err(SimError::DuplicateRegister(r.id.clone()));
            }
        }
        let mut factors = self.factors;
        factors.extend(other.factors);
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[QuantumState] {
        &self.factors
    }

    pub fn registers(&self) -> impl Iterator<Item = &RegisterSpec> {
        self.factors.iter().flat_map(|f| f.registers())
    }

    /// Number of basis terms of the expanded state (saturating).
    pub fn support(&self) -> usize {
        self.factors
            .iter()
            .fold(1usize, |acc, f| acc.saturating_mul(f.support()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.factors.iter().map(QuantumState::norm_sqr).product()
    }

    /// Expands into a single state.
    pub fn expand(self) -> Result<QuantumState, SimError> {
        let mut it = self.factors.into_iter();
        let first = it.next().expect("product has a factor");
        it.try_fold(first, |acc, f| QuantumState::tensor(&acc, &f))
    }

    /// The factor holding register `id`.
    pub fn factor_with(&self, id: &str) -> Result<&QuantumState, SimError> {
        Ok(&self.factors[self.factor_of(id)?])
    }

    fn factor_of(&self, id: &str) -> Result<usize, SimError> {
        self.factors
            .iter()
            .position(|f| f.index_of(id).is_ok())
            .ok_or_else(|| SimError::UnknownRegister(id.to_string()))
    }

    /// Merges the factors holding `ids` and returns the merged factor's index.
    fn merge_for(&mut self, ids: &[&str]) -> Result<usize, SimError> {
        let idx = ids
            .iter()
            .map(|id| self.factor_of(id))
            .collect::<Result<Vec<_>, _>>()?;
        let lo = *idx.iter().min().expect("at least one register");
        let hi = *idx.iter().max().expect("at least one register");
        if lo < hi {
            let run: Vec<QuantumState> = self.factors.drain(lo..=hi).collect();
            let merged = ProductState { factors: run }.expand()?;
            self.factors.insert(lo, merged);
        }
        Ok(lo)
    }

    fn with_factor<F>(mut self, ids: &[&str], op: F) -> Result<Self, SimError>
    where
        F: FnOnce(QuantumState) -> Result<QuantumState, SimError>,
    {
        let i = self.merge_for(ids)?;
        let f = self.factors.remove(i);
        self.factors.insert(i, op(f)?);
        Ok(self)
    }

    pub fn load_uniform(self, id: &str, values: &[Value]) -> Result<Self, SimError> {
        self.with_factor(&[id], |f| f.load_uniform(id, values))
    }

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
        let ids: Vec<&str> = reads.iter().copied().chain([target]).collect();
        self.with_factor(&ids, |s| s.apply_oracle(reads, target, combine, f))
    }

    pub fn map_registers<G>(self, ids: &[&str], g: G) -> Result<Self, SimError>
    where
        G: Fn(&[Value], &mut [Value]),
    {
        self.with_factor(ids, |s| s.map_registers(ids, g))
    }

    pub fn qft(self, id: &str) -> Result<Self, SimError> {
        self.with_factor(&[id], |s| s.qft(id))
    }

    pub fn qft_inverse(self, id: &str) -> Result<Self, SimError> {
        self.with_factor(&[id], |s| s.qft_inverse(id))
    }

    /// Drops a register holding a single value in every term.
    pub fn discard_register(mut self, id: &str) -> Result<Self, SimError> {
        let i = self.factor_of(id)?;
        if self.factors[i].registers().len() > 1 {
            return self.with_factor(&[id], |s| s.discard_register(id));
        }
        if self.factors.len() == 1 || self.factors[i].support() != 1 {
            return Err(SimError::NotConstant(id.to_string()));
        }
        self.factors.remove(i);
        Ok(self)
    }

    pub fn probabilities(&self, id: &str) -> Result<BTreeMap<Vec<Value>, f64>, SimError> {
        let i = self.factor_of(id)?;
        let rest: f64 = self
            .factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| f.norm_sqr())
            .product();
        let mut probs = self.factors[i].probabilities(id)?;
        probs.values_mut().for_each(|p| *p *= rest);
        Ok(probs)
    }

    pub fn partial_measure(
        mut self,
        id: &str,
        mode: MeasureMode,
    ) -> Result<(Self, MeasurementRecord), SimError> {
        let i = self.factor_of(id)?;
        let f = self.factors.remove(i);
        let (f, rec) = f.partial_measure(id, mode)?;
        self.factors.insert(i, f);
        Ok((self, rec))
    }

    pub fn measure_with<R: Rng>(
        mut self,
        id: &str,
        rng: &mut R,
    ) -> Result<(Self, MeasurementRecord), SimError> {
        let i = self.factor_of(id)?;
        let f = self.factors.remove(i);
        let (f, rec) = f.measure_with(id, rng)?;
        self.factors.insert(i, f);
        Ok((self, rec))
    }

    /// Visits up to `limit` expanded terms in canonical order.
    pub fn visit_terms(&self, limit: usize, mut visit: impl FnMut(&[&[Value]], Complex64)) {
        let sizes: Vec<usize> = self.factors.iter().map(QuantumState::support).collect();
        if sizes.contains(&0) {
            return;
        }
        let mut index = vec![0usize; self.factors.len()];
        let mut values: Vec<&[Value]> = Vec::new();
        for _ in 0..limit {
            values.clear();
            let mut amp = Complex64::new(1.0, 0.0);
            for (f, &t) in self.factors.iter().zip(&index) {
                values.extend((0..f.registers().len()).map(|r| f.value_of(t, r)));
                amp *= f.amplitudes()[t];
            }
            visit(&values, amp);
            // odometer, last factor fastest
            let mut k = index.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                index[k] += 1;
                if index[k] < sizes[k] {
                    break;
                }
                index[k] = 0;
            }
        }
    }
}
