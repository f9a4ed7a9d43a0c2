//! Gate-level quantum Fourier transform on a qubit register.
//!
//! Bit `j` of the register value is qubit `j`. With `N = 2^w` the forward
//! transform is `|x⟩ ↦ N^(-1/2) Σ_y exp(2πi·xy/N) |y⟩`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::state::{Domain, Merge, QuantumState};
use super::SimError;

impl QuantumState {
    fn qubit_register(&self, id: &str) -> Result<(usize, u32), SimError> {
        let reg = self.index_of(id)?;
        let spec = &self.registers()[reg];
        match spec.domain {
            Domain::Qubits(w) if spec.slots == 1 && w <= 63 => Ok((self.offset(reg), w)),
            _ => Err(SimError::NotQubitRegister(id.to_string())),
        }
    }

    /// Hadamard on qubit `bit` of register `id`.
    pub fn hadamard(self, id: &str, bit: u32) -> Result<Self, SimError> {
        let (slot, w) = self.qubit_register(id)?;
        check_bit(id, bit, w)?;
        Ok(self.hadamard_at(slot, bit))
    }

    fn hadamard_at(self, slot: usize, bit: u32) -> Self {
        let stride = self.stride();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mask = 1u64 << bit;
        let mut keys = Vec::with_capacity(2 * self.support() * stride);
        let mut amps = Vec::with_capacity(2 * self.support());
        for (i, &a) in self.amplitudes().iter().enumerate() {
            let k = self.key(i);
            let one = k[slot] & mask != 0;
            let low = keys.len();
            keys.extend_from_slice(k);
            keys[low + slot] &= !mask;
            amps.push(a * h);
            let high = keys.len();
            keys.extend_from_slice(k);
            keys[high + slot] |= mask;
            amps.push(if one { -a * h } else { a * h });
        }
        self.rebuilt(keys, amps, Merge::Sum)
            .expect("merging never fails")
    }

    /// Multiplies terms where both qubits are 1 by `exp(i·phi)`.
    pub fn controlled_phase(
        self,
        id: &str,
        control: u32,
        target: u32,
        phi: f64,
    ) -> Result<Self, SimError> {
        let (slot, w) = self.qubit_register(id)?;
        check_bit(id, control, w)?;
        check_bit(id, target, w)?;
        Ok(self.controlled_phase_at(slot, control, target, phi))
    }

    fn controlled_phase_at(mut self, slot: usize, control: u32, target: u32, phi: f64) -> Self {
        let mask = (1u64 << control) | (1u64 << target);
        let phase = Complex64::from_polar(1.0, phi);
        let hits: Vec<bool> = (0..self.support())
            .map(|i| self.key(i)[slot] & mask == mask)
            .collect();
        for (a, hit) in self.amps_mut().iter_mut().zip(hits) {
            if hit {
                *a *= phase;
            }
        }
        self
    }

    fn swap_bits_at(mut self, slot: usize, a: u32, b: u32) -> Self {
        let stride = self.stride();
        for row in self.keys_mut().chunks_exact_mut(stride) {
            let v = row[slot];
            if (v >> a) & 1 != (v >> b) & 1 {
                row[slot] = v ^ (1 << a) ^ (1 << b);
            }
        }
        self.resort_after_relabel()
            .expect("bit swaps are bijective")
    }

    /// Forward QFT on register `id` from Hadamard, controlled-phase and
    /// swap gates.
    pub fn qft(self, id: &str) -> Result<Self, SimError> {
        let (slot, w) = self.qubit_register(id)?;
        let mut s = self;
        for j in (0..w).rev() {
            s = s.hadamard_at(slot, j);
            for k in (0..j).rev() {
                s = s.controlled_phase_at(slot, k, j, PI / (1u64 << (j - k)) as f64);
            }
        }
        for j in 0..w / 2 {
            s = s.swap_bits_at(slot, j, w - 1 - j);
        }
        Ok(s)
    }

    /// Inverse of [`QuantumState::qft`]: the same gates, reversed and conjugated.
    pub fn qft_inverse(self, id: &str) -> Result<Self, SimError> {
        let (slot, w) = self.qubit_register(id)?;
        let mut s = self;
        for j in 0..w / 2 {
            s = s.swap_bits_at(slot, j, w - 1 - j);
        }
        for j in 0..w {
            for k in 0..j {
                s = s.controlled_phase_at(slot, k, j, -PI / (1u64 << (j - k)) as f64);
            }
            s = s.hadamard_at(slot, j);
        }
        Ok(s)
    }
}

fn check_bit(id: &str, bit: u32, width: u32) -> Result<(), SimError> {
    if bit < width {
        Ok(())
    } else {
        Err(SimError::BitOutOfRange {
            register: id.to_string(),
            bit,
            width,
        })
    }
}
