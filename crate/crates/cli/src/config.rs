use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use num_bigint::BigUint;
use num_traits::Zero;
use qsieve::classical::{default_params, short_circuit, SieveParams};
use qsieve::Natural;

/// Which pipeline(s) a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Classical,
    QuantumSim,
    Both,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::QuantumSim => "quantum-sim",
            Mode::Both => "both",
        }
    }

    pub fn runs_classical(self) -> bool {
        matches!(self, Mode::Classical | Mode::Both)
    }

    pub fn runs_quantum(self) -> bool {
        matches!(self, Mode::QuantumSim | Mode::Both)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// A validated factor or trace request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: Natural,
    pub mode: Mode,
    pub smoothness_bound: Option<u64>,
    pub interval_half_width: Option<u64>,
    pub max_retries: Option<usize>,
    /// Switches the simulated measurements from post-selection to seeded
    /// sampling.
    pub seed: Option<u64>,
    pub trace: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
    pub recurse: bool,
}

impl RunConfig {
    /// Sieve parameters with the overrides applied, or `None` when nothing
    /// was overridden or `n` never reaches the sieve.
    pub fn sieve_params(&self) -> Result<Option<SieveParams>, String> {
        let overridden = self.smoothness_bound.is_some()
            || self.interval_half_width.is_some()
            || self.max_retries.is_some();
        if !overridden || short_circuit(&self.n).is_some() {
            return Ok(None);
        }
        let mut p = default_params(&self.n).map_err(|e| e.to_string())?;
        if let Some(b) = self.smoothness_bound {
            p = p.with_smoothness_bound(b).map_err(|e| e.to_string())?;
        }
        if let Some(m) = self.interval_half_width {
            p = p.with_interval_half_width(m).map_err(|e| e.to_string())?;
        }
        if let Some(r) = self.max_retries {
            p = p.with_max_retries(r);
        }
        Ok(Some(p))
    }
}

/// Parses a positive integer written in decimal or as `0x` hexadecimal.
pub fn parse_natural(s: &str) -> Result<Natural, String> {
    let t = s.trim();
    let (digits, radix) = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => (hex, 16),
        None => (t, 10),
    };
    let valid = !digits.is_empty() && digits.chars().all(|c| c.is_digit(radix));
    let n = valid
        .then(|| BigUint::parse_bytes(digits.as_bytes(), radix))
        .flatten()
        .ok_or_else(|| format!("invalid integer {s:?}: expected decimal or 0x-hex digits"))?;
    if n.is_zero() {
        return Err("input must be positive".into());
    }
    Ok(n)
}

/// Inclusive range of semiprime sizes in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitRange {
    pub from: u32,
    pub to: u32,
}

pub const MIN_BENCH_BITS: u32 = 8;
pub const MAX_BENCH_BITS: u32 = 64;

impl BitRange {
    /// `"A..B"` (inclusive) or a single size `"A"`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid bit size {t:?}"))
        };
        let (from, to) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        if from > to {
            return Err(format!("empty bit range {from}..{to}"));
        }
        if from < MIN_BENCH_BITS || to > MAX_BENCH_BITS {
            return Err(format!(
                "bit sizes must lie in {MIN_BENCH_BITS}..{MAX_BENCH_BITS}"
            ));
        }
        Ok(Self { from, to })
    }

    pub fn sizes(self, step: u32) -> Vec<u32> {
        (self.from..=self.to)
            .step_by(step.max(1) as usize)
            .collect()
    }
}
