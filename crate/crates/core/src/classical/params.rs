use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::SieveError;
use crate::numtheory::{self, exact_sqrt, legendre_u64, LegendreValue, Natural, TrialDivision};

/// Smallest smoothness bound ever chosen automatically.
pub const MIN_SMOOTHNESS_BOUND: u64 = 30;
/// Smallest sieve half-width ever chosen automatically.
pub const MIN_INTERVAL_HALF_WIDTH: u64 = 100;
/// Largest smoothness bound the automatic search will consider.
pub const MAX_SMOOTHNESS_BOUND: u64 = 1 << 24;
pub const DEFAULT_EXTRA_RELATIONS: usize = 5;
pub const DEFAULT_MAX_RETRIES: usize = 5;

/// Primes used to certify primality of desk-scale inputs.
const CERTIFICATE_PRIME_LIMIT: u64 = 1 << 20;

/// How relation collection walks the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Blocks are sieved on the rayon pool. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Configuration of one quadratic-sieve attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SieveParams {
    #[serde(serialize_with = "ser_natural")]
    n: Natural,
    smoothness_bound: u64,
    interval_half_width: u64,
    extra_relations: usize,
    max_retries: usize,
    #[serde(skip)]
    execution: Execution,
}

fn ser_natural<S: serde::Serializer>(n: &Natural, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

impl SieveParams {
    /// Validates `B >= 3`, `M >= 1` and that `n` is an odd non-square `>= 15`.
    pub fn new(
        n: Natural,
        smoothness_bound: u64,
        interval_half_width: u64,
    ) -> Result<Self, SieveError> {
        if smoothness_bound < 3 {
            return Err(SieveError::InvalidParams(format!(
                "smoothness bound must be at least 3, got {smoothness_bound}"
            )));
        }
        if interval_half_width < 1 {
            return Err(SieveError::InvalidParams(
                "interval half-width must be at least 1".into(),
            ));
        }
        check_shape(&n)?;
        Ok(Self {
            n,
            smoothness_bound,
            interval_half_width,
            extra_relations: DEFAULT_EXTRA_RELATIONS,
            max_retries: DEFAULT_MAX_RETRIES,
            execution: Execution::default(),
        })
    }

    pub fn n(&self) -> &Natural {
        &self.n
    }

    pub fn smoothness_bound(&self) -> u64 {
        self.smoothness_bound
    }

    pub fn interval_half_width(&self) -> u64 {
        self.interval_half_width
    }

    /// Relations gathered beyond `|factor base| + 1` before sieving stops.
    pub fn extra_relations(&self) -> usize {
        self.extra_relations
    }

    pub fn max_retries(&self) -> usize {
        self.max_retries
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn with_extra_relations(mut self, extra: usize) -> Self {
        self.extra_relations = extra;
        self
    }

    pub fn with_max_retries(mut self, retries: usize) -> Self {
        self.max_retries = retries;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_smoothness_bound(mut self, bound: u64) -> Result<Self, SieveError> {
        if bound < 3 {
            return Err(SieveError::InvalidParams(format!(
                "smoothness bound must be at least 3, got {bound}"
            )));
        }
        self.smoothness_bound = bound;
        Ok(self)
    }

    pub fn with_interval_half_width(mut self, half_width: u64) -> Result<Self, SieveError> {
        if half_width < 1 {
            return Err(SieveError::InvalidParams(
                "interval half-width must be at least 1".into(),
            ));
        }
        self.interval_half_width = half_width;
        Ok(self)
    }

    /// Parameters for the next attempt after a failure: `B` doubled and `M`
    /// never below the formula value.
    pub fn escalated(&self) -> Self {
        let mut next = self.clone();
        next.smoothness_bound = self.smoothness_bound.saturating_mul(2);
        next.interval_half_width = self
            .interval_half_width
            .max(interval_half_width_for(&self.n));
        next
    }
}

fn check_shape(n: &Natural) -> Result<(), SieveError> {
    if n.is_even() {
        return Err(SieveError::EvenInput);
    }
    if *n < Natural::from(15u32) {
        return Err(SieveError::TooSmall(n.clone()));
    }
    if let Some(root) = exact_sqrt(n) {
        return Err(SieveError::PerfectSquare(root));
    }
    Ok(())
}

pub(crate) fn certificate_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| numtheory::sieve_of_eratosthenes(CERTIFICATE_PRIME_LIMIT))
}

/// True when `n` is proven prime: by deterministic Miller-Rabin below
/// `2^64`, by trial division above. Larger inputs too big to certify return
/// false.
pub fn is_certified_prime(n: &Natural) -> bool {
    if let Some(v) = n.to_u64() {
        return numtheory::is_prime_u64(v);
    }
    numtheory::trial_division(n, certificate_primes()) == TrialDivision::Prime
}

/// Natural logarithm of an arbitrary-precision integer.
pub fn ln_natural(n: &Natural) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        if let Some(v) = n.to_f64() {
            return v.ln();
        }
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `M = L(n)^(3*sqrt(2)/4)` with `L(n) = exp(sqrt(ln n * ln ln n))`, ceiled
/// and clamped to at least [`MIN_INTERVAL_HALF_WIDTH`].
pub fn interval_half_width_for(n: &Natural) -> u64 {
    let ln_n = ln_natural(n);
    let exponent = 3.0 * std::f64::consts::SQRT_2 / 4.0;
    let m = if ln_n > 1.0 {
        (exponent * (ln_n * ln_n.ln()).sqrt()).exp().ceil()
    } else {
        0.0
    };
    if m.is_finite() && m < u64::MAX as f64 {
        (m as u64).max(MIN_INTERVAL_HALF_WIDTH)
    } else {
        u64::MAX / 4
    }
}

/// Probability heuristic that a number of size `n` is `B`-smooth: `u^-u`
/// with `u = ln n / ln B`.
pub fn smoothness_probability(ln_n: f64, bound: u64) -> f64 {
    let u = ln_n / (bound as f64).ln();
    u.powf(-u)
}

/// Smallest `B >= 30` for which the expected number of smooth values over
/// `2M + 1` candidates covers the factor base plus six.
pub fn smoothness_bound_for(n: &Natural, interval_half_width: u64) -> u64 {
    let ln_n = ln_natural(n);
    let candidates = 2.0 * interval_half_width as f64 + 1.0;
    let enough = |bound: u64, fb_size: usize| {
        candidates * smoothness_probability(ln_n, bound) >= (fb_size + 6) as f64
    };

    let mut limit = 1u64 << 16;
    let mut primes = numtheory::sieve_of_eratosthenes(limit);
    let mut fb_size = 1; // the prime 2
    let mut idx = 1;
    let mut bound = MIN_SMOOTHNESS_BOUND;
    loop {
        while idx < primes.len() && primes[idx] <= bound {
            let p = primes[idx];
            let residue = (n % p).to_u64().unwrap_or(0);
            if legendre_u64(residue, p) == Ok(LegendreValue::One) {
                fb_size += 1;
            }
            idx += 1;
        }
        if enough(bound, fb_size) || bound >= MAX_SMOOTHNESS_BOUND {
            return bound;
        }
        if idx == primes.len() {
            limit *= 2;
            primes = numtheory::sieve_of_eratosthenes(limit);
        }
        bound = primes[idx];
    }
}

/// Automatic parameters for factoring `n`.
pub fn default_params(n: &Natural) -> Result<SieveParams, SieveError> {
    check_shape(n)?;
    if is_certified_prime(n) {
        return Err(SieveError::PrimeInput(n.clone()));
    }
    let m = interval_half_width_for(n);
    let b = smoothness_bound_for(n, m);
    SieveParams::new(n.clone(), b, m)
}
