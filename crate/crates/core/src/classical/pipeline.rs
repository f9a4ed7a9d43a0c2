use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use super::congruence::{factor_from_relations, FactorResult, SieveStats};
use super::factor_base::build_factor_base;
use super::params::{default_params, is_certified_prime, SieveParams};
use super::relations::collect_relations;
use super::SieveError;
use crate::numtheory::{exact_sqrt, Natural};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("input is prime")]
    Prime(Natural),
    #[error("factorization failed after {} attempt(s): {}", .attempts.len(), describe(.attempts))]
    Failed { attempts: Vec<AttemptFailure> },
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// Diagnostics of one failed parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttemptFailure {
    pub smoothness_bound: u64,
    pub interval_half_width: u64,
    pub relations_found: usize,
    pub reason: String,
}

fn describe(attempts: &[AttemptFailure]) -> String {
    attempts
        .iter()
        .map(|a| {
            format!(
                "B={} M={} relations={} ({})",
                a.smoothness_bound, a.interval_half_width, a.relations_found, a.reason
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Handles the inputs that never reach the sieve: `n < 4`, even `n`,
/// perfect squares and certified primes.
pub fn short_circuit(n: &Natural) -> Option<Result<FactorResult, FactorError>> {
    if *n < Natural::from(4u32) {
        return Some(Err(FactorError::InvalidInput(format!("{n} is below 4"))));
    }
    if n.is_even() {
        let (f1, f2) = FactorResult::split(n, Natural::from(2u32));
        return Some(Ok(FactorResult {
            f1,
            f2,
            witness: None,
            attempts: 0,
            stats: None,
        }));
    }
    if let Some(root) = exact_sqrt(n) {
        return Some(Ok(FactorResult {
            f1: root.clone(),
            f2: root.clone(),
            witness: Some((root, Natural::from(0u32))),
            attempts: 0,
            stats: None,
        }));
    }
    if is_certified_prime(n) {
        return Some(Err(FactorError::Prime(n.clone())));
    }
    None
}

/// Whether a failed attempt is worth repeating with larger parameters.
pub(crate) fn retryable(e: &SieveError) -> bool {
    matches!(
        e,
        SieveError::InsufficientRelations { .. }
            | SieveError::NoDependency { .. }
            | SieveError::AllDependenciesTrivial { .. }
            | SieveError::EmptyFactorBase { .. }
    )
}

/// Outcome of a failed attempt inside [`with_escalation`].
#[derive(Debug)]
pub enum AttemptError<E> {
    /// A sieve failure and the number of relations found before it.
    Sieve(SieveError, usize),
    /// Any other failure; never retried.
    Other(E),
}

impl<E> From<(SieveError, usize)> for AttemptError<E> {
    fn from((e, found): (SieveError, usize)) -> Self {
        AttemptError::Sieve(e, found)
    }
}

/// Runs `attempt` on `initial`, doubling `B` after each retryable failure,
/// at most `initial.max_retries()` times. Returns the value and the number
/// of escalations used.
pub fn with_escalation<T, E: From<FactorError>>(
    initial: SieveParams,
    mut attempt: impl FnMut(&SieveParams) -> Result<T, AttemptError<E>>,
) -> Result<(T, SieveParams, usize), E> {
    let mut params = initial;
    let mut failures = Vec::new();
    for retry in 0..=params.max_retries() {
        match attempt(&params) {
            Ok(v) => return Ok((v, params, retry)),
            Err(AttemptError::Sieve(e, found)) if retryable(&e) => {
                failures.push(AttemptFailure {
                    smoothness_bound: params.smoothness_bound(),
                    interval_half_width: params.interval_half_width(),
                    relations_found: found,
                    reason: e.to_string(),
                });
                params = params.escalated();
            }
            Err(AttemptError::Sieve(e, _)) => return Err(FactorError::from(e).into()),
            Err(AttemptError::Other(e)) => return Err(e),
        }
    }
    Err(FactorError::Failed { attempts: failures }.into())
}

/// Parameters for `n`: `params` when given (and built for `n`), otherwise
/// the defaults.
pub fn resolve_params(
    n: &Natural,
    params: Option<SieveParams>,
) -> Result<SieveParams, FactorError> {
    match params {
        Some(p) if p.n() != n => Err(FactorError::InvalidInput(format!(
            "parameters were built for {}, not {n}",
            p.n()
        ))),
        Some(p) => Ok(p),
        None => Ok(default_params(n)?),
    }
}

fn sieve_once(params: &SieveParams) -> Result<FactorResult, AttemptError<FactorError>> {
    let n = params.n();
    let fb = build_factor_base(n, params.smoothness_bound()).map_err(|e| (e, 0))?;
    let relations = collect_relations(params, &fb).map_err(|e| match e {
        SieveError::InsufficientRelations { found, .. } => (e, found),
        e => (e, 0),
    })?;
    let mut result = factor_from_relations(n, &fb, &relations).map_err(|e| (e, relations.len()))?;
    result.stats = Some(SieveStats {
        params: params.clone(),
        factor_base_size: fb.len(),
        relations: relations.len(),
        retries: 0,
    });
    Ok(result)
}

/// Factors `n` with automatically chosen parameters.
pub fn factor(n: &Natural) -> Result<FactorResult, FactorError> {
    factor_with(n, None)
}

/// Factors `n`, starting from `params` when given.
pub fn factor_with(n: &Natural, params: Option<SieveParams>) -> Result<FactorResult, FactorError> {
    if let Some(done) = short_circuit(n) {
        return done;
    }
    let params = resolve_params(n, params)?;
    let (mut result, _, retries) = with_escalation(params, sieve_once)?;
    if let Some(stats) = result.stats.as_mut() {
        stats.retries = retries;
    }
    Ok(result)
}
