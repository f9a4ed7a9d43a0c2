use num_integer::Integer;
use num_traits::ToPrimitive;

use super::SieveError;
use crate::numtheory::{
    legendre_u64, sieve_of_eratosthenes, sqrt_mod_prime, LegendreValue, Natural,
};

/// Primes `p <= B` over which relations are factored: 2, plus every odd
/// prime for which `n` is a quadratic residue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBase {
    n: Natural,
    bound: u64,
    primes: Vec<u64>,
}

impl FactorBase {
    /// Builds a base from an explicit prime list (e.g. one read out of a
    /// measured quantum register). The list is checked against the
    /// membership rule.
    pub fn from_primes(n: &Natural, bound: u64, primes: Vec<u64>) -> Result<Self, SieveError> {
        if primes.is_empty() {
            return Err(SieveError::EmptyFactorBase { bound });
        }
        let ascending = primes.windows(2).all(|w| w[0] < w[1]);
        let members = primes
            .iter()
            .all(|&p| p <= bound && (p == 2 || residue_class(n, p) == LegendreValue::One));
        if !ascending || !members {
            return Err(SieveError::InvalidParams(format!(
                "{primes:?} is not an ascending factor base for n = {n}"
            )));
        }
        Ok(Self {
            n: n.clone(),
            bound,
            primes,
        })
    }

    pub fn n(&self) -> &Natural {
        &self.n
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Residues `r` with `r^2 = n (mod p)`, one list per prime.
    pub fn roots(&self) -> Vec<Vec<u64>> {
        self.primes
            .iter()
            .map(|&p| {
                let a = (&self.n % p).to_u64().expect("residue fits a word");
                let r = sqrt_mod_prime(a, p).expect("factor-base prime admits a root");
                if p == 2 || r == 0 || r == p - r {
                    vec![r]
                } else {
                    vec![r.min(p - r), r.max(p - r)]
                }
            })
            .collect()
    }
}

fn residue_class(n: &Natural, p: u64) -> LegendreValue {
    let a = (n % p).to_u64().expect("residue fits a word");
    legendre_u64(a, p).unwrap_or(LegendreValue::Zero)
}

/// `[2] ∪ { odd prime p <= B : (n/p) = +1 }`, ascending.
pub fn build_factor_base(n: &Natural, bound: u64) -> Result<FactorBase, SieveError> {
    if bound < 3 {
        return Err(SieveError::InvalidParams(format!(
            "smoothness bound must be at least 3, got {bound}"
        )));
    }
    if n.is_even() {
        return Err(SieveError::EvenInput);
    }
    let primes: Vec<u64> = sieve_of_eratosthenes(bound)
        .into_iter()
        .filter(|&p| p == 2 || residue_class(n, p) == LegendreValue::One)
        .collect();
    if primes.is_empty() {
        return Err(SieveError::EmptyFactorBase { bound });
    }
    Ok(FactorBase {
        n: n.clone(),
        bound,
        primes,
    })
}
