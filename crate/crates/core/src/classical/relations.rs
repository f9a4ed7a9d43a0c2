//! Smooth relation collection over `x = a, a+1, ..., b`.
//!
//! The interval is cut into blocks. Inside a block, every factor-base prime
//! is stepped through the positions `x = r (mod p)` where `r^2 = n (mod p)`,
//! and the residual `x^2 - n` is divided by `p` as often as it divides
//! (covering prime powers). Positions whose residual reaches 1 are smooth;
//! their exponent vectors are then recomputed by plain trial division over the
//! whole base, so a kept relation is always an exact factorization.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::factor_base::FactorBase;
use super::params::{Execution, SieveParams};
use super::SieveError;
use crate::numtheory::{isqrt_ceil, Natural};

const BLOCK_LEN: u64 = 1 << 15;

/// `x` with `x^2 - n = ∏ p_i^e_i` over the factor base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    pub x: Natural,
    pub value: Natural,
    pub exponents: Vec<u32>,
}

impl Relation {
    /// `∏ p_i^e_i` recomputed from the exponent vector.
    pub fn product(&self, primes: &[u64]) -> Natural {
        primes
            .iter()
            .zip(&self.exponents)
            .fold(Natural::one(), |acc, (&p, &e)| {
                acc * Natural::from(p).pow(e)
            })
    }
}

/// The normalized interval `[ceil(sqrt n), ceil(sqrt n) + 2M]`.
pub fn sieve_interval(params: &SieveParams) -> (Natural, Natural) {
    let a = isqrt_ceil(params.n());
    let b = &a + Natural::from(params.interval_half_width()) * 2u32;
    (a, b)
}

/// Relations for `params`, stopping once `|fb| + 1 + extra` are found.
pub fn collect_relations(
    params: &SieveParams,
    fb: &FactorBase,
) -> Result<Vec<Relation>, SieveError> {
    let (a, b) = sieve_interval(params);
    let needed = fb.len() + 1;
    let target = needed + params.extra_relations();
    let found = collect_relations_in(params.n(), fb, &a, &b, Some(target), params.execution());
    if found.len() < needed {
        return Err(SieveError::InsufficientRelations {
            found: found.len(),
            needed,
        });
    }
    Ok(found)
}

/// Every smooth `x` in `[start, end]`, ascending, truncated to `limit` when given.
pub fn collect_relations_in(
    n: &Natural,
    fb: &FactorBase,
    start: &Natural,
    end: &Natural,
    limit: Option<usize>,
    execution: Execution,
) -> Vec<Relation> {
    if start > end || limit == Some(0) {
        return Vec::new();
    }
    let sieve = BlockSieve::new(n, fb);
    let span = end - start + 1u32;
    let block_count = (&span + (BLOCK_LEN - 1)) / BLOCK_LEN;
    let block_count = block_count
        .to_u64()
        .expect("interval block count fits a word");
    let block = |k: u64| {
        let lo = start + Natural::from(k * BLOCK_LEN);
        let len = (end - &lo + 1u32)
            .to_u64()
            .map_or(BLOCK_LEN, |l| l.min(BLOCK_LEN));
        sieve.run(&lo, len)
    };

    let batch = batch_width(execution);
    let mut out = Vec::new();
    let mut next = 0u64;
    while next < block_count {
        let upto = (next + batch).min(block_count);
        let found: Vec<Vec<Relation>> = run_batch(next..upto, execution, &block);
        for rels in found {
            out.extend(rels);
        }
        if let Some(cap) = limit {
            if out.len() >= cap {
                out.truncate(cap);
                break;
            }
        }
        next = upto;
    }
    out
}

fn batch_width(execution: Execution) -> u64 {
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => 2 * rayon::current_num_threads() as u64,
        _ => 1,
    }
}

fn run_batch<F>(range: std::ops::Range<u64>, execution: Execution, block: &F) -> Vec<Vec<Relation>>
where
    F: Fn(u64) -> Vec<Relation> + Sync,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => range.into_par_iter().map(block).collect(),
        _ => range.map(block).collect(),
    }
}

/// Exact factorization of `value` over `primes`; `None` if a cofactor remains.
pub fn factor_over(value: &Natural, primes: &[u64]) -> Option<Vec<u32>> {
    if value.is_zero() {
        return None;
    }
    let mut rest = value.clone();
    let exponents = primes
        .iter()
        .map(|&p| {
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(&Natural::from(p));
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            e
        })
        .collect();
    rest.is_one().then_some(exponents)
}

struct BlockSieve<'a> {
    n: &'a Natural,
    primes: &'a [u64],
    roots: Vec<Vec<u64>>,
}

impl<'a> BlockSieve<'a> {
    fn new(n: &'a Natural, fb: &'a FactorBase) -> Self {
        Self {
            n,
            primes: fb.primes(),
            roots: fb.roots(),
        }
    }

    fn run(&self, lo: &Natural, len: u64) -> Vec<Relation> {
        let hi = lo + Natural::from(len);
        // x^2 fits in u128 whenever x < 2^64
        match (lo.to_u64(), hi.to_u64(), self.n.to_u128()) {
            (Some(lo64), Some(_), Some(n128)) => self.sieve_block(lo, len, |i| {
                let x = (lo64 + i) as u128;
                WordResidual((x * x).saturating_sub(n128))
            }),
            _ => self.sieve_block(lo, len, |i| {
                let x = lo + Natural::from(i);
                let sq = &x * &x;
                BigResidual(if sq > *self.n {
                    sq - self.n
                } else {
                    Natural::zero()
                })
            }),
        }
    }

    fn sieve_block<R: Residual>(
        &self,
        lo: &Natural,
        len: u64,
        value_at: impl Fn(u64) -> R,
    ) -> Vec<Relation> {
        let mut residual: Vec<R> = (0..len).map(&value_at).collect();
        for (&p, roots) in self.primes.iter().zip(&self.roots) {
            let offset = (lo % p).to_u64().expect("residue fits a word");
            for &r in roots {
                let mut i = (r + p - offset) % p;
                while i < len {
                    let slot = &mut residual[i as usize];
                    while slot.divide(p) {}
                    i += p;
                }
            }
        }
        residual
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_unit())
            .filter_map(|(i, _)| {
                let x = lo + Natural::from(i as u64);
                let value = &x * &x - self.n;
                let exponents = factor_over(&value, self.primes)?;
                Some(Relation {
                    x,
                    value,
                    exponents,
                })
            })
            .collect()
    }
}

trait Residual {
    /// Divides once by `p` if possible.
    fn divide(&mut self, p: u64) -> bool;
    fn is_unit(&self) -> bool;
}

struct WordResidual(u128);

impl Residual for WordResidual {
    fn divide(&mut self, p: u64) -> bool {
        let p = p as u128;
        if self.0 != 0 && self.0.is_multiple_of(p) {
            self.0 /= p;
            true
        } else {
            false
        }
    }

    fn is_unit(&self) -> bool {
        self.0 == 1
    }
}

struct BigResidual(Natural);

impl Residual for BigResidual {
    fn divide(&mut self, p: u64) -> bool {
        if self.0.is_zero() {
            return false;
        }
        let (q, r) = self.0.div_rem(&Natural::from(p));
        if r.is_zero() {
            self.0 = q;
            true
        } else {
            false
        }
    }

    fn is_unit(&self) -> bool {
        self.0.is_one()
    }
}
