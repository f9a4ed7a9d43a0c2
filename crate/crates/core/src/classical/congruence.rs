//! Congruences of squares from null-space selections, and gcd extraction.

use num_traits::One;
use serde::Serialize;

use super::factor_base::FactorBase;
use super::linalg::{gf2_nullspace, Gf2Matrix, Selection};
use super::params::SieveParams;
use super::relations::Relation;
use super::SieveError;
use crate::numtheory::{gcd, Natural};

/// A nontrivial split `n = f1 * f2` with `1 < f1 <= f2 < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorResult {
    pub f1: Natural,
    pub f2: Natural,
    /// `(x, y)` with `x^2 = y^2 (mod n)`. Absent for inputs split without
    /// sieving (even `n`).
    pub witness: Option<(Natural, Natural)>,
    /// Dependencies tried in the successful attempt.
    pub attempts: usize,
    pub stats: Option<SieveStats>,
}

/// How a sieved factorization was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SieveStats {
    pub params: SieveParams,
    pub factor_base_size: usize,
    pub relations: usize,
    /// Parameter escalations before success.
    pub retries: usize,
}

impl FactorResult {
    pub(crate) fn split(n: &Natural, f: Natural) -> (Natural, Natural) {
        let g = n / &f;
        if f <= g {
            (f, g)
        } else {
            (g, f)
        }
    }
}

/// `x = ∏ x_i mod n` and `y = ∏ p_j^(E_j / 2) mod n`, where `E` is the
/// summed exponent vector of the selected relations.
pub fn assemble_congruence(
    relations: &[Relation],
    selection: &Selection,
    fb: &FactorBase,
    n: &Natural,
) -> Result<(Natural, Natural), SieveError> {
    let mut x = Natural::one();
    let mut summed = vec![0u64; fb.len()];
    for i in selection.ones() {
        let rel = &relations[i];
        if rel.exponents.len() != fb.len() {
            return Err(SieveError::InconsistentFactorBase);
        }
        x = x * &rel.x % n;
        for (acc, &e) in summed.iter_mut().zip(&rel.exponents) {
            *acc += e as u64;
        }
    }
    let mut y = Natural::one() % n;
    for (&p, &e) in fb.primes().iter().zip(&summed) {
        if e % 2 == 1 {
            return Err(SieveError::InvalidDependency);
        }
        if e > 0 {
            y = y * Natural::from(p).modpow(&Natural::from(e / 2), n) % n;
        }
    }
    Ok((x, y))
}

/// First congruence whose `gcd(x - y, n)` is a proper divisor.
pub fn extract_factors<I>(n: &Natural, congruences: I) -> Result<FactorResult, SieveError>
where
    I: IntoIterator<Item = (Natural, Natural)>,
{
    let mut attempts = 0;
    for (x, y) in congruences {
        attempts += 1;
        let (x, y) = (x % n, y % n);
        let diff = if x >= y { &x - &y } else { n - (&y - &x) };
        let f = gcd(&diff, n);
        if !f.is_one() && f != *n {
            let (f1, f2) = FactorResult::split(n, f);
            return Ok(FactorResult {
                f1,
                f2,
                witness: Some((x, y)),
                attempts,
                stats: None,
            });
        }
    }
    Err(SieveError::AllDependenciesTrivial { tried: attempts })
}

/// Null-space basis vectors, then every pairwise sum of them.
pub fn candidate_selections(basis: &[Selection]) -> impl Iterator<Item = Selection> + '_ {
    let singles = basis.iter().cloned();
    let pairs = (0..basis.len()).flat_map(move |i| {
        (i + 1..basis.len()).map(move |j| {
            let mut s = basis[i].clone();
            s.xor_assign(&basis[j]);
            s
        })
    });
    singles.chain(pairs)
}

/// Linear algebra and gcd extraction for an already collected relation set.
pub fn factor_from_relations(
    n: &Natural,
    fb: &FactorBase,
    relations: &[Relation],
) -> Result<FactorResult, SieveError> {
    let matrix: Gf2Matrix = super::linalg::build_gf2_matrix(relations)?;
    let basis = gf2_nullspace(&matrix);
    if basis.is_empty() {
        return Err(SieveError::NoDependency {
            relations: relations.len(),
        });
    }
    let mut failure = None;
    let congruences = candidate_selections(&basis).map_while(|s| {
        match assemble_congruence(relations, &s, fb, n) {
            Ok(c) => Some(c),
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    });
    let result = extract_factors(n, congruences);
    match failure {
        Some(e) => Err(e),
        None => result,
    }
}
