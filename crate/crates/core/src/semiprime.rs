//! Seeded random primes and semiprimes for tests and benchmarks.
//!
//! Primes are limited to 32 bits, so semiprimes reach 64 bits. Primality is
//! decided by trial division by every prime up to `2^16 + 1`.

use std::sync::OnceLock;

use rand::Rng;

use crate::numtheory::{sieve_of_eratosthenes, trial_division, Natural, TrialDivision};

const MAX_PRIME_BITS: u32 = 32;
const MAX_TRIES: usize = 1 << 16;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_of_eratosthenes((1 << 16) + 1))
}

/// Primality for `n < 2^32`.
pub fn is_prime_u32(n: u64) -> bool {
    assert!(n >> MAX_PRIME_BITS == 0, "{n} exceeds 32 bits");
    if n < 2 {
        return false;
    }
    matches!(
        trial_division(&Natural::from(n), small_primes()),
        TrialDivision::Prime
    )
}

/// A uniformly drawn start point in `[lo, hi]`, advanced to the next prime.
/// `None` when the range holds no prime or exceeds 32 bits.
pub fn prime_in_range<R: Rng>(lo: u64, hi: u64, rng: &mut R) -> Option<u64> {
    if lo > hi || hi >> MAX_PRIME_BITS != 0 {
        return None;
    }
    for _ in 0..MAX_TRIES {
        let start = rng.gen_range(lo..=hi);
        if let Some(p) = (start..=hi).take(2048).find(|&c| is_prime_u32(c)) {
            return Some(p);
        }
    }
    (lo..=hi).find(|&c| is_prime_u32(c))
}

/// A prime of exactly `bits` bits, `2 <= bits <= 32`.
pub fn random_prime<R: Rng>(bits: u32, rng: &mut R) -> u64 {
    assert!(
        (2..=MAX_PRIME_BITS).contains(&bits),
        "prime size {bits} outside 2..=32 bits"
    );
    prime_in_range(1 << (bits - 1), (1 << bits) - 1, rng).expect("every bit size holds a prime")
}

/// `n = p * q` with `p < q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semiprime {
    pub n: Natural,
    pub p: u64,
    pub q: u64,
}

impl Semiprime {
    fn new(a: u64, b: u64) -> Self {
        let (p, q) = if a < b { (a, b) } else { (b, a) };
        Self {
            n: Natural::from(p) * q,
            p,
            q,
        }
    }
}

/// A semiprime of exactly `bits` bits with distinct odd prime factors of
/// about `bits / 2` bits each; `8 <= bits <= 64`.
pub fn random_semiprime<R: Rng>(bits: u32, rng: &mut R) -> Semiprime {
    assert!(
        (8..=64).contains(&bits),
        "semiprime size {bits} outside 8..=64 bits"
    );
    let low = bits / 2;
    let high = bits - low;
    loop {
        let s = Semiprime::new(random_prime(low, rng), random_prime(high, rng));
        if s.p != s.q && s.p != 2 && s.n.bits() == bits as u64 {
            return s;
        }
    }
}

/// A semiprime whose distinct odd prime factors both lie in `[lo, hi]`.
pub fn semiprime_in_range<R: Rng>(lo: u64, hi: u64, rng: &mut R) -> Option<Semiprime> {
    let lo = lo.max(3);
    for _ in 0..MAX_TRIES {
        let p = prime_in_range(lo, hi, rng)?;
        let q = prime_in_range(lo, hi, rng)?;
        if p != q {
            return Some(Semiprime::new(p, q));
        }
    }
    None
}
