//! Exact number-theoretic primitives.
//!
//! Everything here works on [`Natural`] (an arbitrary-precision unsigned
//! integer) and never touches floating point. A few `u64` helpers exist for
//! the hot loops of the sieve, where the moduli are factor-base primes.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision unsigned integer used for `n`, `x`, primes and gcds.
pub type Natural = BigUint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("zero modulus")]
    ZeroModulus,
    #[error("invalid odd prime: {0}")]
    InvalidOddPrime(Natural),
}

/// Value of the Legendre symbol `(a/p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LegendreValue {
    MinusOne,
    Zero,
    One,
}

impl LegendreValue {
    pub fn as_i8(self) -> i8 {
        match self {
            LegendreValue::MinusOne => -1,
            LegendreValue::Zero => 0,
            LegendreValue::One => 1,
        }
    }
}

impl fmt::Display for LegendreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// All primes `p <= bound` in ascending order. Bounds below 2 give an empty list.
pub fn sieve_of_eratosthenes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let bound = usize::try_from(bound).expect("sieve bound exceeds address space");
    // index i stands for the odd number 2i + 1
    let half = bound / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= bound {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|&(i, &c)| !c && 2 * i < bound)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    primes
}

/// `base^exp mod modulus`.
pub fn mod_pow(base: &Natural, exp: &Natural, modulus: &Natural) -> Result<Natural, NumError> {
    if modulus.is_zero() {
        return Err(NumError::ZeroModulus);
    }
    Ok(base.modpow(exp, modulus))
}

/// Legendre symbol `(a/p)` by Euler's criterion: `a^((p-1)/2) mod p`, with
/// the residue `p - 1` read as `-1`.
///
/// `p` must be an odd prime. Even `p`, `p < 3`, or an Euler residue outside
/// `{0, 1, p-1}` (which only a composite `p` can produce) is rejected.
pub fn legendre_symbol(a: &Natural, p: &Natural) -> Result<LegendreValue, NumError> {
    if p.is_even() || *p < Natural::from(3u32) {
        return Err(NumError::InvalidOddPrime(p.clone()));
    }
    if let (Some(a_small), Some(p_small)) = (a.to_u64(), p.to_u64()) {
        return legendre_u64(a_small % p_small, p_small);
    }
    let exp: Natural = (p - 1u32) >> 1;
    let r = mod_pow(a, &exp, p)?;
    if r.is_zero() {
        Ok(LegendreValue::Zero)
    } else if r.is_one() {
        Ok(LegendreValue::One)
    } else if r == p - 1u32 {
        Ok(LegendreValue::MinusOne)
    } else {
        Err(NumError::InvalidOddPrime(p.clone()))
    }
}

/// Euler-criterion Legendre symbol for word-sized arguments.
pub fn legendre_u64(a: u64, p: u64) -> Result<LegendreValue, NumError> {
    if p.is_multiple_of(2) || p < 3 {
        return Err(NumError::InvalidOddPrime(Natural::from(p)));
    }
    match mod_pow_u64(a % p, (p - 1) / 2, p) {
        0 => Ok(LegendreValue::Zero),
        1 => Ok(LegendreValue::One),
        r if r == p - 1 => Ok(LegendreValue::MinusOne),
        _ => Err(NumError::InvalidOddPrime(Natural::from(p))),
    }
}

/// `base^exp mod modulus` on machine words. `modulus` must be nonzero.
pub fn mod_pow_u64(base: u64, mut exp: u64, modulus: u64) -> u64 {
    assert!(modulus != 0, "zero modulus");
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for machine words. The first twelve prime
/// bases are exact for every `n < 2^64`.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    'bases: for a in BASES {
        let mut x = mod_pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Greatest common divisor; `gcd(a, 0) = a`.
pub fn gcd(a: &Natural, b: &Natural) -> Natural {
    a.gcd(b)
}

/// `floor(sqrt(n))` by integer Newton iteration.
pub fn isqrt_floor(n: &Natural) -> Natural {
    if *n < Natural::from(2u32) {
        return n.clone();
    }
    // 2^ceil(bits/2) is an upper bound on the root; Newton then decreases
    // monotonically onto the floor.
    let mut x = Natural::one() << n.bits().div_ceil(2);
    loop {
        let y: Natural = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Smallest `s` with `s^2 >= n`.
pub fn isqrt_ceil(n: &Natural) -> Natural {
    let s = isqrt_floor(n);
    if &s * &s == *n {
        s
    } else {
        s + 1u32
    }
}

/// `Some(root)` when `n` is a perfect square.
pub fn exact_sqrt(n: &Natural) -> Option<Natural> {
    let s = isqrt_floor(n);
    (&s * &s == *n).then_some(s)
}

/// A square root of `a` modulo an odd prime `p` (Tonelli-Shanks), or `None`
/// if `a` is a non-residue.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if p == 2 || a == 0 {
        return Some(a);
    }
    if mod_pow_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mul = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    if p % 4 == 3 {
        return Some(mod_pow_u64(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_u64(z, q, p);
    let mut t = mod_pow_u64(a, q, p);
    let mut r = mod_pow_u64(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul(t2, t2);
            i += 1;
        }
        let b = mod_pow_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(r)
}

/// Outcome of trial division up to a fixed limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialDivision {
    /// No divisor up to `sqrt(n)`: `n` is prime.
    Prime,
    /// Smallest prime divisor found.
    Composite(u64),
    /// The limit was reached below `sqrt(n)` without finding a divisor.
    Inconclusive,
}

/// Trial-divide `n >= 2` by the given ascending primes.
pub fn trial_division(n: &Natural, primes: &[u64]) -> TrialDivision {
    if let Some(v) = n.to_u128() {
        for &p in primes {
            let pw = p as u128;
            if pw * pw > v {
                return TrialDivision::Prime;
            }
            if v % pw == 0 {
                return if v == pw {
                    TrialDivision::Prime
                } else {
                    TrialDivision::Composite(p)
                };
            }
        }
        return match primes.last() {
            Some(&p) if (p as u128) * (p as u128) > v => TrialDivision::Prime,
            _ => TrialDivision::Inconclusive,
        };
    }
    for &p in primes {
        let pn = Natural::from(p);
        if &pn * &pn > *n {
            return TrialDivision::Prime;
        }
        if (n % p).is_zero() {
            return if *n == pn {
                TrialDivision::Prime
            } else {
                TrialDivision::Composite(p)
            };
        }
    }
    match primes.last() {
        Some(&p) if Natural::from(p) * Natural::from(p) > *n => TrialDivision::Prime,
        _ => TrialDivision::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    fn is_prime_naive(n: u64) -> bool {
        n >= 2
            && (2..n)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn miller_rabin_matches_naive_below_100k() {
        for n in 0..100_000u64 {
            assert_eq!(is_prime_u64(n), is_prime_naive(n), "n = {n}");
        }
    }

    #[test]
    fn miller_rabin_large_words() {
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(is_prime_u64(4_294_967_291));
        assert!(!is_prime_u64(4_294_967_291 * 4_294_967_279));
        // Strong pseudoprime to bases 2 through 23.
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(!is_prime_u64(u64::MAX));
    }

    #[test]
    fn sieve_small_bounds() {
        assert_eq!(sieve_of_eratosthenes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_of_eratosthenes(2), vec![2]);
        assert!(sieve_of_eratosthenes(1).is_empty());
        assert!(sieve_of_eratosthenes(0).is_empty());
        assert_eq!(sieve_of_eratosthenes(3), vec![2, 3]);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let primes = sieve_of_eratosthenes(100);
        assert_eq!(primes.len(), 25);
        assert_eq!(*primes.last().unwrap(), 97);
        for bound in [97u64, 98, 99, 1000, 7919, 7920] {
            let expected: Vec<u64> = (2..=bound).filter(|&k| is_prime_naive(k)).collect();
            assert_eq!(sieve_of_eratosthenes(bound), expected, "bound {bound}");
        }
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(&nat(2), &nat(10), &nat(1000)).unwrap(), nat(24));
        assert_eq!(mod_pow(&nat(12345), &nat(0), &nat(97)).unwrap(), nat(1));
        assert_eq!(
            mod_pow(&nat(3), &nat(5), &nat(0)),
            Err(NumError::ZeroModulus)
        );
    }

    #[test]
    fn mod_pow_matches_repeated_multiplication() {
        // naive O(exp) oracle
        let (base, exp, m) = (7u64, 100_003u64, 1_000_033u64);
        let mut acc = 1u64;
        for _ in 0..exp {
            acc = acc * base % m;
        }
        assert_eq!(mod_pow(&nat(base), &nat(exp), &nat(m)).unwrap(), nat(acc));
        assert_eq!(mod_pow_u64(base, exp, m), acc);
    }

    #[test]
    fn mod_pow_exhaustive_small_domain() {
        // every a, m < 2^10 on a spread of exponents; naive loop as oracle
        for m in 1u64..1024 {
            for a in (0u64..1024).step_by(37) {
                let mut acc = 1 % m;
                for e in 0u64..1024 {
                    if e % 97 == 0 || e < 4 {
                        assert_eq!(
                            mod_pow(&nat(a), &nat(e), &nat(m)).unwrap(),
                            nat(acc),
                            "{a}^{e} mod {m}"
                        );
                        assert_eq!(mod_pow_u64(a, e, m), acc);
                    }
                    acc = acc * a % m;
                }
            }
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(
            legendre_symbol(&nat(14), &nat(7)).unwrap(),
            LegendreValue::Zero
        );
        assert_eq!(
            legendre_symbol(&nat(2), &nat(7)).unwrap(),
            LegendreValue::One
        );
        assert_eq!(
            legendre_symbol(&nat(3), &nat(7)).unwrap(),
            LegendreValue::MinusOne
        );
        assert!(legendre_symbol(&nat(3), &nat(2)).is_err());
        assert!(legendre_symbol(&nat(3), &nat(8)).is_err());
        assert!(legendre_symbol(&nat(3), &nat(1)).is_err());
        // composite modulus caught by the Euler residue check
        assert!(legendre_symbol(&nat(2), &nat(15)).is_err());
    }

    #[test]
    fn legendre_matches_square_table() {
        for p in sieve_of_eratosthenes(200).into_iter().skip(1) {
            let squares: std::collections::BTreeSet<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let expected = if a == 0 {
                    LegendreValue::Zero
                } else if squares.contains(&a) {
                    LegendreValue::One
                } else {
                    LegendreValue::MinusOne
                };
                assert_eq!(
                    legendre_symbol(&nat(a), &nat(p)).unwrap(),
                    expected,
                    "({a}/{p})"
                );
            }
        }
    }

    #[test]
    fn legendre_big_argument() {
        // 15347 mod 17 = 14 = 7^2 mod 17 and the big-integer path agrees
        let big: Natural = Natural::from(15347u32) + Natural::from(17u32) * (Natural::one() << 200);
        assert_eq!(legendre_symbol(&big, &nat(17)).unwrap(), LegendreValue::One);
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(&nat(12), &nat(18)), nat(6));
        assert_eq!(gcd(&nat(15347), &nat(0)), nat(15347));
        assert_eq!(gcd(&nat(0), &nat(0)), nat(0));
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt_ceil(&nat(16)), nat(4));
        assert_eq!(isqrt_ceil(&nat(15347)), nat(124));
        assert_eq!(isqrt_ceil(&nat(17)), nat(5));
        assert_eq!(isqrt_ceil(&nat(1)), nat(1));
        assert_eq!(isqrt_floor(&nat(15)), nat(3));
        assert_eq!(exact_sqrt(&nat(144)), Some(nat(12)));
        assert_eq!(exact_sqrt(&nat(145)), None);
    }

    #[test]
    fn sqrt_mod_prime_all_small_primes() {
        for p in sieve_of_eratosthenes(600) {
            for a in 0..p {
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a, "sqrt({a}) mod {p}"),
                    None => assert!((0..p).all(|x| x * x % p != a)),
                }
            }
        }
    }

    #[test]
    fn trial_division_cases() {
        let primes = sieve_of_eratosthenes(1000);
        assert_eq!(trial_division(&nat(13), &primes), TrialDivision::Prime);
        assert_eq!(trial_division(&nat(2), &primes), TrialDivision::Prime);
        assert_eq!(
            trial_division(&nat(15347), &primes),
            TrialDivision::Composite(103)
        );
        assert_eq!(
            trial_division(&nat(1_000_003), &primes),
            TrialDivision::Inconclusive
        );
        assert_eq!(
            trial_division(&nat(1_000_003), &sieve_of_eratosthenes(1100)),
            TrialDivision::Prime
        );
        let big = nat(1_000_003) * nat(1_000_033);
        assert_eq!(trial_division(&big, &primes), TrialDivision::Inconclusive);
    }

    fn arb_natural() -> impl Strategy<Value = Natural> {
        proptest::collection::vec(any::<u32>(), 1..=8).prop_map(Natural::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn isqrt_ceil_brackets(n in arb_natural()) {
            prop_assume!(!n.is_zero());
            let s = isqrt_ceil(&n);
            prop_assert!(&s * &s >= n);
            let t = &s - 1u32;
            prop_assert!(&t * &t < n);
        }

        #[test]
        fn gcd_divides_and_commutes(a in arb_natural(), b in arb_natural(), c in arb_natural()) {
            let g = gcd(&a, &b);
            prop_assert_eq!(&g, &gcd(&b, &a));
            if !g.is_zero() {
                prop_assert!((&a % &g).is_zero());
                prop_assert!((&b % &g).is_zero());
            }
            prop_assert_eq!(gcd(&gcd(&a, &b), &c), gcd(&a, &gcd(&b, &c)));
        }
    }
}
