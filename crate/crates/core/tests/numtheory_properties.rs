use num_bigint::RandBigInt;
use qsieve::numtheory::{
    exact_sqrt, isqrt_ceil, isqrt_floor, legendre_u64, mod_pow, sieve_of_eratosthenes,
    LegendreValue, Natural,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn isqrt_brackets_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1_000_000u32 {
        let bits = 1 + (i % 256) as u64;
        let n = rng.gen_biguint(bits);
        let f = isqrt_floor(&n);
        assert!(&f * &f <= n && (&f + 1u32) * (&f + 1u32) > n, "floor {n}");
        let c = isqrt_ceil(&n);
        assert!(&c * &c >= n, "ceil {n}");
        if c > Natural::from(0u32) {
            assert!((&c - 1u32) * (&c - 1u32) < n, "ceil {n}");
        }
        assert_eq!(exact_sqrt(&n).is_some(), f == c);
    }
}

#[test]
fn euler_criterion_matches_quadratic_residues() {
    for p in sieve_of_eratosthenes(2000).into_iter().skip(1) {
        let mut residue = vec![false; p as usize];
        for x in 1..p {
            residue[(x * x % p) as usize] = true;
        }
        for a in 0..p {
            let expect = if a == 0 {
                LegendreValue::Zero
            } else if residue[a as usize] {
                LegendreValue::One
            } else {
                LegendreValue::MinusOne
            };
            assert_eq!(legendre_u64(a, p).unwrap(), expect, "({a}/{p})");
        }
    }
}

#[test]
fn fermat_little_theorem() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in sieve_of_eratosthenes(5000).into_iter().step_by(7) {
        let a = Natural::from(rng.gen_range(1..p));
        let p = Natural::from(p);
        assert_eq!(mod_pow(&a, &(&p - 1u32), &p).unwrap(), Natural::from(1u32));
    }
}
