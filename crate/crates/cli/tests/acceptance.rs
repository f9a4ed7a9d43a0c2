//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qsieve::classical::{
    build_factor_base, collect_relations_in, default_params, factor, gf2_nullspace, sieve_interval,
    Execution, Gf2Matrix, Selection,
};
use qsieve::qsim::{MeasureMode, QuantumState, RegisterSpec};
use qsieve::quantum::{
    run_pipeline_with, step1_legendre_and_measure, step1_prime_superposition,
    step2_divide_and_measure, step2_sequence_superposition, PipelineOptions,
};
use qsieve::semiprime::{random_semiprime, semiprime_in_range};
use qsieve::Natural;
use qsieve_cli::bench::cmd_bench;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROBABILITY_TOL: f64 = 1e-9;
const QFT_TOL: f64 = 1e-9;
const SIGMA_BOUND: f64 = 3.0;
const SAMPLED_DRAWS: usize = 100_000;
const WORKED_EXAMPLE_LIMIT: Duration = Duration::from_secs(5);
const FACTOR_BASE_LIMIT: Duration = Duration::from_secs(1);
const EQUIVALENCE_LIMIT: Duration = Duration::from_secs(300);

enum Status {
    Pass,
    /// A soft check that did not hold; reported but not counted as a failure.
    Warn,
}

type Outcome = Result<(Status, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

fn nat(v: u64) -> Natural {
    Natural::from(v)
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qsieve"))
        .args(["factor", "15347", "--mode", "both", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}", out.status.code())
    })?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let expected: BTreeSet<&str> = ["103", "149"].into();
    for p in v["pipelines"].as_array().ok_or("no pipelines")? {
        let got: BTreeSet<&str> = [
            p["f1"].as_str().unwrap_or(""),
            p["f2"].as_str().unwrap_or(""),
        ]
        .into();
        ensure(got == expected, || {
            format!("{} returned {got:?}", p["pipeline"])
        })?;
    }
    ensure(v["verdict"] == "EQUAL", || {
        format!("verdict {}", v["verdict"])
    })?;
    ensure(elapsed < WORKED_EXAMPLE_LIMIT, || {
        format!("took {}", ms(elapsed))
    })?;
    Ok((
        Status::Pass,
        format!(
            "both pipelines give {{103, 149}}, verdict EQUAL, {}",
            ms(elapsed)
        ),
    ))
}

fn brute_prime(p: u64) -> bool {
    p >= 2 && (2..p).all(|d| !p.is_multiple_of(d))
}

fn factor_base_reproduction() -> Outcome {
    let n = nat(15347);
    let start = Instant::now();
    let fb = build_factor_base(&n, 30).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut brute = vec![2u64];
    brute.extend((3..=30).filter(|&p| brute_prime(p) && (0..p).any(|x| (x * x) % p == 15347 % p)));
    ensure(fb.primes() == [2, 17, 23, 29], || {
        format!("built {:?}", fb.primes())
    })?;
    ensure(fb.primes() == brute.as_slice(), || {
        format!("brute force gives {brute:?}")
    })?;
    ensure(elapsed < FACTOR_BASE_LIMIT, || {
        format!("took {}", ms(elapsed))
    })?;
    Ok((
        Status::Pass,
        format!(
            "[2, 17, 23, 29], matches brute-force solvability, {}",
            ms(elapsed)
        ),
    ))
}

/// A random sparse state over two registers, returned with its unnormalized
/// amplitudes.
fn random_two_register_state(rng: &mut ChaCha8Rng) -> (QuantumState, Vec<(Vec<u64>, Complex64)>) {
    let wa = rng.gen_range(1..=3u32);
    let (spec_b, values_b): (RegisterSpec, Vec<u64>) = if rng.gen_bool(0.5) {
        let wb = rng.gen_range(1..=2u32);
        (RegisterSpec::qubits("B", wb), (0..1u64 << wb).collect())
    } else {
        let mut set: BTreeSet<u64> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(1..50))
            .collect();
        set.insert(0);
        let values: Vec<u64> = set.into_iter().collect();
        (RegisterSpec::values("B", values.clone()), values)
    };
    let mut terms = Vec::new();
    for a in 0..1u64 << wa {
        for &b in &values_b {
            if rng.gen_bool(0.6) {
                terms.push((
                    vec![a, b],
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
        }
    }
    if terms.is_empty() {
        terms.push((vec![0, 0], Complex64::new(1.0, 0.0)));
    }
    let state =
        QuantumState::from_terms(vec![RegisterSpec::qubits("A", wa), spec_b], terms.clone())
            .unwrap();
    (state, terms)
}

fn partial_measurement_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut outcomes = 0;
    for i in 0..200 {
        let (state, terms) = random_two_register_state(&mut rng);
        let total: f64 = terms.iter().map(|(_, c)| c.norm_sqr()).sum();
        let (reg, slot) = if i % 2 == 0 { ("A", 0) } else { ("B", 1) };
        let mut expected: BTreeMap<u64, f64> = BTreeMap::new();
        for (k, c) in &terms {
            *expected.entry(k[slot]).or_default() += c.norm_sqr() / total;
        }
        let got = state.probabilities(reg).map_err(|e| e.to_string())?;
        ensure(got.len() == expected.len(), || {
            format!("state {i}: outcome sets differ")
        })?;
        for (&v, &p) in &expected {
            let q = got.get(&vec![v]).copied().unwrap_or(f64::NAN);
            worst = worst.max((p - q).abs());
            let (post, record) = state
                .clone()
                .partial_measure(reg, MeasureMode::PostSelect(v))
                .map_err(|e| e.to_string())?;
            worst = worst
                .max((record.probability - p).abs())
                .max((post.norm_sqr() - 1.0).abs());
            for (k, c) in terms.iter().filter(|(k, _)| k[slot] == v) {
                let want = c / (total * p).sqrt();
                worst = worst.max((post.amplitude(k) - want).norm());
            }
            outcomes += 1;
        }
    }
    ensure(worst < PROBABILITY_TOL, || {
        format!("max deviation {worst:e}")
    })?;

    // Born sampling on a fixed random state.
    let mut terms = Vec::new();
    for a in 0..4u64 {
        for b in 0..2u64 {
            terms.push((
                vec![a, b],
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ));
        }
    }
    let state = QuantumState::from_terms(
        vec![RegisterSpec::qubits("A", 2), RegisterSpec::qubits("B", 1)],
        terms,
    )
    .map_err(|e| e.to_string())?;
    let born = state.probabilities("A").map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut draw_rng = ChaCha8Rng::seed_from_u64(77);
    let mut post_worst: f64 = 0.0;
    for _ in 0..SAMPLED_DRAWS {
        let (post, record) = state
            .clone()
            .measure_with("A", &mut draw_rng)
            .map_err(|e| e.to_string())?;
        post_worst = post_worst.max((post.norm_sqr() - 1.0).abs());
        *counts.entry(record.value).or_default() += 1;
    }
    ensure(post_worst < PROBABILITY_TOL, || {
        format!("sampled post-state norm off by {post_worst:e}")
    })?;
    let mut worst_sigma: f64 = 0.0;
    for (v, &p) in &born {
        let n = SAMPLED_DRAWS as f64;
        let sigma = (n * p * (1.0 - p)).sqrt();
        let dev = (counts.get(v).copied().unwrap_or(0) as f64 - n * p).abs() / sigma;
        worst_sigma = worst_sigma.max(dev);
    }
    ensure(worst_sigma <= SIGMA_BOUND, || {
        format!("sampled frequency {worst_sigma:.2} sigma from Born")
    })?;
    Ok((
        Status::Pass,
        format!(
            "200 states, {outcomes} outcomes, max deviation {worst:.1e}; {SAMPLED_DRAWS} draws within {worst_sigma:.2} sigma"
        ),
    ))
}

fn qft_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for w in 1..=6u32 {
        let size = 1u64 << w;
        for x in 0..size {
            let state = QuantumState::from_terms(
                vec![RegisterSpec::qubits("Q", w)],
                [(vec![x], Complex64::new(1.0, 0.0))],
            )
            .and_then(|s| s.qft("Q"))
            .map_err(|e| e.to_string())?;
            for y in 0..size {
                let angle = 2.0 * std::f64::consts::PI * ((x * y) % size) as f64 / size as f64;
                let want = Complex64::from_polar(1.0 / (size as f64).sqrt(), angle);
                worst = worst.max((state.amplitude(&[y]) - want).norm());
            }
        }
    }
    ensure(worst < QFT_TOL, || format!("max deviation {worst:e}"))?;
    Ok((
        Status::Pass,
        format!("widths 1-6, max deviation {worst:.1e}"),
    ))
}

fn null_space_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut total_dim = 0;
    for t in 0..500 {
        let rows = rng.gen_range(1..=12usize);
        let cols = rng.gen_range(1..=10usize);
        let density = rng.gen_range(0.1..0.9);
        let entries: Vec<Vec<u8>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_bool(density) as u8).collect())
            .collect();
        let m = Gf2Matrix::from_entries(&entries).map_err(|e| e.to_string())?;
        let basis: Vec<Selection> = gf2_nullspace(&m);

        let kills = |mask: u32| {
            (0..cols).all(|c| {
                (0..rows)
                    .filter(|&r| mask >> r & 1 == 1)
                    .map(|r| entries[r][c])
                    .sum::<u8>()
                    % 2
                    == 0
            })
        };
        let brute: BTreeSet<u32> = (1..1u32 << rows).filter(|&mask| kills(mask)).collect();

        let to_mask = |s: &Selection| s.ones().fold(0u32, |acc, i| acc | 1 << i);
        let masks: Vec<u32> = basis.iter().map(to_mask).collect();
        ensure(masks.iter().all(|&mk| mk != 0 && kills(mk)), || {
            format!("matrix {t}: a basis vector fails s*M = 0")
        })?;
        let span: BTreeSet<u32> = (1..1u32 << masks.len())
            .map(|c| {
                (0..masks.len())
                    .filter(|&i| c >> i & 1 == 1)
                    .fold(0, |acc, i| acc ^ masks[i])
            })
            .collect();
        ensure(span.len() + 1 == 1 << masks.len(), || {
            format!("matrix {t}: basis is dependent")
        })?;
        ensure(span == brute, || {
            format!("matrix {t}: span differs from brute force")
        })?;
        total_dim += masks.len();
    }
    Ok((
        Status::Pass,
        format!("500 matrices up to 12x10, total null-space dimension {total_dim}"),
    ))
}

fn pipeline_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let start = Instant::now();
    let mut relations = 0;
    for _ in 0..50 {
        let s = semiprime_in_range(1_000, 100_000, &mut rng).ok_or("no semiprime")?;
        let n = &s.n;
        let params = default_params(n).map_err(|e| e.to_string())?;
        let bound = params.smoothness_bound();
        let fb = build_factor_base(n, bound).map_err(|e| e.to_string())?;
        let (primes, qfb, _) = step1_prime_superposition(bound)
            .and_then(|st| step1_legendre_and_measure(st, n, bound))
            .map_err(|e| e.to_string())?;
        ensure(qfb == fb, || format!("n = {n}: factor bases differ"))?;
        let (a, b) = sieve_interval(&params);
        let classical = collect_relations_in(n, &fb, &a, &b, None, Execution::Sequential);
        let seq = step2_sequence_superposition(n, &a, &b, fb.len()).map_err(|e| e.to_string())?;
        let quantum = match step2_divide_and_measure(seq, primes, &fb) {
            Ok((_, smooth, _)) => smooth.relations(n),
            Err(_) => Vec::new(),
        };
        ensure(quantum == classical, || {
            format!("n = {n}: smooth set differs from classical relations")
        })?;
        relations += classical.len();

        let (q, _) = run_pipeline_with(
            n,
            None,
            &PipelineOptions {
                snapshot_cap: 0,
                ..Default::default()
            },
        )
        .map_err(|e| format!("n = {n}: {e}"))?;
        let c = factor(n).map_err(|e| format!("n = {n}: {e}"))?;
        ensure(
            (q.f1.clone(), q.f2.clone()) == (c.f1.clone(), c.f2.clone()),
            || format!("n = {n}: factors differ"),
        )?;
        ensure(q.f1 == nat(s.p) && q.f2 == nat(s.q), || {
            format!("n = {n}: wrong split")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < EQUIVALENCE_LIMIT, || {
        format!("took {}", ms(elapsed))
    })?;
    Ok((
        Status::Pass,
        format!(
            "50 semiprimes, {relations} identical relations, factors agree, {}",
            ms(elapsed)
        ),
    ))
}

fn end_to_end() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let mut times = Vec::new();
    let mut failures = Vec::new();
    for i in 0..100u32 {
        let bits = 16 + i % 49;
        let s = random_semiprime(bits, &mut rng);
        let start = Instant::now();
        let r = factor(&s.n);
        times.push(start.elapsed());
        match r {
            Ok(r) if &r.f1 * &r.f2 == s.n && r.f1 > nat(1) && r.f2 > nat(1) => {}
            _ => failures.push(s.n.to_string()),
        }
    }
    times.sort();
    let median = (times[49] + times[50]) / 2;
    ensure(failures.is_empty(), || {
        format!("{} failures: {failures:?}", failures.len())
    })?;
    Ok((
        Status::Pass,
        format!(
            "100 semiprimes of 16-64 bits, 0 failures, median {}, max {}",
            ms(median),
            ms(times[99])
        ),
    ))
}

fn complexity_substitute() -> Outcome {
    let report = cmd_bench(&[32, 40, 48], 5, 0, None, true);
    let failures: usize = report.rows.iter().map(|r| r.failures).sum();
    ensure(failures == 0, || {
        format!("{failures} benchmark semiprimes not factored")
    })?;
    let medians: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}b {:.3} ms", r.bits, r.median_ms.unwrap_or(f64::NAN)))
        .collect();
    let held = report.median_nondecreasing == Some(true);
    let detail = format!(
        "asymptotic claims not reproducible (no derivation); soft check {}: medians {}",
        if held { "held" } else { "did not hold" },
        medians.join(", ")
    );
    Ok((if held { Status::Pass } else { Status::Warn }, detail))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("worked example 15347", worked_example),
        ("factor-base reproduction", factor_base_reproduction),
        ("partial-measurement law", partial_measurement_law),
        ("QFT correctness", qft_correctness),
        (
            "null-space soundness and completeness",
            null_space_soundness,
        ),
        ("pipeline equivalence", pipeline_equivalence),
        ("end-to-end correctness", end_to_end),
        (
            "complexity claims (substituted soft check)",
            complexity_substitute,
        ),
    ];
    let default_hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (status, detail) = match outcome {
            Ok((Status::Pass, d)) => ("PASS", d),
            Ok((Status::Warn, d)) => ("WARN", d),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {} [{status}] {name}: {detail}", i + 1);
    }
    panic::set_hook(default_hook);
    println!(
        "acceptance: {} of {} criteria failed",
        failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
