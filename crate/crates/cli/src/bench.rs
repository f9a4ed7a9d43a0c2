use std::io::{self, Write};
use std::time::Instant;

use qsieve::classical::{default_params, factor_with};
use qsieve::semiprime::random_semiprime;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::BitRange;
use crate::{fail, millis, write_json, BenchArgs, Exit};

/// Aggregates for one semiprime size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub bits: u32,
    pub reps: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p95_ms: Option<f64>,
    /// Median over the reps of the relations collected, and of the final B
    /// and M.
    pub relations: u64,
    pub smoothness_bound: u64,
    pub interval_half_width: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub reps: usize,
    pub rows: Vec<BenchRow>,
    /// Whether median time never decreases with size. Soft check only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_nondecreasing: Option<bool>,
}

/// Median of a sorted slice, averaging the middle pair.
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "median of nothing");
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Nearest-rank percentile of a sorted slice.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of nothing");
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median_u64(mut v: Vec<u64>) -> u64 {
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

/// The semiprimes of one size come from their own stream of `seed`, so a
/// row does not depend on which other sizes are benchmarked.
fn bench_size(bits: u32, reps: usize, seed: u64, max_retries: Option<usize>) -> BenchRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(bits as u64);
    let mut times = Vec::with_capacity(reps);
    let (mut relations, mut bounds, mut widths) = (Vec::new(), Vec::new(), Vec::new());
    let mut failures = 0;
    for _ in 0..reps {
        let s = random_semiprime(bits, &mut rng);
        let params =
            max_retries.and_then(|r| default_params(&s.n).ok().map(|p| p.with_max_retries(r)));
        let start = Instant::now();
        let result = factor_with(&s.n, params);
        times.push(millis(start.elapsed()));
        match result {
            Ok(r) if &r.f1 * &r.f2 == s.n && r.f1 > 1u32.into() && r.f2 > 1u32.into() => {
                if let Some(st) = r.stats {
                    relations.push(st.relations as u64);
                    bounds.push(st.params.smoothness_bound());
                    widths.push(st.params.interval_half_width());
                }
            }
            _ => failures += 1,
        }
    }
    times.sort_by(f64::total_cmp);
    BenchRow {
        bits,
        reps,
        failures,
        median_ms: Some(median(&times)),
        p95_ms: Some(percentile(&times, 95.0)),
        relations: median_u64(relations),
        smoothness_bound: median_u64(bounds),
        interval_half_width: median_u64(widths),
    }
}

/// Benchmarks every size in `sizes`.
pub fn cmd_bench(
    sizes: &[u32],
    reps: usize,
    seed: u64,
    max_retries: Option<usize>,
    timing: bool,
) -> BenchReport {
    let mut rows: Vec<BenchRow> = sizes
        .iter()
        .map(|&b| bench_size(b, reps, seed, max_retries))
        .collect();
    let medians: Vec<f64> = rows.iter().filter_map(|r| r.median_ms).collect();
    let nondecreasing = medians.windows(2).all(|w| w[0] <= w[1]);
    if !timing {
        for r in &mut rows {
            r.median_ms = None;
            r.p95_ms = None;
        }
    }
    BenchReport {
        seed,
        reps,
        rows,
        median_nondecreasing: timing.then_some(nondecreasing),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

pub fn run(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Exit> {
    let range = match BitRange::parse(&args.bits) {
        Ok(r) => r,
        Err(e) => return fail(err, Exit::Invalid, e),
    };
    if args.reps == 0 {
        return fail(err, Exit::Invalid, "--reps must be at least 1");
    }
    if args.step == 0 {
        return fail(err, Exit::Invalid, "--step must be at least 1");
    }
    let report = cmd_bench(
        &range.sizes(args.step),
        args.reps,
        args.seed,
        args.max_retries,
        !args.no_timing,
    );
    if args.json {
        write_json(out, &report)?;
    } else {
        writeln!(
            out,
            "{:>4} {:>5} {:>5} {:>12} {:>12} {:>10} {:>8} {:>10}",
            "bits", "reps", "fail", "median_ms", "p95_ms", "relations", "B", "M"
        )?;
        for r in &report.rows {
            writeln!(
                out,
                "{:>4} {:>5} {:>5} {:>12} {:>12} {:>10} {:>8} {:>10}",
                r.bits,
                r.reps,
                r.failures,
                cell(r.median_ms),
                cell(r.p95_ms),
                r.relations,
                r.smoothness_bound,
                r.interval_half_width
            )?;
        }
        if let Some(ok) = report.median_nondecreasing {
            writeln!(
                out,
                "median time nondecreasing with size: {}",
                if ok { "yes" } else { "no" }
            )?;
        }
    }
    let failures: usize = report.rows.iter().map(|r| r.failures).sum();
    if failures > 0 {
        return fail(
            err,
            Exit::Failed,
            format!("{failures} semiprime(s) not factored"),
        );
    }
    Ok(Exit::Success)
}
