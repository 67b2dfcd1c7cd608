use std::fmt::Write;
use std::hint::black_box;
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use permoment::{
    moment_vector_with, oracle::factorial, oracle_moments_mc, Dataset, ExactOracle, Mode, Strategy,
    DEFAULT_ENUMERATION_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{Format, Report};
use crate::{check_order, with_threads, CmdResult, Failure};

/// Monte Carlo runs above this many rho evaluations (n * samples) are skipped.
const MC_WORK_LIMIT: f64 = 2e9;
const MIN_MEASURE: Duration = Duration::from_millis(50);

#[derive(Args)]
pub struct BenchArgs {
    /// Sample sizes to time; repeat the flag for several.
    #[arg(long = "n", default_values_t = [8usize])]
    pub sizes: Vec<usize>,
    /// Moment order for the closed-form (capped at 5), inductive and
    /// enumeration paths.
    #[arg(long = "k", default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent timings per row; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long = "method", value_enum)]
    pub methods: Vec<BenchMethod>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    ClosedForm,
    Inductive,
    Exact,
    Mc,
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub method: BenchMethod,
    pub n: usize,
    #[serde(rename = "K_or_samples")]
    pub k_or_samples: u64,
    /// Median wall-clock seconds per run.
    pub seconds: f64,
    /// Permutations visited for exact, samples for mc, n * K otherwise.
    pub work: f64,
}

/// Median seconds per call; each timing loops until at least
/// [`MIN_MEASURE`] has elapsed.
fn measure<T>(repeats: usize, mut f: impl FnMut() -> T) -> f64 {
    let mut times: Vec<f64> = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            let mut calls = 0u32;
            loop {
                black_box(f());
                calls += 1;
                if start.elapsed() >= MIN_MEASURE {
                    break;
                }
            }
            start.elapsed().as_secs_f64() / calls as f64
        })
        .collect();
    times.sort_unstable_by(f64::total_cmp);
    times[times.len() / 2]
}

fn synthetic(n: usize, seed: u64) -> permoment::Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| rng.random::<f64>()).collect();
    let y = (0..n).map(|_| rng.random::<f64>()).collect();
    Dataset::new(x, y)
}

pub fn run(args: &BenchArgs) -> CmdResult {
    check_order(args.k)?;
    if args.sizes.iter().any(|&n| n < 2) {
        return Err(Failure::config("every --n must be at least 2"));
    }
    let methods = if args.methods.is_empty() {
        vec![
            BenchMethod::ClosedForm,
            BenchMethod::Inductive,
            BenchMethod::Exact,
            BenchMethod::Mc,
        ]
    } else {
        args.methods.clone()
    };
    let oracle = ExactOracle::with_cap(args.cap);

    let rows = with_threads(args.threads, || -> permoment::Result<Vec<BenchRow>> {
        let mut rows = Vec::new();
        for &n in &args.sizes {
            let data = synthetic(n, args.seed)?;
            for &method in &methods {
                let row = match method {
                    BenchMethod::ClosedForm => {
                        let k = args.k.min(5);
                        let secs = measure(args.repeats, || {
                            moment_vector_with(
                                &data,
                                k,
                                Mode::Pearson,
                                Strategy::ClosedThenInductive,
                            )
                        });
                        BenchRow {
                            method,
                            n,
                            k_or_samples: k as u64,
                            seconds: secs,
                            work: (n * k) as f64,
                        }
                    }
                    BenchMethod::Inductive => {
                        let secs = measure(args.repeats, || {
                            moment_vector_with(
                                &data,
                                args.k,
                                Mode::Pearson,
                                Strategy::InductiveOnly,
                            )
                        });
                        BenchRow {
                            method,
                            n,
                            k_or_samples: args.k as u64,
                            seconds: secs,
                            work: (n * args.k) as f64,
                        }
                    }
                    BenchMethod::Exact => {
                        if n > oracle.cap {
                            eprintln!(
                                "bench: skipping exact enumeration at n = {n} (cap {})",
                                oracle.cap
                            );
                            continue;
                        }
                        let secs = measure(args.repeats, || oracle.moments(&data, args.k));
                        BenchRow {
                            method,
                            n,
                            k_or_samples: args.k as u64,
                            seconds: secs,
                            work: factorial(n) as f64,
                        }
                    }
                    BenchMethod::Mc => {
                        if n as f64 * args.samples as f64 > MC_WORK_LIMIT {
                            eprintln!("bench: skipping Monte Carlo at n = {n}");
                            continue;
                        }
                        let secs = measure(args.repeats, || {
                            oracle_moments_mc(&data, args.k, args.samples, args.seed)
                        });
                        BenchRow {
                            method,
                            n,
                            k_or_samples: args.samples,
                            seconds: secs,
                            work: args.samples as f64,
                        }
                    }
                };
                rows.push(row);
            }
        }
        Ok(rows)
    })??;
    Ok(Report::Bench(rows))
}

pub fn render(rows: &[BenchRow], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string(rows).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("method,n,K_or_samples,seconds,work\n");
            for r in rows {
                let m = serde_json::to_value(r.method).expect("serializable");
                writeln!(
                    out,
                    "{},{},{},{:e},{:e}",
                    m.as_str().unwrap_or_default(),
                    r.n,
                    r.k_or_samples,
                    r.seconds,
                    r.work
                )
                .unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in rows {
                writeln!(
                    out,
                    "{:<12} n={:<8} K/samples={:<8} {:>12.3e} s",
                    format!("{:?}", r.method),
                    r.n,
                    r.k_or_samples,
                    r.seconds
                )
                .unwrap();
            }
            out
        }
    }
}
