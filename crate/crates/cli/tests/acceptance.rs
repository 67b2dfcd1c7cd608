//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.
//!
//! Criterion 7 asks both reconstruction methods to land within 0.05 of the
//! exact p-value at K = 10. The Bernstein step estimator cannot: its jumps
//! sit on an 11-point grid, so between grid points it is off by up to a
//! whole step. That criterion is reported as FAIL and listed in
//! `EXPECTED_FAILURES`; any other failure fails the target.

use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::Instant;

use permoment::{
    central_moments, closed_form_moment, distinct_sum_oracle, enumerate_partitions,
    exact_moment_inductive, moment_pvalue, moment_vector, moment_vector_with, oracle_pvalue_mc,
    CdfMethod, ClosedForm, Dataset, DistinctSums, ExactOracle, Mode, Strategy, Tail,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const EXPECTED_FAILURES: &[u32] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_permoment"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "permoment {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let x = (0..n).map(|_| rng.random::<f64>()).collect();
    let y = (0..n).map(|_| rng.random::<f64>()).collect();
    Dataset::new(x, y).unwrap()
}

/// Relative difference, or absolute below `floor_at`.
fn deviation(a: f64, b: f64, floor_at: f64) -> (f64, bool) {
    let d = (a - b).abs();
    if b.abs() < floor_at {
        (d, true)
    } else {
        (d / b.abs(), false)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = cli(&[
        "validate", "--n-min", "3", "--n-max", "8", "--trials", "100", "--seed", "1",
    ]);
    let v: Value = serde_json::from_slice(&out).unwrap();
    let worst = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| {
            r["mse"]
                .as_array()
                .unwrap()
                .iter()
                .map(|m| m.as_f64().unwrap())
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-28 && secs < 300.0,
        format!("worst MSE {worst:.2e} over n=3..8, k=2..5 in {secs:.2}s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let n = 2 + i % 49;
        let data = uniform(&mut rng, n);
        for strategy in [Strategy::ClosedThenInductive, Strategy::InductiveOnly] {
            let mv = moment_vector_with(&data, 2, Mode::Pearson, strategy).unwrap();
            first = first.max(mv.values[1].abs());
            second = second.max((mv.values[2] - 1.0 / (n as f64 - 1.0)).abs());
        }
    }
    outcome(
        first <= 1e-14 && second <= 1e-12,
        format!("max |<rho>| {first:.1e}, max |<rho^2> - 1/(n-1)| {second:.1e} over 1000 datasets"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut abs_worst) = (0.0f64, 0.0f64);
    let mut verbatim_worst = 0.0f64;
    for i in 0..500 {
        let n = 3 + i % 48;
        let data = uniform(&mut rng, n);
        let sx = central_moments(data.x(), 5).unwrap();
        let sy = central_moments(data.y(), 5).unwrap();
        for k in 1..=5 {
            let ind = exact_moment_inductive(&sx, &sy, k).unwrap();
            let closed = closed_form_moment(&sx, &sy, k, ClosedForm::Corrected).unwrap();
            let (d, abs) = deviation(closed, ind, 1e-6);
            if abs {
                abs_worst = abs_worst.max(d);
            } else {
                worst = worst.max(d);
            }
            if k == 4 {
                let v = closed_form_moment(&sx, &sy, k, ClosedForm::Verbatim).unwrap();
                verbatim_worst = verbatim_worst.max(deviation(v, ind, 1e-6).0);
            }
        }
    }
    outcome(
        worst <= 1e-10 && abs_worst <= 1e-12,
        format!(
            "worst relative difference {worst:.1e} (absolute {abs_worst:.1e} below 1e-6) over 500 datasets, k=1..5 \
             (verbatim k=4 form, without the normalization fix, is off by {verbatim_worst:.1e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let oracle = ExactOracle::default();
    let (mut rel, mut abs) = (0.0f64, 0.0f64);
    for n in 3..=7 {
        for _ in 0..5 {
            let data = uniform(&mut rng, n);
            let truth = oracle.moments(&data, 8).unwrap();
            let fast =
                moment_vector_with(&data, 8, Mode::Pearson, Strategy::InductiveOnly).unwrap();
            for k in 6..=8 {
                let (d, is_abs) = deviation(fast.values[k], truth.values[k], 1e-6);
                if is_abs {
                    abs = abs.max(d);
                } else {
                    rel = rel.max(d);
                }
            }
        }
    }
    outcome(
        rel <= 1e-10 && abs <= 1e-12,
        format!("worst relative {rel:.1e}, worst absolute (below 1e-6) {abs:.1e}, n=3..7, k=6..8"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in 1..=6 {
        for _ in 0..5 {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let cm = central_moments(&v, 6).unwrap();
            let table = DistinctSums::new(cm.sums()).unwrap();
            for k in 1..=6 {
                for m in 1..=k.min(n) {
                    for p in enumerate_partitions(k, m).unwrap() {
                        let got = table.get(p.parts()).unwrap();
                        let want = distinct_sum_oracle(&v, p.parts()).unwrap();
                        // scale of the largest cancelling term
                        let scale =
                            cm.sum(2).max(1.0).powf(k as f64 / 2.0) * (n as f64).powi(m as i32);
                        worst = worst.max((got - want).abs() / want.abs().max(1e-2 * scale));
                        checked += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("worst relative difference {worst:.1e} over {checked} partition evaluations, n<=6, k<=6"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut spread = 0.0f64;
    for n in 3..=40 {
        let make = |rng: &mut ChaCha8Rng| {
            let x: Vec<f64> = (0..n)
                .map(|i| i as f64 + rng.random::<f64>() * 0.5)
                .collect();
            let mut y: Vec<f64> = (0..n).map(|i| (i as f64).exp()).collect();
            y.shuffle(rng);
            Dataset::new(x, y).unwrap()
        };
        let a = moment_vector(&make(&mut rng), 8, Mode::Spearman).unwrap();
        let b = moment_vector(&make(&mut rng), 8, Mode::Spearman).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            spread = spread.max((p - q).abs());
        }
    }

    let table =
        String::from_utf8(cli(&["spearman-table", "--n-min", "3", "--n-max", "10"])).unwrap();
    let oracle = ExactOracle::default();
    let mut table_err = 0.0f64;
    let mut rows = 0;
    for n in 3..=10 {
        let ranks: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let truth = oracle
            .moments(&Dataset::new(ranks.clone(), ranks).unwrap(), 8)
            .unwrap();
        for line in table.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f[0].parse::<usize>().unwrap() != n {
                continue;
            }
            let k: usize = f[1].parse().unwrap();
            let got: f64 = f[2].parse().unwrap();
            table_err = table_err.max(deviation(got, truth.values[k], 1e-6).0);
            rows += 1;
        }
    }
    outcome(
        spread <= 1e-12 && table_err <= 1e-10 && rows == 8 * 8,
        format!(
            "max difference between tie-free datasets {spread:.1e}; \
             spearman-table n=3..10 vs enumeration {table_err:.1e} over {rows} rows"
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let oracle = ExactOracle::default();
    let (mut legendre, mut hausdorff, mut mc_z) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let data = uniform(&mut rng, 8);
        let exact = oracle.pvalue(&data, Tail::Two).unwrap().p;
        let est = |m| {
            moment_pvalue(&data, 10, m, Tail::Two, Mode::Pearson)
                .unwrap()
                .p
        };
        legendre = legendre.max((est(CdfMethod::Legendre) - exact).abs());
        hausdorff = hausdorff.max((est(CdfMethod::Hausdorff) - exact).abs());
        let mc = oracle_pvalue_mc(&data, Tail::Two, 100_000, i).unwrap().p;
        let se = (exact * (1.0 - exact) / 1e5).sqrt();
        mc_z = mc_z.max((mc - exact).abs() / se);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        legendre <= 0.05 && hausdorff <= 0.05 && mc_z <= 4.0 && secs < 600.0,
        format!(
            "50 datasets n=8, K=10: max |p-p_exact| legendre {legendre:.3}, hausdorff {hausdorff:.3}; \
             MC worst {mc_z:.2} standard errors; {secs:.1}s"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    {
        let mut w = std::io::BufWriter::new(&mut file);
        writeln!(w, "x,y").unwrap();
        for _ in 0..1_000_000 {
            writeln!(w, "{},{}", rng.random::<f64>(), rng.random::<f64>()).unwrap();
        }
    }
    let start = Instant::now();
    cli(&[
        "moments",
        "--input",
        file.path().to_str().unwrap(),
        "--k",
        "8",
    ]);
    let secs = start.elapsed().as_secs_f64();

    let out = cli(&[
        "bench",
        "--n",
        "8",
        "--k",
        "8",
        "--method",
        "inductive",
        "--method",
        "exact",
    ]);
    let rows: Value = serde_json::from_slice(&out).unwrap();
    let time_of = |m: &str| {
        rows.as_array()
            .unwrap()
            .iter()
            .find(|r| r["method"] == m)
            .and_then(|r| r["seconds"].as_f64())
            .unwrap()
    };
    let speedup = time_of("exact") / time_of("inductive");
    outcome(
        secs <= 1.0 && speedup >= 100.0,
        format!("moments --k 8 on 10^6 rows in {secs:.2}s; inductive {speedup:.0}x faster than enumeration at n=8"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, run) in criteria {
        let o = run();
        println!(
            "{} criterion {id}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if o.pass {
            passed += 1;
        }
        if o.pass == EXPECTED_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    println!("{passed}/8 criteria passed");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
