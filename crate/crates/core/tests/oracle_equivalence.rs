mod common;

use common::{close, normal, rng, uniform};
use permoment::{
    central_moments, exact_moment_closed, exact_moment_inductive, moment_vector_with, ExactOracle,
    Mode, Strategy,
};

#[test]
fn inductive_matches_enumeration_through_order_eight() {
    let oracle = ExactOracle::default();
    let mut r = rng(11);
    for n in 3..=7 {
        for trial in 0..4 {
            let data = if trial % 2 == 0 {
                uniform(&mut r, n)
            } else {
                normal(&mut r, n)
            };
            let truth = oracle.moments(&data, 8).unwrap();
            let fast =
                moment_vector_with(&data, 8, Mode::Pearson, Strategy::InductiveOnly).unwrap();
            for k in 1..=8 {
                assert!(
                    close(fast.values[k], truth.values[k], 1e-10, 1e-12),
                    "n={n} k={k}: {} vs {}",
                    fast.values[k],
                    truth.values[k]
                );
            }
        }
    }
}

#[test]
fn closed_forms_match_recursion() {
    let mut r = rng(12);
    for n in 3..=40 {
        let data = uniform(&mut r, n);
        let sx = central_moments(data.x(), 5).unwrap();
        let sy = central_moments(data.y(), 5).unwrap();
        for k in 1..=5 {
            let a = exact_moment_closed(&sx, &sy, k).unwrap();
            let b = exact_moment_inductive(&sx, &sy, k).unwrap();
            assert!(close(a, b, 1e-10, 1e-14), "n={n} k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn first_two_moments_are_universal() {
    let mut r = rng(13);
    for n in 2..=50 {
        let data = normal(&mut r, n);
        let mv = moment_vector_with(&data, 2, Mode::Pearson, Strategy::InductiveOnly).unwrap();
        assert!(mv.values[1].abs() <= 1e-14);
        assert!((mv.values[2] - 1.0 / (n as f64 - 1.0)).abs() <= 1e-12);
    }
}

#[test]
fn two_points_give_plus_minus_one() {
    let data = permoment::Dataset::new(vec![0.0, 3.0], vec![5.0, -1.0]).unwrap();
    let mv = moment_vector_with(&data, 6, Mode::Pearson, Strategy::InductiveOnly).unwrap();
    for k in 1..=6 {
        let want = if k % 2 == 0 { 1.0 } else { 0.0 };
        assert!(
            (mv.values[k] - want).abs() < 1e-12,
            "k={k}: {}",
            mv.values[k]
        );
    }
}
