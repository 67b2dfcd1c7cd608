mod common;

use common::rng;
use permoment::{central_moments, distinct_sum_oracle, enumerate_partitions, DistinctSums};
use rand::Rng;

#[test]
fn recursion_matches_enumeration_for_every_partition() {
    let mut r = rng(21);
    for n in 1..=6 {
        for _ in 0..3 {
            let v: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
            let cm = central_moments(&v, 6).unwrap();
            let table = DistinctSums::new(cm.sums()).unwrap();
            for k in 1..=6 {
                for m in 1..=k {
                    for p in enumerate_partitions(k, m).unwrap() {
                        let got = table.get(p.parts()).unwrap();
                        if m > n {
                            // no tuple of m distinct indices exists
                            let scale = cm.sum(2).max(1.0).powf(k as f64 / 2.0);
                            assert!(got.abs() <= 1e-10 * scale, "n={n} {:?}: {got}", p.parts());
                            continue;
                        }
                        let want = distinct_sum_oracle(&v, p.parts()).unwrap();
                        // relative, with a floor at the magnitude of the cancelling terms
                        let scale =
                            cm.sum(2).max(1.0).powf(k as f64 / 2.0) * (n as f64).powi(m as i32);
                        let tol = 1e-12 * want.abs().max(1e-2 * scale);
                        assert!(
                            (got - want).abs() <= tol,
                            "n={n} {:?}: {got} vs {want}",
                            p.parts()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn exponent_order_does_not_matter() {
    let v = [0.5, -1.25, 3.0, 2.0, -0.75];
    let cm = central_moments(&v, 7).unwrap();
    let table = DistinctSums::new(cm.sums()).unwrap();
    let a = table.get(&[3, 1, 2]).unwrap();
    let b = table.get(&[1, 2, 3]).unwrap();
    assert_eq!(a, b);
    assert!(table.get(&[4, 4]).is_err());
    assert!(table.get(&[0, 1]).is_err());
}
