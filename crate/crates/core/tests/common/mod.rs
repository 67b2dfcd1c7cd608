#![allow(dead_code)]

use permoment::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let x = (0..n).map(|_| rng.random::<f64>()).collect();
    let y = (0..n).map(|_| rng.random::<f64>()).collect();
    Dataset::new(x, y).unwrap()
}

pub fn normal(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let x = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let y = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Dataset::new(x, y).unwrap()
}

/// Relative agreement with an absolute floor for values near zero.
pub fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let d = (a - b).abs();
    if b.abs() < 1e-6 {
        d <= abs_floor
    } else {
        d <= rel * b.abs()
    }
}
