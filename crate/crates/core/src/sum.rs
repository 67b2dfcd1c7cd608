use std::ops::{Add, AddAssign};

/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl From<f64> for NeumaierSum {
    fn from(value: f64) -> Self {
        Self { s: value, c: 0.0 }
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let (s, c) = two_sum(self.s, rhs);
        self.s = s;
        self.c += c;
    }
}

impl Add<f64> for NeumaierSum {
    type Output = Self;

    fn add(mut self, rhs: f64) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for NeumaierSum {
    fn add_assign(&mut self, rhs: Self) {
        let (s, c) = two_sum(self.s, rhs.s);
        self.s = s;
        self.c += c + rhs.c;
    }
}

impl Add for NeumaierSum {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl std::iter::Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<NeumaierSum>().sum()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let c = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let total = compensated_sum([1e100, 1.0, -1e100]);
        assert_eq!(total, 1.0);

        let naive: f64 = [1e100, 1.0, -1e100].iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e8 + 0.1).collect();
        let whole = compensated_sum(xs.iter().copied());
        let mut left: NeumaierSum = xs[..400].iter().copied().sum();
        let right: NeumaierSum = xs[400..].iter().copied().sum();
        left += right;
        assert!((left.sum() - whole).abs() <= 1e-6);
    }
}
