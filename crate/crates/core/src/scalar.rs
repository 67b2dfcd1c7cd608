use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Num;

use crate::sum::compensated_sum;

/// Arithmetic the moment recursion can run in: `f64` with compensated sums,
/// or exact [`BigRational`].
pub trait Scalar: Num + Clone + Neg<Output = Self> {
    fn from_count(count: u128) -> Self;

    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self;
}

impl Scalar for f64 {
    fn from_count(count: u128) -> Self {
        count as f64
    }

    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        compensated_sum(terms)
    }
}

impl Scalar for BigRational {
    fn from_count(count: u128) -> Self {
        BigRational::from_integer(BigInt::from(count))
    }

    fn sum_terms<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms
            .into_iter()
            .fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b)
    }
}

/// Exact rational image of a finite float.
pub fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}
