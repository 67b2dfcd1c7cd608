//! Exact moments of the permutation distribution of Pearson's correlation.
//!
//! For paired data `(x_i, y_i)` the correlation `rho(x, y_pi)` taken over every
//! rearrangement `pi` of `y` forms the permutation null distribution. Its
//! moments `<rho^k>` depend only on the centered power sums of `x` and `y`, so
//! they can be computed in `O(n K)` time instead of `O(n!)`:
//!
//! * [`engine`] evaluates them exactly, from closed forms for `k <= 5` and a
//!   recursion over distinct-index sums for any order.
//! * [`oracle`] enumerates permutations (or samples them) for ground truth.
//! * [`cdf`] reconstructs the null CDF from the moments and estimates
//!   p-values without enumeration.
//!
//! Ranking both coordinates first gives the same quantities for Spearman's
//! correlation, which for tie-free data depend on `n` alone.

pub mod cdf;
pub mod data;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod partition;
pub mod pvalue;
pub mod scalar;
pub mod sum;

pub use cdf::{
    hausdorff_cdf, legendre_cdf, moment_pvalue, to_unit_moments, CdfEstimate, CdfMethod,
    UnitMoments,
};
pub use data::{
    central_moments, is_tie_free, load_csv, pearson_obs, rank_transform, read_csv, CentralMoments,
    Dataset, Header,
};
pub use engine::{
    closed_form_moment, exact_moment_closed, exact_moment_inductive, moment_vector,
    moment_vector_with, raw_moments_rational, ClosedForm, DistinctSums, Method, Mode, MomentVector,
    Strategy,
};
pub use error::{Error, Result};
pub use oracle::{
    distinct_sum_oracle, oracle_moments_exact, oracle_moments_mc, oracle_pvalue_exact,
    oracle_pvalue_mc, ExactOracle, McMoments, DEFAULT_ENUMERATION_CAP,
};
pub use partition::{adjusted_multinomial, enumerate_partitions, ExponentPartition, MAX_ORDER};
pub use pvalue::{PvalueEstimate, PvalueMethod, Tail};

/// Default moment order for p-value work.
pub const DEFAULT_ORDER: usize = 8;
