//! Ground truth by enumeration: the exact permutation distribution for small
//! `n`, seeded Monte Carlo beyond that, and brute-force distinct-tuple sums.
//!
//! Work is split into fixed-size blocks (permutation-rank ranges or sample
//! ranges) that run on the ambient rayon pool and merge in block order, so
//! results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{central_moments, pearson_obs, Dataset};
use crate::engine::{Method, Mode, MomentVector};
use crate::error::{Error, Result};
use crate::pvalue::{PvalueEstimate, PvalueMethod, Tail};
use crate::sum::NeumaierSum;

/// Default largest `n` for full enumeration (10! = 3 628 800 permutations).
pub const DEFAULT_ENUMERATION_CAP: usize = 10;
/// Hard limit on the cap; `n!` must fit in a `u64`.
pub const MAX_ENUMERATION_CAP: usize = 20;

const RANK_BLOCK: u64 = 40_320;
const SAMPLE_BLOCK: u64 = 4_096;

/// Streaming accumulators over a set of permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationDistribution {
    pub n: usize,
    /// Permutations (or samples) visited.
    pub count: u64,
    /// `powers[k - 1]` accumulates `rho^k`.
    powers: Vec<NeumaierSum>,
    observed: Option<(f64, TailCounts)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct TailCounts {
    two: u64,
    right: u64,
    left: u64,
}

impl PermutationDistribution {
    fn empty(n: usize, max_power: usize, observed: Option<f64>) -> Self {
        Self {
            n,
            count: 0,
            powers: vec![NeumaierSum::new(); max_power],
            observed: observed.map(|o| (o, TailCounts::default())),
        }
    }

    #[inline]
    fn push(&mut self, rho: f64) {
        self.count += 1;
        let mut p = rho;
        for acc in &mut self.powers {
            *acc += p;
            p *= rho;
        }
        if let Some((obs, counts)) = &mut self.observed {
            counts.two += Tail::Two.is_extreme(rho, *obs) as u64;
            counts.right += Tail::Right.is_extreme(rho, *obs) as u64;
            counts.left += Tail::Left.is_extreme(rho, *obs) as u64;
        }
    }

    /// Combine with the accumulators of a disjoint range.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.powers.len(), other.powers.len());
        self.count += other.count;
        for (a, b) in self.powers.iter_mut().zip(&other.powers) {
            *a += *b;
        }
        if let (Some((_, a)), Some((_, b))) = (&mut self.observed, &other.observed) {
            a.two += b.two;
            a.right += b.right;
            a.left += b.left;
        }
    }

    /// Sample mean of `rho^k` for `k = 0..=max_power`.
    pub fn moments(&self) -> Vec<f64> {
        let c = self.count as f64;
        std::iter::once(1.0)
            .chain(self.powers.iter().map(|s| s.sum() / c))
            .collect()
    }

    /// Count of visited permutations at least as extreme as the observed
    /// value, if one was supplied.
    pub fn tail_count(&self, tail: Tail) -> Option<u64> {
        self.observed.map(|(_, c)| match tail {
            Tail::Two => c.two,
            Tail::Right => c.right,
            Tail::Left => c.left,
        })
    }
}

/// Centered data scaled to unit sum of squares, so that the correlation of
/// any pairing is a plain dot product.
#[derive(Clone, Debug)]
pub struct Standardized {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Standardized {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        Ok(Self {
            x: unit_scale(dataset.x())?,
            y: unit_scale(dataset.y())?,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Correlation of `x` with `y` rearranged by `perm`.
    #[inline]
    pub fn rho(&self, perm: &[usize]) -> f64 {
        let mut dot = 0.0;
        for (a, &j) in self.x.iter().zip(perm) {
            dot += a * self.y[j];
        }
        dot.clamp(-1.0, 1.0)
    }

    pub fn rho_identity(&self) -> f64 {
        let id: Vec<usize> = (0..self.n()).collect();
        self.rho(&id)
    }

    /// Accumulate every permutation whose lexicographic rank lies in `ranks`.
    pub fn enumerate_range(
        &self,
        ranks: Range<u64>,
        max_power: usize,
        observed: Option<f64>,
    ) -> PermutationDistribution {
        let mut dist = PermutationDistribution::empty(self.n(), max_power, observed);
        if ranks.is_empty() {
            return dist;
        }
        let mut perm = unrank_permutation(self.n(), ranks.start);
        for _ in ranks.clone() {
            dist.push(self.rho(&perm));
            next_permutation(&mut perm);
        }
        dist
    }

    /// Accumulate all `n!` permutations, block by block.
    pub fn enumerate_all(
        &self,
        max_power: usize,
        observed: Option<f64>,
    ) -> PermutationDistribution {
        let total = factorial(self.n());
        let blocks: Vec<Range<u64>> = (0..total.div_ceil(RANK_BLOCK))
            .map(|b| b * RANK_BLOCK..((b + 1) * RANK_BLOCK).min(total))
            .collect();
        let parts: Vec<PermutationDistribution> = blocks
            .into_par_iter()
            .map(|r| self.enumerate_range(r, max_power, observed))
            .collect();
        let mut dist = PermutationDistribution::empty(self.n(), max_power, observed);
        for p in &parts {
            dist.merge(p);
        }
        dist
    }
}

fn unit_scale(values: &[f64]) -> Result<Vec<f64>> {
    let m = central_moments(values, 2)?;
    if m.sum(2) <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let scale = m.sum(2).sqrt();
    Ok(values.iter().map(|v| (v - m.mean()) / scale).collect())
}

/// `n!`; panics past 20.
pub fn factorial(n: usize) -> u64 {
    assert!(n <= MAX_ENUMERATION_CAP, "{n}! overflows u64");
    (1..=n as u64).product()
}

/// The permutation of `0..n` with the given lexicographic rank.
pub fn unrank_permutation(n: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advance to the lexicographic successor; returns false (and leaves the
/// slice sorted ascending) after the last permutation.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Full-enumeration oracle with a configurable size cap.
#[derive(Clone, Copy, Debug)]
pub struct ExactOracle {
    pub cap: usize,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl ExactOracle {
    pub fn with_cap(cap: usize) -> Self {
        Self {
            cap: cap.min(MAX_ENUMERATION_CAP),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::TooLarge { n, cap: self.cap });
        }
        Ok(())
    }

    /// Every correlation of the permutation distribution, in lexicographic
    /// permutation order.
    pub fn correlations(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        self.check(dataset.n())?;
        let st = Standardized::new(dataset)?;
        let mut perm: Vec<usize> = (0..st.n()).collect();
        let mut out = Vec::with_capacity(factorial(st.n()) as usize);
        loop {
            out.push(st.rho(&perm));
            if !next_permutation(&mut perm) {
                return Ok(out);
            }
        }
    }

    pub fn moments(&self, dataset: &Dataset, max_order: usize) -> Result<MomentVector> {
        self.check(dataset.n())?;
        let st = Standardized::new(dataset)?;
        let dist = st.enumerate_all(max_order, None);
        debug_assert_eq!(dist.count, factorial(dataset.n()));
        Ok(MomentVector {
            n: dataset.n(),
            mode: Mode::Pearson,
            values: dist.moments(),
            methods: vec![Method::OracleExact; max_order + 1],
        })
    }

    pub fn pvalue(&self, dataset: &Dataset, tail: Tail) -> Result<PvalueEstimate> {
        self.check(dataset.n())?;
        let rho_obs = pearson_obs(dataset)?;
        let st = Standardized::new(dataset)?;
        // compare against the identity computed the same way as every other
        // permutation so it always counts as extreme
        let dist = st.enumerate_all(0, Some(st.rho_identity()));
        let hits = dist.tail_count(tail).expect("observed value supplied");
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("permutations", dist.count as f64);
        diagnostics.insert("extreme", hits as f64);
        Ok(PvalueEstimate {
            rho_obs,
            p: hits as f64 / dist.count as f64,
            method: PvalueMethod::Exact,
            tail,
            order: None,
            diagnostics,
        })
    }
}

pub fn oracle_moments_exact(dataset: &Dataset, max_order: usize) -> Result<MomentVector> {
    ExactOracle::default().moments(dataset, max_order)
}

pub fn oracle_pvalue_exact(dataset: &Dataset, tail: Tail) -> Result<PvalueEstimate> {
    ExactOracle::default().pvalue(dataset, tail)
}

/// Monte Carlo moment estimates with their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct McMoments {
    pub vector: MomentVector,
    /// `standard_errors[k]` for `values[k]`; zero at `k = 0`.
    pub standard_errors: Vec<f64>,
    pub samples: u64,
}

/// RNG for one Monte Carlo draw, keyed by `(seed, index)`.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_distribution(
    st: &Standardized,
    samples: u64,
    seed: u64,
    max_power: usize,
    observed: Option<f64>,
) -> PermutationDistribution {
    let blocks: Vec<Range<u64>> = (0..samples.div_ceil(SAMPLE_BLOCK))
        .map(|b| b * SAMPLE_BLOCK..((b + 1) * SAMPLE_BLOCK).min(samples))
        .collect();
    let parts: Vec<PermutationDistribution> = blocks
        .into_par_iter()
        .map(|r| {
            let mut dist = PermutationDistribution::empty(st.n(), max_power, observed);
            let mut perm: Vec<usize> = (0..st.n()).collect();
            for i in r {
                perm.iter_mut().enumerate().for_each(|(j, p)| *p = j);
                perm.shuffle(&mut sample_rng(seed, i));
                dist.push(st.rho(&perm));
            }
            dist
        })
        .collect();
    let mut dist = PermutationDistribution::empty(st.n(), max_power, observed);
    for p in &parts {
        dist.merge(p);
    }
    dist
}

/// Moments of `rho` over `samples` uniformly random permutations
/// (Fisher-Yates), reproducible from `seed` regardless of thread count.
pub fn oracle_moments_mc(
    dataset: &Dataset,
    max_order: usize,
    samples: u64,
    seed: u64,
) -> Result<McMoments> {
    if samples == 0 {
        return Err(Error::Range("need at least one sample".into()));
    }
    let st = Standardized::new(dataset)?;
    let dist = sample_distribution(&st, samples, seed, 2 * max_order, None);
    let raw = dist.moments();
    let values: Vec<f64> = raw[..=max_order].to_vec();
    let c = samples as f64;
    let standard_errors = (0..=max_order)
        .map(|k| {
            if k == 0 || samples < 2 {
                return 0.0;
            }
            let var = (raw[2 * k] - raw[k] * raw[k]).max(0.0) * c / (c - 1.0);
            (var / c).sqrt()
        })
        .collect();
    Ok(McMoments {
        vector: MomentVector {
            n: dataset.n(),
            mode: Mode::Pearson,
            values,
            methods: vec![Method::OracleMc; max_order + 1],
        },
        standard_errors,
        samples,
    })
}

/// Fraction of `samples` random permutations at least as extreme as the
/// observed correlation.
pub fn oracle_pvalue_mc(
    dataset: &Dataset,
    tail: Tail,
    samples: u64,
    seed: u64,
) -> Result<PvalueEstimate> {
    if samples == 0 {
        return Err(Error::Range("need at least one sample".into()));
    }
    let rho_obs = pearson_obs(dataset)?;
    let st = Standardized::new(dataset)?;
    let dist = sample_distribution(&st, samples, seed, 0, Some(st.rho_identity()));
    let hits = dist.tail_count(tail).expect("observed value supplied");
    let p = hits as f64 / samples as f64;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("samples", samples as f64);
    diagnostics.insert("extreme", hits as f64);
    diagnostics.insert("standard_error", (p * (1.0 - p) / samples as f64).sqrt());
    Ok(PvalueEstimate {
        rho_obs,
        p,
        method: PvalueMethod::Mc,
        tail,
        order: None,
        diagnostics,
    })
}

/// Largest input accepted by [`distinct_sum_oracle`].
pub const DISTINCT_ORACLE_CAP: usize = 8;

/// `sum over ordered tuples (i_1..i_m) of pairwise-distinct indices of
/// prod_t (v_{i_t} - mean)^{e_t}`, by direct enumeration.
pub fn distinct_sum_oracle(values: &[f64], exponents: &[u32]) -> Result<f64> {
    let n = values.len();
    if n > DISTINCT_ORACLE_CAP {
        return Err(Error::TooLarge {
            n,
            cap: DISTINCT_ORACLE_CAP,
        });
    }
    if exponents.is_empty() || exponents.len() > n {
        return Err(Error::Range(format!(
            "need 1 <= m <= n, got m={} n={n}",
            exponents.len()
        )));
    }
    let mean = central_moments(values, 1)?.mean();
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();

    let mut acc = NeumaierSum::new();
    let mut used = vec![false; n];
    let mut stack = Vec::with_capacity(exponents.len());
    visit(&centered, exponents, &mut used, &mut stack, &mut acc);
    Ok(acc.sum())
}

fn visit(
    centered: &[f64],
    exponents: &[u32],
    used: &mut [bool],
    stack: &mut Vec<usize>,
    acc: &mut NeumaierSum,
) {
    if stack.len() == exponents.len() {
        let term: f64 = stack
            .iter()
            .zip(exponents)
            .map(|(&i, &e)| centered[i].powi(e as i32))
            .product();
        *acc += term;
        return;
    }
    for i in 0..centered.len() {
        if !used[i] {
            used[i] = true;
            stack.push(i);
            visit(centered, exponents, used, stack, acc);
            stack.pop();
            used[i] = false;
        }
    }
}

/// Exact permutation CDF `F(t) = #{rho_pi <= t} / n!` from sorted correlations.
pub fn empirical_cdf(sorted_correlations: &[f64], t: f64) -> f64 {
    let below = sorted_correlations.partition_point(|&r| r <= t);
    below as f64 / sorted_correlations.len() as f64
}
