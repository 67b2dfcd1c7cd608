//! Integer partitions of a moment order and their degeneracy-adjusted
//! multinomial weights.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// Largest supported moment order.
pub const MAX_ORDER: usize = 32;

/// A multiset of positive exponents `(n_1, .., n_m)` summing to `k`, stored
/// non-increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentPartition {
    parts: Vec<u32>,
}

impl ExponentPartition {
    /// Sorts the exponents; rejects empty input and zero exponents.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Range(
                "a partition needs at least one positive part".into(),
            ));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of parts `m`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `k`, the sum of the parts.
    pub fn order(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Multiplicities of each distinct part value, largest value first.
    pub fn degeneracies(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.parts.len() {
            let j = self.parts[i..]
                .iter()
                .take_while(|&&p| p == self.parts[i])
                .count();
            out.push(j as u32);
            i += j;
        }
        out
    }
}

/// All partitions of `k` into exactly `m` positive parts, in lexicographically
/// decreasing order.
pub fn enumerate_partitions(k: usize, m: usize) -> Result<Vec<ExponentPartition>> {
    if m == 0 || m > k {
        return Err(Error::Range(format!("need 1 <= m <= k, got k={k}, m={m}")));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    fill(k as u32, m as u32, k as u32, &mut current, &mut out);
    Ok(out)
}

fn fill(
    remaining: u32,
    slots: u32,
    cap: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<ExponentPartition>,
) {
    if slots == 0 {
        if remaining == 0 {
            out.push(ExponentPartition {
                parts: current.clone(),
            });
        }
        return;
    }
    // every remaining slot needs at least 1, and no slot may exceed `cap`
    let hi = cap.min(remaining - (slots - 1));
    let lo = remaining.div_ceil(slots);
    for part in (lo..=hi).rev() {
        current.push(part);
        fill(remaining - part, slots - 1, part, current, out);
        current.pop();
    }
}

/// Every partition of `k`, grouped by ascending part count.
pub fn all_partitions(k: usize) -> Vec<ExponentPartition> {
    (1..=k)
        .flat_map(|m| enumerate_partitions(k, m).unwrap_or_default())
        .collect()
}

/// `k! / (prod n_i! * prod d_r!)`: the number of ways to split `k` labelled
/// positions into unlabelled blocks with the given sizes.
pub fn adjusted_multinomial(p: &ExponentPartition) -> u128 {
    assert!(
        p.order() as usize <= MAX_ORDER,
        "order {} exceeds the supported maximum {MAX_ORDER}",
        p.order()
    );
    let mut remaining = p.order() as u128;
    let mut count: u128 = 1;
    for &part in &p.parts {
        count *= binomial(remaining, part as u128);
        remaining -= part as u128;
    }
    for d in p.degeneracies() {
        count /= factorial(d as u128);
    }
    count
}

/// Every partition of every order up to `max_order`, with the
/// data-independent wiring of the distinct-sum recursion
///
/// ```text
/// X(n_1..n_m) = S[n_m] X(n_1..n_{m-1}) - sum_j X(.., n_j + n_m, ..)
/// ```
///
/// Partitions are stored by ascending order, then ascending part count, so
/// every term on the right-hand side precedes the left-hand side.
#[derive(Debug)]
pub struct PartitionLattice {
    max_order: usize,
    partitions: Vec<ExponentPartition>,
    index: HashMap<Vec<u32>, usize>,
    by_order: Vec<Range<usize>>,
    steps: Vec<Step>,
    weights: Vec<u128>,
}

/// One recursion step: `S[last] * X[rest] - sum mult * X[merged]`.
#[derive(Debug)]
pub(crate) struct Step {
    pub last: u32,
    /// `None` for single-part partitions, whose value is `S[last]`.
    pub rest: Option<usize>,
    pub merged: Vec<(usize, u32)>,
}

impl PartitionLattice {
    fn build(max_order: usize) -> Self {
        let mut partitions = Vec::new();
        let mut by_order: Vec<Range<usize>> = Vec::with_capacity(max_order + 1);
        by_order.push(0..0);
        for k in 1..=max_order {
            let start = partitions.len();
            partitions.extend(all_partitions(k));
            by_order.push(start..partitions.len());
        }
        let index: HashMap<Vec<u32>, usize> = partitions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.parts.clone(), i))
            .collect();

        let steps = partitions
            .iter()
            .map(|p| {
                let (&last, rest) = p.parts.split_last().expect("non-empty");
                if rest.is_empty() {
                    return Step {
                        last,
                        rest: None,
                        merged: Vec::new(),
                    };
                }
                let mut merged: Vec<(usize, u32)> = Vec::new();
                for j in 0..rest.len() {
                    let mut key = rest.to_vec();
                    key[j] += last;
                    key.sort_unstable_by(|a, b| b.cmp(a));
                    let idx = index[&key];
                    match merged.last_mut() {
                        // equal parts are adjacent and merge to the same tuple
                        Some((prev, mult)) if *prev == idx => *mult += 1,
                        _ => merged.push((idx, 1)),
                    }
                }
                Step {
                    last,
                    rest: Some(index[rest]),
                    merged,
                }
            })
            .collect();
        let weights = partitions.iter().map(adjusted_multinomial).collect();

        Self {
            max_order,
            partitions,
            index,
            by_order,
            steps,
            weights,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partition(&self, idx: usize) -> &ExponentPartition {
        &self.partitions[idx]
    }

    /// Position of the (sorted) exponent tuple.
    pub fn index_of(&self, sorted_parts: &[u32]) -> Option<usize> {
        self.index.get(sorted_parts).copied()
    }

    /// Indices of the partitions of `k`.
    pub fn of_order(&self, k: usize) -> Range<usize> {
        self.by_order[k].clone()
    }

    /// [`adjusted_multinomial`] of partition `idx`.
    pub fn weight(&self, idx: usize) -> u128 {
        self.weights[idx]
    }

    pub(crate) fn steps(&self) -> &[Step] {
        &self.steps
    }
}

/// Shared lattice covering at least `max_order`.
pub fn lattice(max_order: usize) -> Result<Arc<PartitionLattice>> {
    static CACHE: Mutex<Option<Arc<PartitionLattice>>> = Mutex::new(None);
    if max_order > MAX_ORDER {
        return Err(Error::Range(format!(
            "order {max_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    match cache.as_ref() {
        Some(l) if l.max_order >= max_order => Ok(Arc::clone(l)),
        _ => {
            let built = Arc::new(PartitionLattice::build(max_order));
            *cache = Some(Arc::clone(&built));
            Ok(built)
        }
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at each step: acc holds C(n, i)
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(k: usize, m: usize) -> Vec<Vec<u32>> {
        enumerate_partitions(k, m)
            .unwrap()
            .into_iter()
            .map(|p| p.parts)
            .collect()
    }

    /// Brute force: every non-increasing m-tuple of values in 1..=k.
    fn brute_partitions(k: u32, m: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut idx = vec![1u32; m];
        loop {
            if idx.iter().sum::<u32>() == k && idx.windows(2).all(|w| w[0] >= w[1]) {
                out.push(idx.clone());
            }
            let mut i = 0;
            loop {
                if i == m {
                    out.sort_unstable_by(|a, b| b.cmp(a));
                    return out;
                }
                idx[i] += 1;
                if idx[i] <= k {
                    break;
                }
                idx[i] = 1;
                i += 1;
            }
        }
    }

    /// Set partitions of {0..k} whose block-size multiset equals `sizes`.
    fn count_set_partitions(k: usize, sizes: &[u32]) -> u128 {
        // restricted growth strings
        fn go(pos: usize, k: usize, rgs: &mut Vec<usize>, blocks: usize, sizes: &[u32]) -> u128 {
            if pos == k {
                let mut got = vec![0u32; blocks];
                for &b in rgs.iter() {
                    got[b] += 1;
                }
                got.sort_unstable_by(|a, b| b.cmp(a));
                return (got == sizes) as u128;
            }
            let mut total = 0;
            for b in 0..=blocks {
                rgs.push(b);
                total += go(pos + 1, k, rgs, blocks.max(b + 1), sizes);
                rgs.pop();
            }
            total
        }
        go(0, k, &mut Vec::new(), 0, sizes)
    }

    #[test]
    fn listed_partitions() {
        assert_eq!(parts(2, 2), vec![vec![1, 1]]);
        assert_eq!(parts(5, 2), vec![vec![4, 1], vec![3, 2]]);
        assert_eq!(
            parts(6, 3),
            vec![vec![4, 1, 1], vec![3, 2, 1], vec![2, 2, 2]]
        );
        assert_eq!(parts(4, 4), vec![vec![1, 1, 1, 1]]);
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for k in 1..=9 {
            for m in 1..=k {
                assert_eq!(parts(k, m), brute_partitions(k as u32, m), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn partition_counts() {
        // p(k) for k = 1..=12
        let p = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];
        for (k, &expect) in (1..=12).zip(&p) {
            assert_eq!(all_partitions(k).len(), expect);
        }
        assert_eq!(all_partitions(32).len(), 8349);
    }

    #[test]
    fn rejects_bad_part_counts() {
        assert!(enumerate_partitions(3, 0).is_err());
        assert!(enumerate_partitions(3, 4).is_err());
        assert!(ExponentPartition::new(vec![]).is_err());
        assert!(ExponentPartition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn degeneracies_count_repeats() {
        let p = ExponentPartition::new(vec![1, 2, 1, 1]).unwrap();
        assert_eq!(p.parts(), &[2, 1, 1, 1]);
        assert_eq!(p.degeneracies(), vec![1, 3]);
        assert_eq!(p.order(), 5);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn adjusted_multinomial_examples() {
        let w = |v: &[u32]| adjusted_multinomial(&ExponentPartition::new(v.to_vec()).unwrap());
        assert_eq!(w(&[7]), 1);
        assert_eq!(w(&[1, 1]), 1);
        assert_eq!(w(&[2, 1, 1, 1]), 10);
        assert_eq!(count_set_partitions(5, &[2, 1, 1, 1]), 10);
    }

    #[test]
    fn adjusted_multinomial_counts_set_partitions() {
        for k in 1..=8 {
            let mut bell = 0;
            for p in all_partitions(k) {
                let w = adjusted_multinomial(&p);
                assert_eq!(w, count_set_partitions(k, p.parts()), "{p:?}");
                bell += w;
            }
            // summed over all shapes this is the Bell number
            let bells = [1, 2, 5, 15, 52, 203, 877, 4140];
            assert_eq!(bell, bells[k - 1]);
        }
    }

    #[test]
    fn lattice_orders_dependencies_first() {
        let l = lattice(9).unwrap();
        assert!(l.max_order() >= 9);
        let total: usize = (1..=9).map(|k| all_partitions(k).len()).sum();
        assert_eq!(l.of_order(9).end, total);
        for (i, step) in l.steps().iter().enumerate() {
            if let Some(r) = step.rest {
                assert!(r < i);
            }
            for &(m, mult) in &step.merged {
                assert!(m < i && mult >= 1);
            }
            let merged_terms: u32 = step.merged.iter().map(|&(_, c)| c).sum();
            assert_eq!(merged_terms as usize, l.partition(i).len() - 1);
        }
        let p = l.index_of(&[2, 1, 1]).unwrap();
        assert_eq!(l.partition(p).parts(), &[2, 1, 1]);
        assert_eq!(l.weight(p), 6);
        assert!(lattice(33).is_err());
    }

    #[test]
    fn largest_order_does_not_overflow() {
        let ones = ExponentPartition::new(vec![1; 32]).unwrap();
        assert_eq!(adjusted_multinomial(&ones), 1);
        let halves = ExponentPartition::new(vec![16, 16]).unwrap();
        assert_eq!(adjusted_multinomial(&halves), binomial(32, 16) / 2);
    }
}
