//! Sequential building blocks run inside a single processor.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Groups at or below this length are sorted directly.
const SMALL_SELECT: usize = 10;

/// Default upper bound on the cardinality of a [`SupportSet`].
pub const DEFAULT_SUPPORT_CAP: usize = 1024;

/// Returns the `k`-th smallest element (1-based, multiset order) using
/// median-of-medians selection with groups of five. Worst case linear.
/// `data` is left untouched.
pub fn select_kth<K: Ord + Copy>(data: &[K], k: usize) -> Result<K> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    if k == 0 || k > data.len() {
        return Err(Error::Rank { k, n: data.len() });
    }
    let mut buf = data.to_vec();
    Ok(select_in_place(&mut buf, k - 1))
}

/// Lower median: rank `ceil(len / 2)`.
pub fn lower_median<K: Ord + Copy>(data: &[K]) -> Result<K> {
    select_kth(data, data.len().div_ceil(2))
}

fn select_in_place<K: Ord + Copy>(v: &mut [K], idx: usize) -> K {
    let mut v = v;
    let mut idx = idx;
    loop {
        if v.len() <= SMALL_SELECT {
            v.sort_unstable();
            return v[idx];
        }
        let pivot = median_of_medians(v);
        let (lt, eq) = partition3(v, |x| x.cmp(&pivot));
        if idx < lt {
            let rest = v;
            v = &mut rest[..lt];
        } else if idx < lt + eq {
            return pivot;
        } else {
            idx -= lt + eq;
            let rest = v;
            v = &mut rest[lt + eq..];
        }
    }
}

fn median_of_medians<K: Ord + Copy>(v: &mut [K]) -> K {
    let len = v.len();
    let groups = len.div_ceil(5);
    for g in 0..groups {
        let start = g * 5;
        let end = (start + 5).min(len);
        v[start..end].sort_unstable();
        v.swap(g, start + (end - start - 1) / 2);
    }
    select_in_place(&mut v[..groups], (groups - 1) / 2)
}

/// Three-way partition by `cmp` against an implicit pivot. Returns the
/// lengths of the `Less` and `Equal` blocks, which end up in that order at
/// the front of `v`.
fn partition3<T, F>(v: &mut [T], cmp: F) -> (usize, usize)
where
    F: Fn(&T) -> Ordering,
{
    let (mut lt, mut i, mut gt) = (0, 0, v.len());
    while i < gt {
        match cmp(&v[i]) {
            Ordering::Less => {
                v.swap(lt, i);
                lt += 1;
                i += 1;
            }
            Ordering::Equal => i += 1,
            Ordering::Greater => {
                gt -= 1;
                v.swap(i, gt);
            }
        }
    }
    (lt, gt - lt)
}

/// A key standing for `weight` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedValue<K> {
    pub value: K,
    pub weight: u64,
}

impl<K> WeightedValue<K> {
    pub fn new(value: K, weight: u64) -> Result<Self> {
        if weight == 0 {
            return Err(Error::Domain("weight must be at least 1".into()));
        }
        Ok(WeightedValue { value, weight })
    }
}

/// Lower weighted median: the smallest value whose cumulative weight
/// (over items with value `<=` it) reaches `ceil(W / 2)`. Linear time.
pub fn weighted_median<K: Ord + Copy>(items: &[WeightedValue<K>]) -> Result<K> {
    if items.is_empty() {
        return Err(Error::Empty);
    }
    if items.iter().any(|it| it.weight == 0) {
        return Err(Error::Domain("weight must be at least 1".into()));
    }
    let total: u64 = items.iter().map(|it| it.weight).sum();
    let mut buf = items.to_vec();
    Ok(weighted_select(&mut buf, total.div_ceil(2)))
}

/// Smallest value whose cumulative weight reaches `target`; requires
/// `1 <= target <= total weight of v`.
fn weighted_select<K: Ord + Copy>(v: &mut [WeightedValue<K>], target: u64) -> K {
    let mut v = v;
    let mut target = target;
    loop {
        if v.len() == 1 {
            return v[0].value;
        }
        let values: Vec<K> = v.iter().map(|it| it.value).collect();
        let pivot = select_in_place(&mut values.clone(), (values.len() - 1) / 2);
        let (lt, eq) = partition3(v, |it| it.value.cmp(&pivot));
        let w_lt: u64 = v[..lt].iter().map(|it| it.weight).sum();
        let w_eq: u64 = v[lt..lt + eq].iter().map(|it| it.weight).sum();
        if target <= w_lt {
            let rest = v;
            v = &mut rest[..lt];
        } else if target <= w_lt + w_eq {
            return pivot;
        } else {
            target -= w_lt + w_eq;
            let rest = v;
            v = &mut rest[lt + eq..];
        }
    }
}

/// Known finite, strictly increasing set of admissible key values.
#[derive(Debug, Clone)]
pub struct SupportSet<K> {
    values: Vec<K>,
    index: HashMap<K, usize>,
}

impl<K: Ord + Copy + Hash> SupportSet<K> {
    pub fn new(values: Vec<K>) -> Result<Self> {
        Self::with_cap(values, DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(values: Vec<K>, cap: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("support set must be nonempty".into()));
        }
        if values.len() > cap {
            return Err(Error::Domain(format!(
                "support cardinality {} exceeds cap {cap}",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "support values must be strictly increasing".into(),
            ));
        }
        let index = values.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Ok(SupportSet { values, index })
    }

    pub fn values(&self) -> &[K] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, value: &K) -> Option<usize> {
        self.index.get(value).copied()
    }
}

/// Multiplicities `per_value[m]` of each support value and their running
/// sums `prefix[m]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketCounts {
    pub per_value: Vec<u64>,
    pub prefix: Vec<u64>,
}

impl BucketCounts {
    pub fn from_counts(per_value: Vec<u64>) -> Self {
        let prefix = per_value
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        BucketCounts { per_value, prefix }
    }

    pub fn total(&self) -> u64 {
        self.prefix.last().copied().unwrap_or(0)
    }
}

/// Counts occurrences of each support value in `data` in `O(len + c)`.
pub fn bucket_count<K>(data: &[K], support: &SupportSet<K>) -> Result<BucketCounts>
where
    K: Ord + Copy + Hash + std::fmt::Debug,
{
    let mut counts = vec![0u64; support.len()];
    for x in data {
        let m = support
            .position(x)
            .ok_or_else(|| Error::SupportViolation(format!("{x:?}")))?;
        counts[m] += 1;
    }
    Ok(BucketCounts::from_counts(counts))
}

/// Binary search for the minimal (0-based) index `v` with `k <= prefix[v]`.
pub fn smallest_index_reaching(counts: &BucketCounts, k: u64) -> Result<usize> {
    let total = counts.total();
    if k == 0 || k > total {
        return Err(Error::Rank {
            k: k as usize,
            n: total as usize,
        });
    }
    Ok(counts.prefix.partition_point(|&c| c < k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_kth(data: &[i64], k: usize) -> i64 {
        let mut s = data.to_vec();
        s.sort();
        s[k - 1]
    }

    #[test]
    fn select_small_examples() {
        assert_eq!(select_kth(&[3, 1, 2], 2).unwrap(), 2);
        assert_eq!(select_kth(&[5, 5, 5, 5], 3).unwrap(), 5);
        assert_eq!(select_kth::<i64>(&[], 1), Err(Error::Empty));
        assert_eq!(select_kth(&[1, 2], 0), Err(Error::Rank { k: 0, n: 2 }));
        assert_eq!(select_kth(&[1, 2], 3), Err(Error::Rank { k: 3, n: 2 }));
    }

    #[test]
    fn select_leaves_input_alone() {
        let data = vec![9, 3, 7, 1, 8, 2, 6, 4, 5, 0, 11, 10];
        let copy = data.clone();
        select_kth(&data, 6).unwrap();
        assert_eq!(data, copy);
    }

    #[test]
    fn select_exhaustive_small_alphabet() {
        for len in 1..=8u32 {
            for code in 0..3usize.pow(len) {
                let mut c = code;
                let data: Vec<i64> = (0..len)
                    .map(|_| {
                        let d = (c % 3) as i64;
                        c /= 3;
                        d
                    })
                    .collect();
                for k in 1..=data.len() {
                    assert_eq!(select_kth(&data, k).unwrap(), sorted_kth(&data, k));
                }
            }
        }
    }

    #[test]
    fn select_large_adversarial_shapes() {
        let sorted: Vec<i64> = (0..5000).collect();
        let reversed: Vec<i64> = (0..5000).rev().collect();
        let organ: Vec<i64> = (0..2500).chain((0..2500).rev()).collect();
        let dupes: Vec<i64> = (0..5000).map(|i| i % 7).collect();
        for data in [sorted, reversed, organ, dupes] {
            for k in [1, 2, 1250, 2500, 2501, 4999, 5000] {
                assert_eq!(select_kth(&data, k).unwrap(), sorted_kth(&data, k));
            }
        }
    }

    #[test]
    fn weighted_median_examples() {
        let items = |pairs: &[(i64, u64)]| -> Vec<WeightedValue<i64>> {
            pairs
                .iter()
                .map(|&(v, w)| WeightedValue::new(v, w).unwrap())
                .collect()
        };
        assert_eq!(
            weighted_median(&items(&[(1, 1), (2, 1), (3, 1)])).unwrap(),
            2
        );
        assert_eq!(weighted_median(&items(&[(1, 9), (100, 1)])).unwrap(), 1);
        // W = 4, target 2: lower median
        assert_eq!(
            weighted_median(&items(&[(4, 1), (1, 1), (3, 1), (2, 1)])).unwrap(),
            2
        );
        assert_eq!(weighted_median::<i64>(&[]), Err(Error::Empty));
        assert!(WeightedValue::new(1, 0).is_err());
    }

    #[test]
    fn bucket_count_examples() {
        let support = SupportSet::new(vec![10, 20, 30]).unwrap();
        let counts = bucket_count(&[10, 20, 10], &support).unwrap();
        assert_eq!(counts.per_value, vec![2, 1, 0]);
        assert_eq!(counts.prefix, vec![2, 3, 3]);

        let support = SupportSet::new(vec![1]).unwrap();
        assert_eq!(bucket_count(&[], &support).unwrap().per_value, vec![0]);

        let support = SupportSet::new(vec![1, 2]).unwrap();
        assert!(matches!(
            bucket_count(&[7], &support),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn support_set_validation() {
        assert!(SupportSet::<i64>::new(vec![]).is_err());
        assert!(SupportSet::new(vec![1, 1]).is_err());
        assert!(SupportSet::new(vec![2, 1]).is_err());
        assert!(SupportSet::with_cap(vec![1, 2, 3], 2).is_err());
        assert!(SupportSet::new((0..1025).collect::<Vec<i64>>()).is_err());
    }

    #[test]
    fn smallest_index_examples() {
        let counts = BucketCounts::from_counts(vec![2, 1, 0]);
        assert_eq!(smallest_index_reaching(&counts, 3).unwrap(), 1);
        assert_eq!(smallest_index_reaching(&counts, 1).unwrap(), 0);
        assert!(smallest_index_reaching(&counts, 4).is_err());
        assert!(smallest_index_reaching(&counts, 0).is_err());
        // k = N_c must land on the last nonempty bucket, including v = c
        let counts = BucketCounts::from_counts(vec![0, 0, 5]);
        assert_eq!(smallest_index_reaching(&counts, 5).unwrap(), 2);
    }

    proptest! {
        #[test]
        fn select_matches_sort(data in prop::collection::vec(-50i64..50, 1..1000), seed in any::<u64>()) {
            let k = (seed as usize % data.len()) + 1;
            prop_assert_eq!(select_kth(&data, k).unwrap(), sorted_kth(&data, k));
        }

        #[test]
        fn weighted_median_matches_expansion(
            pairs in prop::collection::vec((-20i64..20, 1u64..6), 1..60)
        ) {
            let items: Vec<_> = pairs.iter().map(|&(v, w)| WeightedValue::new(v, w).unwrap()).collect();
            let expanded: Vec<i64> = pairs
                .iter()
                .flat_map(|&(v, w)| std::iter::repeat_n(v, w as usize))
                .collect();
            let k = expanded.len().div_ceil(2);
            prop_assert_eq!(weighted_median(&items).unwrap(), sorted_kth(&expanded, k));
        }

        #[test]
        fn unit_weights_match_select(values in prop::collection::vec(-100i64..100, 1..200)) {
            let items: Vec<_> = values.iter().map(|&v| WeightedValue::new(v, 1).unwrap()).collect();
            prop_assert_eq!(
                weighted_median(&items).unwrap(),
                select_kth(&values, values.len().div_ceil(2)).unwrap()
            );
        }

        #[test]
        fn index_search_matches_linear_scan(
            counts in prop::collection::vec(0u64..5, 1..40),
            pick in any::<u64>()
        ) {
            let counts = BucketCounts::from_counts(counts);
            prop_assume!(counts.total() > 0);
            let k = pick % counts.total() + 1;
            let linear = counts.prefix.iter().position(|&c| k <= c).unwrap();
            prop_assert_eq!(smallest_index_reaching(&counts, k).unwrap(), linear);
        }

        #[test]
        fn bucket_then_search_matches_select(
            data in prop::collection::vec(0i64..6, 1..300),
            pick in any::<usize>()
        ) {
            let support = SupportSet::new((0..6).collect()).unwrap();
            let counts = bucket_count(&data, &support).unwrap();
            let k = pick % data.len() + 1;
            let v = smallest_index_reaching(&counts, k as u64).unwrap();
            prop_assert_eq!(support.values()[v], select_kth(&data, k).unwrap());
        }
    }
}
