//! Subsets and permutations of the cache set `[Λ] = {1, …, Λ}`.
//!
//! Subsets are kept as bitmasks internally (bit `c - 1` set iff cache `c` is a
//! member). For a fixed size, increasing mask value is exactly colexicographic
//! order, which is the one canonical order used throughout the crate.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{MaccError, Result};

/// Largest supported number of caches.
pub const MAX_CACHES: usize = 32;

/// Default cap on `Λ` for anything that enumerates all `Λ!` cache orders.
pub const DEFAULT_PERMUTATION_CAP: usize = 8;

/// `C(n, k)` with the zero convention for `n < 0`, `k < 0` or `n < k`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || n < k {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 0..k {
        // Each prefix product is itself a binomial, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Machine-word binomial for counts that are known to be small (`n ≤ 64`).
pub(crate) fn choose(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// The cache set `[Λ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    size: usize,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_CACHES {
            return Err(MaccError::InvalidParameter {
                name: "caches",
                value: size.to_string(),
                reason: format!("must lie in [1, {MAX_CACHES}]"),
            });
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn full(&self) -> KSubset {
        KSubset::from_mask(full_mask(self.size), self.size)
    }

    pub fn empty(&self) -> KSubset {
        KSubset::from_mask(0, self.size)
    }
}

pub(crate) fn full_mask(size: usize) -> u64 {
    if size == 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// A subset of `[Λ]`. Identifies a user (size `λ`), a subfile's storing caches
/// `𝒯`, or a multicast span `S`.
///
/// Ordering is colexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSubset {
    mask: u64,
    ground: usize,
}

impl KSubset {
    /// Builds a subset from 1-based cache labels in any order.
    pub fn new(ground: GroundSet, elements: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &c in elements {
            if c == 0 || c > ground.size {
                return Err(MaccError::ElementOutOfRange {
                    element: c,
                    ground: ground.size,
                });
            }
            let bit = 1u64 << (c - 1);
            if mask & bit != 0 {
                return Err(MaccError::InvalidParameter {
                    name: "subset",
                    value: format!("{elements:?}"),
                    reason: format!("cache {c} appears twice"),
                });
            }
            mask |= bit;
        }
        Ok(Self {
            mask,
            ground: ground.size,
        })
    }

    pub(crate) fn from_mask(mask: u64, ground: usize) -> Self {
        debug_assert!(mask & !full_mask(ground) == 0);
        Self { mask, ground }
    }

    pub(crate) fn mask(&self) -> u64 {
        self.mask
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet { size: self.ground }
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, cache: usize) -> bool {
        cache >= 1 && cache <= self.ground && self.mask & (1u64 << (cache - 1)) != 0
    }

    /// Members in ascending order, 1-based.
    pub fn elements(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.ground)
            .filter(move |b| mask & (1u64 << b) != 0)
            .map(|b| b + 1)
    }

    pub fn intersects(&self, other: &KSubset) -> bool {
        self.mask & other.mask != 0
    }

    pub fn is_subset_of(&self, other: &KSubset) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn union(&self, other: &KSubset) -> KSubset {
        KSubset::from_mask(self.mask | other.mask, self.ground)
    }

    pub fn difference(&self, other: &KSubset) -> KSubset {
        KSubset::from_mask(self.mask & !other.mask, self.ground)
    }

    pub fn complement(&self) -> KSubset {
        KSubset::from_mask(full_mask(self.ground) & !self.mask, self.ground)
    }
}

impl fmt::Display for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for KSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Iterator over the `k`-subsets of a `size`-element ground set as masks, in
/// colex order (Gosper's hack).
#[derive(Debug, Clone)]
pub(crate) struct MaskCombinations {
    next: Option<u64>,
    limit: u64,
}

impl MaskCombinations {
    pub(crate) fn new(size: usize, k: usize) -> Self {
        let next = if k > size { None } else { Some(full_mask(k)) };
        Self {
            next,
            limit: full_mask(size),
        }
    }
}

impl Iterator for MaskCombinations {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if cur == 0 {
            self.next = None;
            return Some(0);
        }
        let low = cur & cur.wrapping_neg();
        let ripple = cur.wrapping_add(low);
        self.next = if ripple == 0 || ripple > self.limit {
            None
        } else {
            let ones = ((cur ^ ripple) >> 2) / low;
            let succ = ripple | ones;
            (succ <= self.limit).then_some(succ)
        };
        Some(cur)
    }
}

/// Every submask of `mask`, including `0` and `mask` itself.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut cur = Some(mask);
    std::iter::from_fn(move || {
        let out = cur?;
        cur = if out == 0 {
            None
        } else {
            Some((out - 1) & mask)
        };
        Some(out)
    })
}

/// All `C(Λ, k)` subsets of size `k`, colex ordered.
pub fn enumerate_ksubsets(ground: GroundSet, k: usize) -> Result<Vec<KSubset>> {
    if k > ground.size {
        return Err(MaccError::SubsetSize {
            k,
            ground: ground.size,
        });
    }
    Ok(MaskCombinations::new(ground.size, k)
        .map(|m| KSubset::from_mask(m, ground.size))
        .collect())
}

/// Position of `s` in the colex order of subsets of the same size:
/// `Σ_j C(s_j − 1, j)` over the ascending members `s_1 < … < s_k`.
pub fn rank_ksubset(s: &KSubset) -> u64 {
    s.iter()
        .enumerate()
        .map(|(j, c)| choose(c - 1, j + 1))
        .sum()
}

pub fn unrank_ksubset(ground: GroundSet, k: usize, index: u64) -> Result<KSubset> {
    if k > ground.size {
        return Err(MaccError::SubsetSize {
            k,
            ground: ground.size,
        });
    }
    let count = choose(ground.size, k);
    if index >= count {
        return Err(MaccError::RankOutOfRange { index, count });
    }
    let mut rest = index;
    let mut mask = 0u64;
    let mut top = ground.size;
    for j in (1..=k).rev() {
        // Largest c with C(c - 1, j) <= rest.
        let mut c = top;
        while choose(c - 1, j) > rest {
            c -= 1;
        }
        rest -= choose(c - 1, j);
        mask |= 1u64 << (c - 1);
        top = c - 1;
    }
    Ok(KSubset::from_mask(mask, ground.size))
}

/// An ordering `c₁ … c_Λ` of the caches.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CachePermutation {
    order: Vec<usize>,
}

impl CachePermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &c in &order {
            if c == 0 || c > n || seen[c - 1] {
                return Err(MaccError::InvalidParameter {
                    name: "permutation",
                    value: format!("{order:?}"),
                    reason: format!("must list each of 1..={n} exactly once"),
                });
            }
            seen[c - 1] = true;
        }
        Ok(Self { order })
    }

    pub fn identity(ground: GroundSet) -> Self {
        Self {
            order: (1..=ground.size).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet {
            size: self.order.len(),
        }
    }

    /// The first `i` caches `{c₁, …, c_i}`.
    pub fn prefix(&self, i: usize) -> KSubset {
        let mask = self.order[..i]
            .iter()
            .fold(0u64, |m, &c| m | (1u64 << (c - 1)));
        KSubset::from_mask(mask, self.order.len())
    }
}

impl fmt::Display for CachePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Lexicographic permutations of a sequence (Narayana's next-permutation step).
#[derive(Debug, Clone)]
pub(crate) struct LexPermutations {
    current: Option<Vec<usize>>,
}

impl LexPermutations {
    /// Starts from `items` sorted ascending.
    pub(crate) fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        Self {
            current: Some(items),
        }
    }
}

impl Iterator for LexPermutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let mut succ = cur.clone();
        if let Some(i) = (1..succ.len()).rev().find(|&i| succ[i - 1] < succ[i]) {
            let pivot = i - 1;
            let j = (i..succ.len())
                .rev()
                .find(|&j| succ[j] > succ[pivot])
                .expect("a larger element exists right of the pivot");
            succ.swap(pivot, j);
            succ[i..].reverse();
            self.current = Some(succ);
        }
        Some(cur)
    }
}

/// All `Λ!` cache orders in lexicographic order, refusing when `Λ > cap`.
pub fn enumerate_permutations(
    ground: GroundSet,
    cap: usize,
) -> Result<impl Iterator<Item = CachePermutation>> {
    if ground.size > cap {
        return Err(MaccError::PermutationCap {
            size: ground.size,
            cap,
        });
    }
    Ok(LexPermutations::new((1..=ground.size).collect()).map(|order| CachePermutation { order }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(n: usize) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    /// Pascal-triangle oracle, independent of the multiplicative formula.
    fn pascal(n: usize) -> Vec<Vec<BigUint>> {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigUint::one(); i + 1];
            for k in 1..i {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(-1, 0), BigUint::zero());
        assert_eq!(binomial(3, -1), BigUint::zero());
        assert_eq!(binomial(20, 10), BigUint::from(184_756u32));
        assert_eq!(pascal(20)[20][10], BigUint::from(184_756u32));
    }

    #[test]
    fn binomial_matches_pascal_up_to_30() {
        let rows = pascal(30);
        for n in 0..=30usize {
            for k in 0..=n {
                assert_eq!(binomial(n as i64, k as i64), rows[n][k], "C({n},{k})");
                assert_eq!(BigUint::from(choose(n, k)), rows[n][k]);
            }
        }
    }

    #[test]
    fn pascal_rule_and_row_sums() {
        for n in 2..=30i64 {
            for k in 1..n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
        for n in 0..=20i64 {
            let sum: BigUint = (0..=n).map(|k| binomial(n, k)).sum();
            assert_eq!(sum, BigUint::one() << n as usize);
        }
    }

    #[test]
    fn binomial_beyond_machine_words() {
        // C(100, 50) has 30 digits.
        assert_eq!(
            binomial(100, 50).to_string(),
            "100891344545564193334812497256"
        );
        assert_eq!(factorial(25).to_string(), "15511210043330985984000000");
    }

    #[test]
    fn colex_listing_for_four_choose_two() {
        let subsets = enumerate_ksubsets(g(4), 2).unwrap();
        let listed: Vec<Vec<usize>> = subsets.iter().map(KSubset::elements).collect();
        assert_eq!(
            listed,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1, 4],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn degenerate_sizes() {
        let empty = enumerate_ksubsets(g(3), 0).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());
        let full = enumerate_ksubsets(g(3), 3).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].elements(), vec![1, 2, 3]);
        assert_eq!(
            enumerate_ksubsets(g(3), 4),
            Err(MaccError::SubsetSize { k: 4, ground: 3 })
        );
    }

    #[test]
    fn enumeration_counts_match_binomials() {
        for n in 1..=12 {
            for k in 0..=n {
                let subsets = enumerate_ksubsets(g(n), k).unwrap();
                assert_eq!(subsets.len() as u64, choose(n, k));
                assert!(subsets.windows(2).all(|w| w[0] < w[1]));
                assert!(subsets.iter().all(|s| s.len() == k));
            }
        }
    }

    #[test]
    fn full_ground_set_enumeration() {
        let all = enumerate_ksubsets(g(MAX_CACHES), MAX_CACHES).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].len(), MAX_CACHES);
    }

    #[test]
    fn rank_unrank_examples() {
        let s = KSubset::new(g(4), &[1, 2]).unwrap();
        assert_eq!(rank_ksubset(&s), 0);
        assert_eq!(unrank_ksubset(g(4), 2, 5).unwrap().elements(), vec![3, 4]);
        for i in 0..20 {
            assert_eq!(rank_ksubset(&unrank_ksubset(g(6), 3, i).unwrap()), i);
        }
        assert_eq!(
            unrank_ksubset(g(4), 2, 6),
            Err(MaccError::RankOutOfRange { index: 6, count: 6 })
        );
    }

    #[test]
    fn rank_agrees_with_enumeration_up_to_ten() {
        for n in 1..=10 {
            for k in 0..=n {
                for (i, s) in enumerate_ksubsets(g(n), k).unwrap().iter().enumerate() {
                    assert_eq!(rank_ksubset(s), i as u64);
                    assert_eq!(unrank_ksubset(g(n), k, i as u64).unwrap(), *s);
                }
            }
        }
    }

    #[test]
    fn subset_construction_rejects_bad_input() {
        assert!(matches!(
            KSubset::new(g(4), &[0]),
            Err(MaccError::ElementOutOfRange { .. })
        ));
        assert!(KSubset::new(g(4), &[5]).is_err());
        assert!(KSubset::new(g(4), &[2, 2]).is_err());
        assert_eq!(KSubset::new(g(4), &[3, 1]).unwrap().elements(), vec![1, 3]);
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(enumerate_permutations(g(3), 8).unwrap().count(), 6);
        assert_eq!(enumerate_permutations(g(4), 8).unwrap().count(), 24);
        let one: Vec<_> = enumerate_permutations(g(1), 8).unwrap().collect();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].order(), &[1]);
        let distinct: std::collections::HashSet<_> =
            enumerate_permutations(g(5), 8).unwrap().collect();
        assert_eq!(distinct.len(), 120);
    }

    #[test]
    fn permutation_cap_is_named() {
        let err = enumerate_permutations(g(9), DEFAULT_PERMUTATION_CAP)
            .err()
            .unwrap();
        assert_eq!(err, MaccError::PermutationCap { size: 9, cap: 8 });
        assert!(err.to_string().contains("cap of 8"));
    }

    #[test]
    fn permutation_validation_and_prefix() {
        assert!(CachePermutation::new(vec![1, 1, 2]).is_err());
        assert!(CachePermutation::new(vec![0, 1]).is_err());
        let p = CachePermutation::new(vec![3, 1, 4, 2]).unwrap();
        assert_eq!(p.prefix(2).elements(), vec![1, 3]);
        assert!(p.prefix(0).is_empty());
        assert_eq!(p.to_string(), "(3,1,4,2)");
    }

    #[test]
    fn submasks_cover_power_set() {
        let subs: Vec<u64> = submasks(0b1011).collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }

    proptest! {
        #[test]
        fn set_algebra_is_consistent(a in 0u64..1024, b in 0u64..1024) {
            let x = KSubset::from_mask(a, 10);
            let y = KSubset::from_mask(b, 10);
            prop_assert_eq!(x.union(&y).len() + (a & b).count_ones() as usize, x.len() + y.len());
            prop_assert!(!x.difference(&y).intersects(&y));
            prop_assert_eq!(x.complement().complement(), x);
            prop_assert_eq!(x.intersects(&y), x.elements().iter().any(|c| y.contains(*c)));
        }
    }
}
