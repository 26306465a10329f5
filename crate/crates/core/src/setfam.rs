//! Finite set systems: traces, duals, VC dimension, shatter function and the
//! Sauer–Shelah bound.
//!
//! Members are stored as packed membership rows over a ground set `0..ground`.
//! Traces onto subsets of at most 64 elements are packed into a single `u64`,
//! which is what the exhaustive searches below hash and compare.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};

/// Membership bit-vector of fixed length.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut row = BitRow::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                row.set(i, true);
            }
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Packs the bits at `subset` (at most 64 positions) into a key; bit `k` of
    /// the key is membership of `subset[k]`.
    #[inline]
    fn project(&self, subset: &[usize]) -> u64 {
        subset
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &i)| acc | ((self.get(i) as u64) << k))
    }

    fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    fn parse(s: &str) -> Result<Self> {
        let mut row = BitRow::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => row.set(i, true),
                '0' => {}
                other => {
                    return Err(DpError::domain(format!(
                        "membership string contains {other:?}; expected '0' or '1'"
                    )))
                }
            }
        }
        Ok(row)
    }
}

/// A ground set `0..ground_size` with an ordered list of member subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    ground_size: usize,
    members: Vec<BitRow>,
    labels: Option<Vec<String>>,
}

/// One entry of the shatter function: the largest number of distinct traces
/// on an `m`-subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterEntry {
    pub m: usize,
    pub pi_m: u64,
    /// `true` when every `m`-subset was examined.
    pub exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterProfile {
    pub values: Vec<ShatterEntry>,
}

impl ShatterProfile {
    pub fn is_exact(&self) -> bool {
        self.values.iter().all(|e| e.exact)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    ground: usize,
    sets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl SetFamily {
    pub fn new(ground_size: usize, members: Vec<BitRow>) -> Result<Self> {
        if let Some(bad) = members.iter().position(|m| m.len() != ground_size) {
            return Err(DpError::domain(format!(
                "member {bad} has length {} but ground size is {ground_size}",
                members[bad].len()
            )));
        }
        Ok(SetFamily {
            ground_size,
            members,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.members.len() {
            return Err(DpError::domain(format!(
                "{} labels for {} members",
                labels.len(),
                self.members.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Builds a family from explicit element lists.
    pub fn from_sets(ground_size: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut members = Vec::with_capacity(sets.len());
        for set in sets {
            let mut row = BitRow::zeros(ground_size);
            for &e in set {
                if e >= ground_size {
                    return Err(DpError::domain(format!(
                        "element {e} outside ground set of size {ground_size}"
                    )));
                }
                row.set(e, true);
            }
            members.push(row);
        }
        SetFamily::new(ground_size, members)
    }

    /// Builds a family from `'0'/'1'` strings, one per member.
    pub fn from_bit_strings(ground_size: usize, sets: &[&str]) -> Result<Self> {
        let rows = sets
            .iter()
            .map(|s| BitRow::parse(s))
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(ground_size, rows)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn members(&self) -> &[BitRow] {
        &self.members
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, member: usize, element: usize) -> bool {
        self.members[member].get(element)
    }

    pub fn distinct_count(&self) -> usize {
        self.members.iter().collect::<HashSet<_>>().len()
    }

    /// Restriction of every member to `subset`; member `i` of the result is
    /// member `i` of `self` intersected with `subset` and re-indexed.
    pub fn trace(&self, subset: &[usize]) -> Result<SetFamily> {
        self.check_subset(subset)?;
        let members = self
            .members
            .iter()
            .map(|row| {
                let mut out = BitRow::zeros(subset.len());
                for (k, &i) in subset.iter().enumerate() {
                    out.set(k, row.get(i));
                }
                out
            })
            .collect();
        Ok(SetFamily {
            ground_size: subset.len(),
            members,
            labels: None,
        })
    }

    /// Transposed incidence: ground elements of the result are the members of
    /// `self`, and member `j` of the result collects the members containing
    /// ground element `j`.
    pub fn dual(&self) -> SetFamily {
        let members = (0..self.ground_size)
            .map(|j| {
                let mut row = BitRow::zeros(self.members.len());
                for (i, m) in self.members.iter().enumerate() {
                    if m.get(j) {
                        row.set(i, true);
                    }
                }
                row
            })
            .collect();
        SetFamily {
            ground_size: self.members.len(),
            members,
            labels: None,
        }
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = HashSet::with_capacity(subset.len());
        for &i in subset {
            if i >= self.ground_size {
                return Err(DpError::domain(format!(
                    "index {i} out of range for ground size {}",
                    self.ground_size
                )));
            }
            if !seen.insert(i) {
                return Err(DpError::domain(format!("index {i} repeated in subset")));
            }
        }
        Ok(())
    }

    fn distinct_traces(&self, subset: &[usize]) -> usize {
        debug_assert!(subset.len() <= 64);
        let mut seen = HashSet::with_capacity(self.members.len());
        for row in &self.members {
            seen.insert(row.project(subset));
        }
        seen.len()
    }

    fn is_shattered(&self, subset: &[usize]) -> bool {
        if subset.len() >= 64 {
            return false;
        }
        let need = 1usize << subset.len();
        if self.members.len() < need {
            return false;
        }
        self.distinct_traces(subset) == need
    }

    /// Largest `d` such that some `d`-subset of the ground set is shattered;
    /// `-1` for the empty family.
    pub fn vc_dimension(&self) -> i64 {
        if self.members.is_empty() {
            return -1;
        }
        let distinct = self.distinct_count();
        let mut best = 0i64;
        // Shattering is closed downward, so once no d-subset is shattered no
        // larger subset can be.
        for d in 1..=self.ground_size.min(63) {
            if (1usize << d) > distinct {
                break;
            }
            let found = for_each_combination(self.ground_size, d, |subset| {
                !self.is_shattered(subset)
            });
            if found {
                best = d as i64;
            } else {
                break;
            }
        }
        best
    }

    /// Maximum number of distinct traces over `m`-subsets. With `budget`
    /// set, only that many uniformly sampled subsets are examined.
    pub fn shatter_function(
        &self,
        m: usize,
        budget: Option<(usize, u64)>,
    ) -> Result<ShatterEntry> {
        if m > self.ground_size {
            return Err(DpError::domain(format!(
                "m = {m} exceeds ground size {}",
                self.ground_size
            )));
        }
        if m > 64 {
            return Err(DpError::domain("m above 64 is not supported"));
        }
        let mut best = 0usize;
        match budget {
            None => {
                for_each_combination(self.ground_size, m, |subset| {
                    best = best.max(self.distinct_traces(subset));
                    true
                });
                Ok(ShatterEntry {
                    m,
                    pi_m: best as u64,
                    exact: true,
                })
            }
            Some((samples, seed)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    let mut subset = sample_indices(&mut rng, self.ground_size, m).into_vec();
                    subset.sort_unstable();
                    best = best.max(self.distinct_traces(&subset));
                }
                Ok(ShatterEntry {
                    m,
                    pi_m: best as u64,
                    exact: false,
                })
            }
        }
    }

    /// Exact shatter function for every `m` in `0..=ground_size`.
    pub fn shatter_profile(&self) -> Result<ShatterProfile> {
        let values = (0..=self.ground_size)
            .map(|m| self.shatter_function(m, None))
            .collect::<Result<Vec<_>>>()?;
        Ok(ShatterProfile { values })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = FamilyFile {
            ground: self.ground_size,
            sets: self.members.iter().map(BitRow::to_bit_string).collect(),
            labels: self.labels.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        let mut members = Vec::with_capacity(file.sets.len());
        for (i, s) in file.sets.iter().enumerate() {
            let row = BitRow::parse(s)?;
            if row.len() != file.ground {
                return Err(DpError::domain(format!(
                    "set {i} has {} characters but ground is {}",
                    row.len(),
                    file.ground
                )));
            }
            members.push(row);
        }
        let family = SetFamily::new(file.ground, members)?;
        match file.labels {
            Some(labels) => family.with_labels(labels),
            None => Ok(family),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        SetFamily::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Σ_{i=0..min(d,n)} C(n, i).
pub fn sauer_bound(n: u64, d: u64) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 0..=d.min(n) {
        if i > 0 {
            binom = binom * (n - i + 1) as u128 / i as u128;
        }
        total += binom;
    }
    total
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order until it
/// returns `false`. Returns `true` if some call returned `false`.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return true;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return false;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singletons(n: usize) -> SetFamily {
        SetFamily::from_sets(n, &(0..n).map(|i| vec![i]).collect::<Vec<_>>()).unwrap()
    }

    fn half_intervals(n: usize) -> SetFamily {
        SetFamily::from_sets(n, &(0..n).map(|i| (0..=i).collect()).collect::<Vec<_>>()).unwrap()
    }

    fn power_set(n: usize) -> SetFamily {
        let sets: Vec<Vec<usize>> = (0..1usize << n)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect();
        SetFamily::from_sets(n, &sets).unwrap()
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_combination(5, 0, |s| {
            assert!(s.is_empty());
            count += 1;
            true
        });
        assert_eq!(count, 1);
        let mut count5 = 0;
        for_each_combination(5, 5, |_| {
            count5 += 1;
            true
        });
        assert_eq!(count5, 1);
    }

    #[test]
    fn trace_restricts_members() {
        let f = SetFamily::from_bit_strings(4, &["1100", "0110"]).unwrap();
        let t = f.trace(&[0, 1]).unwrap();
        assert_eq!(t, SetFamily::from_bit_strings(2, &["11", "01"]).unwrap());
    }

    #[test]
    fn empty_trace_collapses_members() {
        let t = half_intervals(5).trace(&[]).unwrap();
        assert_eq!(t.ground_size(), 0);
        assert_eq!(t.len(), 5);
        assert_eq!(t.distinct_count(), 1);
    }

    #[test]
    fn half_interval_trace_on_odd_points() {
        let t = half_intervals(8).trace(&[1, 3, 5]).unwrap();
        assert_eq!(t.distinct_count(), 4);
    }

    #[test]
    fn trace_rejects_bad_indices() {
        let f = singletons(3);
        assert!(matches!(f.trace(&[3]), Err(DpError::InputDomain(_))));
        assert!(matches!(f.trace(&[1, 1]), Err(DpError::InputDomain(_))));
    }

    #[test]
    fn dual_examples() {
        let f = SetFamily::from_bit_strings(2, &["10", "01"]).unwrap();
        assert_eq!(f.dual(), f);
        assert_eq!(singletons(3).dual(), singletons(3));
        let g = half_intervals(5).with_labels((0..5).map(|i| i.to_string()).collect()).unwrap();
        let back = g.dual().dual();
        assert_eq!(back.members(), g.members());
        assert!(back.labels().is_none());
    }

    #[test]
    fn vc_dimension_examples() {
        assert_eq!(singletons(4).vc_dimension(), 1);
        let empty_only = SetFamily::from_sets(3, &[vec![]]).unwrap();
        assert_eq!(empty_only.vc_dimension(), 0);
        assert_eq!(half_intervals(8).vc_dimension(), 1);
        assert_eq!(SetFamily::new(3, vec![]).unwrap().vc_dimension(), -1);
        assert_eq!(power_set(4).vc_dimension(), 4);
    }

    #[test]
    fn shatter_function_examples() {
        assert_eq!(singletons(4).shatter_function(2, None).unwrap().pi_m, 3);
        assert_eq!(power_set(3).shatter_function(3, None).unwrap().pi_m, 8);
        assert_eq!(half_intervals(8).shatter_function(3, None).unwrap().pi_m, 4);
        assert!(matches!(
            singletons(3).shatter_function(4, None),
            Err(DpError::InputDomain(_))
        ));
        let sampled = half_intervals(8).shatter_function(3, Some((20, 1))).unwrap();
        assert!(!sampled.exact);
        assert!(sampled.pi_m <= 4);
    }

    #[test]
    fn sauer_bound_examples() {
        assert_eq!(sauer_bound(5, 2), 16);
        assert_eq!(sauer_bound(7, 0), 1);
        assert_eq!(sauer_bound(4, 4), 16);
        assert_eq!(sauer_bound(3, 10), 8);
        assert_eq!(sauer_bound(0, 0), 1);
    }

    #[test]
    fn json_round_trip_and_ragged_rejection() {
        let f = SetFamily::from_bit_strings(3, &["011", "100"])
            .unwrap()
            .with_labels(vec!["a".into(), "b".into()])
            .unwrap();
        let back = SetFamily::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        let ragged = r#"{"ground": 3, "sets": ["011", "10"]}"#;
        assert!(matches!(SetFamily::from_json(ragged), Err(DpError::InputDomain(_))));
        let bad_labels = r#"{"ground": 1, "sets": ["1"], "labels": ["a", "b"]}"#;
        assert!(SetFamily::from_json(bad_labels).is_err());
    }
}
