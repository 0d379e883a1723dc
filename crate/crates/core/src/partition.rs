//! Set partitions of axis indices and permutations of the symmetric group.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("block list does not partition {{0..{k}}}: {reason}")]
    NotAPartition { k: usize, reason: &'static str },
    #[error("{0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),
}

/// A partition of `{0, .., k-1}` in canonical form: every block sorted,
/// blocks ordered by their minimum element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Validates and canonicalizes an arbitrary block list.
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let k: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; k];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(PartitionError::NotAPartition { k, reason: "empty block" });
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= k || seen[i] {
                    return Err(PartitionError::NotAPartition { k, reason: "blocks overlap or leave a gap" });
                }
                seen[i] = true;
            }
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { blocks })
    }

    /// Like [`SetPartition::new`] but also checks the ground set size.
    pub fn of_size(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let p = Self::new(blocks)?;
        if p.ground_size() != k {
            return Err(PartitionError::NotAPartition { k, reason: "wrong ground set size" });
        }
        Ok(p)
    }

    /// Decodes a restricted growth string: `rgs[i]` is the block of element `i`.
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let count = rgs.iter().map(|&b| b + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        SetPartition { blocks }
    }

    pub fn to_rgs(&self) -> Vec<usize> {
        let mut rgs = vec![0; self.ground_size()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                rgs[i] = b;
            }
        }
        rgs
    }

    pub fn trivial(k: usize) -> Self {
        SetPartition { blocks: vec![(0..k).collect()] }
    }

    pub fn singletons(k: usize) -> Self {
        SetPartition { blocks: (0..k).map(|i| vec![i]).collect() }
    }

    /// `{i} | rest`.
    pub fn slice(k: usize, i: usize) -> Self {
        let rest: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        Self::new(vec![vec![i], rest]).expect("valid slice partition")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() < 2
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&i)).expect("index inside ground set")
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &SetPartition) -> bool {
        self.ground_size() == coarser.ground_size()
            && self.blocks.iter().all(|b| coarser.blocks.iter().any(|c| b.iter().all(|i| c.contains(i))))
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }
}

impl TryFrom<Vec<Vec<usize>>> for SetPartition {
    type Error = PartitionError;
    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self, Self::Error> {
        SetPartition::new(blocks)
    }
}

impl From<SetPartition> for Vec<Vec<usize>> {
    fn from(p: SetPartition) -> Self {
        p.blocks
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|i| i.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// All partitions of `{0..k-1}`, in restricted-growth-string order.
pub fn all_partitions(k: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(SetPartition { blocks: Vec::new() });
        return out;
    }
    let mut rgs = vec![0usize; k];
    // max_prefix[i] = max(rgs[0..i])
    loop {
        out.push(SetPartition::from_rgs(&rgs));
        // find rightmost position that can be incremented
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            let max_before = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_before {
                rgs[i] += 1;
                for x in rgs[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// All partitions except the single-block one.
pub fn nontrivial_partitions(k: usize) -> Vec<SetPartition> {
    all_partitions(k).into_iter().filter(|p| !p.is_trivial()).collect()
}

pub fn bell_number(k: usize) -> u64 {
    // Bell triangle
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// A permutation of `{0..k-1}` in one-line notation: `i -> image[i]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(PartitionError::NotAPermutation(image));
            }
            seen[i] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cycles, each starting at its smallest element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut cycles = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.0[i];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// The partition whose blocks are the orbits of the permutation.
    pub fn cycle_partition(&self) -> SetPartition {
        SetPartition::new(self.cycles()).expect("cycles partition the ground set")
    }

    pub fn sign(&self) -> i64 {
        let even_cycles = self.cycles().iter().filter(|c| c.len() % 2 == 0).count();
        if even_cycles % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PartitionError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// All `k!` permutations in lexicographic order.
pub fn all_permutations(k: usize) -> Vec<Permutation> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![Permutation(cur.clone())];
    if k < 2 {
        return out;
    }
    loop {
        let Some(i) = (0..k - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(Permutation(cur.clone()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let expected = [1, 1, 2, 5, 15, 52, 203, 877];
        for (k, &b) in expected.iter().enumerate() {
            assert_eq!(bell_number(k), b);
            assert_eq!(all_partitions(k).len() as u64, b);
        }
    }

    #[test]
    fn partitions_are_canonical_and_distinct() {
        let parts = all_partitions(5);
        let mut sorted = parts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), parts.len());
        for p in &parts {
            assert_eq!(SetPartition::new(p.blocks().to_vec()).unwrap(), *p);
            assert_eq!(SetPartition::from_rgs(&p.to_rgs()), *p);
        }
        // first is trivial, last is all singletons
        assert!(parts[0].is_trivial());
        assert_eq!(parts.last().unwrap(), &SetPartition::singletons(5));
    }

    #[test]
    fn canonicalization() {
        let p = SetPartition::new(vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p.to_string(), "{0,2}|{1,3}");
        assert!(SetPartition::new(vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(SetPartition::new(vec![vec![0], vec![2]]).is_err());
        assert!(SetPartition::new(vec![vec![0], vec![]]).is_err());
        assert!(SetPartition::of_size(4, vec![vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn refinement() {
        let fine = SetPartition::new(vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        let coarse = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(SetPartition::singletons(4).refines(&SetPartition::slice(4, 2)));
        assert!(coarse.refines(&coarse));
    }

    #[test]
    fn permutations_and_signs() {
        let perms = all_permutations(4);
        assert_eq!(perms.len(), 24);
        let total: i64 = perms.iter().map(Permutation::sign).sum();
        assert_eq!(total, 0);
        let swap = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_eq!(swap.sign(), -1);
        assert_eq!(swap.cycle_partition().to_string(), "{0,1}|{2}");
        let three_cycle = Permutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(three_cycle.sign(), 1);
        assert!(three_cycle.cycle_partition().is_trivial());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn serde_uses_block_lists() {
        let p = SetPartition::new(vec![vec![2, 3], vec![0, 1]]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[[0,1],[2,3]]");
        let back: SetPartition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<SetPartition>("[[0,1],[1]]").is_err());
    }
}
