//! Exhaustive family-rank oracle for tiny tensors.
//!
//! The universe of admissible rank-one tensors is enumerated, deduplicated
//! and then searched by iterative deepening on the number of terms. Tensors
//! are packed into a `u128` key (ceil(log2 q) bits per entry), so the oracle
//! only accepts shapes whose packed size fits in 128 bits.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::field::{Fe, GaloisField};
use crate::partition::SetPartition;
use crate::tensor::{rank_of, unrank, DenseTensor, PartitionFamily, TensorError};

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Cap on rank-one products generated before deduplication.
    pub universe_limit: u128,
    /// Cap on the size of any materialized sum level.
    pub level_limit: usize,
    /// Cap on the number of partial sums scanned at a single depth.
    pub scan_limit: u128,
    /// Shuffle the universe before searching. The answer must not depend on it.
    pub shuffle_seed: Option<u64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            universe_limit: 4_000_000,
            level_limit: 20_000_000,
            scan_limit: 2_000_000_000,
            shuffle_seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Rank(usize),
    /// No decomposition with at most this many terms exists.
    Exceeds(usize),
}

/// Packs tensors over GF(q) into u128 keys.
struct Packer {
    field: GaloisField,
    bits: u32,
    len: usize,
    xor_add: bool,
}

impl Packer {
    fn new(field: &GaloisField, len: usize) -> Result<Self, TensorError> {
        let q = field.order();
        let bits = 32 - (q - 1).leading_zeros();
        if (bits as u128) * (len as u128) > 128 {
            return Err(TensorError::BudgetExceeded {
                what: "packed oracle tensor (bits)",
                needed: bits as u128 * len as u128,
                limit: 128,
            });
        }
        Ok(Packer { field: field.clone(), bits, len, xor_add: field.characteristic() == 2 })
    }

    fn pack(&self, entries: &[Fe]) -> u128 {
        entries.iter().enumerate().fold(0u128, |acc, (i, e)| acc | ((e.code() as u128) << (i as u32 * self.bits)))
    }

    #[inline]
    fn entry(&self, key: u128, i: usize) -> Fe {
        let mask = (1u128 << self.bits) - 1;
        Fe::from_code(((key >> (i as u32 * self.bits)) & mask) as u32)
    }

    /// Digit-wise addition in characteristic 2 is xor of the codes.
    #[inline]
    fn add(&self, a: u128, b: u128) -> u128 {
        if self.xor_add {
            return a ^ b;
        }
        let mut out = 0u128;
        for i in 0..self.len {
            let s = self.field.add(self.entry(a, i), self.entry(b, i));
            out |= (s.code() as u128) << (i as u32 * self.bits);
        }
        out
    }

    #[inline]
    fn sub(&self, a: u128, b: u128) -> u128 {
        if self.xor_add {
            return a ^ b;
        }
        let mut out = 0u128;
        for i in 0..self.len {
            let s = self.field.sub(self.entry(a, i), self.entry(b, i));
            out |= (s.code() as u128) << (i as u32 * self.bits);
        }
        out
    }
}

/// All non-zero rank-one tensors over the family's generating partitions,
/// deduplicated and sorted by packed key.
fn rank_one_universe(
    field: &GaloisField,
    k: usize,
    axis: usize,
    family: &PartitionFamily,
    packer: &Packer,
    cfg: &OracleConfig,
) -> Result<Vec<u128>, TensorError> {
    let q = field.order() as u128;
    let generators = family.generators(k);
    let mut raw: u128 = 0;
    for p in &generators {
        let mut count: u128 = 1;
        for b in p.blocks() {
            let cells = (axis as u128).pow(b.len() as u32);
            count = count.saturating_mul(q.checked_pow(cells as u32).unwrap_or(u128::MAX));
        }
        raw = raw.saturating_add(count);
    }
    if raw > cfg.universe_limit {
        return Err(TensorError::BudgetExceeded {
            what: "oracle rank-one universe",
            needed: raw,
            limit: cfg.universe_limit,
        });
    }
    let len = axis.pow(k as u32);
    let mut set = HashSet::new();
    for p in &generators {
        collect_products(field, k, axis, len, p, packer, &mut set);
    }
    set.remove(&0);
    let mut out: Vec<u128> = set.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

fn collect_products(
    field: &GaloisField,
    k: usize,
    axis: usize,
    len: usize,
    partition: &SetPartition,
    packer: &Packer,
    set: &mut HashSet<u128>,
) {
    let q = field.order() as u64;
    let blocks = partition.blocks();
    let cells: Vec<usize> = blocks.iter().map(|b| axis.pow(b.len() as u32)).collect();
    // all non-zero functions per block, as value tables
    let tables: Vec<Vec<Vec<Fe>>> = cells
        .iter()
        .map(|&c| {
            let total = q.pow(c as u32);
            (1..total)
                .map(|mut code| {
                    (0..c)
                        .map(|_| {
                            let v = Fe::from_code((code % q) as u32);
                            code /= q;
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    // block-local index of every tensor cell
    let mut tuple = vec![0usize; k];
    let local: Vec<Vec<usize>> = (0..len)
        .map(|i| {
            unrank(i, axis, &mut tuple);
            blocks.iter().map(|b| rank_of(b.iter().map(|&a| tuple[a]), axis)).collect()
        })
        .collect();
    let mut choice = vec![0usize; blocks.len()];
    let mut entries = vec![Fe::ZERO; len];
    loop {
        for (i, idx) in local.iter().enumerate() {
            let mut v = Fe::ONE;
            for (b, &j) in idx.iter().enumerate() {
                v = field.mul(v, tables[b][choice[b]][j]);
            }
            entries[i] = v;
        }
        set.insert(packer.pack(&entries));
        // odometer over the per-block choices
        let mut b = 0;
        loop {
            if b == blocks.len() {
                return;
            }
            choice[b] += 1;
            if choice[b] < tables[b].len() {
                break;
            }
            choice[b] = 0;
            b += 1;
        }
    }
}

fn binomial_u128(n: u128, r: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Smallest `r <= r_max` such that `t` is a sum of `r` rank-one tensors
/// admissible for `family`.
pub fn exact_rank_oracle(
    t: &DenseTensor,
    family: &PartitionFamily,
    r_max: usize,
    cfg: &OracleConfig,
) -> Result<OracleResult, TensorError> {
    let field = t.field();
    let packer = Packer::new(field, t.entries().len())?;
    let target = packer.pack(t.entries());
    if target == 0 {
        return Ok(OracleResult::Rank(0));
    }
    let mut universe = rank_one_universe(field, t.arity(), t.axis_size(), family, &packer, cfg)?;
    if let Some(seed) = cfg.shuffle_seed {
        universe.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let singles: HashSet<u128> = universe.iter().copied().collect();
    let mut pairs: Option<HashSet<u128>> = None;
    for r in 1..=r_max {
        // split r = a + b: scan all a-term sums, look the remainder up in a b-level set
        let b = if r <= 3 { 1 } else { 2 };
        let a = r - b;
        let scans = binomial_u128(universe.len() as u128 + a as u128 - 1, a as u128);
        if scans > cfg.scan_limit {
            return Err(TensorError::BudgetExceeded { what: "oracle scan", needed: scans, limit: cfg.scan_limit });
        }
        if b == 2 && pairs.is_none() {
            pairs = Some(pair_level(&universe, &packer, cfg)?);
        }
        let level = if b == 1 { &singles } else { pairs.as_ref().unwrap() };
        if a == 0 {
            if level.contains(&target) {
                return Ok(OracleResult::Rank(r));
            }
            continue;
        }
        let found = (0..universe.len()).into_par_iter().any(|first| {
            let partial = packer.sub(target, universe[first]);
            scan(&universe, &packer, level, partial, first, a - 1)
        });
        if found {
            return Ok(OracleResult::Rank(r));
        }
    }
    Ok(OracleResult::Exceeds(r_max))
}

/// Whether `remaining` minus a multiset of `depth` universe members (indices
/// at least `from`) lands in `level`.
fn scan(universe: &[u128], packer: &Packer, level: &HashSet<u128>, remaining: u128, from: usize, depth: usize) -> bool {
    if depth == 0 {
        return level.contains(&remaining);
    }
    (from..universe.len()).any(|i| scan(universe, packer, level, packer.sub(remaining, universe[i]), i, depth - 1))
}

fn pair_level(universe: &[u128], packer: &Packer, cfg: &OracleConfig) -> Result<HashSet<u128>, TensorError> {
    let n = universe.len() as u128;
    let needed = n * (n + 1) / 2;
    if needed > cfg.level_limit as u128 {
        return Err(TensorError::BudgetExceeded { what: "oracle pair level", needed, limit: cfg.level_limit as u128 });
    }
    let mut set = HashSet::with_capacity(needed as usize);
    for (i, &u) in universe.iter().enumerate() {
        for &v in &universe[i..] {
            set.insert(packer.add(u, v));
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{delta_p, diagonal_lower_bound, diagonal_tensor, DiagonalBound};

    fn gf2() -> GaloisField {
        GaloisField::new(2, 1).unwrap()
    }

    #[test]
    fn full_diagonal_k3_needs_two() {
        let t = diagonal_tensor(&gf2(), 3, &[Fe::ONE, Fe::ONE]).unwrap();
        let cfg = OracleConfig::default();
        assert_eq!(exact_rank_oracle(&t, &PartitionFamily::All, 4, &cfg).unwrap(), OracleResult::Rank(2));
        assert_eq!(exact_rank_oracle(&t, &PartitionFamily::Slice, 4, &cfg).unwrap(), OracleResult::Rank(2));
        assert_eq!(diagonal_lower_bound(&t), DiagonalBound::Diagonal(2));
    }

    #[test]
    fn dxy_dzw_partition_vs_slice() {
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let t = delta_p(&gf2(), 2, &p).unwrap();
        let cfg = OracleConfig::default();
        assert_eq!(exact_rank_oracle(&t, &PartitionFamily::All, 3, &cfg).unwrap(), OracleResult::Rank(1));
        assert_eq!(exact_rank_oracle(&t, &PartitionFamily::Slice, 3, &cfg).unwrap(), OracleResult::Rank(2));
    }

    #[test]
    fn zero_tensor_has_rank_zero() {
        let t = DenseTensor::zeros(&gf2(), 3, 2).unwrap();
        assert_eq!(
            exact_rank_oracle(&t, &PartitionFamily::Tensor, 2, &OracleConfig::default()).unwrap(),
            OracleResult::Rank(0)
        );
    }

    #[test]
    fn exceeds_when_r_max_too_small() {
        let t = diagonal_tensor(&gf2(), 3, &[Fe::ONE, Fe::ONE]).unwrap();
        assert_eq!(
            exact_rank_oracle(&t, &PartitionFamily::All, 1, &OracleConfig::default()).unwrap(),
            OracleResult::Exceeds(1)
        );
    }

    #[test]
    fn universe_budget() {
        let t = diagonal_tensor(&gf2(), 4, &[Fe::ONE, Fe::ONE]).unwrap();
        let cfg = OracleConfig { universe_limit: 100, ..Default::default() };
        assert!(matches!(
            exact_rank_oracle(&t, &PartitionFamily::All, 2, &cfg),
            Err(TensorError::BudgetExceeded { .. })
        ));
        let big = diagonal_tensor(&GaloisField::new(3, 1).unwrap(), 5, &[Fe::ONE; 3]).unwrap();
        assert!(matches!(
            exact_rank_oracle(&big, &PartitionFamily::All, 2, &OracleConfig::default()),
            Err(TensorError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn odd_characteristic_packing() {
        // GF(3), |X| = 2, k = 3: diagonal with values 1 and 2 has rank 2
        let f = GaloisField::new(3, 1).unwrap();
        let t = diagonal_tensor(&f, 3, &[Fe::ONE, f.from_int(2)]).unwrap();
        let r = exact_rank_oracle(&t, &PartitionFamily::All, 3, &OracleConfig::default()).unwrap();
        assert_eq!(r, OracleResult::Rank(2));
    }

    #[test]
    fn shuffled_universe_same_answer() {
        let t = diagonal_tensor(&gf2(), 3, &[Fe::ONE, Fe::ONE]).unwrap();
        for seed in 0..4 {
            let cfg = OracleConfig { shuffle_seed: Some(seed), ..Default::default() };
            assert_eq!(exact_rank_oracle(&t, &PartitionFamily::Tensor, 3, &cfg).unwrap(), OracleResult::Rank(2));
        }
    }
}
