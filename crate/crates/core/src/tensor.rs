//! Dense tensors over `X^k`, partition-rank-1 terms and decomposition
//! certificates.
//!
//! All axes share one ground set `X = {0, .., axis_size - 1}`. Entries are
//! stored row-major with axis 0 most significant.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::field::{Fe, FieldError, FieldSpec, GaloisField};
use crate::partition::{all_partitions, PartitionError, Permutation, SetPartition};

/// Default cap on the number of entries of a dense tensor.
pub const DEFAULT_ENTRY_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("{what} needs {needed} entries, over the budget of {limit}")]
    BudgetExceeded { what: &'static str, needed: u128, limit: u128 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("term {term} is malformed: {reason}")]
    MalformedTerm { term: usize, reason: String },
    #[error("term {term} uses partition {partition}, which the family {family} does not admit")]
    Inadmissible { term: usize, partition: SetPartition, family: String },
    #[error("term {term} with partition {partition} refines no target partition")]
    NoCoarsening { term: usize, partition: SetPartition },
    #[error("malformed certificate: {0}")]
    Parse(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub(crate) fn checked_volume(axis_size: usize, k: usize, limit: u64, what: &'static str) -> Result<usize, TensorError> {
    let needed = (axis_size as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > limit as u128 {
        return Err(TensorError::BudgetExceeded { what, needed, limit: limit as u128 });
    }
    Ok(needed as usize)
}

/// Writes the base-`axis_size` digits of `index` into `tuple`, axis 0 first.
#[inline]
pub(crate) fn unrank(mut index: usize, axis_size: usize, tuple: &mut [usize]) {
    for slot in tuple.iter_mut().rev() {
        *slot = index % axis_size;
        index /= axis_size;
    }
}

#[inline]
pub(crate) fn rank_of(tuple: impl IntoIterator<Item = usize>, axis_size: usize) -> usize {
    tuple.into_iter().fold(0, |acc, x| acc * axis_size + x)
}

#[derive(Clone, PartialEq, Eq)]
pub struct DenseTensor {
    field: GaloisField,
    k: usize,
    axis_size: usize,
    entries: Vec<Fe>,
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseTensor({:?}, k={}, |X|={}, {:?})", self.field, self.k, self.axis_size, self.entries)
    }
}

impl DenseTensor {
    pub fn zeros(field: &GaloisField, k: usize, axis_size: usize) -> Result<Self, TensorError> {
        let len = checked_volume(axis_size, k, DEFAULT_ENTRY_BUDGET, "tensor")?;
        Ok(DenseTensor { field: field.clone(), k, axis_size, entries: vec![Fe::ZERO; len] })
    }

    /// Tabulates `f` over all of `X^k`.
    pub fn from_function<F>(
        field: &GaloisField,
        k: usize,
        axis_size: usize,
        budget: u64,
        f: F,
    ) -> Result<Self, TensorError>
    where
        F: Fn(&[usize]) -> Fe + Sync,
    {
        let len = checked_volume(axis_size, k, budget, "tensor")?;
        let entries = (0..len)
            .into_par_iter()
            .map_init(
                || vec![0usize; k],
                |tuple, i| {
                    unrank(i, axis_size, tuple);
                    f(tuple)
                },
            )
            .collect();
        Ok(DenseTensor { field: field.clone(), k, axis_size, entries })
    }

    pub fn from_entries(
        field: &GaloisField,
        k: usize,
        axis_size: usize,
        entries: Vec<Fe>,
    ) -> Result<Self, TensorError> {
        let len = checked_volume(axis_size, k, DEFAULT_ENTRY_BUDGET, "tensor")?;
        if entries.len() != len {
            return Err(TensorError::ShapeMismatch(format!("expected {len} entries, got {}", entries.len())));
        }
        if let Some(bad) = entries.iter().find(|e| !field.contains(**e)) {
            return Err(FieldError::BadElement { code: bad.code() as u64, q: field.order() }.into());
        }
        Ok(DenseTensor { field: field.clone(), k, axis_size, entries })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn axis_size(&self) -> usize {
        self.axis_size
    }

    pub fn entries(&self) -> &[Fe] {
        &self.entries
    }

    pub fn get(&self, tuple: &[usize]) -> Fe {
        self.entries[rank_of(tuple.iter().copied(), self.axis_size)]
    }

    pub fn set(&mut self, tuple: &[usize], value: Fe) {
        let i = rank_of(tuple.iter().copied(), self.axis_size);
        self.entries[i] = value;
    }

    pub fn tuple_of(&self, index: usize) -> Vec<usize> {
        let mut t = vec![0; self.k];
        unrank(index, self.axis_size, &mut t);
        t
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn same_shape(&self, other: &DenseTensor) -> bool {
        self.field == other.field && self.k == other.k && self.axis_size == other.axis_size
    }

    fn shape_string(&self) -> String {
        format!("{:?}, k={}, |X|={}", self.field, self.k, self.axis_size)
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor, TensorError> {
        if !self.same_shape(other) {
            return Err(TensorError::ShapeMismatch(format!("{} vs {}", self.shape_string(), other.shape_string())));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.field.add(a, b)).collect();
        Ok(DenseTensor { entries, ..self.clone() })
    }

    pub fn scale(&self, c: Fe) -> DenseTensor {
        let entries = self.entries.iter().map(|&a| self.field.mul(a, c)).collect();
        DenseTensor { entries, ..self.clone() }
    }

    /// Pointwise product.
    pub fn hadamard(&self, other: &DenseTensor) -> Result<DenseTensor, TensorError> {
        if !self.same_shape(other) {
            return Err(TensorError::ShapeMismatch(format!("{} vs {}", self.shape_string(), other.shape_string())));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.field.mul(a, b)).collect();
        Ok(DenseTensor { entries, ..self.clone() })
    }

    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            field: self.field.spec(),
            k: self.k,
            axis_size: self.axis_size,
            entries: self.entries.iter().map(|e| e.code()).collect(),
        }
    }

    pub fn from_json(json: &TensorJson) -> Result<Self, TensorError> {
        let field = GaloisField::from_spec(&json.field)?;
        let entries = json.entries.iter().map(|&c| field.element(c as u64)).collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(&field, json.k, json.axis_size, entries)
    }
}

/// Wire form of a dense tensor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorJson {
    pub field: FieldSpec,
    pub k: usize,
    pub axis_size: usize,
    pub entries: Vec<u32>,
}

/// `delta_P`: one exactly when the tuple is constant on every block of `P`.
/// Singleton blocks contribute the constant 1.
pub fn delta_p(field: &GaloisField, axis_size: usize, partition: &SetPartition) -> Result<DenseTensor, TensorError> {
    let k = partition.ground_size();
    DenseTensor::from_function(field, k, axis_size, DEFAULT_ENTRY_BUDGET, |t| {
        let ok = partition.blocks().iter().all(|b| b.iter().all(|&i| t[i] == t[b[0]]));
        if ok {
            Fe::ONE
        } else {
            Fe::ZERO
        }
    })
}

/// The fixed-point indicator of `sigma` acting on tuples by permuting
/// coordinates. Cross-checked against `delta_P` of the cycle partition.
pub fn f_sigma(field: &GaloisField, axis_size: usize, sigma: &Permutation) -> Result<DenseTensor, TensorError> {
    let k = sigma.len();
    let image = sigma.image();
    let fixed = DenseTensor::from_function(field, k, axis_size, DEFAULT_ENTRY_BUDGET, |t| {
        if (0..k).all(|i| t[image[i]] == t[i]) {
            Fe::ONE
        } else {
            Fe::ZERO
        }
    })?;
    let via_partition = delta_p(field, axis_size, &sigma.cycle_partition())?;
    assert_eq!(fixed, via_partition, "fixed-point indicator of {sigma:?} differs from its cycle delta");
    Ok(fixed)
}

/// Which non-trivial partitions a rank-one term may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionFamily {
    All,
    Slice,
    Tensor,
    Explicit(Vec<SetPartition>),
}

impl PartitionFamily {
    /// A partition is admissible when it is non-trivial and refines some
    /// member of the family.
    pub fn admits(&self, p: &SetPartition) -> bool {
        if p.is_trivial() {
            return false;
        }
        match self {
            PartitionFamily::All => true,
            PartitionFamily::Slice => p.has_singleton(),
            PartitionFamily::Tensor => p.blocks().iter().all(|b| b.len() == 1),
            PartitionFamily::Explicit(list) => list.iter().any(|c| !c.is_trivial() && p.refines(c)),
        }
    }

    /// Coarsest admissible partitions of `{0..k-1}`; every admissible
    /// rank-one tensor is a product over one of these.
    pub fn generators(&self, k: usize) -> Vec<SetPartition> {
        let mut out: Vec<SetPartition> = match self {
            PartitionFamily::All => all_partitions(k).into_iter().filter(|p| p.num_blocks() == 2).collect(),
            PartitionFamily::Slice => (0..k).map(|i| SetPartition::slice(k, i)).collect(),
            PartitionFamily::Tensor => vec![SetPartition::singletons(k)],
            PartitionFamily::Explicit(list) => list.iter().filter(|p| !p.is_trivial()).cloned().collect(),
        };
        out.retain(|p| !p.is_trivial());
        out.sort();
        out.dedup();
        out
    }

    pub fn name(&self) -> String {
        match self {
            PartitionFamily::All => "ALL".into(),
            PartitionFamily::Slice => "SLICE".into(),
            PartitionFamily::Tensor => "TENSOR".into(),
            PartitionFamily::Explicit(list) => {
                let parts: Vec<String> = list.iter().map(|p| p.to_string()).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ALL" => Some(PartitionFamily::All),
            "SLICE" => Some(PartitionFamily::Slice),
            "TENSOR" => Some(PartitionFamily::Tensor),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FamilyRepr {
    Named(String),
    List(Vec<SetPartition>),
}

impl Serialize for PartitionFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PartitionFamily::Explicit(list) => FamilyRepr::List(list.clone()).serialize(s),
            other => FamilyRepr::Named(other.name()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PartitionFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match FamilyRepr::deserialize(d)? {
            FamilyRepr::List(list) => Ok(PartitionFamily::Explicit(list)),
            FamilyRepr::Named(name) => PartitionFamily::parse_name(&name)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown partition family {name}"))),
        }
    }
}

/// A function of the axes in `axes`, tabulated row-major in axis order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorTable {
    pub axes: Vec<usize>,
    pub table: Vec<Fe>,
}

impl FactorTable {
    #[inline]
    fn lookup(&self, tuple: &[usize], axis_size: usize) -> Fe {
        self.table[rank_of(self.axes.iter().map(|&a| tuple[a]), axis_size)]
    }
}

/// `prod_{A in P} f_A(x_A)` for a non-trivial partition `P`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub partition: SetPartition,
    pub factors: Vec<FactorTable>,
}

impl RankOneTerm {
    /// Builds a term by tabulating one closure per block.
    pub fn tabulate<F>(partition: SetPartition, axis_size: usize, mut f: F) -> Result<Self, TensorError>
    where
        F: FnMut(usize, &[usize]) -> Fe,
    {
        let mut factors = Vec::with_capacity(partition.num_blocks());
        for (b, block) in partition.blocks().iter().enumerate() {
            let len = checked_volume(axis_size, block.len(), DEFAULT_ENTRY_BUDGET, "factor table")?;
            let mut sub = vec![0usize; block.len()];
            let table = (0..len)
                .map(|i| {
                    unrank(i, axis_size, &mut sub);
                    f(b, &sub)
                })
                .collect();
            factors.push(FactorTable { axes: block.clone(), table });
        }
        Ok(RankOneTerm { partition, factors })
    }

    fn validate(&self, index: usize, field: &GaloisField, k: usize, axis_size: usize) -> Result<(), TensorError> {
        let bad = |reason: String| TensorError::MalformedTerm { term: index, reason };
        if self.partition.ground_size() != k {
            return Err(bad(format!("partition {} is not over {k} axes", self.partition)));
        }
        if self.factors.len() != self.partition.num_blocks() {
            return Err(bad("factor count differs from block count".into()));
        }
        for (factor, block) in self.factors.iter().zip(self.partition.blocks()) {
            if &factor.axes != block {
                return Err(bad(format!("factor axes {:?} do not match block {:?}", factor.axes, block)));
            }
            let len = (axis_size as u128).pow(block.len() as u32);
            if factor.table.len() as u128 != len {
                return Err(bad(format!("table over {:?} has {} entries, expected {len}", block, factor.table.len())));
            }
            if factor.table.iter().any(|e| !field.contains(*e)) {
                return Err(bad("table entry outside the field".into()));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, field: &GaloisField, tuple: &[usize], axis_size: usize) -> Fe {
        let mut acc = Fe::ONE;
        for factor in &self.factors {
            acc = field.mul(acc, factor.lookup(tuple, axis_size));
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn to_tensor(&self, field: &GaloisField, axis_size: usize) -> Result<DenseTensor, TensorError> {
        let k = self.partition.ground_size();
        DenseTensor::from_function(field, k, axis_size, DEFAULT_ENTRY_BUDGET, |t| self.eval(field, t, axis_size))
    }
}

/// A list of rank-one terms claimed to sum to a target tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub field: GaloisField,
    pub k: usize,
    pub axis_size: usize,
    pub family: PartitionFamily,
    pub target: Option<String>,
    pub terms: Vec<RankOneTerm>,
}

/// Certificate wire form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub field: FieldSpec,
    pub k: usize,
    pub axis_size: usize,
    pub family: PartitionFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub terms: Vec<RankOneTerm>,
}

impl Decomposition {
    pub fn new(field: &GaloisField, k: usize, axis_size: usize, family: PartitionFamily) -> Self {
        Decomposition { field: field.clone(), k, axis_size, family, target: None, terms: Vec::new() }
    }

    pub fn rank_claim(&self) -> usize {
        self.terms.len()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            field: self.field.spec(),
            k: self.k,
            axis_size: self.axis_size,
            family: self.family.clone(),
            target: self.target.clone(),
            terms: self.terms.clone(),
        }
    }

    pub fn from_json(json: CertificateJson) -> Result<Self, TensorError> {
        let field = GaloisField::from_spec(&json.field)?;
        let dec = Decomposition {
            field,
            k: json.k,
            axis_size: json.axis_size,
            family: json.family,
            target: json.target,
            terms: json.terms,
        };
        for (i, term) in dec.terms.iter().enumerate() {
            term.validate(i, &dec.field, dec.k, dec.axis_size)?;
        }
        Ok(dec)
    }

    pub fn from_json_str(s: &str) -> Result<Self, TensorError> {
        let json: CertificateJson = serde_json::from_str(s).map_err(|e| TensorError::Parse(e.to_string()))?;
        Self::from_json(json)
    }

    /// Pointwise sum of all terms.
    pub fn evaluate(&self) -> Result<DenseTensor, TensorError> {
        for (i, term) in self.terms.iter().enumerate() {
            term.validate(i, &self.field, self.k, self.axis_size)?;
        }
        let field = &self.field;
        let axis = self.axis_size;
        DenseTensor::from_function(field, self.k, axis, DEFAULT_ENTRY_BUDGET, |t| {
            self.terms.iter().fold(Fe::ZERO, |acc, term| field.add(acc, term.eval(field, t, axis)))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Verified { terms: usize },
    Mismatch { tuple: Vec<usize>, expected: Fe, found: Fe },
}

impl Verification {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verification::Verified { .. })
    }
}

/// Checks that `dec` sums to `target`. Family violations and malformed terms
/// are errors; a value mismatch is a regular outcome carrying the first
/// differing tuple in row-major order.
pub fn verify_decomposition(dec: &Decomposition, target: &DenseTensor) -> Result<Verification, TensorError> {
    if dec.field != *target.field() || dec.k != target.arity() || dec.axis_size != target.axis_size() {
        return Err(TensorError::ShapeMismatch(format!(
            "certificate is {:?}, k={}, |X|={}; target is {}",
            dec.field,
            dec.k,
            dec.axis_size,
            target.shape_string()
        )));
    }
    for (i, term) in dec.terms.iter().enumerate() {
        term.validate(i, &dec.field, dec.k, dec.axis_size)?;
        if !dec.family.admits(&term.partition) {
            return Err(TensorError::Inadmissible {
                term: i,
                partition: term.partition.clone(),
                family: dec.family.name(),
            });
        }
    }
    let sum = dec.evaluate()?;
    let first_bad = sum.entries().par_iter().zip(target.entries().par_iter()).position_first(|(a, b)| a != b);
    Ok(match first_bad {
        None => Verification::Verified { terms: dec.terms.len() },
        Some(i) => {
            Verification::Mismatch { tuple: target.tuple_of(i), expected: target.entries()[i], found: sum.entries()[i] }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagonalBound {
    /// Supported on constant tuples; the count of non-zero diagonal entries.
    Diagonal(usize),
    NotDiagonal {
        witness: Vec<usize>,
    },
}

/// For a diagonal tensor, the number of non-zero diagonal entries, which is
/// its partition rank and a lower bound for every family rank.
pub fn diagonal_lower_bound(t: &DenseTensor) -> DiagonalBound {
    let axis = t.axis_size();
    // index of (a, a, .., a)
    let diag_step: usize = (0..t.arity()).fold(0, |acc, _| acc * axis + 1);
    let mut count = 0;
    for (i, e) in t.entries().iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let on_diagonal = if t.arity() == 0 { true } else { i % diag_step == 0 };
        if !on_diagonal {
            return DiagonalBound::NotDiagonal { witness: t.tuple_of(i) };
        }
        count += 1;
    }
    DiagonalBound::Diagonal(count)
}

/// Rewrites every term over a coarser partition from `targets` by
/// multiplying its factor tables block-wise. The term count is unchanged.
pub fn coarsen_decomposition(dec: &Decomposition, targets: &[SetPartition]) -> Result<Decomposition, TensorError> {
    let field = &dec.field;
    let axis = dec.axis_size;
    let mut terms = Vec::with_capacity(dec.terms.len());
    for (i, term) in dec.terms.iter().enumerate() {
        term.validate(i, field, dec.k, axis)?;
        if targets.contains(&term.partition) {
            terms.push(term.clone());
            continue;
        }
        let coarse = targets
            .iter()
            .find(|c| !c.is_trivial() && term.partition.refines(c))
            .ok_or_else(|| TensorError::NoCoarsening { term: i, partition: term.partition.clone() })?;
        let mut full = vec![0usize; dec.k];
        let merged = RankOneTerm::tabulate(coarse.clone(), axis, |b, sub| {
            let block = &coarse.blocks()[b];
            for (&a, &x) in block.iter().zip(sub) {
                full[a] = x;
            }
            term.factors
                .iter()
                .filter(|f| f.axes.iter().all(|a| block.contains(a)))
                .fold(Fe::ONE, |acc, f| field.mul(acc, f.lookup(&full, axis)))
        })?;
        terms.push(merged);
    }
    Ok(Decomposition {
        field: field.clone(),
        k: dec.k,
        axis_size: axis,
        family: PartitionFamily::Explicit(targets.to_vec()),
        target: dec.target.clone(),
        terms,
    })
}

/// Full diagonal tensor with the given values on `(a, .., a)`.
pub fn diagonal_tensor(field: &GaloisField, k: usize, values: &[Fe]) -> Result<DenseTensor, TensorError> {
    let axis = values.len();
    DenseTensor::from_function(field, k, axis, DEFAULT_ENTRY_BUDGET, |t| {
        if t.iter().all(|&x| x == t[0]) {
            values[t[0]]
        } else {
            Fe::ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{all_partitions, all_permutations};

    fn gf2() -> GaloisField {
        GaloisField::new(2, 1).unwrap()
    }

    fn dxy_dzw(axis: usize) -> DenseTensor {
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        delta_p(&gf2(), axis, &p).unwrap()
    }

    #[test]
    fn tabulation_examples() {
        let f = gf2();
        let zero = DenseTensor::from_function(&f, 3, 2, 1000, |_| Fe::ZERO).unwrap();
        assert!(zero.is_zero());
        let id = DenseTensor::from_function(&f, 2, 3, 1000, |t| if t[0] == t[1] { Fe::ONE } else { Fe::ZERO }).unwrap();
        assert_eq!(id.entries().iter().filter(|e| **e == Fe::ONE).count(), 3);
        assert_eq!(id.get(&[1, 1]), Fe::ONE);
        let t = dxy_dzw(2);
        assert_eq!(t.entries().len(), 16);
        assert_eq!(t.entries().iter().filter(|e| **e == Fe::ONE).count(), 4);
        assert!(matches!(
            DenseTensor::from_function(&f, 10, 10, 1000, |_| Fe::ZERO),
            Err(TensorError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn delta_p_examples() {
        let f = gf2();
        let ones = delta_p(&f, 2, &SetPartition::singletons(3)).unwrap();
        assert!(ones.entries().iter().all(|e| *e == Fe::ONE));
        let diag = delta_p(&f, 2, &SetPartition::trivial(3)).unwrap();
        assert_eq!(diag.entries().iter().filter(|e| **e == Fe::ONE).count(), 2);
        assert_eq!(diagonal_lower_bound(&diag), DiagonalBound::Diagonal(2));
    }

    #[test]
    fn f_sigma_examples() {
        let f = gf2();
        let id = f_sigma(&f, 2, &Permutation::identity(3)).unwrap();
        assert!(id.entries().iter().all(|e| *e == Fe::ONE));
        let swap = f_sigma(&f, 3, &Permutation::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(swap, delta_p(&f, 3, &SetPartition::trivial(2)).unwrap());
        let cyc = f_sigma(&f, 2, &Permutation::new(vec![1, 2, 0]).unwrap()).unwrap();
        // fixed points of a 3-cycle on {0,1}^3 are (0,0,0) and (1,1,1)
        let ones: Vec<usize> =
            cyc.entries().iter().enumerate().filter(|(_, e)| **e == Fe::ONE).map(|(i, _)| i).collect();
        assert_eq!(ones, vec![0, 7]);
    }

    #[test]
    fn f_sigma_equals_cycle_delta_exhaustive() {
        let f = GaloisField::new(5, 1).unwrap();
        for k in 1..=5 {
            for axis in 1..=3 {
                for sigma in all_permutations(k) {
                    // f_sigma asserts the equality internally
                    let t = f_sigma(&f, axis, &sigma).unwrap();
                    assert_eq!(t, delta_p(&f, axis, &sigma.cycle_partition()).unwrap());
                }
            }
        }
    }

    fn single_term(partition: SetPartition, axis: usize, g: impl Fn(usize, &[usize]) -> Fe) -> RankOneTerm {
        RankOneTerm::tabulate(partition, axis, |b, sub| g(b, sub)).unwrap()
    }

    fn delta_term(partition: SetPartition, axis: usize) -> RankOneTerm {
        single_term(partition, axis, |_, sub| if sub.iter().all(|&x| x == sub[0]) { Fe::ONE } else { Fe::ZERO })
    }

    #[test]
    fn verify_examples() {
        let f = gf2();
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut dec = Decomposition::new(&f, 4, 2, PartitionFamily::All);
        dec.terms.push(delta_term(p, 2));
        assert_eq!(verify_decomposition(&dec, &dxy_dzw(2)).unwrap(), Verification::Verified { terms: 1 });

        let empty = Decomposition::new(&f, 3, 2, PartitionFamily::All);
        let zero = DenseTensor::zeros(&f, 3, 2).unwrap();
        assert_eq!(verify_decomposition(&empty, &zero).unwrap(), Verification::Verified { terms: 0 });

        let diag = diagonal_tensor(&f, 3, &[Fe::ONE, Fe::ONE]).unwrap();
        let mut one = Decomposition::new(&f, 3, 2, PartitionFamily::Slice);
        one.terms.push(single_term(SetPartition::slice(3, 0), 2, |b, sub| {
            if b == 0 || sub[0] == sub[1] {
                Fe::ONE
            } else {
                Fe::ZERO
            }
        }));
        assert!(matches!(verify_decomposition(&one, &diag).unwrap(), Verification::Mismatch { .. }));

        // two slice terms suffice: delta_a(x) * [y = z = a]
        let mut two = Decomposition::new(&f, 3, 2, PartitionFamily::Slice);
        for a in 0..2 {
            two.terms.push(single_term(SetPartition::slice(3, 0), 2, move |b, sub| {
                let hit = if b == 0 { sub[0] == a } else { sub[0] == a && sub[1] == a };
                if hit {
                    Fe::ONE
                } else {
                    Fe::ZERO
                }
            }));
        }
        assert!(verify_decomposition(&two, &diag).unwrap().is_verified());
    }

    #[test]
    fn verify_reports_family_and_shape_errors() {
        let f = gf2();
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut dec = Decomposition::new(&f, 4, 2, PartitionFamily::Slice);
        dec.terms.push(delta_term(p, 2));
        assert!(matches!(verify_decomposition(&dec, &dxy_dzw(2)), Err(TensorError::Inadmissible { term: 0, .. })));
        assert!(matches!(verify_decomposition(&dec, &dxy_dzw(3)), Err(TensorError::ShapeMismatch(_))));
        dec.family = PartitionFamily::All;
        dec.terms[0].factors[1].table.pop();
        assert!(matches!(verify_decomposition(&dec, &dxy_dzw(2)), Err(TensorError::MalformedTerm { .. })));
    }

    #[test]
    fn mismatch_points_at_first_tuple() {
        let f = gf2();
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut dec = Decomposition::new(&f, 4, 2, PartitionFamily::All);
        dec.terms.push(delta_term(p, 2));
        dec.terms[0].factors[1].table[3] = Fe::ZERO; // f(1,1) on axes {2,3}
        match verify_decomposition(&dec, &dxy_dzw(2)).unwrap() {
            Verification::Mismatch { tuple, expected, found } => {
                assert_eq!(tuple, vec![0, 0, 1, 1]);
                assert_eq!((expected, found), (Fe::ONE, Fe::ZERO));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagonal_bound_examples() {
        let f = GaloisField::new(5, 1).unwrap();
        let full = diagonal_tensor(&f, 3, &[Fe::ONE; 5]).unwrap();
        assert_eq!(diagonal_lower_bound(&full), DiagonalBound::Diagonal(5));
        assert_eq!(diagonal_lower_bound(&DenseTensor::zeros(&f, 3, 5).unwrap()), DiagonalBound::Diagonal(0));
        assert_eq!(diagonal_lower_bound(&dxy_dzw(2)), DiagonalBound::NotDiagonal { witness: vec![0, 0, 1, 1] });
    }

    #[test]
    fn family_admissibility() {
        let p22 = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p112 = SetPartition::new(vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        assert!(PartitionFamily::All.admits(&p22));
        assert!(!PartitionFamily::Slice.admits(&p22));
        assert!(PartitionFamily::Slice.admits(&p112));
        assert!(!PartitionFamily::Tensor.admits(&p112));
        assert!(PartitionFamily::Tensor.admits(&SetPartition::singletons(4)));
        assert!(!PartitionFamily::All.admits(&SetPartition::trivial(4)));
        let explicit = PartitionFamily::Explicit(vec![p22.clone()]);
        assert!(explicit.admits(&p112));
        assert!(!explicit.admits(&SetPartition::slice(4, 0)));
        assert_eq!(PartitionFamily::All.generators(4).len(), 7);
        assert_eq!(PartitionFamily::Slice.generators(2).len(), 1);
        assert_eq!(all_partitions(4).iter().filter(|p| PartitionFamily::All.admits(p)).count(), 14);
    }

    #[test]
    fn family_serde() {
        let fam: PartitionFamily = serde_json::from_str(r#""SLICE""#).unwrap();
        assert_eq!(fam, PartitionFamily::Slice);
        let explicit: PartitionFamily = serde_json::from_str("[[[0,1],[2,3]]]").unwrap();
        assert_eq!(serde_json::to_string(&explicit).unwrap(), "[[[0,1],[2,3]]]");
        assert!(serde_json::from_str::<PartitionFamily>(r#""BOGUS""#).is_err());
    }

    #[test]
    fn coarsen_examples() {
        let f = GaloisField::new(3, 1).unwrap();
        let axis = 2;
        let target =
            DenseTensor::from_function(&f, 3, axis, 1000, |t| f.from_int((t[0] + 2 * t[1] * t[2]) as i64 + 1)).unwrap();
        // tensor-rank style terms: each a product of three vectors
        let mut dec = Decomposition::new(&f, 3, axis, PartitionFamily::Tensor);
        let vals = [[1i64, 2], [2, 0], [1, 1]];
        dec.terms.push(single_term(SetPartition::singletons(3), axis, |b, sub| f.from_int(vals[b][sub[0]])));
        let expected = dec.evaluate().unwrap();
        let before = verify_decomposition(&dec, &expected).unwrap();
        let slice = SetPartition::slice(3, 1);
        let coarse = coarsen_decomposition(&dec, std::slice::from_ref(&slice)).unwrap();
        assert_eq!(coarse.terms[0].partition, slice);
        assert_eq!(verify_decomposition(&coarse, &expected).unwrap(), before);
        assert_eq!(coarse.rank_claim(), dec.rank_claim());
        // unrelated target: still consistent mismatch reporting
        assert_eq!(verify_decomposition(&coarse, &target).unwrap(), verify_decomposition(&dec, &target).unwrap());

        // already in the target family: unchanged
        let same = coarsen_decomposition(&coarse, std::slice::from_ref(&slice)).unwrap();
        assert_eq!(same.terms, coarse.terms);

        // {0}|{1}|{2,3} -> {0,1}|{2,3}
        let fine = SetPartition::new(vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        let p22 = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut d4 = Decomposition::new(&f, 4, 3, PartitionFamily::All);
        d4.terms.push(single_term(fine, 3, |b, sub| f.from_int((b as i64 + 1) * (sub[0] as i64 + sub.len() as i64))));
        let merged = coarsen_decomposition(&d4, std::slice::from_ref(&p22)).unwrap();
        assert_eq!(merged.terms[0].factors.len(), 2);
        assert_eq!(merged.evaluate().unwrap(), d4.evaluate().unwrap());

        let err = coarsen_decomposition(&merged, &[SetPartition::slice(4, 0)]).unwrap_err();
        assert!(matches!(err, TensorError::NoCoarsening { term: 0, .. }));
    }

    #[test]
    fn certificate_json_round_trip() {
        let f = gf2();
        let p = SetPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut dec = Decomposition::new(&f, 4, 2, PartitionFamily::All);
        dec.terms.push(delta_term(p, 2));
        let s = serde_json::to_string(&dec.to_json()).unwrap();
        assert!(s.starts_with(r#"{"field":{"p":2,"r":1,"irreducible":[0,1]},"k":4,"axis_size":2,"family":"ALL","terms":[{"partition":[[0,1],[2,3]],"factors":[{"axes":[0,1],"table":[1,0,0,1]}"#));
        let back = Decomposition::from_json_str(&s).unwrap();
        assert_eq!(back, dec);
        assert!(matches!(Decomposition::from_json_str("{"), Err(TensorError::Parse(_))));
        let bad = s.replace("[1,0,0,1]", "[1,0,0,7]");
        assert!(matches!(Decomposition::from_json_str(&bad), Err(TensorError::MalformedTerm { .. })));
    }
}
