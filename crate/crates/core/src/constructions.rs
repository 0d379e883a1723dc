//! Named tensors (H_k, the right-angle tensor F, F_k, J_k) and the explicit
//! slice-rank and partition-rank decompositions that bound them.
//!
//! Constant-tuple values follow from the signed-sum definition of H_k:
//! removing the k-cycles from the full signed sum leaves
//! `-(-1)^(k-1) (k-1)! = (-1)^k (k-1)!` on the diagonal, so J_k (built on
//! H_{k+1}) takes `(-1)^(k+1) k!` there. For k = 2 this is the familiar -2.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::bounds::{
    big_json, count_monomials_exact, displayed_corner_sum, precise_corner_bound, proper_subsets, right_angle_bound,
    subset_degree, BoundError,
};
use crate::field::{dot, Fe, FieldError, FqVector, GaloisField};
use crate::mpoly::{expand_orth_product, Block, Monomial, MultiPoly, OrthFactor, PolyError};
use crate::partition::{all_permutations, nontrivial_partitions, Permutation, SetPartition};
use crate::tensor::{
    checked_volume, rank_of, unrank, verify_decomposition, Decomposition, DenseTensor, FactorTable, PartitionFamily,
    RankOneTerm, TensorError, Verification, DEFAULT_ENTRY_BUDGET,
};

/// Largest arity for which the permutation form of H_k is enumerated.
pub const MAX_PERMUTATION_ARITY: usize = 9;

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("arity k must be at least {min}, got {k}")]
    ArityTooSmall { k: usize, min: usize },
    #[error("arity {0} is too large to enumerate permutations (max {MAX_PERMUTATION_ARITY})")]
    ArityTooLarge(usize),
    #[error("q must be odd, got {0}")]
    EvenOrder(u32),
    #[error("p > k required: p = {p}, k = {k}, so k! vanishes and the diagonal argument fails")]
    CharacteristicTooSmall { p: u32, k: usize },
    #[error("right-angle tensor has k = 2, got {0}")]
    RightAngleArity(usize),
}

// ---------------------------------------------------------------- H_k

/// `prod_B (-1)^(|B|-1) (|B|-1)!`: the signed count of permutations whose
/// cycle partition is `p`.
pub fn partition_coefficient(p: &SetPartition) -> i64 {
    p.blocks()
        .iter()
        .map(|b| {
            let m = b.len() as i64 - 1;
            let fact: i64 = (1..=m).product();
            if m % 2 == 0 {
                fact
            } else {
                -fact
            }
        })
        .product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HkRepresentation {
    SignedPermutationSum,
    PartitionSum,
}

/// Both forms of `H_k = sum_{sigma not a k-cycle} sgn(sigma) f_sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkSpec {
    pub k: usize,
    /// Every non-k-cycle with its sign.
    pub permutations: Vec<(Permutation, i64)>,
    /// Every non-trivial partition with its coefficient, in RGS order.
    pub partitions: Vec<(SetPartition, i64)>,
}

fn delta_holds(p: &SetPartition, tuple: &[usize]) -> bool {
    p.blocks().iter().all(|b| b.iter().all(|&a| tuple[a] == tuple[b[0]]))
}

fn fixes(sigma: &Permutation, tuple: &[usize]) -> bool {
    sigma.image().iter().enumerate().all(|(i, &j)| tuple[i] == tuple[j])
}

impl HkSpec {
    pub fn new(k: usize) -> Result<Self, ConstructionError> {
        if k < 2 {
            return Err(ConstructionError::ArityTooSmall { k, min: 2 });
        }
        if k > MAX_PERMUTATION_ARITY {
            return Err(ConstructionError::ArityTooLarge(k));
        }
        let permutations: Vec<(Permutation, i64)> = all_permutations(k)
            .into_iter()
            .filter(|s| !s.cycle_partition().is_trivial())
            .map(|s| {
                let sign = s.sign();
                (s, sign)
            })
            .collect();
        let partitions: Vec<(SetPartition, i64)> = nontrivial_partitions(k)
            .into_iter()
            .map(|p| {
                let c = partition_coefficient(&p);
                (p, c)
            })
            .collect();
        let mut grouped: HashMap<SetPartition, i64> = HashMap::new();
        for (s, sign) in &permutations {
            *grouped.entry(s.cycle_partition()).or_default() += sign;
        }
        for (p, c) in &partitions {
            assert_eq!(grouped.get(p), Some(c), "closed-form coefficient disagrees with the sign sum for {p}");
        }
        assert_eq!(grouped.len(), partitions.len());
        Ok(HkSpec { k, permutations, partitions })
    }

    pub fn eval(&self, field: &GaloisField, repr: HkRepresentation, tuple: &[usize]) -> Fe {
        let total: i64 = match repr {
            HkRepresentation::SignedPermutationSum => {
                self.permutations.iter().filter(|(s, _)| fixes(s, tuple)).map(|(_, c)| c).sum()
            }
            HkRepresentation::PartitionSum => {
                self.partitions.iter().filter(|(p, _)| delta_holds(p, tuple)).map(|(_, c)| c).sum()
            }
        };
        field.from_int(total)
    }
}

/// `(-1)^k (k-1)!` reduced into the field.
pub fn hk_constant_value(field: &GaloisField, k: usize) -> Fe {
    let fact: i64 = (1..k as i64).product();
    field.from_int(if k.is_multiple_of(2) { fact } else { -fact })
}

/// Case formula for H_k: 1 on distinct tuples, the constant value on
/// constant tuples, 0 elsewhere.
pub fn hk_case_value(field: &GaloisField, tuple: &[usize]) -> Fe {
    if tuple.iter().all(|&x| x == tuple[0]) {
        return hk_constant_value(field, tuple.len());
    }
    if all_distinct(tuple) {
        Fe::ONE
    } else {
        Fe::ZERO
    }
}

fn all_distinct<T: PartialEq>(xs: &[T]) -> bool {
    (0..xs.len()).all(|i| (i + 1..xs.len()).all(|j| xs[i] != xs[j]))
}

pub struct HkBuild {
    pub spec: HkSpec,
    pub tensor: DenseTensor,
}

/// H_k on `X^k` with `|X| = axis_size`, tabulated from the partition form.
pub fn build_hk(field: &GaloisField, k: usize, axis_size: usize) -> Result<HkBuild, ConstructionError> {
    let spec = HkSpec::new(k)?;
    let tensor = DenseTensor::from_function(field, k, axis_size, DEFAULT_ENTRY_BUDGET, |t| {
        spec.eval(field, HkRepresentation::PartitionSum, t)
    })?;
    Ok(HkBuild { spec, tensor })
}

/// The full signed sum over all of `S_k`, which is the distinctness indicator.
pub fn signed_distinctness_sum(
    field: &GaloisField,
    k: usize,
    axis_size: usize,
) -> Result<DenseTensor, ConstructionError> {
    if k > MAX_PERMUTATION_ARITY {
        return Err(ConstructionError::ArityTooLarge(k));
    }
    let perms: Vec<(Permutation, i64)> = all_permutations(k)
        .into_iter()
        .map(|s| {
            let sign = s.sign();
            (s, sign)
        })
        .collect();
    Ok(DenseTensor::from_function(field, k, axis_size, DEFAULT_ENTRY_BUDGET, |t| {
        field.from_int(perms.iter().filter(|(s, _)| fixes(s, t)).map(|(_, c)| c).sum())
    })?)
}

/// H_k as a certificate with at most `2^k - 1` terms: every partition term is
/// filed under its first block of size at least two (the first block for the
/// all-singleton partition), `B`, and each group becomes one term
/// `delta(x_B) * g(x_{B^c})` over the partition `{B, B^c}`.
pub fn build_hk_grouped(field: &GaloisField, k: usize, axis_size: usize) -> Result<Decomposition, ConstructionError> {
    let spec = HkSpec::new(k)?;
    let mut groups: BTreeMap<Vec<usize>, Vec<(SetPartition, i64)>> = BTreeMap::new();
    for (p, c) in &spec.partitions {
        let block = p.blocks().iter().find(|b| b.len() >= 2).unwrap_or(&p.blocks()[0]);
        groups.entry(block.clone()).or_default().push((p.clone(), *c));
    }
    let mut dec = Decomposition::new(field, k, axis_size, PartitionFamily::All);
    dec.target = Some(format!("hk:k={k},q={}", field.order()));
    for (block, members) in groups {
        let rest: Vec<usize> = (0..k).filter(|a| !block.contains(a)).collect();
        let partition = SetPartition::new(vec![block.clone(), rest]).expect("B is a proper non-empty subset");
        let mut full = vec![0usize; k];
        let term = RankOneTerm::tabulate(partition.clone(), axis_size, |b, sub| {
            let axes = &partition.blocks()[b];
            if *axes == block {
                return if sub.iter().all(|&x| x == sub[0]) { Fe::ONE } else { Fe::ZERO };
            }
            for (&a, &x) in axes.iter().zip(sub) {
                full[a] = x;
            }
            let total: i64 = members
                .iter()
                .filter(|(p, _)| {
                    p.blocks().iter().filter(|pb| **pb != block).all(|pb| pb.iter().all(|&a| full[a] == full[pb[0]]))
                })
                .map(|(_, c)| c)
                .sum();
            field.from_int(total)
        })?;
        dec.terms.push(term);
    }
    Ok(dec)
}

// ---------------------------------------------------------------- corner tensors

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CornerKind {
    /// `(1 - d(x,y) - d(y,z) - d(z,x)) (1 - <x-z, y-z>^(q-1))`.
    RightAngleF,
    /// `F_k(x_0 - x_k, .., x_{k-1} - x_k)`, the shifted orthogonality indicator.
    #[serde(rename = "F_K")]
    Fk,
    /// `H_{k+1} * F_k(x_0 - x_k, ..)`.
    #[serde(rename = "J_K")]
    Jk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerTensorSpec {
    pub kind: CornerKind,
    pub k: usize,
    pub n: usize,
}

impl CornerTensorSpec {
    pub fn right_angle(n: usize) -> Self {
        CornerTensorSpec { kind: CornerKind::RightAngleF, k: 2, n }
    }

    pub fn fk(k: usize, n: usize) -> Self {
        CornerTensorSpec { kind: CornerKind::Fk, k, n }
    }

    pub fn jk(k: usize, n: usize) -> Self {
        CornerTensorSpec { kind: CornerKind::Jk, k, n }
    }

    pub fn arity(&self) -> usize {
        self.k + 1
    }

    pub fn label(&self, field: &GaloisField) -> String {
        let q = field.order();
        match self.kind {
            CornerKind::RightAngleF => format!("right-angle-f:q={q},n={}", self.n),
            CornerKind::Fk => format!("fk:k={},q={q},n={}", self.k, self.n),
            CornerKind::Jk => format!("jk:k={},q={q},n={}", self.k, self.n),
        }
    }

    pub fn check(&self, field: &GaloisField) -> Result<(), ConstructionError> {
        match self.kind {
            CornerKind::RightAngleF => {
                if self.k != 2 {
                    return Err(ConstructionError::RightAngleArity(self.k));
                }
                if field.order().is_multiple_of(2) {
                    return Err(ConstructionError::EvenOrder(field.order()));
                }
            }
            CornerKind::Fk => {
                if self.k < 1 {
                    return Err(ConstructionError::ArityTooSmall { k: self.k, min: 1 });
                }
            }
            CornerKind::Jk => {
                if self.k < 1 {
                    return Err(ConstructionError::ArityTooSmall { k: self.k, min: 1 });
                }
                if field.characteristic() as usize <= self.k {
                    return Err(ConstructionError::CharacteristicTooSmall { p: field.characteristic(), k: self.k });
                }
            }
        }
        Ok(())
    }
}

/// `q^n` as an axis size, subject to the entry budget.
pub fn space_size(field: &GaloisField, n: usize) -> Result<usize, ConstructionError> {
    Ok(checked_volume(field.order() as usize, n, DEFAULT_ENTRY_BUDGET, "point space")?)
}

/// All points of `F_q^n` in index order.
pub fn all_points(field: &GaloisField, n: usize) -> Result<Vec<Vec<Fe>>, ConstructionError> {
    let size = space_size(field, n)?;
    Ok((0..size as u64).map(|i| FqVector::from_index(field, n, i).coords().to_vec()).collect())
}

/// `(-1)^(k+1) k!`, the value of J_k on constant tuples.
pub fn jk_diagonal_value(field: &GaloisField, k: usize) -> Fe {
    hk_constant_value(field, k + 1)
}

fn orth_factor(field: &GaloisField, a: &[Fe], b: &[Fe]) -> Fe {
    let q = field.order() as u64;
    field.sub(Fe::ONE, field.pow(dot(field, a, b), q - 1))
}

fn differences(field: &GaloisField, pts: &[&[Fe]]) -> Vec<Vec<Fe>> {
    let apex = pts[pts.len() - 1];
    pts[..pts.len() - 1].iter().map(|x| x.iter().zip(apex).map(|(&a, &b)| field.sub(a, b)).collect()).collect()
}

/// Direct evaluator used as an oracle: tests distinctness and orthogonality
/// of differences explicitly instead of going through the polynomial forms.
pub fn corner_case_value(field: &GaloisField, kind: CornerKind, pts: &[&[Fe]]) -> Fe {
    let k = pts.len() - 1;
    let diffs = differences(field, pts);
    let orthogonal = (0..k).all(|j| (j + 1..k).all(|l| dot(field, &diffs[j], &diffs[l]).is_zero()));
    match kind {
        CornerKind::Fk => {
            if orthogonal {
                Fe::ONE
            } else {
                Fe::ZERO
            }
        }
        CornerKind::RightAngleF | CornerKind::Jk => {
            if pts.iter().all(|p| *p == pts[0]) {
                jk_diagonal_value(field, k)
            } else if all_distinct(pts) && orthogonal {
                Fe::ONE
            } else {
                Fe::ZERO
            }
        }
    }
}

/// Builds the corner tensor on `(F_q^n)^(k+1)` from its defining product.
pub fn build_corner_tensor(field: &GaloisField, spec: &CornerTensorSpec) -> Result<DenseTensor, ConstructionError> {
    let points = all_points(field, spec.n)?;
    corner_tensor_on_points(field, spec, &points)
}

/// The corner tensor on `A^(k+1)` for a list of distinct points `A`.
pub fn corner_tensor_on_points(
    field: &GaloisField,
    spec: &CornerTensorSpec,
    points: &[Vec<Fe>],
) -> Result<DenseTensor, ConstructionError> {
    spec.check(field)?;
    let axis = points.len();
    let k = spec.k;
    let hk = match spec.kind {
        CornerKind::Fk => None,
        _ => Some(HkSpec::new(k + 1)?),
    };
    Ok(DenseTensor::from_function(field, k + 1, axis, DEFAULT_ENTRY_BUDGET, |t| {
        let pts: Vec<&[Fe]> = t.iter().map(|&i| points[i].as_slice()).collect();
        let diffs = differences(field, &pts);
        let mut f = Fe::ONE;
        'outer: for j in 0..k {
            for l in j + 1..k {
                f = field.mul(f, orth_factor(field, &diffs[j], &diffs[l]));
                if f.is_zero() {
                    break 'outer;
                }
            }
        }
        match spec.kind {
            CornerKind::Fk => f,
            CornerKind::Jk => field.mul(hk.as_ref().unwrap().eval(field, HkRepresentation::PartitionSum, t), f),
            CornerKind::RightAngleF => {
                let d = |a: usize, b: usize| if t[a] == t[b] { Fe::ONE } else { Fe::ZERO };
                let h = field.sub(field.sub(field.sub(Fe::ONE, d(0, 1)), d(1, 2)), d(2, 0));
                field.mul(h, f)
            }
        }
    })?)
}

/// The sub-tensor on `A^k` for `A` given as axis indices.
pub fn restrict_tensor(t: &DenseTensor, subset: &[usize]) -> Result<DenseTensor, ConstructionError> {
    let k = t.arity();
    Ok(DenseTensor::from_function(t.field(), k, subset.len(), DEFAULT_ENTRY_BUDGET, |tuple| {
        let full: Vec<usize> = tuple.iter().map(|&i| subset[i]).collect();
        t.get(&full)
    })?)
}

// ---------------------------------------------------------------- decompositions

/// Evaluates polynomials in whole-point blocks over every point tuple.
struct PointTabulator {
    field: GaloisField,
    q: usize,
    n: usize,
    /// `pw[y][e] = y^e` for element code `y`.
    pw: Vec<Vec<Fe>>,
}

impl PointTabulator {
    fn new(field: &GaloisField, n: usize) -> Self {
        let q = field.order() as usize;
        let pw = (0..q)
            .map(|y| {
                let y = field.element(y as u64).expect("code below q");
                (0..q).map(|e| field.pow(y, e as u64)).collect()
            })
            .collect();
        PointTabulator { field: field.clone(), q, n, pw }
    }

    /// Values of `sum c x^e` over all `nblocks`-tuples of points, row-major.
    fn tabulate(&self, nblocks: usize, monos: &[(Fe, Vec<u16>)]) -> Result<Vec<Fe>, ConstructionError> {
        let nvars = nblocks * self.n;
        let size = checked_volume(self.q, nvars, DEFAULT_ENTRY_BUDGET, "polynomial table")?;
        let f = &self.field;
        if monos.len() <= self.q {
            let mut digits = vec![0usize; nvars];
            let mut out = Vec::with_capacity(size);
            for i in 0..size {
                unrank(i, self.q, &mut digits);
                let v = monos.iter().fold(Fe::ZERO, |acc, (c, e)| {
                    let m = e.iter().zip(&digits).fold(*c, |m, (&e, &y)| f.mul(m, self.pw[y][e as usize]));
                    f.add(acc, m)
                });
                out.push(v);
            }
            return Ok(out);
        }
        // dense coefficient cube, then evaluate one variable at a time
        let mut a = vec![Fe::ZERO; size];
        for (c, e) in monos {
            let idx = rank_of(e.iter().map(|&x| x as usize), self.q);
            a[idx] = f.add(a[idx], *c);
        }
        let mut coeffs = vec![Fe::ZERO; self.q];
        for v in 0..nvars {
            let stride = self.q.pow((nvars - 1 - v) as u32);
            for hi in 0..self.q.pow(v as u32) {
                for lo in 0..stride {
                    let base = hi * stride * self.q + lo;
                    for (e, slot) in coeffs.iter_mut().enumerate() {
                        *slot = a[base + e * stride];
                    }
                    for y in 0..self.q {
                        a[base + y * stride] =
                            coeffs.iter().zip(&self.pw[y]).fold(Fe::ZERO, |acc, (&c, &p)| f.add(acc, f.mul(c, p)));
                    }
                }
            }
        }
        Ok(a)
    }
}

/// Collects bipartition terms `[d(x_S) x_S^e] * G(x_{not S})` keyed by `(S, e)`.
struct BipartitionAccumulator {
    field: GaloisField,
    k: usize,
    axis_size: usize,
    groups: BTreeMap<(Vec<usize>, Vec<u16>), Vec<Fe>>,
}

impl BipartitionAccumulator {
    fn new(field: &GaloisField, k: usize, axis_size: usize) -> Self {
        BipartitionAccumulator { field: field.clone(), k, axis_size, groups: BTreeMap::new() }
    }

    fn add(&mut self, s: Vec<usize>, e: Vec<u16>, table: Vec<Fe>) {
        match self.groups.get_mut(&(s.clone(), e.clone())) {
            Some(acc) => {
                for (a, b) in acc.iter_mut().zip(table) {
                    *a = self.field.add(*a, b);
                }
            }
            None => {
                self.groups.insert((s, e), table);
            }
        }
    }

    /// Terms with a vanishing complement factor are dropped. Each term comes
    /// with its separated block.
    fn finish(self, points: &[Vec<Fe>]) -> Result<Vec<(Vec<usize>, RankOneTerm)>, ConstructionError> {
        let f = &self.field;
        let mut terms = Vec::new();
        for ((s, e), comp_table) in self.groups {
            if comp_table.iter().all(|x| x.is_zero()) {
                continue;
            }
            let comp = (0..self.k).filter(|a| !s.contains(a)).collect::<Vec<_>>();
            let partition =
                SetPartition::of_size(self.k, vec![s.clone(), comp.clone()]).map_err(TensorError::Partition)?;
            let len = checked_volume(self.axis_size, s.len(), DEFAULT_ENTRY_BUDGET, "factor table")?;
            let mut sub = vec![0usize; s.len()];
            let sep_table = (0..len)
                .map(|i| {
                    unrank(i, self.axis_size, &mut sub);
                    if sub.iter().all(|&x| x == sub[0]) {
                        points[sub[0]].iter().zip(&e).fold(Fe::ONE, |m, (&y, &d)| f.mul(m, f.pow(y, d as u64)))
                    } else {
                        Fe::ZERO
                    }
                })
                .collect();
            let mut sep = Some(FactorTable { axes: s.clone(), table: sep_table });
            let mut rest = Some(FactorTable { axes: comp, table: comp_table });
            let factors = partition
                .blocks()
                .iter()
                .map(|b| if *b == s { sep.take().unwrap() } else { rest.take().unwrap() })
                .collect();
            terms.push((s, RankOneTerm { partition, factors }));
        }
        Ok(terms)
    }
}

fn count_by_subset(terms: &[(Vec<usize>, RankOneTerm)], subsets: &[Vec<usize>]) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = subsets.iter().map(|s| (subset_label(s), 0)).collect();
    for (s, _) in terms {
        *out.entry(subset_label(s)).or_default() += 1;
    }
    out
}

fn subset_label(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Sidecar report written next to a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport {
    pub construction: String,
    pub term_count: usize,
    /// Count bound the construction is designed to meet.
    pub bound: BigUint,
    /// Alternative totals for the same quantity, by name.
    pub other_bounds: BTreeMap<String, BigUint>,
    /// Terms per separated block `S`.
    pub per_subset_counts: BTreeMap<String, usize>,
    pub per_subset_bounds: BTreeMap<String, BigUint>,
    pub verified: bool,
}

impl Serialize for DecompositionReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let others: serde_json::Map<String, serde_json::Value> =
            self.other_bounds.iter().map(|(k, v)| (k.clone(), big_json(v))).collect();
        let sub_bounds: serde_json::Map<String, serde_json::Value> =
            self.per_subset_bounds.iter().map(|(k, v)| (k.clone(), big_json(v))).collect();
        let mut obj = json!({
            "construction": self.construction,
            "term_count": self.term_count,
            "bound": big_json(&self.bound),
            "per_subset_counts": self.per_subset_counts,
            "per_subset_bounds": sub_bounds,
            "verified": self.verified,
        });
        for (k, v) in others {
            obj[k] = v;
        }
        obj.serialize(s)
    }
}

/// A certificate together with its target tensor and verification outcome.
pub struct BuiltDecomposition {
    pub decomposition: Decomposition,
    pub target: DenseTensor,
    pub report: DecompositionReport,
    pub verification: Verification,
}

fn split_exps(m: &Monomial, poly: &MultiPoly, block: usize) -> (Vec<u16>, Vec<u16>) {
    let r = poly.block_range(block);
    let own = m.exps[r.clone()].to_vec();
    let rest = m.exps[..r.start].iter().chain(&m.exps[r.end..]).copied().collect();
    (own, rest)
}

/// Groups a slot's monomials by their exponent on `block`; the residual
/// monomials (over the other blocks) are scaled by `scale`.
fn group_by_block(
    field: &GaloisField,
    poly: &MultiPoly,
    block: usize,
    monos: &[Monomial],
    scale: Fe,
) -> BTreeMap<Vec<u16>, Vec<(Fe, Vec<u16>)>> {
    let mut out: BTreeMap<Vec<u16>, Vec<(Fe, Vec<u16>)>> = BTreeMap::new();
    for m in monos {
        let (own, rest) = split_exps(m, poly, block);
        out.entry(own).or_default().push((field.mul(scale, m.coeff), rest));
    }
    out
}

/// The slice-rank certificate for the right-angle tensor F over odd `q`.
pub fn build_thm1_slice_decomposition(
    field: &GaloisField,
    n: usize,
    budget: usize,
) -> Result<BuiltDecomposition, ConstructionError> {
    let q = field.order();
    if q.is_multiple_of(2) {
        return Err(ConstructionError::EvenOrder(q));
    }
    let spec = CornerTensorSpec::right_angle(n);
    let target = build_corner_tensor(field, &spec)?;
    let points = all_points(field, n)?;
    let axis = points.len();
    let tab = PointTabulator::new(field, n);
    let half = (q - 1) / 2;
    let minus_one = field.neg(Fe::ONE);
    let mut acc = BipartitionAccumulator::new(field, 3, axis);

    // 1 - <x-z, y-z>^(q-1): some block among z, x, y has small degree
    let blocks = vec![Block::new("x", n), Block::new("y", n), Block::new("z", n)];
    let main = expand_orth_product(field, blocks, &[OrthFactor::shifted(field, 0, 1, 2)], budget)?;
    let order = [2usize, 0, 1];
    let slots = main.split_by_block_degree(&order, &[q - 1, half, half])?;
    for (&b, monos) in order.iter().zip(&slots) {
        for (e, residual) in group_by_block(field, &main, b, monos, Fe::ONE) {
            // the two other blocks are the complement axes in increasing order
            acc.add(vec![b], e, tab.tabulate(2, &residual)?);
        }
    }

    // -d(x,y) (1 - <x-z, x-z>^(q-1)), split on z then x
    let blocks = vec![Block::new("x", n), Block::new("z", n)];
    let diag = expand_orth_product(field, blocks, &[OrthFactor::shifted(field, 0, 0, 1)], budget)?;
    let slots = diag.split_by_block_degree(&[1, 0], &[q - 1, q - 1])?;
    for (e, residual) in group_by_block(field, &diag, 1, &slots[0], minus_one) {
        let r = tab.tabulate(1, &residual)?;
        let mut table = vec![Fe::ZERO; axis * axis];
        for (x, v) in r.into_iter().enumerate() {
            table[x * axis + x] = v;
        }
        acc.add(vec![2], e, table);
    }
    for (e, residual) in group_by_block(field, &diag, 0, &slots[1], minus_one) {
        acc.add(vec![0, 1], e, tab.tabulate(1, &residual)?);
    }

    // -d(y,z) and -d(z,x) survive the orthogonality factor unchanged
    acc.add(vec![1, 2], vec![0; n], vec![minus_one; axis]);
    acc.add(vec![0, 2], vec![0; n], vec![minus_one; axis]);

    let keyed = acc.finish(&points)?;
    let per_subset_counts = count_by_subset(&keyed, &[]);
    let mut dec = Decomposition::new(field, 3, axis, PartitionFamily::Slice);
    dec.target = Some(spec.label(field));
    dec.terms = keyed.into_iter().map(|(_, t)| t).collect();

    let (qq, nn) = (q as u64, n as u64);
    let c_full = count_monomials_exact(qq, nn, qq - 1);
    let c_half = count_monomials_exact(qq, nn, half as u64);
    let mut per_subset_bounds = BTreeMap::new();
    for (s, c) in [("{2}", &c_full), ("{0,1}", &c_full), ("{0}", &c_half), ("{1}", &c_half)] {
        per_subset_bounds.insert(s.to_string(), c.clone());
    }
    per_subset_bounds.insert("{1,2}".to_string(), BigUint::from(1u32));
    per_subset_bounds.insert("{0,2}".to_string(), BigUint::from(1u32));
    let bound = BigUint::from(2u32) * (&c_full + &c_half) + 2u32;
    let closed = right_angle_bound(qq, nn)?.exact_value().clone();
    let verification = verify_decomposition(&dec, &target)?;
    let report = DecompositionReport {
        construction: spec.label(field),
        term_count: dec.terms.len(),
        bound,
        other_bounds: BTreeMap::from([("closed_form_bound".to_string(), closed)]),
        per_subset_counts,
        per_subset_bounds,
        verified: verification.is_verified(),
    };
    Ok(BuiltDecomposition { decomposition: dec, target, report, verification })
}

/// A separated block `S`, a monomial on `S`, and the complement table.
type KeyedPiece = (Vec<usize>, Vec<u16>, Vec<Fe>);

/// One non-trivial partition's contribution: `c_P d_P F_k(..)` rewritten on
/// block representatives, expanded, and pigeonholed onto blocks.
fn jk_partition_terms(
    field: &GaloisField,
    k: usize,
    axis: usize,
    tab: &PointTabulator,
    p: &SetPartition,
    budget: usize,
) -> Result<Vec<KeyedPiece>, ConstructionError> {
    let q = field.order() as u64;
    let blocks = p.blocks();
    let t = blocks.len();
    let apex = p.block_of(k);
    let names: Vec<Block> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| Block::new(format!("x{}", if i == apex { k } else { b[0] }), tab.n))
        .collect();
    let mut factors = Vec::new();
    for i in (0..t).filter(|&i| i != apex) {
        if blocks[i].len() >= 2 {
            factors.push(OrthFactor::shifted(field, i, i, apex));
        }
        for j in (i + 1..t).filter(|&j| j != apex) {
            factors.push(OrthFactor::shifted(field, i, j, apex));
        }
    }
    let poly = expand_orth_product(field, names, &factors, budget)?;
    let thresholds: Vec<u32> = blocks.iter().map(|b| subset_degree(k, q, b).floor().to_integer() as u32).collect();
    let order: Vec<usize> = (0..t).collect();
    let slots = poly.split_by_block_degree(&order, &thresholds)?;
    let c_p = field.from_int(partition_coefficient(p));
    let mut out = Vec::new();
    for (i, monos) in slots.iter().enumerate() {
        let comp: Vec<usize> = (0..=k).filter(|a| !blocks[i].contains(a)).collect();
        let others: Vec<&Vec<usize>> = blocks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, b)| b).collect();
        let len = checked_volume(axis, comp.len(), DEFAULT_ENTRY_BUDGET, "factor table")?;
        for (e, residual) in group_by_block(field, &poly, i, monos, c_p) {
            let values = tab.tabulate(t - 1, &residual)?;
            let mut full = vec![0usize; k + 1];
            let mut sub = vec![0usize; comp.len()];
            let table = (0..len)
                .map(|idx| {
                    unrank(idx, axis, &mut sub);
                    for (&a, &v) in comp.iter().zip(&sub) {
                        full[a] = v;
                    }
                    if others.iter().all(|b| b.iter().all(|&a| full[a] == full[b[0]])) {
                        values[rank_of(others.iter().map(|b| full[b[0]]), axis)]
                    } else {
                        Fe::ZERO
                    }
                })
                .collect();
            out.push((blocks[i].clone(), e, table));
        }
    }
    Ok(out)
}

/// The partition-rank certificate for J_k under the ALL family.
pub fn build_jk_partition_decomposition(
    field: &GaloisField,
    k: usize,
    n: usize,
    budget: usize,
) -> Result<BuiltDecomposition, ConstructionError> {
    let spec = CornerTensorSpec::jk(k, n);
    spec.check(field)?;
    let target = build_corner_tensor(field, &spec)?;
    let points = all_points(field, n)?;
    let axis = points.len();
    let tab = PointTabulator::new(field, n);
    let partitions = nontrivial_partitions(k + 1);
    let pieces: Vec<Vec<KeyedPiece>> =
        partitions.par_iter().map(|p| jk_partition_terms(field, k, axis, &tab, p, budget)).collect::<Result<_, _>>()?;
    let mut acc = BipartitionAccumulator::new(field, k + 1, axis);
    for piece in pieces {
        for (s, e, table) in piece {
            acc.add(s, e, table);
        }
    }
    let subsets = proper_subsets(k + 1);
    let keyed = acc.finish(&points)?;
    let per_subset_counts = count_by_subset(&keyed, &subsets);
    let mut dec = Decomposition::new(field, k + 1, axis, PartitionFamily::All);
    dec.target = Some(spec.label(field));
    dec.terms = keyed.into_iter().map(|(_, t)| t).collect();

    let (qq, nn, kk) = (field.order() as u64, n as u64, k as u64);
    let precise = precise_corner_bound(kk, qq, nn)?;
    let displayed = displayed_corner_sum(kk, qq, nn)?;
    let per_subset_bounds = subsets
        .iter()
        .map(|s| {
            let d = subset_degree(k, qq, s).floor().to_integer();
            (subset_label(s), count_monomials_exact(qq, nn, d))
        })
        .collect();
    let verification = verify_decomposition(&dec, &target)?;
    let report = DecompositionReport {
        construction: spec.label(field),
        term_count: dec.terms.len(),
        bound: precise.exact_value().clone(),
        other_bounds: BTreeMap::from([("displayed_bound".to_string(), displayed.exact_value().clone())]),
        per_subset_counts,
        per_subset_bounds,
        verified: verification.is_verified(),
    };
    Ok(BuiltDecomposition { decomposition: dec, target, report, verification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::bell_number;

    fn gf(q: u64) -> GaloisField {
        GaloisField::with_order(q).unwrap()
    }

    #[test]
    fn hk_grouped_certificate() {
        for q in [5, 7] {
            let f = GaloisField::with_order(q).unwrap();
            for k in 2..=5 {
                for axis in 1..=3 {
                    let dec = build_hk_grouped(&f, k, axis).unwrap();
                    assert!(dec.terms.len() < 1 << k, "k={k}: {}", dec.terms.len());
                    let target = build_hk(&f, k, axis).unwrap().tensor;
                    assert!(verify_decomposition(&dec, &target).unwrap().is_verified());
                }
            }
        }
    }

    #[test]
    fn hk_small_cases() {
        let f = gf(5);
        let h2 = build_hk(&f, 2, 3).unwrap();
        assert!(h2.tensor.entries().iter().all(|&e| e == Fe::ONE));
        let h4 = build_hk(&f, 4, 2).unwrap();
        assert_eq!(h4.tensor.get(&[1, 1, 1, 1]), f.from_int(6));
        assert_eq!(h4.spec.partitions.len(), 14);
        let coeff = |blocks: Vec<Vec<usize>>| {
            let p = SetPartition::of_size(4, blocks).unwrap();
            h4.spec.partitions.iter().find(|(q, _)| *q == p).unwrap().1
        };
        assert_eq!(coeff(vec![vec![0, 1], vec![2, 3]]), 1);
        assert_eq!(coeff(vec![vec![0, 1, 2], vec![3]]), 2);
        assert_eq!(coeff(vec![vec![0, 1], vec![2], vec![3]]), -1);
        let h3 = build_hk(&f, 3, 2).unwrap();
        assert_eq!(h3.tensor.get(&[0, 0, 0]), f.from_int(-2));
    }

    #[test]
    fn hk_matches_case_formula_and_signed_sum() {
        for q in [5u64, 7] {
            let f = gf(q);
            for k in 2..=5 {
                for axis in 1..=3 {
                    let h = build_hk(&f, k, axis).unwrap();
                    assert_eq!(h.spec.partitions.len() as u64, bell_number(k) - 1);
                    let full = signed_distinctness_sum(&f, k, axis).unwrap();
                    for i in 0..h.tensor.entries().len() {
                        let t = h.tensor.tuple_of(i);
                        assert_eq!(h.tensor.entries()[i], hk_case_value(&f, &t));
                        assert_eq!(h.spec.eval(&f, HkRepresentation::SignedPermutationSum, &t), h.tensor.entries()[i]);
                        let distinct = if all_distinct(&t) { Fe::ONE } else { Fe::ZERO };
                        assert_eq!(full.entries()[i], distinct);
                    }
                }
            }
        }
        assert!(matches!(HkSpec::new(1), Err(ConstructionError::ArityTooSmall { .. })));
    }

    fn check_against_direct(f: &GaloisField, spec: CornerTensorSpec) -> DenseTensor {
        let t = build_corner_tensor(f, &spec).unwrap();
        let points = all_points(f, spec.n).unwrap();
        for i in 0..t.entries().len() {
            let tuple = t.tuple_of(i);
            let pts: Vec<&[Fe]> = tuple.iter().map(|&j| points[j].as_slice()).collect();
            assert_eq!(t.entries()[i], corner_case_value(f, spec.kind, &pts), "{spec:?} at {tuple:?}");
        }
        t
    }

    #[test]
    fn corner_tensors_match_direct_evaluator() {
        let f5 = gf(5);
        let j3 = check_against_direct(&f5, CornerTensorSpec::jk(3, 1));
        assert_eq!(j3.get(&[2, 2, 2, 2]), f5.from_int(6));
        let j2 = check_against_direct(&f5, CornerTensorSpec::jk(2, 2));
        let idx = |c: [u64; 2]| FqVector::new(&f5, &c).unwrap().index(&f5) as usize;
        assert_eq!(j2.get(&[idx([1, 0]), idx([0, 1]), idx([0, 0])]), Fe::ONE);

        let f3 = gf(3);
        let ra = check_against_direct(&f3, CornerTensorSpec::right_angle(2));
        let idx3 = |c: [u64; 2]| FqVector::new(&f3, &c).unwrap().index(&f3) as usize;
        assert_eq!(ra.get(&[idx3([0, 0]), idx3([1, 0]), idx3([0, 1])]), Fe::ZERO);
        assert_eq!(ra.get(&[idx3([0, 0]), idx3([1, 1]), idx3([1, 2])]), Fe::ZERO);
        // (1,0) - (0,0) and (0,1) - (0,0) are orthogonal: a right corner at apex 0
        assert_eq!(ra.get(&[idx3([1, 0]), idx3([0, 1]), idx3([0, 0])]), Fe::ONE);
        assert_eq!(ra.get(&[4, 4, 4]), f3.from_int(-2));
        assert_eq!(ra.get(&[4, 4, 5]), Fe::ZERO);
        check_against_direct(&f3, CornerTensorSpec::fk(3, 1));

        // F and J_2 are the same function
        let j2_3 = build_corner_tensor(&f3, &CornerTensorSpec::jk(2, 2)).unwrap();
        assert_eq!(j2_3.entries(), ra.entries());
    }

    #[test]
    fn corner_tensor_preconditions() {
        assert!(matches!(
            build_corner_tensor(&gf(3), &CornerTensorSpec::jk(3, 1)),
            Err(ConstructionError::CharacteristicTooSmall { p: 3, k: 3 })
        ));
        assert!(matches!(
            build_corner_tensor(&gf(4), &CornerTensorSpec::right_angle(1)),
            Err(ConstructionError::EvenOrder(4))
        ));
    }

    #[test]
    fn thm1_decomposition_small() {
        let f = gf(3);
        let built = build_thm1_slice_decomposition(&f, 1, crate::mpoly::DEFAULT_MONOMIAL_BUDGET).unwrap();
        assert!(built.verification.is_verified(), "{:?}", built.verification);
        assert!(built.decomposition.terms.len() <= 12);
        assert_eq!(built.report.bound, BigUint::from(12u32));
        let built = build_thm1_slice_decomposition(&gf(5), 1, crate::mpoly::DEFAULT_MONOMIAL_BUDGET).unwrap();
        assert!(built.verification.is_verified());
        assert!(BigUint::from(built.decomposition.terms.len()) <= built.report.bound);
        assert!(matches!(build_thm1_slice_decomposition(&gf(4), 1, 1000), Err(ConstructionError::EvenOrder(4))));
    }

    #[test]
    fn jk_decomposition_small() {
        let f = gf(5);
        let built = build_jk_partition_decomposition(&f, 3, 1, crate::mpoly::DEFAULT_MONOMIAL_BUDGET).unwrap();
        assert!(built.verification.is_verified(), "{:?}", built.verification);
        assert!(built.decomposition.terms.len() <= 52, "{}", built.decomposition.terms.len());
        assert_eq!(built.report.bound, BigUint::from(52u32));
        for (s, c) in &built.report.per_subset_counts {
            assert!(BigUint::from(*c) <= built.report.per_subset_bounds[s], "{s}: {c}");
        }

        let f3 = gf(3);
        let j2 = build_jk_partition_decomposition(&f3, 2, 1, crate::mpoly::DEFAULT_MONOMIAL_BUDGET).unwrap();
        assert!(j2.verification.is_verified());
        let thm1 = build_thm1_slice_decomposition(&f3, 1, crate::mpoly::DEFAULT_MONOMIAL_BUDGET).unwrap();
        assert_eq!(j2.target.entries(), thm1.target.entries());

        assert!(matches!(
            build_jk_partition_decomposition(&f3, 3, 1, 1000),
            Err(ConstructionError::CharacteristicTooSmall { .. })
        ));
    }

    #[test]
    fn tabulator_dense_and_sparse_agree() {
        let f = gf(3);
        let tab = PointTabulator::new(&f, 2);
        let monos: Vec<(Fe, Vec<u16>)> = vec![
            (Fe::ONE, vec![1, 0, 2, 1]),
            (f.from_int(2), vec![0, 0, 0, 0]),
            (Fe::ONE, vec![2, 2, 0, 1]),
            (f.from_int(2), vec![0, 1, 1, 0]),
        ];
        let dense = tab.tabulate(2, &monos).unwrap();
        let sparse: Vec<Fe> = monos
            .chunks(1)
            .map(|c| tab.tabulate(2, c).unwrap())
            .fold(vec![Fe::ZERO; 81], |acc, v| acc.iter().zip(v).map(|(&a, b)| f.add(a, b)).collect());
        assert_eq!(dense, sparse);
    }
}
