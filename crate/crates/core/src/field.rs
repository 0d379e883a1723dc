//! Exact arithmetic in GF(p^r) and in the coordinate space F_q^n.
//!
//! Elements are stored as their canonical base-p code: the integer whose
//! base-p digits are the polynomial coefficients, constant term in the low
//! digit. The code gives every element a total order, which the tensor and
//! certificate layers rely on for indexing.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted unless a caller asks for more.
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

/// Fields up to this order get precomputed operation tables.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{r} exceeds the limit {limit}")]
    OrderTooLarge { p: u64, r: u32, limit: u64 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("code {code} is not an element of GF({q})")]
    BadElement { code: u64, q: u32 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("irreducible polynomial {found:?} does not match the canonical choice {expected:?}")]
    IrreducibleMismatch { expected: Vec<u32>, found: Vec<u32> },
}

/// A field element, identified by its canonical code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps a code without range checking. Callers must guarantee `code < q`.
    #[inline]
    pub(crate) fn from_code(code: u32) -> Fe {
        Fe(code)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serialized description of a field: `{"p": .., "r": .., "irreducible": [..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub r: u32,
    pub irreducible: Vec<u32>,
}

struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
}

pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    /// Monic, low-to-high, length r + 1.
    irreducible: Vec<u32>,
    tables: Option<Tables>,
}

/// Shared handle to a field context. Cloning is cheap.
#[derive(Clone)]
pub struct GaloisField(Arc<FieldCtx>);

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.r == other.0.r)
    }
}

impl Eq for GaloisField {}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.r)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^r` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut r = 0u32;
    while rest.is_multiple_of(p) {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p, r))
}

/// Smallest prime factor, used for the characteristic when only `q` is known.
pub fn characteristic_of(q: u64) -> u64 {
    let mut d = 2u64;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    q
}

impl GaloisField {
    pub fn new(p: u64, r: u32) -> Result<Self, FieldError> {
        Self::with_limit(p, r, DEFAULT_MAX_ORDER)
    }

    pub fn with_limit(p: u64, r: u32, limit: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if r < 1 {
            return Err(FieldError::ZeroDegree);
        }
        let q = p.checked_pow(r).filter(|&q| q <= limit && q <= u32::MAX as u64).ok_or(FieldError::OrderTooLarge {
            p,
            r,
            limit,
        })?;
        let p = p as u32;
        let irreducible = if r == 1 { vec![0, 1] } else { canonical_irreducible(p, r) };
        let mut ctx = FieldCtx { p, r, q: q as u32, irreducible, tables: None };
        if ctx.q <= TABLE_LIMIT {
            ctx.tables = Some(ctx.build_tables());
        }
        Ok(GaloisField(Arc::new(ctx)))
    }

    /// Builds GF(q) for a prime power `q`.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        let (p, r) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p, r)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        let field = Self::new(spec.p, spec.r)?;
        if field.0.irreducible != spec.irreducible {
            return Err(FieldError::IrreducibleMismatch {
                expected: field.0.irreducible.clone(),
                found: spec.irreducible.clone(),
            });
        }
        Ok(field)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.0.p as u64, r: self.0.r, irreducible: self.0.irreducible.clone() }
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.r
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn irreducible(&self) -> &[u32] {
        &self.0.irreducible
    }

    pub fn element(&self, code: u64) -> Result<Fe, FieldError> {
        if code < self.0.q as u64 {
            Ok(Fe(code as u32))
        } else {
            Err(FieldError::BadElement { code, q: self.0.q })
        }
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.0.q
    }

    /// The image of an integer under Z -> GF(p) -> GF(q).
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let ctx = &*self.0;
        if let Some(t) = &ctx.tables {
            return Fe(t.add[(a.0 * ctx.q + b.0) as usize] as u32);
        }
        Fe(ctx.add_slow(a.0, b.0))
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let ctx = &*self.0;
        if let Some(t) = &ctx.tables {
            return Fe(t.neg[a.0 as usize] as u32);
        }
        Fe(ctx.neg_slow(a.0))
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        let ctx = &*self.0;
        if let Some(t) = &ctx.tables {
            return Fe(t.mul[(a.0 * ctx.q + b.0) as usize] as u32);
        }
        Fe(ctx.mul_slow(a.0, b.0))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        (!a.is_zero()).then(|| self.pow(a, self.0.q as u64 - 2))
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }
}

impl FieldCtx {
    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..self.q {
            for b in 0..self.q {
                let i = a as usize * q + b as usize;
                add[i] = self.add_slow(a, b) as u16;
                mul[i] = self.mul_slow(a, b) as u16;
            }
        }
        let neg = (0..self.q).map(|a| self.neg_slow(a) as u16).collect();
        Tables { add, mul, neg }
    }

    fn digits(&self, mut code: u32) -> Vec<u32> {
        let mut out = vec![0; self.r as usize];
        for d in out.iter_mut() {
            *d = code % self.p;
            code /= self.p;
        }
        out
    }

    fn undigits(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return (a + b) % self.p;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.undigits(&sum)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        if self.r == 1 {
            return (self.p - a) % self.p;
        }
        let neg: Vec<u32> = self.digits(a).iter().map(|&x| (self.p - x) % self.p).collect();
        self.undigits(&neg)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.r == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; da.len() + db.len() - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let r = self.r as usize;
        for top in (r..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            // x^top = x^(top-r) * x^r, and x^r = -sum_{i<r} f_i x^i
            for i in 0..r {
                let f = self.irreducible[i] as u64;
                prod[top - r + i] = (prod[top - r + i] + (p - f) * c) % p;
            }
            prod[top] = 0;
        }
        let low: Vec<u32> = prod[..r].iter().map(|&c| c as u32).collect();
        self.undigits(&low)
    }
}

/// Remainder of `a` modulo monic `m` over GF(p), both low-to-high.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut rem: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let p = p as u64;
    let dm = m.len() - 1;
    while rem.len() > dm {
        let lead = rem.pop().unwrap() % p;
        if lead == 0 {
            continue;
        }
        let shift = rem.len() - dm;
        for i in 0..dm {
            rem[shift + i] = (rem[shift + i] + (p - m[i] as u64) * lead) % p;
        }
    }
    rem.into_iter().map(|c| c as u32).collect()
}

fn monic_polys_of_degree(p: u32, d: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(d);
    (0..count).map(move |mut m| {
        let mut coeffs = Vec::with_capacity(d as usize + 1);
        for _ in 0..d {
            coeffs.push((m % p as u64) as u32);
            m /= p as u64;
        }
        coeffs.push(1);
        coeffs
    })
}

/// True when the monic polynomial `f` has no monic factor of degree 1..=deg/2.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| monic_polys_of_degree(p, d).all(|g| poly_rem(f, &g, p).iter().any(|&c| c != 0)))
}

/// Lexicographically smallest monic irreducible of degree `r`, comparing
/// the coefficient lists constant term first.
fn canonical_irreducible(p: u32, r: u32) -> Vec<u32> {
    let count = (p as u64).pow(r);
    for m in 0..count {
        // most significant digit of m is the constant term
        let mut coeffs = vec![0u32; r as usize + 1];
        let mut rest = m;
        for i in (0..r as usize).rev() {
            coeffs[i] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        coeffs[r as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("every degree has an irreducible polynomial over a prime field")
}

/// A point of F_q^n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FqVector(Vec<Fe>);

impl FqVector {
    pub fn new(field: &GaloisField, codes: &[u64]) -> Result<Self, FieldError> {
        codes.iter().map(|&c| field.element(c)).collect::<Result<Vec<_>, _>>().map(FqVector)
    }

    pub fn from_elements(coords: Vec<Fe>) -> Self {
        FqVector(coords)
    }

    pub fn zero(n: usize) -> Self {
        FqVector(vec![Fe::ZERO; n])
    }

    /// Inverse of [`FqVector::index`].
    pub fn from_index(field: &GaloisField, n: usize, mut index: u64) -> Self {
        let q = field.order() as u64;
        let mut coords = vec![Fe::ZERO; n];
        for c in coords.iter_mut().rev() {
            *c = Fe((index % q) as u32);
            index /= q;
        }
        FqVector(coords)
    }

    /// Base-q index with coordinate 0 as the most significant digit, so that
    /// index order is lexicographic order on coordinate codes.
    pub fn index(&self, field: &GaloisField) -> u64 {
        let q = field.order() as u64;
        self.0.iter().fold(0, |acc, c| acc * q + c.0 as u64)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Fe] {
        &self.0
    }

    pub fn codes(&self) -> Vec<u32> {
        self.0.iter().map(|c| c.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    fn check(&self, field: &GaloisField, other: &FqVector) -> Result<(), FieldError> {
        if self.dim() != other.dim() {
            return Err(FieldError::DimensionMismatch(self.dim(), other.dim()));
        }
        if let Some(bad) = self.0.iter().chain(&other.0).find(|c| !field.contains(**c)) {
            return Err(FieldError::BadElement { code: bad.0 as u64, q: field.order() });
        }
        Ok(())
    }

    pub fn sub(&self, field: &GaloisField, other: &FqVector) -> Result<FqVector, FieldError> {
        self.check(field, other)?;
        Ok(FqVector(self.0.iter().zip(&other.0).map(|(&a, &b)| field.sub(a, b)).collect()))
    }
}

/// Standard bilinear form sum_i x_i * y_i.
pub fn inner_product(field: &GaloisField, x: &FqVector, y: &FqVector) -> Result<Fe, FieldError> {
    x.check(field, y)?;
    Ok(dot(field, x.coords(), y.coords()))
}

/// Unchecked dot product for hot loops.
#[inline]
pub(crate) fn dot(field: &GaloisField, x: &[Fe], y: &[Fe]) -> Fe {
    x.iter().zip(y).fold(Fe::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
}

/// `1 - <x, y>^(q-1)`: one when x and y are orthogonal, zero otherwise.
pub fn orth_indicator(field: &GaloisField, x: &FqVector, y: &FqVector) -> Result<Fe, FieldError> {
    let ip = inner_product(field, x, y)?;
    let power = field.pow(ip, field.order() as u64 - 1);
    Ok(field.sub(Fe::ONE, power))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(field: &GaloisField, codes: &[u64]) -> FqVector {
        FqVector::new(field, codes).unwrap()
    }

    #[test]
    fn make_prime_field() {
        let f = GaloisField::new(5, 1).unwrap();
        assert_eq!(f.order(), 5);
        assert_eq!(f.irreducible(), &[0, 1]);
    }

    #[test]
    fn gf4_irreducible_matches_enumeration() {
        // monic quadratics over GF(2): x^2, x^2+1, x^2+x, x^2+x+1; only the last has no root
        let rootless: Vec<Vec<u32>> = monic_polys_of_degree(2, 2)
            .filter(|f| (0..2u32).all(|x| (f[0] + f[1] * x + f[2] * x * x) % 2 != 0))
            .collect();
        assert_eq!(rootless, vec![vec![1, 1, 1]]);
        let f = GaloisField::new(2, 2).unwrap();
        assert_eq!(f.order(), 4);
        assert_eq!(f.irreducible(), &[1, 1, 1]);
    }

    #[test]
    fn gf8_picks_lexicographically_smallest() {
        // x^3 + x^2 + 1 = [1,0,1,1] precedes x^3 + x + 1 = [1,1,0,1] constant term first
        let f = GaloisField::new(2, 3).unwrap();
        assert_eq!(f.irreducible(), &[1, 0, 1, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(GaloisField::new(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(GaloisField::new(3, 0).unwrap_err(), FieldError::ZeroDegree);
        assert!(matches!(GaloisField::new(2, 17), Err(FieldError::OrderTooLarge { .. })));
        assert!(GaloisField::new(2, 16).is_ok());
        assert_eq!(GaloisField::with_order(12).unwrap_err(), FieldError::NotPrimePower(12));
    }

    #[test]
    fn deterministic_irreducible() {
        for (p, r) in [(2, 4), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let a = GaloisField::new(p, r).unwrap();
            let b = GaloisField::new(p, r).unwrap();
            assert_eq!(a.irreducible(), b.irreducible());
            assert!(is_irreducible(a.irreducible(), p as u32));
        }
    }

    #[test]
    fn spec_round_trip_and_mismatch() {
        let f = GaloisField::new(3, 2).unwrap();
        let spec = f.spec();
        assert_eq!(GaloisField::from_spec(&spec).unwrap(), f);
        let mut bad = spec.clone();
        bad.irreducible = vec![2, 2, 1];
        assert!(matches!(GaloisField::from_spec(&bad), Err(FieldError::IrreducibleMismatch { .. })));
    }

    fn all_small_fields() -> Vec<GaloisField> {
        let mut out = Vec::new();
        for q in 2..=64u64 {
            if let Some((p, r)) = prime_power(q) {
                out.push(GaloisField::new(p, r).unwrap());
            }
        }
        out
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in all_small_fields() {
            let q = f.order() as u64;
            for a in f.elements() {
                assert_eq!(f.pow(a, q), a, "Frobenius in {f:?}");
                assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                if let Some(ai) = f.inv(a) {
                    assert_eq!(f.mul(a, ai), Fe::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if q <= 16 {
                        for c in f.elements() {
                            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn distributivity_q_up_to_64() {
        for f in all_small_fields().into_iter().filter(|f| f.order() > 16) {
            for a in f.elements() {
                for b in f.elements() {
                    for c in f.elements().step_by(3) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn table_and_slow_paths_agree() {
        let f = GaloisField::new(3, 4).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b).0, f.0.mul_slow(a.0, b.0));
                assert_eq!(f.add(a, b).0, f.0.add_slow(a.0, b.0));
            }
        }
        // 257^1 is above the table limit
        let big = GaloisField::new(257, 1).unwrap();
        assert!(big.0.tables.is_none());
        let a = big.element(200).unwrap();
        assert_eq!(big.mul(a, big.inv(a).unwrap()), Fe::ONE);
    }

    #[test]
    fn inner_product_examples() {
        let f5 = GaloisField::new(5, 1).unwrap();
        let f3 = GaloisField::new(3, 1).unwrap();
        assert_eq!(inner_product(&f5, &v(&f5, &[1, 2]), &v(&f5, &[2, 2])).unwrap(), Fe(1));
        assert_eq!(inner_product(&f3, &v(&f3, &[1, 1]), &v(&f3, &[1, 2])).unwrap(), Fe(0));
        assert_eq!(inner_product(&f5, &FqVector::zero(2), &v(&f5, &[3, 4])).unwrap(), Fe(0));
        assert!(matches!(
            inner_product(&f5, &v(&f5, &[1]), &v(&f5, &[1, 2])),
            Err(FieldError::DimensionMismatch(1, 2))
        ));
        let foreign = FqVector::from_elements(vec![Fe(4), Fe(0)]);
        assert!(matches!(inner_product(&f3, &foreign, &v(&f3, &[1, 1])), Err(FieldError::BadElement { .. })));
    }

    #[test]
    fn orth_indicator_examples() {
        let f5 = GaloisField::new(5, 1).unwrap();
        let f3 = GaloisField::new(3, 1).unwrap();
        assert_eq!(orth_indicator(&f5, &v(&f5, &[1, 0]), &v(&f5, &[0, 1])).unwrap(), Fe::ONE);
        assert_eq!(orth_indicator(&f5, &v(&f5, &[1, 0]), &v(&f5, &[1, 1])).unwrap(), Fe::ZERO);
        // <x,x> = 2 in GF(3): nonzero, so not self-orthogonal
        assert_eq!(orth_indicator(&f3, &v(&f3, &[1, 1]), &v(&f3, &[1, 1])).unwrap(), Fe::ZERO);
    }

    #[test]
    fn orth_indicator_is_zero_test() {
        for q in [2u64, 3, 4, 5] {
            let f = GaloisField::with_order(q).unwrap();
            for n in 1..=2usize {
                let total = q.pow(n as u32);
                for i in 0..total {
                    for j in 0..total {
                        let x = FqVector::from_index(&f, n, i);
                        let y = FqVector::from_index(&f, n, j);
                        let ind = orth_indicator(&f, &x, &y).unwrap();
                        let ip = inner_product(&f, &x, &y).unwrap();
                        assert!(ind == Fe::ZERO || ind == Fe::ONE);
                        assert_eq!(ind == Fe::ONE, ip.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn vector_index_round_trip() {
        let f = GaloisField::new(3, 1).unwrap();
        for i in 0..27 {
            let x = FqVector::from_index(&f, 3, i);
            assert_eq!(x.index(&f), i);
        }
        assert_eq!(FqVector::from_index(&f, 2, 5).codes(), vec![1, 2]);
    }

    #[test]
    fn from_int_reduces_mod_p() {
        let f = GaloisField::new(5, 1).unwrap();
        assert_eq!(f.from_int(-6), Fe(4));
        let f9 = GaloisField::new(3, 2).unwrap();
        assert_eq!(f9.from_int(-1), Fe(2));
        assert_eq!(f9.from_int(7), Fe(1));
    }
}
