//! Sparse multivariate polynomials over GF(q) in blocks of vector variables.
//!
//! Every block is a vector variable `x = (x_1, .., x_n)` of F_q^n. Exponents
//! are always kept reduced to `[0, q-1]`, which is sound because `a^q = a`
//! for every element of GF(q): the reduced polynomial is the same function.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, FieldSpec, FqVector, GaloisField};

/// Default cap on the number of monomials a single expansion may hold.
pub const DEFAULT_MONOMIAL_BUDGET: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("expansion exceeded the monomial budget of {0}")]
    BudgetExceeded(usize),
    #[error("unknown block {0}")]
    UnknownBlock(String),
    #[error("assignment is missing block {0}")]
    MissingBlock(String),
    #[error("block {block} expects dimension {expected}, got {got}")]
    WrongDimension { block: String, expected: usize, got: usize },
    #[error("polynomials live over different block layouts")]
    LayoutMismatch,
    #[error("monomial {0:?} exceeds every block threshold")]
    NoBlockFits(Vec<u16>),
    #[error("threshold list has {got} entries for {expected} blocks")]
    ThresholdCount { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub dim: usize,
}

impl Block {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Block { name: name.into(), dim }
    }
}

/// A term with a non-zero coefficient. `exps` is flat over (block, coordinate).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exps: Vec<u16>,
    pub coeff: Fe,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }
}

/// `c_1 x_{b_1} + c_2 x_{b_2} + ..`: a linear combination of block variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm(pub Vec<(usize, Fe)>);

impl LinearForm {
    pub fn var(block: usize) -> Self {
        LinearForm(vec![(block, Fe::ONE)])
    }

    /// `x_a - x_b` over `field`.
    pub fn diff(field: &GaloisField, a: usize, b: usize) -> Self {
        if a == b {
            return LinearForm(Vec::new());
        }
        LinearForm(vec![(a, Fe::ONE), (b, field.neg(Fe::ONE))])
    }
}

/// One factor `1 - <u, v>^(q-1)` of an orthogonality product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthFactor {
    pub left: LinearForm,
    pub right: LinearForm,
}

impl OrthFactor {
    /// `1 - <x_a, x_b>^(q-1)`.
    pub fn pair(a: usize, b: usize) -> Self {
        OrthFactor { left: LinearForm::var(a), right: LinearForm::var(b) }
    }

    /// `1 - <x_a - x_apex, x_b - x_apex>^(q-1)`.
    pub fn shifted(field: &GaloisField, a: usize, b: usize, apex: usize) -> Self {
        OrthFactor { left: LinearForm::diff(field, a, apex), right: LinearForm::diff(field, b, apex) }
    }
}

#[derive(Clone, Debug)]
pub struct MultiPoly {
    field: GaloisField,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    nvars: usize,
    terms: HashMap<Vec<u16>, Fe>,
}

fn offsets_of(blocks: &[Block]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut acc = 0;
    for b in blocks {
        offsets.push(acc);
        acc += b.dim;
    }
    (offsets, acc)
}

impl MultiPoly {
    pub fn zero(field: &GaloisField, blocks: Vec<Block>) -> Self {
        let (offsets, nvars) = offsets_of(&blocks);
        MultiPoly { field: field.clone(), blocks, offsets, nvars, terms: HashMap::new() }
    }

    pub fn constant(field: &GaloisField, blocks: Vec<Block>, c: Fe) -> Self {
        let mut p = Self::zero(field, blocks);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.nvars], c);
        }
        p
    }

    pub fn one(field: &GaloisField, blocks: Vec<Block>) -> Self {
        Self::constant(field, blocks, Fe::ONE)
    }

    /// The coordinate variable `x_{block, coord}`.
    pub fn variable(field: &GaloisField, blocks: Vec<Block>, block: usize, coord: usize) -> Self {
        let mut p = Self::zero(field, blocks);
        let mut exps = vec![0; p.nvars];
        exps[p.offsets[block] + coord] = 1;
        p.terms.insert(exps, Fe::ONE);
        p
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn block_index(&self, name: &str) -> Result<usize, PolyError> {
        self.blocks.iter().position(|b| b.name == name).ok_or_else(|| PolyError::UnknownBlock(name.to_string()))
    }

    /// Range of flat exponent positions belonging to `block`.
    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.blocks[block].dim
    }

    pub fn coeff(&self, exps: &[u16]) -> Fe {
        self.terms.get(exps).copied().unwrap_or(Fe::ZERO)
    }

    /// Terms in graded lexicographic order: total degree first, then the
    /// exponent vector read in (block, coordinate) order.
    pub fn terms(&self) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = self.terms.iter().map(|(e, &c)| Monomial { exps: e.clone(), coeff: c }).collect();
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.exps.cmp(&b.exps)));
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max().unwrap_or(0)
    }

    pub fn block_degree_of(&self, exps: &[u16], block: usize) -> u32 {
        exps[self.block_range(block)].iter().map(|&e| e as u32).sum()
    }

    /// Maximum degree of any term in the variables of `block`.
    pub fn block_degree(&self, block: usize) -> u32 {
        self.terms.keys().map(|e| self.block_degree_of(e, block)).max().unwrap_or(0)
    }

    fn same_layout(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.blocks != other.blocks || self.field != other.field {
            return Err(PolyError::LayoutMismatch);
        }
        Ok(())
    }

    fn accumulate(&mut self, exps: Vec<u16>, c: Fe) {
        if c.is_zero() {
            return;
        }
        let field = &self.field;
        match self.terms.entry(exps) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let s = field.add(*o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.same_layout(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.accumulate(e.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: Fe) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.field, self.blocks.clone());
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, &a)| (e.clone(), self.field.mul(a, c))).collect();
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.add(&other.scale(self.field.neg(Fe::ONE)))
    }

    /// Product with exponent reduction `x^e -> x^(e - (q-1))` for `e >= q`.
    pub fn mul(&self, other: &MultiPoly, budget: usize) -> Result<MultiPoly, PolyError> {
        self.same_layout(other)?;
        let q = self.field.order();
        let mut out = MultiPoly::zero(&self.field, self.blocks.clone());
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<u16> = ea
                    .iter()
                    .zip(eb)
                    .map(|(&a, &b)| {
                        let e = a as u32 + b as u32;
                        (if e >= q { e - (q - 1) } else { e }) as u16
                    })
                    .collect();
                out.accumulate(exps, self.field.mul(ca, cb));
                if out.terms.len() > budget {
                    return Err(PolyError::BudgetExceeded(budget));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut e: u64, budget: usize) -> Result<MultiPoly, PolyError> {
        let mut acc = MultiPoly::one(&self.field, self.blocks.clone());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, budget)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, budget)?;
            }
        }
        Ok(acc)
    }

    fn linear(&self, form: &LinearForm, coord: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.field, self.blocks.clone());
        for &(b, c) in &form.0 {
            let mut exps = vec![0; self.nvars];
            exps[self.offsets[b] + coord] = 1;
            out.accumulate(exps, c);
        }
        out
    }

    /// `<u, v>` as a degree-2 polynomial.
    fn inner_product_poly(&self, u: &LinearForm, v: &LinearForm, budget: usize) -> Result<MultiPoly, PolyError> {
        let dims: Vec<usize> = u.0.iter().chain(&v.0).map(|&(b, _)| self.blocks[b].dim).collect();
        let n = dims.first().copied().unwrap_or(0);
        if let Some((b, _)) = u.0.iter().chain(&v.0).find(|&&(b, _)| self.blocks[b].dim != n) {
            return Err(PolyError::WrongDimension {
                block: self.blocks[*b].name.clone(),
                expected: n,
                got: self.blocks[*b].dim,
            });
        }
        let mut acc = MultiPoly::zero(&self.field, self.blocks.clone());
        for i in 0..n {
            let prod = self.linear(u, i).mul(&self.linear(v, i), budget)?;
            acc = acc.add(&prod)?;
        }
        Ok(acc)
    }

    /// Evaluates at one vector per block, in block order.
    pub fn eval(&self, point: &[&FqVector]) -> Result<Fe, PolyError> {
        if point.len() != self.blocks.len() {
            return Err(PolyError::MissingBlock(
                self.blocks.get(point.len()).map(|b| b.name.clone()).unwrap_or_default(),
            ));
        }
        let mut flat = Vec::with_capacity(self.nvars);
        for (b, v) in self.blocks.iter().zip(point) {
            if v.dim() != b.dim {
                return Err(PolyError::WrongDimension { block: b.name.clone(), expected: b.dim, got: v.dim() });
            }
            flat.extend_from_slice(v.coords());
        }
        Ok(self.eval_flat(&flat))
    }

    /// Evaluates with named blocks; every block must be present.
    pub fn eval_named(&self, assignment: &HashMap<String, FqVector>) -> Result<Fe, PolyError> {
        let point: Vec<&FqVector> = self
            .blocks
            .iter()
            .map(|b| assignment.get(&b.name).ok_or_else(|| PolyError::MissingBlock(b.name.clone())))
            .collect::<Result<_, _>>()?;
        self.eval(&point)
    }

    pub(crate) fn eval_flat(&self, values: &[Fe]) -> Fe {
        let f = &self.field;
        let mut acc = Fe::ZERO;
        for (exps, &c) in &self.terms {
            let mut t = c;
            for (&x, &e) in values.iter().zip(exps) {
                if e > 0 {
                    t = f.mul(t, f.pow(x, e as u64));
                    if t.is_zero() {
                        break;
                    }
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Assigns every monomial to the first block (in `order`) whose
    /// per-block degree is within that block's threshold. Returns one group
    /// per entry of `order`.
    pub fn split_by_block_degree(&self, order: &[usize], thresholds: &[u32]) -> Result<Vec<Vec<Monomial>>, PolyError> {
        if order.len() != thresholds.len() {
            return Err(PolyError::ThresholdCount { expected: order.len(), got: thresholds.len() });
        }
        let mut groups = vec![Vec::new(); order.len()];
        for m in self.terms() {
            let slot = order
                .iter()
                .zip(thresholds)
                .position(|(&b, &t)| self.block_degree_of(&m.exps, b) <= t)
                .ok_or_else(|| PolyError::NoBlockFits(m.exps.clone()))?;
            groups[slot].push(m);
        }
        Ok(groups)
    }

    pub fn to_json(&self) -> PolyJson {
        let mut coords = Vec::with_capacity(self.nvars);
        for (b, block) in self.blocks.iter().enumerate() {
            for c in 0..block.dim {
                coords.push((b, c));
            }
        }
        PolyJson {
            field: self.field.spec(),
            blocks: self.blocks.iter().map(|b| (b.name.clone(), b.dim)).collect(),
            terms: self
                .terms()
                .into_iter()
                .map(|m| PolyTermJson {
                    coeff: m.coeff.code(),
                    exps: m.exps.iter().zip(&coords).filter(|(&e, _)| e > 0).map(|(&e, &(b, c))| (b, c, e)).collect(),
                })
                .collect(),
        }
    }
}

/// Expands `prod (1 - <u, v>^(q-1))` over the given factors into reduced form.
pub fn expand_orth_product(
    field: &GaloisField,
    blocks: Vec<Block>,
    factors: &[OrthFactor],
    budget: usize,
) -> Result<MultiPoly, PolyError> {
    let mut acc = MultiPoly::one(field, blocks.clone());
    let one = MultiPoly::one(field, blocks);
    let q = field.order() as u64;
    for factor in factors {
        for &(b, _) in factor.left.0.iter().chain(&factor.right.0) {
            if b >= one.blocks.len() {
                return Err(PolyError::UnknownBlock(b.to_string()));
            }
        }
        let ip = one.inner_product_poly(&factor.left, &factor.right, budget)?;
        let term = one.sub(&ip.pow(q - 1, budget)?)?;
        acc = acc.mul(&term, budget)?;
    }
    Ok(acc)
}

/// `prod_{j<l<k} (1 - <x_j, x_l>^(q-1))` over `k` blocks named `x0..`.
pub fn mutual_orthogonality_poly(
    field: &GaloisField,
    k: usize,
    n: usize,
    budget: usize,
) -> Result<MultiPoly, PolyError> {
    let blocks: Vec<Block> = (0..k).map(|i| Block::new(format!("x{i}"), n)).collect();
    let mut factors = Vec::new();
    for j in 0..k {
        for l in j + 1..k {
            factors.push(OrthFactor::pair(j, l));
        }
    }
    expand_orth_product(field, blocks, &factors, budget)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyTermJson {
    pub coeff: u32,
    pub exps: Vec<(usize, usize, u16)>,
}

/// Wire form `{"field":..,"blocks":[["x",n],..],"terms":[{"coeff":c,"exps":[[block,coord,e],..]},..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub field: FieldSpec,
    pub blocks: Vec<(String, usize)>,
    pub terms: Vec<PolyTermJson>,
}
