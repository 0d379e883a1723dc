//! Detection of k-right corners in point sets and search for large
//! corner-free subsets of F_q^n.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::constructions::{corner_tensor_on_points, ConstructionError, CornerTensorSpec};
use crate::field::{dot, Fe, FieldError, FqVector, GaloisField};
use crate::tensor::{diagonal_lower_bound, DiagonalBound};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 16;
const HARD_EXHAUSTIVE_LIMIT: usize = 64;

#[derive(Debug, Error)]
pub enum CornerError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("k must be at least 1")]
    ZeroArity,
    #[error("point {index} appears twice")]
    DuplicatePoint { index: usize },
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("exhaustive search over {points} points exceeds the limit of {limit}")]
    TooLarge { points: usize, limit: usize },
}

/// Distinct points of `F_q^n` in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    field: GaloisField,
    n: usize,
    points: Vec<FqVector>,
}

impl PointSet {
    pub fn new(field: &GaloisField, n: usize, points: Vec<FqVector>) -> Result<Self, CornerError> {
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(CornerError::DimensionMismatch { index, expected: n, got: p.dim() });
            }
            if !seen.insert(p.codes()) {
                return Err(CornerError::DuplicatePoint { index });
            }
        }
        Ok(PointSet { field: field.clone(), n, points })
    }

    pub fn from_indices(field: &GaloisField, n: usize, indices: &[u64]) -> Result<Self, CornerError> {
        let pts = indices.iter().map(|&i| FqVector::from_index(field, n, i)).collect();
        PointSet::new(field, n, pts)
    }

    /// The whole space in index order.
    pub fn full(field: &GaloisField, n: usize) -> Result<Self, CornerError> {
        let size = crate::constructions::space_size(field, n)?;
        Self::from_indices(field, n, &(0..size as u64).collect::<Vec<_>>())
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[FqVector] {
        &self.points
    }

    pub fn indices(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.index(&self.field)).collect()
    }

    pub fn codes(&self) -> Vec<Vec<u32>> {
        self.points.iter().map(|p| p.codes()).collect()
    }

    /// One row of `n` integer codes per point. `n` is taken from the first
    /// row when not given.
    pub fn read_csv<R: Read>(field: &GaloisField, n: Option<usize>, reader: R) -> Result<Self, CornerError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(reader);
        let mut points = Vec::new();
        let mut dim = n;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| CornerError::Csv(e.to_string()))?;
            let codes = rec
                .iter()
                .map(|c| c.parse::<u64>().map_err(|e| CornerError::Csv(format!("row {}: {c:?}: {e}", row + 1))))
                .collect::<Result<Vec<_>, _>>()?;
            let expected = *dim.get_or_insert(codes.len());
            if codes.len() != expected {
                return Err(CornerError::DimensionMismatch { index: row, expected, got: codes.len() });
            }
            points.push(FqVector::new(field, &codes)?);
        }
        PointSet::new(field, dim.unwrap_or(0), points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CornerError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for p in &self.points {
            w.write_record(p.codes().iter().map(|c| c.to_string())).map_err(|e| CornerError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| CornerError::Csv(e.to_string()))
    }
}

/// Vertices `x_1..x_k` and apex `x_{k+1}` with pairwise orthogonal differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerWitness {
    pub k: usize,
    pub vertices: Vec<FqVector>,
    pub apex: FqVector,
}

impl CornerWitness {
    pub fn is_valid(&self, field: &GaloisField) -> bool {
        let mut all: Vec<&FqVector> = self.vertices.iter().collect();
        all.push(&self.apex);
        let distinct = (0..all.len()).all(|i| (i + 1..all.len()).all(|j| all[i] != all[j]));
        let diffs: Vec<FqVector> =
            self.vertices.iter().map(|v| v.sub(field, &self.apex).expect("same dimension")).collect();
        let orthogonal = (0..diffs.len())
            .all(|i| (i + 1..diffs.len()).all(|j| dot(field, diffs[i].coords(), diffs[j].coords()).is_zero()));
        self.vertices.len() == self.k && distinct && orthogonal
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "apex": self.apex.codes(),
            "vertices": self.vertices.iter().map(|v| v.codes()).collect::<Vec<_>>(),
        })
    }
}

/// Orthogonality graph of the differences `x - apex` as bit rows.
struct DiffGraph {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl DiffGraph {
    fn new(field: &GaloisField, pts: &[&[Fe]], apex: &[Fe]) -> Self {
        let m = pts.len();
        let words = m.div_ceil(64).max(1);
        let diffs: Vec<Vec<Fe>> =
            pts.iter().map(|p| p.iter().zip(apex).map(|(&a, &b)| field.sub(a, b)).collect()).collect();
        let mut rows = vec![vec![0u64; words]; m];
        for i in 0..m {
            for j in i + 1..m {
                if dot(field, &diffs[i], &diffs[j]).is_zero() {
                    rows[i][j / 64] |= 1 << (j % 64);
                    rows[j][i / 64] |= 1 << (i % 64);
                }
            }
        }
        DiffGraph { words, rows }
    }

    /// First `size`-clique in lexicographic order among `cands`.
    fn first_clique(&self, cands: &[u64], size: usize, chosen: &mut Vec<usize>) -> bool {
        if size == 0 {
            return true;
        }
        for w in 0..self.words {
            let mut bits = cands[w];
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let next = narrow(cands, &self.rows[i], i);
                chosen.push(i);
                if self.first_clique(&next, size - 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
}

/// Candidates adjacent to `i` and after it.
fn narrow(cands: &[u64], row: &[u64], i: usize) -> Vec<u64> {
    (0..cands.len())
        .map(|x| {
            let later = match x.cmp(&(i / 64)) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => (!0u64).checked_shl(i as u32 % 64 + 1).unwrap_or(0),
                std::cmp::Ordering::Greater => !0,
            };
            cands[x] & row[x] & later
        })
        .collect()
}

fn mask_of(words: usize, items: impl IntoIterator<Item = usize>) -> Vec<u64> {
    let mut m = vec![0u64; words];
    for i in items {
        m[i / 64] |= 1 << (i % 64);
    }
    m
}

/// Lexicographically first corner in `pts` (apex position first, then vertex
/// positions), as positions into `pts`.
fn first_corner_positions(field: &GaloisField, pts: &[&[Fe]], k: usize) -> Option<(usize, Vec<usize>)> {
    (0..pts.len()).into_par_iter().find_map_first(|a| {
        let others: Vec<usize> = (0..pts.len()).filter(|&i| i != a).collect();
        if others.len() < k {
            return None;
        }
        let sub: Vec<&[Fe]> = others.iter().map(|&i| pts[i]).collect();
        let g = DiffGraph::new(field, &sub, pts[a]);
        let mut chosen = Vec::with_capacity(k);
        let all = mask_of(g.words, 0..sub.len());
        g.first_clique(&all, k, &mut chosen).then(|| (a, chosen.iter().map(|&i| others[i]).collect()))
    })
}

pub fn find_corner(set: &PointSet, k: usize) -> Result<Option<CornerWitness>, CornerError> {
    if k < 1 {
        return Err(CornerError::ZeroArity);
    }
    let pts: Vec<&[Fe]> = set.points.iter().map(|p| p.coords()).collect();
    let found = first_corner_positions(&set.field, &pts, k).map(|(a, vs)| CornerWitness {
        k,
        vertices: vs.iter().map(|&i| set.points[i].clone()).collect(),
        apex: set.points[a].clone(),
    });
    if let Some(w) = &found {
        assert!(w.is_valid(&set.field), "search produced an invalid corner {w:?}");
    }
    Ok(found)
}

pub fn validate_free_set(set: &PointSet, k: usize) -> Result<bool, CornerError> {
    Ok(find_corner(set, k)?.is_none())
}

/// Whether J_k restricted to `A^(k+1)` is diagonal. Requires `p > k`.
pub fn jk_restriction_is_diagonal(set: &PointSet, k: usize) -> Result<bool, CornerError> {
    let pts: Vec<Vec<Fe>> = set.points.iter().map(|p| p.coords().to_vec()).collect();
    let t = corner_tensor_on_points(&set.field, &CornerTensorSpec::jk(k, set.n), &pts)?;
    Ok(matches!(diagonal_lower_bound(&t), DiagonalBound::Diagonal(_)))
}

/// `validate_free_set` together with the tensor route; errors if they disagree.
pub fn validate_free_set_checked(set: &PointSet, k: usize) -> Result<bool, CornerError> {
    let free = validate_free_set(set, k)?;
    let diagonal = jk_restriction_is_diagonal(set, k)?;
    assert_eq!(free, diagonal, "corner search and J_k restriction disagree on {:?}", set.indices());
    Ok(free)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
    RandomRestart,
}

impl std::str::FromStr for SearchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "greedy" => Ok(SearchMode::Greedy),
            "random-restart" => Ok(SearchMode::RandomRestart),
            other => Err(format!("unknown search mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Branch-and-bound nodes before giving up (deterministic cut-off).
    pub node_budget: Option<u64>,
    /// Wall-clock cut-off; results cut by time are not reproducible.
    pub time_budget: Option<Duration>,
    pub exhaustive_limit: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: None,
            time_budget: None,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            restarts: 32,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub mode: SearchMode,
    pub k: usize,
    pub set: PointSet,
    pub optimal: bool,
    pub nodes: u64,
}

impl SearchResult {
    pub fn size(&self) -> usize {
        self.set.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "size": self.size(),
            "optimal": self.optimal,
            "points": self.set.codes(),
            "witness": Value::Null,
            "mode": self.mode,
            "k": self.k,
            "nodes": self.nodes,
        })
    }
}

/// Every corner of the full space as a sorted index set, grouped by largest element.
fn corner_hyperedges(field: &GaloisField, pts: &[&[Fe]], k: usize) -> Vec<Vec<u64>> {
    let m = pts.len();
    let mut by_max: Vec<Vec<u64>> = vec![Vec::new(); m];
    for a in 0..m {
        let others: Vec<usize> = (0..m).filter(|&i| i != a).collect();
        let sub: Vec<&[Fe]> = others.iter().map(|&i| pts[i]).collect();
        let g = DiffGraph::new(field, &sub, pts[a]);
        let mut chosen = Vec::new();
        all_cliques(&g, &mask_of(g.words, 0..sub.len()), k, &mut chosen, &mut |c| {
            let mut edge: Vec<usize> = c.iter().map(|&i| others[i]).collect();
            edge.push(a);
            let top = *edge.iter().max().unwrap();
            let mask = edge.iter().filter(|&&i| i != top).fold(0u64, |acc, &i| acc | 1 << i);
            by_max[top].push(mask);
        });
    }
    for edges in &mut by_max {
        edges.sort_unstable();
        edges.dedup();
    }
    by_max
}

fn all_cliques(g: &DiffGraph, cands: &[u64], size: usize, chosen: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if size == 0 {
        emit(chosen);
        return;
    }
    for w in 0..g.words {
        let mut bits = cands[w];
        while bits != 0 {
            let i = w * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let next = narrow(cands, &g.rows[i], i);
            chosen.push(i);
            all_cliques(g, &next, size - 1, chosen, emit);
            chosen.pop();
        }
    }
}

struct BranchAndBound<'a> {
    edges: &'a [Vec<u64>],
    m: usize,
    best: u64,
    best_size: u32,
    nodes: u64,
    node_budget: u64,
    deadline: Option<Instant>,
    aborted: bool,
}

impl BranchAndBound<'_> {
    fn run(&mut self, v: usize, set: u64, size: u32) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.node_budget
            || (self.nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.aborted = true;
            return;
        }
        if size > self.best_size {
            self.best_size = size;
            self.best = set;
        }
        if v == self.m || size + (self.m - v) as u32 <= self.best_size {
            return;
        }
        if !self.edges[v].iter().any(|&e| e & !set == 0) {
            self.run(v + 1, set | 1 << v, size + 1);
        }
        self.run(v + 1, set, size);
    }
}

fn greedy_from_order(field: &GaloisField, all: &[FqVector], order: &[usize], k: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for &v in order {
        let mut trial: Vec<&[Fe]> = chosen.iter().map(|&i| all[i].coords()).collect();
        trial.push(all[v].coords());
        if creates_corner_with_last(field, &trial, k) {
            continue;
        }
        chosen.push(v);
    }
    chosen
}

/// Whether the last point of `pts` lies on a corner inside `pts`; the rest is corner-free.
fn creates_corner_with_last(field: &GaloisField, pts: &[&[Fe]], k: usize) -> bool {
    let last = pts.len() - 1;
    (0..pts.len()).any(|a| {
        let others: Vec<usize> = (0..pts.len()).filter(|&i| i != a).collect();
        if others.len() < k {
            return false;
        }
        let sub: Vec<&[Fe]> = others.iter().map(|&i| pts[i]).collect();
        let g = DiffGraph::new(field, &sub, pts[a]);
        let mut chosen = Vec::new();
        if a == last {
            g.first_clique(&mask_of(g.words, 0..sub.len()), k, &mut chosen)
        } else {
            // the last point must be a vertex: restrict to its neighbours
            let lp = sub.len() - 1;
            let cands: Vec<u64> = g.rows[lp].clone();
            k == 1 || g.first_clique(&cands, k - 1, &mut chosen)
        }
    })
}

pub fn max_corner_free(
    field: &GaloisField,
    n: usize,
    k: usize,
    mode: SearchMode,
    cfg: &SearchConfig,
) -> Result<SearchResult, CornerError> {
    if k < 1 {
        return Err(CornerError::ZeroArity);
    }
    let space = PointSet::full(field, n)?;
    let all = space.points().to_vec();
    let m = all.len();
    let finish = |idx: Vec<usize>, optimal: bool, nodes: u64| -> Result<SearchResult, CornerError> {
        let mut idx = idx;
        idx.sort_unstable();
        let set = PointSet::new(field, n, idx.iter().map(|&i| all[i].clone()).collect())?;
        assert!(validate_free_set(&set, k)?, "search returned a set with a corner");
        Ok(SearchResult { mode, k, set, optimal, nodes })
    };
    match mode {
        SearchMode::Exhaustive => {
            let limit = cfg.exhaustive_limit.min(HARD_EXHAUSTIVE_LIMIT);
            if m > limit {
                return Err(CornerError::TooLarge { points: m, limit });
            }
            let pts: Vec<&[Fe]> = all.iter().map(|p| p.coords()).collect();
            let edges = corner_hyperedges(field, &pts, k);
            let mut bb = BranchAndBound {
                edges: &edges,
                m,
                best: 0,
                best_size: 0,
                nodes: 0,
                node_budget: cfg.node_budget.unwrap_or(u64::MAX),
                deadline: cfg.time_budget.map(|d| Instant::now() + d),
                aborted: false,
            };
            // translating any corner-free set keeps it corner-free, so the origin may be fixed
            if m > 0 {
                bb.run(1, 1, 1);
            }
            let idx = (0..m).filter(|&i| bb.best >> i & 1 == 1).collect();
            finish(idx, !bb.aborted, bb.nodes)
        }
        SearchMode::Greedy => {
            let order: Vec<usize> = (0..m).collect();
            finish(greedy_from_order(field, &all, &order, k), false, m as u64)
        }
        SearchMode::RandomRestart => {
            let runs: Vec<Vec<usize>> = (0..cfg.restarts.max(1))
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(r as u64);
                    let mut order: Vec<usize> = (0..m).collect();
                    order.shuffle(&mut rng);
                    greedy_from_order(field, &all, &order, k)
                })
                .collect();
            // first run of maximal size, so the answer does not depend on scheduling
            let best_len = runs.iter().map(Vec::len).max().unwrap_or(0);
            let best = runs.into_iter().find(|r| r.len() == best_len).unwrap_or_default();
            finish(best, false, cfg.restarts as u64)
        }
    }
}
