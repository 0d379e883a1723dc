//! Counting bounds for reduced monomials and the right-angle / k-right-corner
//! upper bounds built from them. Every integer quantity is computed exactly
//! with big integers; only the Chernoff majorant is a float.

use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::field::characteristic_of;

pub type Rational = Ratio<u64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("q must be at least 2, got {0}")]
    OrderTooSmall(u64),
    #[error("q must be odd, got {0}")]
    EvenOrder(u64),
    #[error("cycle count t must be at least 1")]
    ZeroCycles,
    #[error("k must be at least {min}, got {k}")]
    ArityTooSmall { k: u64, min: u64 },
    #[error("degree {0} is not a finite non-negative number")]
    BadDegree(f64),
}

/// `binom(n, r)` as a big integer; zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `#{v in {0..q-1}^n : sum v_i <= d}` by dynamic programming over coordinates.
pub fn count_monomials_exact(q: u64, n: u64, d: u64) -> BigUint {
    let cap = d.min(n * (q.saturating_sub(1)));
    let width = cap as usize + 1;
    // ways[s] = number of vectors over the coordinates seen so far with sum s
    let mut ways = vec![BigUint::zero(); width];
    ways[0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); width];
        let mut window = BigUint::zero();
        for s in 0..width {
            window += &ways[s];
            if s >= q as usize {
                window -= &ways[s - q as usize];
            }
            next[s] = window.clone();
        }
        ways = next;
    }
    ways.iter().sum()
}

/// Count for a real degree bound: degrees are integers, so `d` is floored.
pub fn count_monomials_floor(q: u64, n: u64, d: &Rational) -> BigUint {
    count_monomials_exact(q, n, d.floor().to_integer())
}

/// Stars-and-bars majorant `binom(n + d, d)`.
pub fn count_monomials_binomial(n: u64, d: u64) -> BigUint {
    binomial(n + d, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffBound {
    pub value: f64,
    /// Minimizer in (0, 1); absent when the bound degenerates.
    pub t: Option<f64>,
}

const GRID_POINTS: usize = 1024;
const GOLDEN_TOL: f64 = 1e-12;

/// `(min_{0<t<1} (1 - t^q) / ((1 - t) t^(d/n)))^n`, minimized in log domain.
pub fn count_monomials_chernoff(q: u64, n: u64, d: f64) -> Result<ChernoffBound, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(BoundError::BadDegree(d));
    }
    if n == 0 || d == 0.0 {
        return Ok(ChernoffBound { value: 1.0, t: None });
    }
    if d >= (n * (q - 1)) as f64 {
        return Ok(ChernoffBound { value: (q as f64).powi(n as i32), t: None });
    }
    let ratio = d / n as f64;
    let g = |t: f64| {
        // (1 - t^q) / (1 - t) = 1 + t + .. + t^(q-1), summed directly for stability near 1
        let mut s = 0.0;
        let mut p = 1.0;
        for _ in 0..q {
            s += p;
            p *= t;
        }
        s.ln() - ratio * t.ln()
    };
    let grid = |j: usize| j as f64 / (GRID_POINTS + 1) as f64;
    let (best_j, best_val) =
        (1..=GRID_POINTS)
            .map(|j| (j, g(grid(j))))
            .fold((1, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
    let (mut a, mut b) = (grid(best_j - 1).max(f64::MIN_POSITIVE), grid(best_j + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let (mut gc, mut ge) = (g(c), g(e));
    while b - a > GOLDEN_TOL {
        if gc < ge {
            b = e;
            e = c;
            ge = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = e;
            gc = ge;
            e = a + inv_phi * (b - a);
            ge = g(e);
        }
    }
    let t_star = (a + b) / 2.0;
    let golden_val = g(t_star);
    // the grid point stands as a fallback certificate if golden-section wandered
    let (t, val) = if golden_val <= best_val { (t_star, golden_val) } else { (grid(best_j), best_val) };
    Ok(ChernoffBound { value: (n as f64 * val).exp(), t: Some(t) })
}

/// `r_1(t) = ((t-1)(t-2) + 2)/t * (q-1)` and `r_2(t) = (t-1)(t-2)/t * (q-1)`.
pub fn degree_thresholds(t: u64, q: u64) -> Result<(Rational, Rational), BoundError> {
    if t < 1 {
        return Err(BoundError::ZeroCycles);
    }
    let base = (t - 1) * t.saturating_sub(2);
    let r1 = Rational::new((base + 2) * (q - 1), t);
    let r2 = Rational::new(base * (q - 1), t);
    Ok((r1, r2))
}

/// Degree budget of a block `S` of axes `{0..k}` (axis `k` is the apex):
/// `r_2(k+2-|S|)` when `S` holds the apex or is a singleton, else `r_1(k+2-|S|)`.
pub fn subset_degree(k: usize, q: u64, subset: &[usize]) -> Rational {
    let t = (k + 2 - subset.len()) as u64;
    let (r1, r2) = degree_thresholds(t, q).expect("t >= 2 for proper subsets");
    if subset.contains(&k) || subset.len() == 1 {
        r2
    } else {
        r1
    }
}

/// Non-empty proper subsets of `{0..m-1}`, ordered by size then lexicographically.
pub fn proper_subsets(m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> =
        (1u64..(1u64 << m) - 1).map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect()).collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    ExactDp,
    Binomial,
    Chernoff,
    PreciseSubsetSum,
    DisplayedSum,
    Simplified,
    RightAngle,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Exact(BigUint),
    Real(f64),
}

impl BoundValue {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Exact(v) => Some(v),
            BoundValue::Real(_) => None,
        }
    }
}

impl std::fmt::Display for BoundValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundValue::Exact(v) => write!(f, "{v}"),
            BoundValue::Real(x) => write!(f, "{x:.6}"),
        }
    }
}

/// Big integers go out as raw JSON numbers.
pub fn big_json(v: &BigUint) -> Value {
    Value::Number(serde_json::Number::from_str(&v.to_string()).expect("decimal digits form a JSON number"))
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundValue::Exact(v) => big_json(v).serialize(s),
            BoundValue::Real(x) => x.serialize(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub q: u64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub params: BoundParams,
    pub value: BoundValue,
    pub method: Method,
    pub intermediates: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn exact_value(&self) -> &BigUint {
        self.value.exact().expect("exact bound")
    }
}

fn corner_warnings(k: u64, q: u64) -> Vec<String> {
    let p = characteristic_of(q);
    if p <= k {
        vec![format!("p <= k ({p} <= {k}): the corner bound hypothesis p > k is violated")]
    } else {
        Vec::new()
    }
}

fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn monomials_exact_report(q: u64, n: u64, d: u64) -> Result<BoundReport, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    Ok(BoundReport {
        name: "monomial_count",
        params: BoundParams { k: None, q, n, d: Some(d.to_string()) },
        value: BoundValue::Exact(count_monomials_exact(q, n, d)),
        method: Method::ExactDp,
        intermediates: json!({ "universe": big_json(&BigUint::from(q).pow(n as u32)) }),
        warnings: Vec::new(),
    })
}

pub fn monomials_binomial_report(q: u64, n: u64, d: u64) -> BoundReport {
    BoundReport {
        name: "monomial_count",
        params: BoundParams { k: None, q, n, d: Some(d.to_string()) },
        value: BoundValue::Exact(count_monomials_binomial(n, d)),
        method: Method::Binomial,
        intermediates: json!({ "tight": d < q }),
        warnings: Vec::new(),
    }
}

pub fn monomials_chernoff_report(q: u64, n: u64, d: f64) -> Result<BoundReport, BoundError> {
    let c = count_monomials_chernoff(q, n, d)?;
    Ok(BoundReport {
        name: "monomial_count",
        params: BoundParams { k: None, q, n, d: Some(d.to_string()) },
        value: BoundValue::Real(c.value),
        method: Method::Chernoff,
        intermediates: json!({ "t": c.t }),
        warnings: Vec::new(),
    })
}

/// Sum over non-empty proper subsets `S` of the `k+1` axes of `C_{d(S)}`.
pub fn precise_corner_bound(k: u64, q: u64, n: u64) -> Result<BoundReport, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    if k < 1 {
        return Err(BoundError::ArityTooSmall { k, min: 1 });
    }
    let mut total = BigUint::zero();
    let mut rows = Vec::new();
    for s in proper_subsets(k as usize + 1) {
        let d = subset_degree(k as usize, q, &s);
        let c = count_monomials_floor(q, n, &d);
        total += &c;
        rows.push(json!({
            "subset": s,
            "degree": rational_string(&d),
            "floored": d.floor().to_integer(),
            "count": big_json(&c),
        }));
    }
    Ok(BoundReport {
        name: "corner_precise",
        params: BoundParams { k: Some(k), q, n, d: None },
        value: BoundValue::Exact(total),
        method: Method::PreciseSubsetSum,
        intermediates: json!({ "subsets": rows }),
        warnings: corner_warnings(k, q),
    })
}

/// `(k+1) C_{r2(k+1)} + sum_{t=1}^{k-1} binom(k,t) C_{r1(t+1)} + sum_{t=1}^{k-1} binom(k,t-1) C_{r2(t+1)}`,
/// evaluated exactly as displayed.
pub fn displayed_corner_sum(k: u64, q: u64, n: u64) -> Result<BoundReport, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    if k < 1 {
        return Err(BoundError::ArityTooSmall { k, min: 1 });
    }
    let c = |d: &Rational| count_monomials_floor(q, n, d);
    let (_, r2_top) = degree_thresholds(k + 1, q)?;
    let head = BigUint::from(k + 1) * c(&r2_top);
    let mut total = head.clone();
    let mut r1_terms = Vec::new();
    let mut r2_terms = Vec::new();
    for t in 1..k {
        let (r1, r2) = degree_thresholds(t + 1, q)?;
        let a = binomial(k, t) * c(&r1);
        let b = binomial(k, t - 1) * c(&r2);
        total += &a + &b;
        r1_terms.push(json!({ "t": t, "coefficient": big_json(&binomial(k, t)), "degree": rational_string(&r1), "term": big_json(&a) }));
        r2_terms.push(json!({ "t": t, "coefficient": big_json(&binomial(k, t - 1)), "degree": rational_string(&r2), "term": big_json(&b) }));
    }
    Ok(BoundReport {
        name: "corner_displayed",
        params: BoundParams { k: Some(k), q, n, d: None },
        value: BoundValue::Exact(total),
        method: Method::DisplayedSum,
        intermediates: json!({ "head": big_json(&head), "r1_terms": r1_terms, "r2_terms": r2_terms }),
        warnings: corner_warnings(k, q),
    })
}

/// `(k+1) * binom(n + (k-1) q, (k-1)(q-1))`.
pub fn simplified_corner_bound(k: u64, q: u64, n: u64) -> Result<BoundReport, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    if k < 1 {
        return Err(BoundError::ArityTooSmall { k, min: 1 });
    }
    let b = binomial(n + (k - 1) * q, (k - 1) * (q - 1));
    Ok(BoundReport {
        name: "corner_simplified",
        params: BoundParams { k: Some(k), q, n, d: None },
        value: BoundValue::Exact(BigUint::from(k + 1) * &b),
        method: Method::Simplified,
        intermediates: json!({ "binomial": big_json(&b) }),
        warnings: corner_warnings(k, q),
    })
}

/// `2 binom(n+q-1, q-1) + 2 binom(n+(q-1)/2, (q-1)/2) + 2` for odd `q`.
pub fn right_angle_bound(q: u64, n: u64) -> Result<BoundReport, BoundError> {
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    if q.is_even() {
        return Err(BoundError::EvenOrder(q));
    }
    let full = binomial(n + q - 1, q - 1);
    let half = binomial(n + (q - 1) / 2, (q - 1) / 2);
    let value = BigUint::from(2u32) * (&full + &half) + 2u32;
    Ok(BoundReport {
        name: "right_angle",
        params: BoundParams { k: Some(2), q, n, d: None },
        value: BoundValue::Exact(value),
        method: Method::RightAngle,
        intermediates: json!({
            "binom_full": big_json(&full),
            "binom_half": big_json(&half),
            "exact_full": big_json(&count_monomials_exact(q, n, q - 1)),
            "exact_half": big_json(&count_monomials_exact(q, n, (q - 1) / 2)),
        }),
        warnings: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationCheck {
    pub k: u64,
    pub q: u64,
    pub n: u64,
    pub identity_holds: bool,
    pub identity_lhs: BigUint,
    pub identity_rhs: BigUint,
    /// `(k+1) binom(n + (k-1) q, (k-1)(q-1))`.
    pub rhs: BigUint,
    /// The dominated sum with the extra term at `ceil(4(q-1)/3)`.
    pub lhs: BigUint,
    pub dominance_holds: bool,
    /// Same sum with `floor(4(q-1)/3)`; recorded when it differs.
    pub lhs_floor: BigUint,
    pub dominance_holds_floor: bool,
}

impl Serialize for DominationCheck {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        json!({
            "k": self.k, "q": self.q, "n": self.n,
            "identity_holds": self.identity_holds,
            "identity_lhs": big_json(&self.identity_lhs),
            "identity_rhs": big_json(&self.identity_rhs),
            "dominance_holds": self.dominance_holds,
            "lhs": big_json(&self.lhs),
            "rhs": big_json(&self.rhs),
            "lhs_floor": big_json(&self.lhs_floor),
            "dominance_holds_floor": self.dominance_holds_floor,
        })
        .serialize(s)
    }
}

/// Checks `binom(n+(k-1)q, (k-1)(q-1)) = sum_i binom(k-1,i) binom(n+(k-1)(q-1), (k-1)(q-1)-i)`
/// and whether `(k+1)` times it strictly dominates the weakened corner sum.
pub fn domination_identity_check(k: u64, q: u64, n: u64) -> Result<DominationCheck, BoundError> {
    if k < 2 {
        return Err(BoundError::ArityTooSmall { k, min: 2 });
    }
    if q < 2 {
        return Err(BoundError::OrderTooSmall(q));
    }
    let big_k = (k - 1) * (q - 1);
    let identity_lhs = binomial(n + (k - 1) * q, big_k);
    let identity_rhs: BigUint = (0..k)
        .map(|i| if i > big_k { BigUint::zero() } else { binomial(k - 1, i) * binomial(n + big_k, big_k - i) })
        .sum();
    let rhs = BigUint::from(k + 1) * &identity_lhs;
    let base: BigUint = (0..k).map(|t| binomial(k + 1, t + 1) * binomial(n + t * (q - 1), t * (q - 1))).sum();
    let extra = |e: u64| binomial(k, 2) * binomial(n + e, e);
    let four_thirds = Rational::new(4 * (q - 1), 3);
    let lhs = &base + extra(four_thirds.ceil().to_integer());
    let lhs_floor = &base + extra(four_thirds.floor().to_integer());
    Ok(DominationCheck {
        k,
        q,
        n,
        identity_holds: identity_lhs == identity_rhs,
        dominance_holds: rhs > lhs,
        dominance_holds_floor: rhs > lhs_floor,
        identity_lhs,
        identity_rhs,
        rhs,
        lhs,
        lhs_floor,
    })
}

/// Converts for call sites that need a machine integer.
pub fn to_u64(v: &BigUint) -> Option<u64> {
    v.to_u64()
}
