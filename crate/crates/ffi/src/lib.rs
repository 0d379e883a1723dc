//! C ABI over the `prank` library.
//!
//! Conventions:
//! - every function returns a [`PrankStatus`]; results go through out-pointers;
//! - handles (`PrankField`, `PrankTensor`, `PrankCertificate`) are opaque and
//!   released with their `_free` function;
//! - strings returned through `char **` are owned by the caller and released
//!   with [`prank_string_free`];
//! - on failure, [`prank_last_error`] returns the message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prank::bounds::{
    displayed_corner_sum, monomials_binomial_report, monomials_chernoff_report, monomials_exact_report,
    precise_corner_bound, right_angle_bound, simplified_corner_bound, BoundReport,
};
use prank::cli::{builtin_tensor, Failure};
use prank::constructions::{build_jk_partition_decomposition, build_thm1_slice_decomposition, BuiltDecomposition};
use prank::corners::{find_corner, max_corner_free, PointSet, SearchConfig, SearchMode};
use prank::field::{Fe, FqVector, GaloisField};
use prank::mpoly::DEFAULT_MONOMIAL_BUDGET;
use prank::tensor::{
    diagonal_lower_bound, verify_decomposition, Decomposition, DenseTensor, DiagonalBound, TensorJson, Verification,
};

/// Result codes. Values 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrankStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Mismatch = 3,
    FamilyViolation = 4,
    BudgetExceeded = 5,
    MalformedInput = 6,
    Panic = 7,
}

/// A finite field GF(q).
pub struct PrankField(GaloisField);

/// A dense tensor over a finite field.
pub struct PrankTensor(DenseTensor);

/// A partition-rank certificate.
pub struct PrankCertificate(Decomposition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Error(PrankStatus, String);

impl From<Failure> for Error {
    fn from(f: Failure) -> Self {
        let status = match f.code {
            3 => PrankStatus::Mismatch,
            4 => PrankStatus::FamilyViolation,
            5 => PrankStatus::BudgetExceeded,
            _ => PrankStatus::InvalidArgument,
        };
        Error(status, f.message)
    }
}

macro_rules! impl_from_via_failure {
    ($($t:ty),*) => {$(
        impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Failure::from(e).into()
            }
        }
    )*};
}

impl_from_via_failure!(
    prank::field::FieldError,
    prank::bounds::BoundError,
    prank::tensor::TensorError,
    prank::constructions::ConstructionError,
    prank::corners::CornerError
);

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error(PrankStatus::MalformedInput, format!("malformed JSON: {e}"))
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error(PrankStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> PrankStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PrankStatus::Ok
        }
        Ok(Err(Error(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PrankStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Error> {
    p.as_ref().ok_or(Error(PrankStatus::NullPointer, "null handle".into()))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Error> {
    p.as_mut().ok_or(Error(PrankStatus::NullPointer, "null output pointer".into()))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error(PrankStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error(PrankStatus::MalformedInput, "string is not UTF-8".into()))
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn write_json(dst: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), Error> {
    let slot = out(dst)?;
    *slot = give_string(serde_json::to_string(v)?);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn prank_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn prank_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn prank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- fields

/// # Safety
/// `out_field` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_field_new(q: u64, out_field: *mut *mut PrankField) -> PrankStatus {
    guard(|| {
        let slot = out(out_field)?;
        *slot = Box::into_raw(Box::new(PrankField(GaloisField::with_order(q)?)));
        Ok(())
    })
}

/// # Safety
/// `field` must be NULL or a handle from `prank_field_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn prank_field_free(field: *mut PrankField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn prank_field_order(field: *const PrankField) -> u32 {
    field.as_ref().map_or(0, |f| f.0.order())
}

/// # Safety
/// `field` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn prank_field_characteristic(field: *const PrankField) -> u32 {
    field.as_ref().map_or(0, |f| f.0.characteristic())
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrankFieldOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    /// Ignores `b`; fails on zero.
    Inv = 3,
}

/// Applies `op` to element codes `a` and `b`.
///
/// # Safety
/// `field` must be a valid handle and `out_code` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_field_op(
    field: *const PrankField,
    op: PrankFieldOp,
    a: u32,
    b: u32,
    out_code: *mut u32,
) -> PrankStatus {
    guard(|| {
        let f = &deref(field)?.0;
        let slot = out(out_code)?;
        let x = f.element(u64::from(a))?;
        let y = f.element(u64::from(b))?;
        let r = match op {
            PrankFieldOp::Add => f.add(x, y),
            PrankFieldOp::Sub => f.sub(x, y),
            PrankFieldOp::Mul => f.mul(x, y),
            PrankFieldOp::Inv => f.inv(x).ok_or_else(|| invalid("zero has no inverse"))?,
        };
        *slot = r.code();
        Ok(())
    })
}

// ---------------------------------------------------------------- bounds

fn emit_reports(reports: Vec<BoundReport>, dst: *mut *mut c_char) -> Result<(), Error> {
    unsafe {
        if reports.len() == 1 {
            write_json(dst, &reports[0])
        } else {
            write_json(dst, &reports)
        }
    }
}

/// Monomial count as a JSON report. `method` is "exact", "binomial" or "chernoff".
///
/// # Safety
/// `method` must be a NUL-terminated string and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_bounds_monomials(
    q: u64,
    n: u64,
    d: f64,
    method: *const c_char,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    guard(|| {
        if !d.is_finite() || d < 0.0 {
            return Err(invalid("d must be a non-negative number"));
        }
        let report = match read_str(method)? {
            "exact" => monomials_exact_report(q, n, d.floor() as u64)?,
            "binomial" => monomials_binomial_report(q, n, d.floor() as u64),
            "chernoff" => monomials_chernoff_report(q, n, d)?,
            other => return Err(invalid(format!("unknown method {other:?}"))),
        };
        emit_reports(vec![report], out_json)
    })
}

/// Right-angle bound as a JSON report.
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_bounds_right_angle(q: u64, n: u64, out_json: *mut *mut c_char) -> PrankStatus {
    guard(|| emit_reports(vec![right_angle_bound(q, n)?], out_json))
}

/// Corner bounds. `mode` is "simplified", "precise", "displayed" (one JSON
/// report) or "all" (a JSON array).
///
/// # Safety
/// `mode` must be a NUL-terminated string and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_bounds_corner(
    k: u64,
    q: u64,
    n: u64,
    mode: *const c_char,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    guard(|| {
        let reports = match read_str(mode)? {
            "simplified" => vec![simplified_corner_bound(k, q, n)?],
            "precise" => vec![precise_corner_bound(k, q, n)?],
            "displayed" => vec![displayed_corner_sum(k, q, n)?],
            "all" => {
                vec![precise_corner_bound(k, q, n)?, displayed_corner_sum(k, q, n)?, simplified_corner_bound(k, q, n)?]
            }
            other => return Err(invalid(format!("unknown mode {other:?}"))),
        };
        emit_reports(reports, out_json)
    })
}

// ---------------------------------------------------------------- tensors

/// Built-in tensor: "dxy-dzw", "diag", "hk", "right-angle-f", "fk", "jk".
/// `k < 0` selects the default arity. For corner tensors `axis_size` must be
/// a power of `q`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_tensor` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_builtin(
    name: *const c_char,
    q: u64,
    k: i64,
    axis_size: usize,
    out_tensor: *mut *mut PrankTensor,
) -> PrankStatus {
    guard(|| {
        let slot = out(out_tensor)?;
        let field = GaloisField::with_order(q)?;
        let k = usize::try_from(k).ok();
        let t = builtin_tensor(read_str(name)?, &field, k, axis_size)?;
        *slot = Box::into_raw(Box::new(PrankTensor(t)));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out_tensor` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_from_json(json: *const c_char, out_tensor: *mut *mut PrankTensor) -> PrankStatus {
    guard(|| {
        let slot = out(out_tensor)?;
        let parsed: TensorJson = serde_json::from_str(read_str(json)?)?;
        *slot = Box::into_raw(Box::new(PrankTensor(DenseTensor::from_json(&parsed)?)));
        Ok(())
    })
}

/// # Safety
/// `tensor` must be a valid handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_to_json(tensor: *const PrankTensor, out_json: *mut *mut c_char) -> PrankStatus {
    guard(|| write_json(out_json, &deref(tensor)?.0.to_json()))
}

/// # Safety
/// `tensor` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_free(tensor: *mut PrankTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// # Safety
/// `tensor` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_arity(tensor: *const PrankTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.0.arity())
}

/// # Safety
/// `tensor` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_axis_size(tensor: *const PrankTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.0.axis_size())
}

/// Entry at `tuple` (length = arity) as an element code.
///
/// # Safety
/// `tuple` must point to `len` values and `out_code` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_get(
    tensor: *const PrankTensor,
    tuple: *const usize,
    len: usize,
    out_code: *mut u32,
) -> PrankStatus {
    guard(|| {
        let t = &deref(tensor)?.0;
        let slot = out(out_code)?;
        if tuple.is_null() {
            return Err(Error(PrankStatus::NullPointer, "null tuple".into()));
        }
        let tuple = std::slice::from_raw_parts(tuple, len);
        if len != t.arity() || tuple.iter().any(|&x| x >= t.axis_size()) {
            return Err(invalid("tuple does not index the tensor"));
        }
        *slot = t.get(tuple).code();
        Ok(())
    })
}

/// Number of non-zero diagonal entries, or -1 when the tensor is not diagonal.
///
/// # Safety
/// `tensor` must be a valid handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_tensor_diagonal_bound(tensor: *const PrankTensor, out_count: *mut i64) -> PrankStatus {
    guard(|| {
        let t = &deref(tensor)?.0;
        let slot = out(out_count)?;
        *slot = match diagonal_lower_bound(t) {
            DiagonalBound::Diagonal(c) => c as i64,
            DiagonalBound::NotDiagonal { .. } => -1,
        };
        Ok(())
    })
}

// ---------------------------------------------------------------- certificates

/// # Safety
/// `json` must be a NUL-terminated string and `out_cert` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_certificate_from_json(
    json: *const c_char,
    out_cert: *mut *mut PrankCertificate,
) -> PrankStatus {
    guard(|| {
        let slot = out(out_cert)?;
        let dec = Decomposition::from_json_str(read_str(json)?).map_err(|e| match e {
            prank::tensor::TensorError::Parse(m) => Error(PrankStatus::MalformedInput, m),
            other => other.into(),
        })?;
        *slot = Box::into_raw(Box::new(PrankCertificate(dec)));
        Ok(())
    })
}

/// # Safety
/// `cert` must be a valid handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_certificate_to_json(
    cert: *const PrankCertificate,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    guard(|| write_json(out_json, &deref(cert)?.0.to_json()))
}

/// # Safety
/// `cert` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn prank_certificate_free(cert: *mut PrankCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `cert` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn prank_certificate_term_count(cert: *const PrankCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.terms.len())
}

/// Checks `cert` against `target` pointwise. Returns `Ok`, `Mismatch` or
/// `FamilyViolation`. When `out_json` is non-NULL it receives the outcome,
/// including the first mismatching tuple.
///
/// # Safety
/// Handles must be valid; `out_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn prank_certificate_verify(
    cert: *const PrankCertificate,
    target: *const PrankTensor,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    let mut mismatch = false;
    let status = guard(|| {
        let v = verify_decomposition(&deref(cert)?.0, &deref(target)?.0)?;
        let doc = match &v {
            Verification::Verified { terms } => serde_json::json!({ "verified": true, "terms": terms }),
            Verification::Mismatch { tuple, expected, found } => serde_json::json!({
                "verified": false,
                "mismatch": { "tuple": tuple, "expected": expected, "found": found },
            }),
        };
        if !out_json.is_null() {
            write_json(out_json, &doc)?;
        }
        mismatch = !v.is_verified();
        Ok(())
    });
    if status == PrankStatus::Ok && mismatch {
        set_error("certificate does not match the target");
        return PrankStatus::Mismatch;
    }
    status
}

unsafe fn finish_built(
    built: BuiltDecomposition,
    out_cert: *mut *mut PrankCertificate,
    out_report: *mut *mut c_char,
) -> Result<(), Error> {
    let slot = out(out_cert)?;
    if !out_report.is_null() {
        write_json(out_report, &built.report)?;
    }
    if !built.verification.is_verified() {
        return Err(Error(PrankStatus::Mismatch, "built certificate failed verification".into()));
    }
    *slot = Box::into_raw(Box::new(PrankCertificate(built.decomposition)));
    Ok(())
}

/// Slice-rank certificate for the right-angle tensor on `(F_q^n)^3`.
/// `out_report` may be NULL.
///
/// # Safety
/// `out_cert` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_decompose_right_angle(
    q: u64,
    n: usize,
    out_cert: *mut *mut PrankCertificate,
    out_report: *mut *mut c_char,
) -> PrankStatus {
    guard(|| {
        let field = GaloisField::with_order(q)?;
        let built = build_thm1_slice_decomposition(&field, n, DEFAULT_MONOMIAL_BUDGET)?;
        finish_built(built, out_cert, out_report)
    })
}

/// Partition-rank certificate for J_k on `(F_q^n)^(k+1)`. `out_report` may be NULL.
///
/// # Safety
/// `out_cert` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_decompose_jk(
    k: usize,
    q: u64,
    n: usize,
    out_cert: *mut *mut PrankCertificate,
    out_report: *mut *mut c_char,
) -> PrankStatus {
    guard(|| {
        let field = GaloisField::with_order(q)?;
        let built = build_jk_partition_decomposition(&field, k, n, DEFAULT_MONOMIAL_BUDGET)?;
        finish_built(built, out_cert, out_report)
    })
}

// ---------------------------------------------------------------- corners

/// First k-right corner among `npoints` points of `F_q^n`, given as
/// row-major coordinate codes (`npoints * n` values). Writes the witness as
/// JSON, or `null` when the set is corner-free.
///
/// # Safety
/// `codes` must point to `npoints * n` values and `out_json` be valid.
#[no_mangle]
pub unsafe extern "C" fn prank_find_corner(
    q: u64,
    n: usize,
    k: usize,
    codes: *const u32,
    npoints: usize,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    guard(|| {
        let field = GaloisField::with_order(q)?;
        let len = npoints.checked_mul(n).ok_or_else(|| invalid("point buffer too large"))?;
        let flat: &[u32] = if len == 0 {
            &[]
        } else if codes.is_null() {
            return Err(Error(PrankStatus::NullPointer, "null point buffer".into()));
        } else {
            std::slice::from_raw_parts(codes, len)
        };
        let pts = flat
            .chunks(n.max(1))
            .take(npoints)
            .map(|row| {
                let coords = row.iter().map(|&c| field.element(u64::from(c))).collect::<Result<Vec<Fe>, _>>()?;
                Ok(FqVector::from_elements(coords))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let set = PointSet::new(&field, n, pts)?;
        let witness = find_corner(&set, k)?;
        write_json(out_json, &witness.map(|w| w.to_json()))
    })
}

/// Largest corner-free subset search. `mode` is "exhaustive", "greedy" or
/// "random-restart"; `node_budget == 0` means unlimited. Returns
/// `BudgetExceeded` (with the result still written) when an exhaustive run is cut.
///
/// # Safety
/// `mode` must be a NUL-terminated string and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prank_max_corner_free(
    q: u64,
    n: usize,
    k: usize,
    mode: *const c_char,
    seed: u64,
    node_budget: u64,
    out_json: *mut *mut c_char,
) -> PrankStatus {
    let mut cut = false;
    let status = guard(|| {
        let field = GaloisField::with_order(q)?;
        let mode: SearchMode = read_str(mode)?.parse().map_err(invalid)?;
        let cfg =
            SearchConfig { node_budget: (node_budget > 0).then_some(node_budget), seed, ..SearchConfig::default() };
        let r = max_corner_free(&field, n, k, mode, &cfg)?;
        write_json(out_json, &r.to_json())?;
        cut = mode == SearchMode::Exhaustive && !r.optimal;
        Ok(())
    });
    if status == PrankStatus::Ok && cut {
        set_error("node budget exhausted before optimality was proved");
        return PrankStatus::BudgetExceeded;
    }
    status
}
