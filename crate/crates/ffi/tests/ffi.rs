use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use prank_ffi::*;
use serde_json::Value;

unsafe fn take(s: *mut c_char) -> Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    prank_string_free(s);
    v
}

fn last_error() -> String {
    let p = prank_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn field_handles() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(prank_field_new(8, &mut f), PrankStatus::Ok);
        assert_eq!(prank_field_order(f), 8);
        let mut r = 0;
        assert_eq!(prank_field_op(f, PrankFieldOp::Add, 3, 5, &mut r), PrankStatus::Ok);
        assert_eq!(r, 6);
        assert_eq!(prank_field_op(f, PrankFieldOp::Mul, 2, 4, &mut r), PrankStatus::Ok);
        let mut inv = 0;
        assert_eq!(prank_field_op(f, PrankFieldOp::Inv, r, 0, &mut inv), PrankStatus::Ok);
        assert_eq!(prank_field_op(f, PrankFieldOp::Mul, r, inv, &mut r), PrankStatus::Ok);
        assert_eq!(r, 1);
        assert_eq!(prank_field_op(f, PrankFieldOp::Add, 8, 0, &mut r), PrankStatus::InvalidArgument);
        prank_field_free(f);

        assert_eq!(prank_field_new(6, &mut f), PrankStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(prank_field_new(5, ptr::null_mut()), PrankStatus::NullPointer);
    }
}

#[test]
fn bounds_as_json() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(prank_bounds_right_angle(3, 4, &mut s), PrankStatus::Ok);
        assert_eq!(take(s)["value"], 42);
        let mode = CString::new("simplified").unwrap();
        assert_eq!(prank_bounds_corner(3, 5, 2, mode.as_ptr(), &mut s), PrankStatus::Ok);
        assert_eq!(take(s)["value"], 1980);
        let all = CString::new("all").unwrap();
        assert_eq!(prank_bounds_corner(3, 5, 1, all.as_ptr(), &mut s), PrankStatus::Ok);
        assert_eq!(take(s).as_array().unwrap().len(), 3);
        let m = CString::new("exact").unwrap();
        assert_eq!(prank_bounds_monomials(3, 2, 2.0, m.as_ptr(), &mut s), PrankStatus::Ok);
        assert_eq!(take(s)["value"], 6);
        assert_eq!(prank_bounds_right_angle(4, 1, &mut s), PrankStatus::InvalidArgument);
        assert!(last_error().contains("q must be odd"));
    }
}

#[test]
fn certificates_round_trip_and_verify() {
    unsafe {
        let mut cert = ptr::null_mut();
        let mut report = ptr::null_mut();
        assert_eq!(prank_decompose_right_angle(3, 1, &mut cert, &mut report), PrankStatus::Ok);
        assert_eq!(take(report)["verified"], true);
        let name = CString::new("right-angle-f").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(prank_tensor_builtin(name.as_ptr(), 3, -1, 3, &mut t), PrankStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(prank_certificate_verify(cert, t, &mut out), PrankStatus::Ok);
        assert_eq!(take(out)["verified"], true);

        let mut json = ptr::null_mut();
        assert_eq!(prank_certificate_to_json(cert, &mut json), PrankStatus::Ok);
        let mut doc = take(json);
        let entry = &mut doc["terms"][0]["factors"][0]["table"][0];
        *entry = Value::from((entry.as_u64().unwrap() + 1) % 3);
        let text = CString::new(doc.to_string()).unwrap();
        let mut bad = ptr::null_mut();
        assert_eq!(prank_certificate_from_json(text.as_ptr(), &mut bad), PrankStatus::Ok);
        assert_eq!(prank_certificate_verify(bad, t, &mut out), PrankStatus::Mismatch);
        assert!(take(out)["mismatch"]["tuple"].is_array());

        let broken = CString::new("{").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(prank_certificate_from_json(broken.as_ptr(), &mut none), PrankStatus::MalformedInput);

        let mut tj = ptr::null_mut();
        assert_eq!(prank_tensor_to_json(t, &mut tj), PrankStatus::Ok);
        let mut t2 = ptr::null_mut();
        assert_eq!(prank_tensor_from_json(tj, &mut t2), PrankStatus::Ok);
        prank_string_free(tj);
        assert_eq!(prank_tensor_arity(t2), 3);
        assert_eq!(prank_tensor_axis_size(t2), 3);

        prank_certificate_free(bad);
        prank_certificate_free(cert);
        prank_tensor_free(t);
        prank_tensor_free(t2);
    }
}

#[test]
fn family_violation_status() {
    let cert = r#"{"field":{"p":2,"r":1,"irreducible":[0,1]},"k":4,"axis_size":2,"family":"SLICE",
        "terms":[{"partition":[[0,1],[2,3]],"factors":[{"axes":[0,1],"table":[1,0,0,1]},{"axes":[2,3],"table":[1,0,0,1]}]}]}"#;
    unsafe {
        let text = CString::new(cert).unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(prank_certificate_from_json(text.as_ptr(), &mut c), PrankStatus::Ok);
        let name = CString::new("dxy-dzw").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(prank_tensor_builtin(name.as_ptr(), 2, -1, 2, &mut t), PrankStatus::Ok);
        let mut diag = 0;
        assert_eq!(prank_tensor_diagonal_bound(t, &mut diag), PrankStatus::Ok);
        assert_eq!(diag, -1);
        assert_eq!(prank_certificate_verify(c, t, ptr::null_mut()), PrankStatus::FamilyViolation);
        prank_certificate_free(c);
        prank_tensor_free(t);
    }
}

#[test]
fn corner_search() {
    unsafe {
        let mut s = ptr::null_mut();
        let pts = [0u32, 0, 1, 0, 2, 0];
        assert_eq!(prank_find_corner(5, 2, 2, pts.as_ptr(), 3, &mut s), PrankStatus::Ok);
        assert!(take(s).is_null());
        let dup = [0u32, 0, 0, 0];
        assert_eq!(prank_find_corner(5, 2, 2, dup.as_ptr(), 2, &mut s), PrankStatus::InvalidArgument);

        let mode = CString::new("exhaustive").unwrap();
        assert_eq!(prank_max_corner_free(3, 1, 2, mode.as_ptr(), 0, 0, &mut s), PrankStatus::Ok);
        let v = take(s);
        assert_eq!((v["size"].as_u64(), v["optimal"].as_bool()), (Some(3), Some(true)));
        assert_eq!(prank_max_corner_free(3, 2, 2, mode.as_ptr(), 0, 2, &mut s), PrankStatus::BudgetExceeded);
        assert_eq!(take(s)["optimal"], false);
    }
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_staticlib() {
    let lib = target_dir().join("libprank_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
