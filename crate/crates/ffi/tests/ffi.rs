use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dualcert_ffi::*;

fn cstrings(v: &[&str]) -> Vec<CString> {
    v.iter().map(|s| CString::new(*s).unwrap()).collect()
}

fn ptrs(v: &[CString]) -> Vec<*const c_char> {
    v.iter().map(|s| s.as_ptr()).collect()
}

fn last_error() -> String {
    let p = dc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn example_cone() -> *mut DcCone {
    let mut cone = ptr::null_mut();
    let st = unsafe { dc_cone_interval(2, DcBasis::Monomial, 0, &mut cone) };
    assert_eq!(st, DcStatus::Ok);
    cone
}

#[test]
fn verify_example_certificate() {
    let cone = example_cone();
    assert_eq!(unsafe { dc_cone_dim(cone) }, 5);
    let t = cstrings(&["1", "-1", "1", "1", "-1"]);
    let x = cstrings(&["5", "0", "5/2", "0", "15/8"]);
    let zero = CString::new("0").unwrap();
    let st = unsafe { dc_verify(cone, ptrs(&t).as_ptr(), zero.as_ptr(), ptrs(&x).as_ptr(), 5) };
    assert_eq!(st, DcStatus::Ok);

    let high = CString::new("3/4").unwrap();
    let st = unsafe { dc_verify(cone, ptrs(&t).as_ptr(), high.as_ptr(), ptrs(&x).as_ptr(), 5) };
    assert_eq!(st, DcStatus::Rejected);
    assert!(last_error().contains("not-certified"));
    unsafe { dc_cone_free(cone) };
}

#[test]
fn solve_through_handles() {
    let cone = example_cone();
    let t = cstrings(&["1", "-1", "1", "1", "-1"]);
    let mut res = ptr::null_mut();
    let st = unsafe { dc_solve(cone, ptrs(&t).as_ptr(), 5, 1e-7, 0, &mut res) };
    assert_eq!(st, DcStatus::Ok);
    let c = unsafe { dc_result_bound_f64(res) };
    let cstar = (619.0 - 51.0 * 17f64.sqrt()) / 512.0;
    assert!(c <= cstar && cstar - c <= 1e-7);
    assert_eq!(unsafe { dc_result_gap_guarantee(res) }, 1);
    assert!(unsafe { dc_result_iterations(res) } > 0);

    // the returned pair verifies through the same interface
    let bound = unsafe { dc_result_bound(res) };
    let cert: Vec<*mut c_char> = (0..5).map(|i| unsafe { dc_result_certificate(res, i) }).collect();
    assert!(unsafe { dc_result_certificate(res, 5) }.is_null());
    let cert_const: Vec<*const c_char> = cert.iter().map(|p| *p as *const c_char).collect();
    let st = unsafe { dc_verify(cone, ptrs(&t).as_ptr(), bound, cert_const.as_ptr(), 5) };
    assert_eq!(st, DcStatus::Ok);
    unsafe {
        dc_string_free(bound);
        for p in cert {
            dc_string_free(p);
        }
        dc_result_free(res);
        dc_cone_free(cone);
    }
}

#[test]
fn partial_result_on_iteration_cap() {
    let cone = example_cone();
    let t = cstrings(&["1", "-1", "1", "1", "-1"]);
    let mut res = ptr::null_mut();
    let st = unsafe { dc_solve(cone, ptrs(&t).as_ptr(), 5, 1e-7, 3, &mut res) };
    assert_eq!(st, DcStatus::Partial);
    assert!(!res.is_null());
    assert_eq!(unsafe { dc_result_iterations(res) }, 3);
    assert_eq!(unsafe { dc_result_gap_guarantee(res) }, 0);
    unsafe {
        dc_result_free(res);
        dc_cone_free(cone);
    }
}

#[test]
fn errors_are_reported() {
    let mut cone = ptr::null_mut();
    let st = unsafe { dc_cone_interval(0, DcBasis::Chebyshev, 0, &mut cone) };
    assert_eq!(st, DcStatus::InvalidArgument);
    assert!(last_error().contains("degree"));
    assert!(cone.is_null());

    let st = unsafe { dc_cone_interval(1, DcBasis::Chebyshev, 0, ptr::null_mut()) };
    assert_eq!(st, DcStatus::NullPointer);

    let cone = example_cone();
    let t = cstrings(&["1", "x", "1", "1", "-1"]);
    let x = cstrings(&["5", "0", "5/2", "0", "15/8"]);
    let zero = CString::new("0").unwrap();
    let st = unsafe { dc_verify(cone, ptrs(&t).as_ptr(), zero.as_ptr(), ptrs(&x).as_ptr(), 5) };
    assert_eq!(st, DcStatus::InvalidArgument);
    let st = unsafe { dc_verify(cone, ptrs(&t).as_ptr(), zero.as_ptr(), ptrs(&x).as_ptr(), 4) };
    assert_eq!(st, DcStatus::InvalidArgument);
    let st = unsafe { dc_verify(ptr::null(), ptrs(&t).as_ptr(), zero.as_ptr(), ptrs(&x).as_ptr(), 5) };
    assert_eq!(st, DcStatus::NullPointer);
    unsafe { dc_cone_free(cone) };
    assert_eq!(unsafe { dc_cone_dim(ptr::null()) }, 0);
}

#[test]
fn cone_from_json() {
    // Λ(x) = [[x0, x1], [x1, x2]]
    let json = r#"{"U":3,"block_dims":[2],"entries":[
        {"block":0,"row":0,"col":0,"coeff_index":0,"value_num":1,"value_den":1},
        {"block":0,"row":0,"col":1,"coeff_index":1,"value_num":1,"value_den":1},
        {"block":0,"row":1,"col":0,"coeff_index":1,"value_num":1,"value_den":1},
        {"block":0,"row":1,"col":1,"coeff_index":2,"value_num":1,"value_den":1}],
        "one":["1","0","1"]}"#;
    let json = CString::new(json).unwrap();
    let mut cone = ptr::null_mut();
    assert_eq!(unsafe { dc_cone_from_json(json.as_ptr(), &mut cone) }, DcStatus::Ok);
    assert_eq!(unsafe { dc_cone_dim(cone) }, 3);
    unsafe { dc_cone_free(cone) };

    let bad = CString::new("{").unwrap();
    let mut cone = ptr::null_mut();
    assert_eq!(unsafe { dc_cone_from_json(bad.as_ptr(), &mut cone) }, DcStatus::InvalidArgument);
}

#[test]
fn header_declares_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dualcert.h")).unwrap();
    for name in [
        "dc_last_error",
        "dc_string_free",
        "dc_cone_interval",
        "dc_cone_from_json",
        "dc_cone_free",
        "dc_cone_dim",
        "dc_verify",
        "dc_solve",
        "dc_result_free",
        "dc_result_bound",
        "dc_result_bound_f64",
        "dc_result_certificate",
        "dc_result_iterations",
        "dc_result_gap_guarantee",
        "typedef struct DcCone DcCone",
        "DC_STATUS_PARTIAL = 3",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"dualcert.h\"\nint probe(void) { DcCone *c = 0; return (int)dc_cone_dim(c) + DC_STATUS_OK; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = match std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
    {
        Ok(o) => o,
        Err(_) => {
            eprintln!("no C compiler found; skipping");
            return;
        }
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
