//! C ABI over `dualcert`.
//!
//! Cones and solve results are opaque handles owned by the caller and released with
//! the matching `*_free` function. Rationals cross the boundary as `"p/q"` strings.
//! Every entry point returns a [`DcStatus`]; on failure [`dc_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dualcert::cone::{build_interval_cone, build_interval_cone_odd, Basis, ConeFile, ConeOperator};
use dualcert::field::{format_rational, parse_rational, Field, Rational};
use dualcert::rational::{verify_exact, Verdict};
use dualcert::solver::{solve, SolveResult, SolveStatus, SolverConfig};
use dualcert::Error;

/// Status codes returned by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    /// The certificate does not certify the bound.
    Rejected = 1,
    InvalidArgument = 2,
    /// The solver stopped early; the result holds the last certified pair.
    Partial = 3,
    NumericFailure = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Polynomial basis of a built-in interval cone.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcBasis {
    Monomial = 0,
    Chebyshev = 1,
}

/// Opaque cone handle.
pub struct DcCone {
    op: ConeOperator,
}

/// Opaque solve result.
pub struct DcSolveResult {
    res: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> DcStatus {
    match e {
        Error::NumericFailure(_) | Error::SingularHessian | Error::MaxIterations(_) => DcStatus::NumericFailure,
        Error::NotCertified => DcStatus::Rejected,
        _ => DcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<DcStatus, DcStatus>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) | Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            DcStatus::Panic
        }
    }
}

fn fail(e: Error) -> DcStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, DcStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(DcStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        DcStatus::InvalidArgument
    })
}

unsafe fn rational_arg(p: *const c_char) -> Result<Rational, DcStatus> {
    parse_rational(str_arg(p)?).map_err(fail)
}

unsafe fn rational_array(p: *const *const c_char, n: usize) -> Result<Vec<Rational>, DcStatus> {
    if p.is_null() && n > 0 {
        set_error("null array argument");
        return Err(DcStatus::NullPointer);
    }
    (0..n).map(|i| rational_arg(*p.add(i))).collect()
}

unsafe fn cone_ref<'a>(cone: *const DcCone) -> Result<&'a DcCone, DcStatus> {
    cone.as_ref().ok_or_else(|| {
        set_error("null cone handle");
        DcStatus::NullPointer
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the cone of polynomials nonnegative on [−1, 1] of degree 2d (`odd` = 0) or
/// 2d + 1 (`odd` ≠ 0).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_cone_interval(d: u32, basis: DcBasis, odd: i32, out: *mut *mut DcCone) -> DcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return Err(DcStatus::NullPointer);
        }
        let basis = match basis {
            DcBasis::Monomial => Basis::Monomial,
            DcBasis::Chebyshev => Basis::Chebyshev,
        };
        let op = if odd != 0 {
            build_interval_cone_odd(d as usize, basis)
        } else {
            build_interval_cone(d as usize, basis)
        }
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(DcCone { op }));
        Ok(DcStatus::Ok)
    })
}

/// Parses a cone from the JSON cone-file format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_cone_from_json(json: *const c_char, out: *mut *mut DcCone) -> DcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return Err(DcStatus::NullPointer);
        }
        let text = str_arg(json)?;
        let file: ConeFile = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        let op = file.into_operator().map_err(fail)?;
        *out = Box::into_raw(Box::new(DcCone { op }));
        Ok(DcStatus::Ok)
    })
}

/// # Safety
/// `cone` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dc_cone_free(cone: *mut DcCone) {
    if !cone.is_null() {
        drop(Box::from_raw(cone));
    }
}

/// Coefficient count U of the cone, or 0 for a null handle.
///
/// # Safety
/// `cone` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_cone_dim(cone: *const DcCone) -> usize {
    cone.as_ref().map_or(0, |c| c.op.dim())
}

/// Checks exactly whether `x` certifies t − c·1. Returns `Ok` or `Rejected`.
///
/// # Safety
/// `t` and `x` must point to `n` NUL-terminated strings each; `c` must be one.
#[no_mangle]
pub unsafe extern "C" fn dc_verify(
    cone: *const DcCone,
    t: *const *const c_char,
    c: *const c_char,
    x: *const *const c_char,
    n: usize,
) -> DcStatus {
    guard(|| {
        let cone = cone_ref(cone)?;
        let t = rational_array(t, n)?;
        let x = rational_array(x, n)?;
        let c = rational_arg(c)?;
        match verify_exact(&cone.op, &t, &c, &x).map_err(fail)? {
            Verdict::Certified => Ok(DcStatus::Ok),
            Verdict::Rejected(r) => {
                set_error(format!("rejected: {r}"));
                Ok(DcStatus::Rejected)
            }
        }
    })
}

/// Runs the bound iteration with radius 1/4 and automatic constants. On `Ok` or
/// `Partial`, `*out` receives a result handle.
///
/// # Safety
/// `t` must point to `n` NUL-terminated strings and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dc_solve(
    cone: *const DcCone,
    t: *const *const c_char,
    n: usize,
    epsilon: f64,
    max_iters: usize,
    out: *mut *mut DcSolveResult,
) -> DcStatus {
    guard(|| {
        let cone = cone_ref(cone)?;
        if out.is_null() {
            set_error("null output pointer");
            return Err(DcStatus::NullPointer);
        }
        let t = rational_array(t, n)?;
        let config = SolverConfig {
            epsilon,
            max_iters: if max_iters == 0 { SolverConfig::default().max_iters } else { max_iters },
            ..SolverConfig::default()
        };
        match solve(&cone.op, &t, &config) {
            Ok(res) => {
                *out = Box::into_raw(Box::new(DcSolveResult { res }));
                Ok(DcStatus::Ok)
            }
            Err(p) => {
                let status = fail(p.error);
                match p.partial {
                    Some(res) => {
                        *out = Box::into_raw(Box::new(DcSolveResult { res }));
                        Ok(DcStatus::Partial)
                    }
                    None => Err(status),
                }
            }
        }
    })
}

/// # Safety
/// `res` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dc_result_free(res: *mut DcSolveResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// The certified bound as a newly allocated `"p/q"` string (free with `dc_string_free`).
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_result_bound(res: *const DcSolveResult) -> *mut c_char {
    res.as_ref().map_or(ptr::null_mut(), |r| into_c_string(format_rational(&r.res.c)))
}

/// The certified bound rounded to a double, NaN for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_result_bound_f64(res: *const DcSolveResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.res.c.to_f64())
}

/// Entry `i` of the certificate as a newly allocated string, or null when out of range.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_result_certificate(res: *const DcSolveResult, i: usize) -> *mut c_char {
    res.as_ref()
        .and_then(|r| r.res.x.get(i))
        .map_or(ptr::null_mut(), |q| into_c_string(format_rational(q)))
}

/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_result_iterations(res: *const DcSolveResult) -> usize {
    res.as_ref().map_or(0, |r| r.res.iterations)
}

/// 1 when the stopping rule guarantees the bound is within ε of the optimum.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_result_gap_guarantee(res: *const DcSolveResult) -> i32 {
    res.as_ref().map_or(0, |r| i32::from(r.res.gap_guarantee && r.res.status == SolveStatus::Converged))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::NotCertified), DcStatus::Rejected);
        assert_eq!(status_of(&Error::SingularHessian), DcStatus::NumericFailure);
        assert_eq!(guard(|| panic!("boom")), DcStatus::Panic);
        let msg = unsafe { CStr::from_ptr(dc_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn null_handles_are_inert() {
        unsafe {
            dc_cone_free(ptr::null_mut());
            dc_result_free(ptr::null_mut());
            dc_string_free(ptr::null_mut());
            assert!(dc_result_bound(ptr::null()).is_null());
            assert!(dc_result_bound_f64(ptr::null()).is_nan());
            assert_eq!(dc_result_gap_guarantee(ptr::null()), 0);
        }
    }
}
