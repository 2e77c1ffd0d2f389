//! C ABI for the exprecog library.
//!
//! Handles are opaque pointers created and freed here; every function
//! returns a status code and writes results through out-parameters. Strings
//! returned through `char**` are owned by the caller and must be released
//! with `exprecog_string_free`. Error details for the most recent failing
//! call on the current thread are available from
//! `exprecog_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use exprecog::error::Error;
use exprecog::expr::parse_expression;
use exprecog::hankel::{estimate_order, popoviciu_test, TestGrid};
use exprecog::lattice::generators_in_ball;
use exprecog::montel::{montel_verify, Conclusion, MontelHypothesis};
use exprecog::oracle::FunctionOracle;
use exprecog::recurrence::{recover_1d, RecoveryConfig, RecoveryOutcome};
use exprecog::report::{ModelJson, WindowJson};
use exprecog::samples::load_samples_json;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpRecogStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments violate a precondition (bad dimension, tolerance, …).
    InvalidArgument = 2,
    /// Expression or sample text failed to parse.
    ParseError = 3,
    /// Evaluation failed (off-lattice query, non-finite values, …).
    EvaluationError = 4,
    /// An unexpected internal failure; details in the last error message.
    InternalError = 5,
}

/// Opaque oracle handle.
pub struct ExpRecogOracle {
    inner: FunctionOracle,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> ExpRecogStatus {
    match err {
        Error::Parse { .. } => ExpRecogStatus::ParseError,
        Error::OracleDomain { .. }
        | Error::NonFiniteInput(_)
        | Error::DegenerateOrder { .. }
        | Error::DegenerateRoot { .. } => ExpRecogStatus::EvaluationError,
        Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::HypothesisViolation(_)
        | Error::MalformedInput { .. }
        | Error::Io { .. } => ExpRecogStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> ExpRecogStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Guard against panics crossing the FFI boundary.
fn guarded(body: impl FnOnce() -> ExpRecogStatus) -> ExpRecogStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            ExpRecogStatus::InternalError
        }
    }
}

unsafe fn c_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn out_string(text: String, out: *mut *mut c_char) -> ExpRecogStatus {
    match CString::new(text) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            ExpRecogStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL byte".into());
            ExpRecogStatus::InternalError
        }
    }
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn exprecog_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The most recent error message on this thread, or null. Free with
/// `exprecog_string_free`.
#[no_mangle]
pub extern "C" fn exprecog_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by an exprecog function and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn exprecog_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build an oracle from a closed-form expression in variables x1..xd.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exprecog_oracle_from_expression(
    text: *const c_char,
    dim: usize,
    out: *mut *mut ExpRecogOracle,
) -> ExpRecogStatus {
    guarded(|| {
        let Some(text) = c_str(text) else {
            set_error("expression text pointer is null or not UTF-8".into());
            return ExpRecogStatus::NullArgument;
        };
        if out.is_null() {
            set_error("output pointer is null".into());
            return ExpRecogStatus::NullArgument;
        }
        match parse_expression(text, dim) {
            Ok(expr) => {
                let handle = Box::new(ExpRecogOracle {
                    inner: FunctionOracle::from_expression(expr),
                });
                *out = Box::into_raw(handle);
                ExpRecogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Build an oracle from samples in the JSON schema
/// `{"dim": d, "points": [...], "values_re": [...], "values_im": [...]}`.
/// The points must form a complete uniform grid.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exprecog_oracle_from_samples_json(
    json: *const c_char,
    out: *mut *mut ExpRecogOracle,
) -> ExpRecogStatus {
    guarded(|| {
        let Some(json) = c_str(json) else {
            set_error("sample JSON pointer is null or not UTF-8".into());
            return ExpRecogStatus::NullArgument;
        };
        if out.is_null() {
            set_error("output pointer is null".into());
            return ExpRecogStatus::NullArgument;
        }
        let samples = match load_samples_json(json) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match FunctionOracle::from_samples(&samples) {
            Ok(oracle) => {
                *out = Box::into_raw(Box::new(ExpRecogOracle { inner: oracle }));
                ExpRecogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `oracle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn exprecog_oracle_dim(oracle: *const ExpRecogOracle) -> usize {
    if oracle.is_null() {
        return 0;
    }
    (*oracle).inner.dim()
}

/// Evaluate the oracle at a point of `len` coordinates.
///
/// # Safety
/// `point` must reference `len` readable doubles; out pointers must be
/// valid; `oracle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn exprecog_oracle_eval(
    oracle: *const ExpRecogOracle,
    point: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ExpRecogStatus {
    guarded(|| {
        if oracle.is_null() || point.is_null() || out_re.is_null() || out_im.is_null() {
            set_error("null argument".into());
            return ExpRecogStatus::NullArgument;
        }
        let coords = std::slice::from_raw_parts(point, len);
        match (*oracle).inner.eval(coords) {
            Ok(value) => {
                *out_re = value.re;
                *out_im = value.im;
                ExpRecogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release an oracle handle.
///
/// # Safety
/// `oracle` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn exprecog_oracle_free(oracle: *mut ExpRecogOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Run the determinant vanishing test at the given order over a seeded
/// grid. Writes pass/fail and, when `out_json` is non-null, a JSON report.
///
/// # Safety
/// `oracle` must be a live handle; `out_pass` must be valid; `out_json`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn exprecog_check(
    oracle: *const ExpRecogOracle,
    order: usize,
    tol: f64,
    grid_size: usize,
    seed: u64,
    out_pass: *mut bool,
    out_json: *mut *mut c_char,
) -> ExpRecogStatus {
    guarded(|| {
        if oracle.is_null() || out_pass.is_null() {
            set_error("null argument".into());
            return ExpRecogStatus::NullArgument;
        }
        let f = &(*oracle).inner;
        let grid = match TestGrid::for_oracle(f, order, seed, tol, grid_size) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let report = match popoviciu_test(f, order, &grid) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        *out_pass = report.pass;
        if out_json.is_null() {
            return ExpRecogStatus::Ok;
        }
        let body = serde_json::json!({
            "order": order,
            "pass": report.pass,
            "windows_tested": report.windows_tested,
            "worst_magnitude": report.worst_magnitude,
            "worst_window": WindowJson::from(&report.worst_window),
        });
        out_string(body.to_string(), out_json)
    })
}

/// Find the smallest passing order up to `n_max`. `*out_found` reports
/// whether one exists; `*out_order` is meaningful only when found.
///
/// # Safety
/// `oracle` must be a live handle; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn exprecog_estimate_order(
    oracle: *const ExpRecogOracle,
    n_max: usize,
    tol: f64,
    grid_size: usize,
    seed: u64,
    out_found: *mut bool,
    out_order: *mut usize,
) -> ExpRecogStatus {
    guarded(|| {
        if oracle.is_null() || out_found.is_null() || out_order.is_null() {
            set_error("null argument".into());
            return ExpRecogStatus::NullArgument;
        }
        let f = &(*oracle).inner;
        let grid = match TestGrid::for_oracle(f, n_max, seed, tol, grid_size) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        match estimate_order(f, n_max, &grid) {
            Ok(estimate) => {
                *out_found = estimate.order.is_some();
                *out_order = estimate.order.unwrap_or(0);
                ExpRecogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Recover a 1-D exponential polynomial model. Writes whether a model was
/// recovered and, when `out_json` is non-null, a JSON report with the model
/// or the failing stage.
///
/// # Safety
/// `oracle` must be a live 1-D handle; `out_recovered` must be valid;
/// `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn exprecog_recover_1d(
    oracle: *const ExpRecogOracle,
    n_max: usize,
    accept_tol: f64,
    seed: u64,
    out_recovered: *mut bool,
    out_json: *mut *mut c_char,
) -> ExpRecogStatus {
    guarded(|| {
        if oracle.is_null() || out_recovered.is_null() {
            set_error("null argument".into());
            return ExpRecogStatus::NullArgument;
        }
        let f = &(*oracle).inner;
        let config = RecoveryConfig { accept_tol, seed, ..RecoveryConfig::default() };
        let outcome = match recover_1d(f, n_max.max(1), &config) {
            Ok(o) => o,
            Err(e) => return fail(e),
        };
        let body = match &outcome {
            RecoveryOutcome::Recovered(rec) => {
                *out_recovered = true;
                let model = match ModelJson::from_exppoly_1d(&rec.model) {
                    Ok(m) => m,
                    Err(e) => return fail(e),
                };
                serde_json::json!({
                    "status": "recovered",
                    "order": rec.order,
                    "fit_residual": rec.fit_residual,
                    "aliasing_resolved": rec.aliasing_resolved,
                    "conditioning_warning": rec.conditioning_warning,
                    "model": model,
                })
            }
            RecoveryOutcome::NotExponentialPolynomial { stage, detail } => {
                *out_recovered = false;
                serde_json::json!({
                    "status": "not-exponential-polynomial",
                    "stage": stage.as_str(),
                    "detail": detail,
                })
            }
        };
        if out_json.is_null() {
            return ExpRecogStatus::Ok;
        }
        out_string(body.to_string(), out_json)
    })
}

/// Verify the finite span conditions at dense-subgroup generators drawn
/// from the ball of the given radius around the origin. `*out_certified`
/// is true only when every generator passes.
///
/// # Safety
/// `oracle` must be a live handle; `out_certified` must be valid;
/// `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn exprecog_montel_certify(
    oracle: *const ExpRecogOracle,
    order: usize,
    radius: f64,
    tol: f64,
    seed: u64,
    out_certified: *mut bool,
    out_json: *mut *mut c_char,
) -> ExpRecogStatus {
    guarded(|| {
        if oracle.is_null() || out_certified.is_null() {
            set_error("null argument".into());
            return ExpRecogStatus::NullArgument;
        }
        let f = &(*oracle).inner;
        let center = vec![0.0; f.dim()];
        let generators = match generators_in_ball(&center, radius) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let hyp = match MontelHypothesis::with_default_grid(generators, order.max(1), seed, tol)
        {
            Ok(h) => h,
            Err(e) => return fail(e),
        };
        let report = match montel_verify(f, &hyp) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        *out_certified = report.conclusion == Conclusion::CertifiedExponentialPolynomial;
        if out_json.is_null() {
            return ExpRecogStatus::Ok;
        }
        let body = serde_json::json!({
            "conclusion": report.conclusion.as_str(),
            "per_generator": report.per_generator.iter().map(|g| serde_json::json!({
                "generator": g.generator,
                "order": g.order,
                "observed_rank": g.observed_rank,
                "pass": g.pass,
            })).collect::<Vec<_>>(),
        });
        out_string(body.to_string(), out_json)
    })
}
