//! C ABI for the uqbound library: opaque handles, integer status codes,
//! and a thread-local last-error message. The header is generated into
//! `include/uqbound.h` at build time.
//!
//! Ownership rules: every `*_new`/`*_parse` output must be released with
//! the matching `*_free`; strings returned through `uq_*_csv` must be
//! released with `uq_string_free`. Handles are not thread-safe for
//! concurrent mutation but may be shared for concurrent reads.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_double, c_int};

use uqbound::cli::{ExperimentConfig, cmd_sweep};
use uqbound::distributions::Distribution;
use uqbound::riskbounds::{self, RiskConfig, Which};
use uqbound::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    NumericalError = 4,
    InvalidArgument = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> UqStatus {
    match err {
        Error::InvalidParameter(_) => UqStatus::InvalidArgument,
        Error::Config(_) | Error::Incompatible(_) | Error::Unsupported(_) => UqStatus::ConfigError,
        Error::Numerical(_) | Error::Model { .. } => UqStatus::NumericalError,
    }
}

fn fail(err: Error) -> UqStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Message for the most recent error on this thread, or null; the pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Opaque experiment configuration handle.
pub struct UqExperimentConfig {
    inner: ExperimentConfig,
}

/// Opaque risk-computation handle (performance measure + nominal rules).
pub struct UqRiskConfig {
    inner: RiskConfig,
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, UqStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(UqStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        UqStatus::InvalidUtf8
    })
}

fn which_from(index: c_int) -> Result<Which, UqStatus> {
    match index {
        0 => Ok(Which::Full),
        1 => Ok(Which::One),
        2 => Ok(Which::Two),
        other => {
            set_error(format!("integral selector must be 0, 1 or 2, got {other}"));
            Err(UqStatus::InvalidArgument)
        }
    }
}

/// Parse a JSON experiment configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uq_config_parse(
    json: *const c_char,
    out: *mut *mut UqExperimentConfig,
) -> UqStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return UqStatus::NullPointer;
    }
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match ExperimentConfig::from_json(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(UqExperimentConfig { inner: cfg }));
            UqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a configuration handle; a null pointer is a no-op.
///
/// # Safety
/// `cfg` must come from `uq_config_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uq_config_free(cfg: *mut UqExperimentConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Resolve the relative-entropy budget B of a configuration; fails when
/// the configuration carries none.
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_config_budget(
    cfg: *const UqExperimentConfig,
    out: *mut c_double,
) -> UqStatus {
    if cfg.is_null() || out.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    match (*cfg).inner.resolve_budget() {
        Ok(Some(b)) => {
            *out = b;
            UqStatus::Ok
        }
        Ok(None) => {
            set_error("configuration has no budget".into());
            UqStatus::ConfigError
        }
        Err(e) => fail(e),
    }
}

/// Build the risk-computation handle (surrogate plus quadrature rules).
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_risk_build(
    cfg: *const UqExperimentConfig,
    out: *mut *mut UqRiskConfig,
) -> UqStatus {
    if cfg.is_null() || out.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    match (*cfg).inner.build_risk_config() {
        Ok(risk) => {
            *out = Box::into_raw(Box::new(UqRiskConfig { inner: risk }));
            UqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a risk handle; a null pointer is a no-op.
///
/// # Safety
/// `risk` must come from `uq_risk_build` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uq_risk_free(risk: *mut UqRiskConfig) {
    if !risk.is_null() {
        drop(Box::from_raw(risk));
    }
}

/// Evaluate a risk-sensitive integral: `which` selects Lambda (0),
/// Lambda^1 (1) or Lambda^2 (2) at risk sensitivity `c`.
///
/// # Safety
/// `risk` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_lambda(
    risk: *const UqRiskConfig,
    which: c_int,
    c: c_double,
    out: *mut c_double,
) -> UqStatus {
    if risk.is_null() || out.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    let which = match which_from(which) {
        Ok(w) => w,
        Err(code) => return code,
    };
    match riskbounds::lambda(&(*risk).inner, which, c) {
        Ok(v) => {
            *out = v;
            UqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The ambiguity-set bound B/c + lambda.
#[no_mangle]
pub extern "C" fn uq_bound(b: c_double, c: c_double, lambda: c_double) -> c_double {
    riskbounds::bound(b, c, lambda)
}

/// Minimize B/c + Lambda_c^which. On success `*out_c_star` is the
/// minimizer and `*out_finite` is 1, or `*out_finite` is 0 when the
/// optimum is at c = infinity (then `*out_c_star` is not meaningful).
///
/// # Safety
/// `risk` and the three output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn uq_optimal_c(
    risk: *const UqRiskConfig,
    which: c_int,
    b: c_double,
    tol: c_double,
    out_c_star: *mut c_double,
    out_bound: *mut c_double,
    out_finite: *mut c_int,
) -> UqStatus {
    if risk.is_null() || out_c_star.is_null() || out_bound.is_null() || out_finite.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    let which = match which_from(which) {
        Ok(w) => w,
        Err(code) => return code,
    };
    match riskbounds::optimal_c(&(*risk).inner, which, b, tol) {
        Ok(res) => {
            *out_bound = res.bound_value;
            match res.c_star {
                Some(c) => {
                    *out_c_star = c;
                    *out_finite = 1;
                }
                None => {
                    *out_c_star = f64::INFINITY;
                    *out_finite = 0;
                }
            }
            UqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The c -> infinity limit of Lambda^1 for a uniform nominal epistemic
/// law supported on [y_lo, y_hi].
///
/// # Safety
/// `risk` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_lambda1_infinity(
    risk: *const UqRiskConfig,
    y_lo: c_double,
    y_hi: c_double,
    out: *mut c_double,
) -> UqStatus {
    if risk.is_null() || out.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    match riskbounds::lambda1_infinity(&(*risk).inner, y_lo, y_hi) {
        Ok(v) => {
            *out = v;
            UqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Relative entropy R(p || q) from two JSON distribution specs; the
/// closed form is used when available, otherwise the numerical oracle.
///
/// # Safety
/// `p_json`, `q_json` must be NUL-terminated strings; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn uq_relative_entropy(
    p_json: *const c_char,
    q_json: *const c_char,
    out: *mut c_double,
) -> UqStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return UqStatus::NullPointer;
    }
    let parse = |ptr| -> Result<Distribution, UqStatus> {
        let text = read_utf8(ptr)?;
        serde_json::from_str(text).map_err(|e| {
            set_error(format!("distribution spec: {e}"));
            UqStatus::ConfigError
        })
    };
    let p = match parse(p_json) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let q = match parse(q_json) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let value = match p.relative_entropy_closed(&q) {
        Ok(v) => v,
        Err(Error::Incompatible(_)) | Err(Error::Unsupported(_)) => {
            match p.relative_entropy_numeric(&q, 2000) {
                Ok(v) => v,
                Err(e) => return fail(e),
            }
        }
        Err(e) => return fail(e),
    };
    *out = value;
    UqStatus::Ok
}

/// Full risk-curve sweep as a CSV string (caller frees with
/// `uq_string_free`).
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_sweep_csv(
    cfg: *const UqExperimentConfig,
    out: *mut *mut c_char,
) -> UqStatus {
    if cfg.is_null() || out.is_null() {
        set_error("null pointer".into());
        return UqStatus::NullPointer;
    }
    let hash = uqbound::cli::config_hash(
        serde_json::to_string(&(*cfg).inner).unwrap_or_default().as_bytes(),
    );
    match cmd_sweep(&(*cfg).inner, &hash) {
        Ok(res) => match CString::new(res.csv) {
            Ok(s) => {
                *out = s.into_raw();
                UqStatus::Ok
            }
            Err(_) => {
                set_error("CSV contained an interior NUL".into());
                UqStatus::NumericalError
            }
        },
        Err(e) => fail(e),
    }
}

/// Release a string returned by this library; a null pointer is a no-op.
///
/// # Safety
/// `s` must come from a `uq_*` function returning an owned string.
#[no_mangle]
pub unsafe extern "C" fn uq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
