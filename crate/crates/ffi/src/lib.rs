//! C ABI over `gather_core`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Strings returned through `char **`
//! out-parameters are released with [`gather_string_free`]. Every function
//! returns a [`GatherStatus`]; on failure a message is available from
//! [`gather_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gather_core::engine::{run_to_trace, Outcome, Scenario, Trace};
use gather_core::fuzz::{check_trace, CheckKind};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatherStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScenario = 3,
    InvalidTrace = 4,
    UnknownCheck = 5,
    /// The run stopped on its step budget; the trace is still returned.
    BudgetExhausted = 6,
    /// The trace violated a check; the report is still returned.
    CheckFailed = 7,
    EngineError = 8,
    Panic = 9,
}

/// A validated scenario.
pub struct GatherScenario {
    inner: Scenario,
}

/// An execution trace.
pub struct GatherTrace {
    inner: Trace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: GatherStatus, msg: impl Into<String>) -> GatherStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> GatherStatus) -> GatherStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(GatherStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, GatherStatus> {
    if p.is_null() {
        return Err(fail(GatherStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(GatherStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON output has no interior nul").into_raw()
}

/// Parse and validate a scenario from JSON.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gather_scenario_from_json(json: *const c_char, out: *mut *mut GatherScenario) -> GatherStatus {
    guard(|| {
        if out.is_null() {
            return fail(GatherStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_json(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(GatherScenario { inner: s }));
                GatherStatus::Ok
            }
            Err(e) => fail(GatherStatus::InvalidScenario, e.to_string()),
        }
    })
}

/// Serialize a scenario back to JSON.
///
/// # Safety
/// `scenario` must come from [`gather_scenario_from_json`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gather_scenario_to_json(
    scenario: *const GatherScenario,
    out: *mut *mut c_char,
) -> GatherStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(GatherStatus::NullArgument, "null argument");
        }
        *out = into_c_string((*scenario).inner.to_json());
        GatherStatus::Ok
    })
}

/// Execute a scenario. On `BudgetExhausted` the partial trace is still
/// stored in `out`.
///
/// # Safety
/// `scenario` must come from [`gather_scenario_from_json`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gather_run(scenario: *const GatherScenario, out: *mut *mut GatherTrace) -> GatherStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(GatherStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        match run_to_trace(&(*scenario).inner) {
            Ok(t) => {
                let exhausted = t.outcome() == Some(Outcome::BudgetExhausted);
                *out = Box::into_raw(Box::new(GatherTrace { inner: t }));
                if exhausted {
                    fail(GatherStatus::BudgetExhausted, "step budget exhausted")
                } else {
                    GatherStatus::Ok
                }
            }
            Err(e) => fail(GatherStatus::EngineError, e.to_string()),
        }
    })
}

/// Parse a JSONL trace.
///
/// # Safety
/// `jsonl` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gather_trace_from_jsonl(jsonl: *const c_char, out: *mut *mut GatherTrace) -> GatherStatus {
    guard(|| {
        if out.is_null() {
            return fail(GatherStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(jsonl) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Trace::from_jsonl(text) {
            Ok(t) if t.scenario().is_some() => {
                *out = Box::into_raw(Box::new(GatherTrace { inner: t }));
                GatherStatus::Ok
            }
            Ok(_) => fail(GatherStatus::InvalidTrace, "trace has no header"),
            Err(e) => fail(GatherStatus::InvalidTrace, e.to_string()),
        }
    })
}

/// Serialize a trace as JSONL.
///
/// # Safety
/// `trace` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gather_trace_to_jsonl(trace: *const GatherTrace, out: *mut *mut c_char) -> GatherStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return fail(GatherStatus::NullArgument, "null argument");
        }
        *out = into_c_string((*trace).inner.to_jsonl());
        GatherStatus::Ok
    })
}

/// Whether the last configuration of the trace has every robot on one point.
///
/// # Safety
/// `trace` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gather_trace_is_gathered(trace: *const GatherTrace, out: *mut bool) -> GatherStatus {
    guard(|| {
        if trace.is_null() || out.is_null() {
            return fail(GatherStatus::NullArgument, "null argument");
        }
        match (*trace).inner.final_config() {
            Some(c) => {
                *out = c.is_gathered();
                GatherStatus::Ok
            }
            None => fail(GatherStatus::InvalidTrace, "trace has no configuration"),
        }
    })
}

/// Run a named check (`monotone`, `cycle`, `switch`, `shrink`, `gather`,
/// `equivariance` or `all`) and store the JSON report in `report_out`.
/// Returns `CheckFailed` when the report has violations.
///
/// # Safety
/// `trace` must come from this library; `check` must be a nul-terminated
/// string; `report_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gather_check(
    trace: *const GatherTrace,
    check: *const c_char,
    seed: u64,
    report_out: *mut *mut c_char,
) -> GatherStatus {
    guard(|| {
        if trace.is_null() || report_out.is_null() {
            return fail(GatherStatus::NullArgument, "null argument");
        }
        *report_out = ptr::null_mut();
        let name = match read_str(check) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(kinds) = CheckKind::parse(name) else {
            return fail(GatherStatus::UnknownCheck, format!("unknown check `{name}`"));
        };
        let rep = check_trace(&(*trace).inner, &kinds, seed);
        *report_out = into_c_string(rep.to_json());
        if rep.pass {
            GatherStatus::Ok
        } else {
            fail(GatherStatus::CheckFailed, format!("{} violation(s)", rep.violations.len()))
        }
    })
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gather_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gather_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `t` must be null or a trace returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gather_trace_free(t: *mut GatherTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `s` must be null or a scenario returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gather_scenario_free(s: *mut GatherScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
