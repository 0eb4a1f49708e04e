//! C ABI over the fieldcheck runner.
//!
//! Scenarios and reports are opaque handles. Every fallible call returns an
//! [`FcStatus`]; on failure the message is kept per thread and can be read
//! with [`fc_last_error`]. Strings handed out by this library are owned by
//! the caller and must be released with [`fc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fieldcheck::runner::{
    exit_code, run_charge, run_convergence, run_flux, run_sample, run_verify, Report, Verdict,
};
use fieldcheck::scenario::Scenario;
use fieldcheck::Error;

/// Status codes. The first four mirror the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    /// The run completed and its verdict is a failure.
    Fail = 1,
    Config = 2,
    Numerical = 3,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 4,
    /// The library panicked; the handle arguments are left untouched.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcCommand {
    Verify = 0,
    Flux = 1,
    Charge = 2,
    Convergence = 3,
    Sample = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcFormat {
    Json = 0,
    Csv = 1,
    Text = 2,
}

/// A parsed and validated scenario.
pub struct FcScenario(Scenario);

/// A finished run, pre-rendered in every format.
pub struct FcReport {
    verdict: Verdict,
    json: String,
    csv: String,
    text: String,
}

impl FcReport {
    fn of<R: Report>(r: &R) -> Self {
        Self { verdict: r.verdict(), json: r.json(), csv: r.csv(), text: r.text() }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> FcStatus {
    match exit_code(err) {
        2 => FcStatus::Config,
        _ => FcStatus::Numerical,
    }
}

/// Runs `f` with panics and library errors turned into status codes.
fn guard(f: impl FnOnce() -> Result<FcStatus, (FcStatus, String)>) -> FcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FcStatus, String) {
    (status_of(&e), e.to_string())
}

fn invalid(msg: &str) -> (FcStatus, String) {
    (FcStatus::InvalidArgument, msg.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FcStatus, String)> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parses a scenario from a JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` holds a handle to release with [`fc_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn fc_scenario_from_json(json: *const c_char, out: *mut *mut FcScenario) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let text = read_str(json, "json")?;
        let s = Scenario::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FcScenario(s)));
        Ok(FcStatus::Ok)
    })
}

/// Reads and parses a scenario file.
///
/// # Safety
/// Same contract as [`fc_scenario_from_json`], with `path` a file path.
#[no_mangle]
pub unsafe extern "C" fn fc_scenario_from_path(path: *const c_char, out: *mut *mut FcScenario) -> FcStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let path = read_str(path, "path")?;
        let s = Scenario::from_path(std::path::Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(FcScenario(s)));
        Ok(FcStatus::Ok)
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fc_scenario_free(scenario: *mut FcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Scenario name as a new string, or null.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fc_scenario_name(scenario: *const FcScenario) -> *mut c_char {
    scenario.as_ref().map_or(ptr::null_mut(), |s| into_c_string(&s.0.name))
}

/// Runs one command. Returns `FC_STATUS_OK` or `FC_STATUS_FAIL` according
/// to the verdict when a report was produced, an error status otherwise.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer. On success
/// `*out` holds a handle to release with [`fc_report_free`].
#[no_mangle]
pub unsafe extern "C" fn fc_run(scenario: *const FcScenario, command: FcCommand, out: *mut *mut FcReport) -> FcStatus {
    guard(|| {
        let s = &scenario.as_ref().ok_or_else(|| invalid("scenario is null"))?.0;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let report = match command {
            FcCommand::Verify => FcReport::of(&run_verify(s).map_err(lib_err)?),
            FcCommand::Flux => FcReport::of(&run_flux(s).map_err(lib_err)?),
            FcCommand::Charge => FcReport::of(&run_charge(s).map_err(lib_err)?),
            FcCommand::Convergence => FcReport::of(&run_convergence(s).map_err(lib_err)?),
            FcCommand::Sample => {
                let table = run_sample(s).map_err(lib_err)?;
                let csv = table.csv();
                let json = serde_json::to_string_pretty(&table).map_err(|e| (FcStatus::Numerical, e.to_string()))?;
                FcReport { verdict: Verdict::Pass, json, text: csv.clone(), csv }
            }
        };
        let status = if report.verdict.passed() { FcStatus::Ok } else { FcStatus::Fail };
        *out = Box::into_raw(Box::new(report));
        Ok(status)
    })
}

/// Convenience for `fc_run(scenario, FC_COMMAND_VERIFY, out)`.
///
/// # Safety
/// See [`fc_run`].
#[no_mangle]
pub unsafe extern "C" fn fc_verify(scenario: *const FcScenario, out: *mut *mut FcReport) -> FcStatus {
    fc_run(scenario, FcCommand::Verify, out)
}

/// 1 if the report passed, 0 if it failed, -1 for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fc_report_passed(report: *const FcReport) -> c_int {
    report.as_ref().map_or(-1, |r| c_int::from(r.verdict.passed()))
}

/// The report rendered in `format`, as a new string; null for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fc_report_render(report: *const FcReport, format: FcFormat) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        return ptr::null_mut();
    };
    let text = match format {
        FcFormat::Json => &r.json,
        FcFormat::Csv => &r.csv,
        FcFormat::Text => &r.text,
    };
    into_c_string(text)
}

/// The report as JSON; same as `fc_report_render(report, FC_FORMAT_JSON)`.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fc_report_json(report: *const FcReport) -> *mut c_char {
    fc_report_render(report, FcFormat::Json)
}

/// # Safety
/// `report` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fc_report_free(report: *mut FcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Message for the last failed call on this thread, as a new string, or null.
#[no_mangle]
pub extern "C" fn fc_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
