//! C ABI over `pclass-core`.
//!
//! Reports are returned as opaque handles that the caller releases with
//! [`pclass_report_free`]. Every entry point returns a [`PclassStatus`]; the
//! message for the most recent failure on the calling thread is available
//! from [`pclass_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pclass_core::report::{analyze, AnalyzeOptions, PrimeReport};
use pclass_core::Error;

/// Status codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PclassStatus {
    Ok = 0,
    Anomaly = 1,
    Usage = 2,
    Internal = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Pipeline options. Zero in `level`, `cap` or `precision` selects the default;
/// `depth` is used as given.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PclassOptions {
    pub level: u32,
    pub cap: u32,
    pub precision: u32,
    pub depth: u32,
}

/// Opaque per-prime report.
pub struct PclassReport {
    report: PrimeReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior NUL"));
}

fn status_of(e: &Error) -> PclassStatus {
    match e {
        Error::Internal(_) => PclassStatus::Internal,
        Error::Anomaly { .. } => PclassStatus::Anomaly,
        _ => PclassStatus::Usage,
    }
}

fn guard(f: impl FnOnce() -> PclassStatus) -> PclassStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside pclass");
            PclassStatus::Panic
        }
    }
}

fn nonzero(x: u32) -> Option<u32> {
    (x != 0).then_some(x)
}

#[no_mangle]
pub extern "C" fn pclass_options_default() -> PclassOptions {
    PclassOptions {
        level: 0,
        cap: 0,
        precision: 0,
        depth: pclass_core::report::DEFAULT_DEPTH,
    }
}

/// Analyze prime `p`. On success `*out` receives a report handle.
///
/// # Safety
/// `options` must be null or point to a valid `PclassOptions`; `out` must be a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pclass_analyze(
    p: u64,
    options: *const PclassOptions,
    out: *mut *mut PclassReport,
) -> PclassStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return PclassStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let o = if options.is_null() {
            pclass_options_default()
        } else {
            *options
        };
        let opts = AnalyzeOptions {
            level: nonzero(o.level),
            cap: nonzero(o.cap).map(|c| c as usize),
            precision: nonzero(o.precision),
            depth: Some(o.depth),
        };
        match analyze(p, &opts) {
            Ok(a) => {
                let json = CString::new(a.report.to_json()).expect("JSON has no NUL");
                *out = Box::into_raw(Box::new(PclassReport {
                    report: a.report,
                    json,
                }));
                PclassStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a report. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle from [`pclass_analyze`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pclass_report_free(report: *mut PclassReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn get<'a>(report: *const PclassReport) -> Option<&'a PrimeReport> {
    report.as_ref().map(|r| &r.report)
}

/// The report as JSON, owned by the handle.
///
/// # Safety
/// `report` must be a live handle or null (which yields null).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_json(report: *const PclassReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_prime(report: *const PclassReport) -> u64 {
    get(report).map_or(0, |r| r.p)
}

/// Index of irregularity `r(p)`.
///
/// # Safety
/// `report` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_r(report: *const PclassReport) -> u32 {
    get(report).map_or(0, |r| r.r)
}

/// # Safety
/// `report` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_lambda(report: *const PclassReport) -> u32 {
    get(report).map_or(0, |r| r.lambda_total)
}

/// `nu`, or -1 when it was not determined.
///
/// # Safety
/// `report` must be a live handle or null (which yields -1).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_nu(report: *const PclassReport) -> i64 {
    get(report).and_then(|r| r.nu).map_or(-1, i64::from)
}

/// # Safety
/// `report` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_flag_count(report: *const PclassReport) -> usize {
    get(report).map_or(0, |r| r.flags.len())
}

/// Exit class of the report, as a status.
///
/// # Safety
/// `report` must be a live handle or null (which yields `NullPointer`).
#[no_mangle]
pub unsafe extern "C" fn pclass_report_status(report: *const PclassReport) -> PclassStatus {
    match get(report).map(|r| r.exit_class().code()) {
        None => PclassStatus::NullPointer,
        Some(0) => PclassStatus::Ok,
        Some(1) => PclassStatus::Anomaly,
        Some(2) => PclassStatus::Usage,
        Some(_) => PclassStatus::Internal,
    }
}

/// Message of the last failure on this thread; empty if none. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pclass_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pclass_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
