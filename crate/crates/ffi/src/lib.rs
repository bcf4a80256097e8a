//! C ABI over the xplab checks.
//!
//! Configurations and reports are opaque handles owned by the caller and
//! released with the matching `_free` function. Every call returns an
//! [`XplabStatus`]; on failure the message is available from
//! [`xplab_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use xplab::app::envelope::{to_csv, to_json};
use xplab::app::{run_verify, JobConfig, ReportEnvelope, VerifyTarget};
use xplab::error::Error;
use xplab::modcurves::genus_and_volume;
use xplab::report::CheckStatus;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XplabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Precision = 4,
    Range = 5,
    Tolerance = 6,
    Structural = 7,
    Budget = 8,
    OutOfBounds = 9,
    Panic = 10,
}

impl From<&Error> for XplabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => Self::Domain,
            Error::Precision(_) => Self::Precision,
            Error::Range(_) => Self::Range,
            Error::Tolerance(_) => Self::Tolerance,
            Error::Structural(_) => Self::Structural,
            Error::Budget(_) => Self::Budget,
        }
    }
}

/// Check outcome codes, matching the report strings PASS, FAIL and
/// INCONCLUSIVE.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XplabCheckStatus {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XplabSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// Process exit status the command line tool would use.
    pub exit_code: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct XplabGenus {
    pub p: u64,
    pub genus: i64,
    pub volume: f64,
    pub group_order: u64,
    pub cusps: u64,
}

/// Opaque job configuration.
pub struct XplabConfig(JobConfig);

/// Opaque verification report.
pub struct XplabReport(ReportEnvelope);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: XplabStatus, msg: impl Into<String>) -> XplabStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> XplabStatus) -> XplabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(XplabStatus::Panic, "panic inside xplab"),
    }
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, XplabStatus> {
    if s.is_null() {
        return Err(fail(XplabStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(XplabStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn lib_error(e: &Error) -> XplabStatus {
    fail(e.into(), e.to_string())
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xplab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn xplab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A configuration with default settings.
#[no_mangle]
pub extern "C" fn xplab_config_new() -> *mut XplabConfig {
    Box::into_raw(Box::new(XplabConfig(JobConfig::default())))
}

/// # Safety
/// `cfg` must be null or a handle from [`xplab_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xplab_config_free(cfg: *mut XplabConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies one setting with the same keys as the INI file: `p`, `delta`,
/// `tol`, `height_bound`, `jobs`, `seed`, `out`, `const.NAME`, or any
/// subcommand option such as `check`, `r`, `R` and `set`.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn xplab_config_set(
    cfg: *mut XplabConfig,
    key: *const c_char,
    value: *const c_char,
) -> XplabStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(XplabStatus::NullPointer, "config is null");
        };
        let (key, value) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match cfg.0.set(key, value) {
            Ok(()) => XplabStatus::Ok,
            Err(e) => lib_error(&e),
        }
    })
}

/// Reads settings from an INI file into `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn xplab_config_load_ini(
    cfg: *mut XplabConfig,
    path: *const c_char,
) -> XplabStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(XplabStatus::NullPointer, "config is null");
        };
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match cfg.0.load_ini(Path::new(path)) {
            Ok(()) => XplabStatus::Ok,
            Err(e) => lib_error(&e),
        }
    })
}

/// Validates `cfg` without running anything.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn xplab_config_validate(cfg: *const XplabConfig) -> XplabStatus {
    guard(|| match cfg.as_ref() {
        None => fail(XplabStatus::NullPointer, "config is null"),
        Some(c) => match c.0.validate() {
            Ok(()) => XplabStatus::Ok,
            Err(e) => lib_error(&e),
        },
    })
}

/// Runs `verify <target>` (geometry, repulsion, volume or multiplicity) and
/// stores a new report handle in `*out`. Check failures are part of the
/// report; only invalid input makes this call fail.
///
/// # Safety
/// `cfg` must be a live handle, `target` a NUL-terminated string and `out`
/// a valid place to write a pointer.
#[no_mangle]
pub unsafe extern "C" fn xplab_verify(
    cfg: *const XplabConfig,
    target: *const c_char,
    out: *mut *mut XplabReport,
) -> XplabStatus {
    guard(|| {
        if out.is_null() {
            return fail(XplabStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(cfg) = cfg.as_ref() else {
            return fail(XplabStatus::NullPointer, "config is null");
        };
        let name = match str_arg(target, "target") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let t: VerifyTarget = match name.parse() {
            Ok(t) => t,
            Err(e) => return lib_error(&e),
        };
        let mut job = cfg.0.clone();
        job.command = format!("verify {name}");
        match run_verify(t, &job) {
            Ok(checks) => {
                *out = Box::into_raw(Box::new(XplabReport(ReportEnvelope::new(job, checks))));
                XplabStatus::Ok
            }
            Err(e) => lib_error(&e),
        }
    })
}

/// # Safety
/// `report` must be null or a handle from [`xplab_verify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xplab_report_free(report: *mut XplabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xplab_report_summary(
    report: *const XplabReport,
    out: *mut XplabSummary,
) -> XplabStatus {
    guard(|| {
        let (Some(r), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(XplabStatus::NullPointer, "report or out is null");
        };
        let s = r.0.summary;
        *out = XplabSummary {
            total: s.total,
            pass: s.pass,
            fail: s.fail,
            inconclusive: s.inconclusive,
            exit_code: s.exit_code(),
        };
        XplabStatus::Ok
    })
}

/// Status and both sides of check `index`. `lhs` and `rhs` may be null.
///
/// # Safety
/// `report` must be a live handle and `status` writable.
#[no_mangle]
pub unsafe extern "C" fn xplab_report_check(
    report: *const XplabReport,
    index: usize,
    status: *mut XplabCheckStatus,
    lhs: *mut f64,
    rhs: *mut f64,
) -> XplabStatus {
    guard(|| {
        let (Some(r), Some(status)) = (report.as_ref(), status.as_mut()) else {
            return fail(XplabStatus::NullPointer, "report or status is null");
        };
        let Some(c) = r.0.checks.get(index) else {
            return fail(
                XplabStatus::OutOfBounds,
                format!("check {index} of {}", r.0.checks.len()),
            );
        };
        *status = match c.status {
            CheckStatus::Pass => XplabCheckStatus::Pass,
            CheckStatus::Fail => XplabCheckStatus::Fail,
            CheckStatus::Inconclusive => XplabCheckStatus::Inconclusive,
        };
        if let Some(l) = lhs.as_mut() {
            *l = c.lhs;
        }
        if let Some(r) = rhs.as_mut() {
            *r = c.rhs;
        }
        XplabStatus::Ok
    })
}

fn render(report: *const XplabReport, out: *mut *mut c_char, csv: bool) -> XplabStatus {
    guard(|| unsafe {
        if out.is_null() {
            return fail(XplabStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(r) = report.as_ref() else {
            return fail(XplabStatus::NullPointer, "report is null");
        };
        let text = if csv { to_csv(&r.0) } else { to_json(&r.0) };
        match text {
            Ok(s) => match CString::new(s) {
                Ok(c) => {
                    *out = c.into_raw();
                    XplabStatus::Ok
                }
                Err(_) => fail(XplabStatus::Structural, "report contains NUL"),
            },
            Err(e) => lib_error(&e),
        }
    })
}

/// The report body as JSON, identical to the command line output. Free the
/// string with [`xplab_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xplab_report_json(
    report: *const XplabReport,
    out: *mut *mut c_char,
) -> XplabStatus {
    render(report, out, false)
}

/// The report as CSV. Free the string with [`xplab_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xplab_report_csv(
    report: *const XplabReport,
    out: *mut *mut c_char,
) -> XplabStatus {
    render(report, out, true)
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xplab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Genus, volume and counts for `X(p)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xplab_genus(p: u64, out: *mut XplabGenus) -> XplabStatus {
    guard(|| {
        let Some(out) = out.as_mut() else {
            return fail(XplabStatus::NullPointer, "out is null");
        };
        match genus_and_volume(p) {
            Ok(g) => {
                *out = XplabGenus {
                    p: g.p,
                    genus: g.genus,
                    volume: g.volume,
                    group_order: g.group_order,
                    cusps: g.cusps,
                };
                XplabStatus::Ok
            }
            Err(e) => lib_error(&e),
        }
    })
}
