//! C interface to `flc-core`.
//!
//! A run configuration lives behind the opaque `FlcRun` handle. Every call
//! returns an `FlcStatus`; on failure `flc_last_error` describes the cause
//! on the calling thread. Strings handed out by the library are JSON and
//! must be released with `flc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::Value;

use flc_core::config::{preset, RunConfig};
use flc_core::regularity::enumerate_patches;
use flc_core::suite::{run_suite, Suite};
use flc_core::Error;

/// An owned run configuration: descriptor, radii, windows and seed.
pub struct FlcRun {
    config: RunConfig,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlcStatus {
    Ok = 0,
    /// Malformed configuration, descriptor or window.
    ErrorConfig = 2,
    /// A computation could not be carried out.
    ErrorRuntime = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FlcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_config() { FlcStatus::ErrorConfig } else { FlcStatus::ErrorRuntime };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FlcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FlcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FlcStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(FlcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(FlcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn run_ref<'a>(run: *const FlcRun) -> Result<&'a FlcRun, Failure> {
    run.as_ref().ok_or_else(|| Failure(FlcStatus::NullArgument, "run handle is null".into()))
}

fn check_out<T>(out: *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(FlcStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn json_string(v: &Value) -> Result<*mut c_char, Failure> {
    let text = serde_json::to_string(v).map_err(|e| Failure(FlcStatus::ErrorRuntime, e.to_string()))?;
    let c = CString::new(text).map_err(|e| Failure(FlcStatus::ErrorRuntime, e.to_string()))?;
    Ok(c.into_raw())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure(FlcStatus::ErrorRuntime, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn flc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn flc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON run configuration into a new handle.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flc_run_from_json(json: *const c_char, out: *mut *mut FlcRun) -> FlcStatus {
    guard(|| {
        check_out(out, "out")?;
        let config = RunConfig::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(FlcRun { config }));
        Ok(())
    })
}

/// Default configuration for a built-in descriptor: z, z2, heisenberg,
/// composite or silver_mean.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flc_run_from_preset(name: *const c_char, out: *mut *mut FlcRun) -> FlcStatus {
    guard(|| {
        check_out(out, "out")?;
        let config = RunConfig::from_descriptor(preset(read_str(name, "name")?)?);
        *out = Box::into_raw(Box::new(FlcRun { config }));
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn flc_run_set_seed(run: *mut FlcRun, seed: u64) -> FlcStatus {
    guard(|| {
        let run =
            run.as_mut().ok_or_else(|| Failure(FlcStatus::NullArgument, "run handle is null".into()))?;
        run.config.seed = seed;
        Ok(())
    })
}

/// The configuration as JSON, with every default filled in.
///
/// # Safety
/// `run` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flc_run_config(run: *const FlcRun, out_json: *mut *mut c_char) -> FlcStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let run = run_ref(run)?;
        *out_json = json_string(&to_json(&run.config)?)?;
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn flc_run_free(run: *mut FlcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// The points of the descriptor inside the sample window, as JSON.
///
/// # Safety
/// `run` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flc_enumerate(run: *const FlcRun, out_json: *mut *mut c_char) -> FlcStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let c = &run_ref(run)?.config;
        let sample = c.descriptor.enumerate_window(&c.sample)?;
        *out_json = json_string(&to_json(&sample)?)?;
        Ok(())
    })
}

/// The patch catalog at the configured radius, as JSON.
///
/// # Safety
/// `run` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flc_patches(run: *const FlcRun, out_json: *mut *mut c_char) -> FlcStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let c = &run_ref(run)?.config;
        let cat = enumerate_patches(&c.descriptor, &c.radius, &c.sample)?;
        *out_json = json_string(&to_json(&cat)?)?;
        Ok(())
    })
}

/// Runs a check suite (ud, flc, patches, hull, groupoid, witness or all).
/// A failed verdict is not an error: the status is `FLC_STATUS_OK` and
/// `*out_pass` is false.
///
/// # Safety
/// `run` must be a live handle, `suite` NUL-terminated, and `out_json`,
/// `out_pass` writable.
#[no_mangle]
pub unsafe extern "C" fn flc_check(
    run: *const FlcRun,
    suite: *const c_char,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> FlcStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        check_out(out_pass, "out_pass")?;
        let c = &run_ref(run)?.config;
        let which: Suite = read_str(suite, "suite")?.parse()?;
        let report = run_suite(c, which)?;
        *out_pass = report["pass"] == Value::Bool(true);
        *out_json = json_string(&report)?;
        Ok(())
    })
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn flc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
