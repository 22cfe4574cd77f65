use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use serde_json::Value;

use flc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = flc_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned())
}

/// Takes ownership of a library string.
unsafe fn take_json(p: *mut c_char) -> Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(CStr::from_ptr(p).to_str().unwrap()).unwrap();
    flc_string_free(p);
    v
}

unsafe fn preset(name: &str) -> *mut FlcRun {
    let mut run = ptr::null_mut();
    assert_eq!(flc_run_from_preset(c(name).as_ptr(), &mut run), FlcStatus::Ok);
    run
}

#[test]
fn enumerate_and_patches() {
    unsafe {
        let mut run = ptr::null_mut();
        let cfg = c(r#"{"descriptor": "silver_mean", "sample": [["0", "4"]], "radius": "3/2"}"#);
        assert_eq!(flc_run_from_json(cfg.as_ptr(), &mut run), FlcStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(flc_enumerate(run, &mut out), FlcStatus::Ok);
        let sample = take_json(out);
        assert_eq!(sample["points"].as_array().unwrap().len(), 4);
        assert_eq!(sample["points"][2], serde_json::json!([["1", "1"]]));
        flc_run_free(run);

        let run = preset("silver_mean");
        let mut out = ptr::null_mut();
        assert_eq!(flc_patches(run, &mut out), FlcStatus::Ok);
        assert_eq!(take_json(out)["classes"].as_array().unwrap().len(), 9);
        flc_run_free(run);
    }
}

#[test]
fn check_reports_verdicts_without_error_status() {
    unsafe {
        let run = preset("composite");
        let mut out = ptr::null_mut();
        let mut pass = true;
        assert_eq!(flc_check(run, c("ud").as_ptr(), &mut out, &mut pass), FlcStatus::Ok);
        assert!(!pass);
        assert_eq!(take_json(out)["pass"], false);
        assert_eq!(last_error(), None);
        flc_run_free(run);

        let run = preset("z");
        assert_eq!(flc_run_set_seed(run, 42), FlcStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(flc_check(run, c("flc").as_ptr(), &mut out, &mut pass), FlcStatus::Ok);
        assert!(pass);
        assert_eq!(take_json(out)["seed"], 42);
        let mut out = ptr::null_mut();
        assert_eq!(flc_run_config(run, &mut out), FlcStatus::Ok);
        assert_eq!(take_json(out)["seed"], 42);
        flc_run_free(run);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut run = ptr::null_mut();
        let bad = c(r#"{"descriptor": "z", "sample": [["3", "1"]]}"#);
        assert_eq!(flc_run_from_json(bad.as_ptr(), &mut run), FlcStatus::ErrorConfig);
        assert!(run.is_null());
        assert!(last_error().unwrap().contains("empty"));

        assert_eq!(flc_run_from_json(c("{").as_ptr(), &mut run), FlcStatus::ErrorConfig);
        assert_eq!(flc_run_from_preset(c("penrose").as_ptr(), &mut run), FlcStatus::ErrorConfig);
        assert_eq!(flc_run_from_json(ptr::null(), &mut run), FlcStatus::NullArgument);
        assert_eq!(flc_run_from_preset(c("z").as_ptr(), ptr::null_mut()), FlcStatus::NullArgument);
        let invalid = [0xffu8, 0];
        assert_eq!(flc_run_from_preset(invalid.as_ptr().cast(), &mut run), FlcStatus::InvalidUtf8);

        let run = preset("z");
        let mut out = ptr::null_mut();
        let mut pass = false;
        assert_eq!(flc_check(run, c("nope").as_ptr(), &mut out, &mut pass), FlcStatus::ErrorConfig);
        assert!(out.is_null());
        assert_eq!(flc_check(ptr::null(), c("ud").as_ptr(), &mut out, &mut pass), FlcStatus::NullArgument);
        assert_eq!(flc_enumerate(run, ptr::null_mut()), FlcStatus::NullArgument);
        // a successful call clears the message
        assert_eq!(flc_enumerate(run, &mut out), FlcStatus::Ok);
        assert_eq!(last_error(), None);
        flc_string_free(out);
        flc_run_free(run);
        flc_run_free(ptr::null_mut());
        flc_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(flc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let include = dir.join("include");
    let src = dir.join("tests/c/smoke.c");
    let header = std::fs::read_to_string(include.join("flc.h")).unwrap();
    for name in ["flc_run_from_json", "flc_check", "flc_string_free", "FLC_STATUS_ERROR_CONFIG"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    for (compiler, extra) in [("cc", &["-std=c11"][..]), ("c++", &["-x", "c++", "-std=c++17"][..])] {
        let out = Command::new(compiler)
            .args(extra)
            .args(["-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(&src)
            .output()
            .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
