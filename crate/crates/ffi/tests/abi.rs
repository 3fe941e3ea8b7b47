use std::ffi::CStr;
use std::ptr;

use pclass_ffi::*;

#[test]
fn analyze_37_through_the_abi() {
    let mut report = ptr::null_mut();
    let status = unsafe { pclass_analyze(37, ptr::null(), &mut report) };
    assert_eq!(status, PclassStatus::Ok);
    assert!(!report.is_null());
    unsafe {
        assert_eq!(pclass_report_prime(report), 37);
        assert_eq!(pclass_report_r(report), 1);
        assert_eq!(pclass_report_lambda(report), 1);
        assert_eq!(pclass_report_nu(report), 1);
        assert_eq!(pclass_report_flag_count(report), 0);
        assert_eq!(pclass_report_status(report), PclassStatus::Ok);
        let json = CStr::from_ptr(pclass_report_json(report)).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(v["structures"]["1"], serde_json::json!([2]));
        pclass_report_free(report);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    let mut report = ptr::null_mut();
    let status = unsafe { pclass_analyze(15, ptr::null(), &mut report) };
    assert_eq!(status, PclassStatus::Usage);
    assert!(report.is_null());
    let msg = unsafe { CStr::from_ptr(pclass_last_error()) }.to_str().unwrap();
    assert!(msg.contains("15"), "{msg}");

    let status = unsafe { pclass_analyze(37, ptr::null(), ptr::null_mut()) };
    assert_eq!(status, PclassStatus::NullPointer);
    unsafe {
        assert_eq!(pclass_report_nu(ptr::null()), -1);
        assert!(pclass_report_json(ptr::null()).is_null());
        pclass_report_free(ptr::null_mut());
    }
}

#[test]
fn options_are_honoured() {
    let mut opts = pclass_options_default();
    opts.depth = 1;
    let mut report = ptr::null_mut();
    let status = unsafe { pclass_analyze(157, &opts, &mut report) };
    assert_eq!(status, PclassStatus::Ok);
    unsafe {
        assert_eq!(pclass_report_r(report), 2);
        // growth fit needs two differences, so nu stays undetermined
        assert_eq!(pclass_report_nu(report), -1);
        pclass_report_free(report);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pclass.h")).unwrap();
    for name in [
        "pclass_analyze",
        "pclass_report_free",
        "pclass_report_json",
        "pclass_last_error",
        "typedef struct PclassReport PclassReport",
        "PCLASS_STATUS_NULL_POINTER",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let v = unsafe { CStr::from_ptr(pclass_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
