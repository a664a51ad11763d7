use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use evsearch_ffi::*;
use serde_json::Value;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(p: *mut c_char) -> Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap();
    unsafe { evs_string_free(p) };
    v
}

fn last_error() -> String {
    let p = evs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn open() -> *mut EvsEngine {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { evs_engine_open(ptr::null(), ptr::null(), &mut e) }, EvsStatus::Ok);
    e
}

#[test]
fn extract_ingest_and_search() {
    let e = open();
    let mut out = ptr::null_mut();
    let st = unsafe {
        evs_extract_json(e, c("d1").as_ptr(), c("en").as_ptr(), c("Students protested in Tehran.").as_ptr(), 1, &mut out)
    };
    assert_eq!(st, EvsStatus::Ok);
    let r = take(out);
    assert_eq!(r["sentences"][0]["events"][0]["event_type"], "Protest");

    let corpus = c(r#"{"id":"t","language":"en","text":"Students protested in Tehran."}"#);
    assert_eq!(unsafe { evs_ingest_jsonl(e, corpus.as_ptr(), &mut out) }, EvsStatus::Ok);
    assert_eq!(take(out)["docs"], 1);

    let req = c(r#"{"types":["Protest"],"location":"Iran"}"#);
    assert_eq!(unsafe { evs_search_json(e, req.as_ptr(), 0, &mut out) }, EvsStatus::Ok);
    let hits = take(out);
    assert_eq!(hits["hits"][0]["event"]["event_id"], "t/s0.e0");

    assert_eq!(unsafe { evs_nl_query_json(e, c("protests in Tehran").as_ptr(), &mut out) }, EvsStatus::Ok);
    let q = take(out);
    assert_eq!(q["event_types"][0], "Protest");
    assert_eq!(q["location"], "Tehran");
    unsafe { evs_engine_free(e) };
}

#[test]
fn score_condition_identical_texts() {
    let e = open();
    let mut v = 0.0;
    let q = c("protest");
    let st = unsafe { evs_score_condition(e, q.as_ptr(), q.as_ptr(), 0.9, q.as_ptr(), -1.0, &mut v) };
    assert_eq!(st, EvsStatus::Ok);
    assert!((v - (0.75 * 0.9 + 0.25)).abs() < 1e-12, "{v}");
    let st = unsafe { evs_score_condition(e, q.as_ptr(), ptr::null(), 0.9, q.as_ptr(), 0.75, &mut v) };
    assert_eq!(st, EvsStatus::Ok);
    assert!((v - 0.25).abs() < 1e-12, "{v}");
    unsafe { evs_engine_free(e) };
}

#[test]
fn errors_set_status_and_message() {
    let e = open();
    let mut out = ptr::null_mut();
    let st = unsafe { evs_extract_json(e, c("d").as_ptr(), c("xx-!!").as_ptr(), c("text").as_ptr(), 0, &mut out) };
    assert_eq!(st, EvsStatus::UnsupportedLanguage);
    assert!(last_error().contains("xx-!!"));
    assert!(out.is_null());

    let st = unsafe { evs_extract_json(e, ptr::null(), c("en").as_ptr(), c("text").as_ptr(), 0, &mut out) };
    assert_eq!(st, EvsStatus::NullArgument);
    assert!(last_error().contains("id"));

    let bad = [0xffu8, 0];
    let st = unsafe { evs_nl_query_json(e, bad.as_ptr().cast(), &mut out) };
    assert_eq!(st, EvsStatus::InvalidUtf8);

    let st = unsafe { evs_search_json(e, c("{not json").as_ptr(), 5, &mut out) };
    assert_eq!(st, EvsStatus::Parse);

    let st = unsafe { evs_search_json(e, c(r#"{"types":["Nope"]}"#).as_ptr(), 5, &mut out) };
    assert_eq!(st, EvsStatus::InvalidInput);

    assert_eq!(unsafe { evs_nl_query_json(ptr::null(), c("x").as_ptr(), &mut out) }, EvsStatus::NullArgument);
    unsafe { evs_engine_free(e) };
}

#[test]
fn open_reports_missing_config() {
    let mut e = ptr::null_mut();
    let st = unsafe { evs_engine_open(c("/nonexistent/evsearch.toml").as_ptr(), ptr::null(), &mut e) };
    assert_eq!(st, EvsStatus::Io);
    assert!(e.is_null());
    assert!(last_error().contains("/nonexistent/evsearch.toml"));
}

#[test]
fn persistent_index_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().join("idx.jsonl").to_str().unwrap());
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { evs_engine_open(ptr::null(), path.as_ptr(), &mut e) }, EvsStatus::Ok);
    let corpus = c(r#"{"id":"t","language":"en","text":"Students protested in Tehran."}"#);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { evs_ingest_jsonl(e, corpus.as_ptr(), &mut out) }, EvsStatus::Ok);
    take(out);
    unsafe { evs_engine_free(e) };

    assert_eq!(unsafe { evs_engine_open(ptr::null(), path.as_ptr(), &mut e) }, EvsStatus::Ok);
    let req = c(r#"{"types":["Protest"]}"#);
    assert_eq!(unsafe { evs_search_json(e, req.as_ptr(), 0, &mut out) }, EvsStatus::Ok);
    assert_eq!(take(out)["hits"].as_array().unwrap().len(), 1);
    unsafe { evs_engine_free(e) };
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(evs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/evsearch.h")).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 9);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct EvsEngine EvsEngine;"));
    assert!(header.contains("EVS_STATUS_OK = 0"));
}

/// Compiles a C program against the header and static library when a C
/// compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let deps = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/debug");
    let lib = deps.join("libevsearch_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "evsearch.h"
int main(void) {
    EvsEngine *e = NULL;
    if (evs_engine_open(NULL, NULL, &e) != EVS_STATUS_OK) return 1;
    char *out = NULL;
    if (evs_nl_query_json(e, "protests in Iran", &out) != EVS_STATUS_OK) return 2;
    if (strstr(out, "\"Protest\"") == NULL) return 3;
    evs_string_free(out);
    if (evs_extract_json(e, NULL, "en", "x", 0, &out) != EVS_STATUS_NULL_ARGUMENT) return 4;
    if (evs_last_error_message() == NULL) return 5;
    evs_engine_free(e);
    printf("%s\n", evs_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc);
        }
    }
    Err(())
}
