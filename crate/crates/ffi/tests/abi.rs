use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pabisim_ffi::*;

const FIG1: &str = include_str!("../../core/fixtures/fig1.pa");
const COIN: &str = include_str!("../../core/fixtures/coin.pa");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn parse(text: &str) -> *mut PabisimModel {
    let mut m = ptr::null_mut();
    let t = c(text);
    assert_eq!(unsafe { pabisim_model_parse(t.as_ptr(), &mut m) }, PabisimStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = pabisim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { pabisim_string_free(p) };
    s
}

fn related(m: *const PabisimModel, rel: &str, depth: usize, l: &str, r: &str) -> bool {
    let (rel, l, r) = (c(rel), c(l), c(r));
    let mut out = false;
    let st = unsafe { pabisim_relate(m, rel.as_ptr(), depth, PabisimDirection::Default, l.as_ptr(), r.as_ptr(), &mut out) };
    assert_eq!(st, PabisimStatus::Ok);
    out
}

#[test]
fn fig1_relations_through_the_abi() {
    let m = parse(FIG1);
    assert_eq!(unsafe { pabisim_model_state_count(m) }, 5);
    assert!(!related(m, "strong-prob-bisim", 0, "s", "r"));
    assert!(related(m, "strong-1", 0, "s", "r"));
    assert!(related(m, "strong-branching-i", 3, "s", "r"));
    unsafe { pabisim_model_free(m) };
}

#[test]
fn product_value_and_check() {
    let (a, b) = (parse(FIG1), parse(COIN));
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pabisim_interleave(a, b, &mut p) }, PabisimStatus::Ok);
    let path = c("((top@1 & c@2) | (a1@1 & c@2) | (a3@1 & c@2)) U<=2 ((a1@1 & c2@2) | (a3@1 & c1@2))");
    let mut out = ptr::null_mut();
    for (state, want) in [("(s,t)", "17/50"), ("(r,t)", "9/25")] {
        let s = c(state);
        assert_eq!(unsafe { pabisim_path_value(p, path.as_ptr(), s.as_ptr(), PabisimMode::Sup, &mut out) }, PabisimStatus::Ok);
        assert_eq!(take(out), want);
    }
    let phi = c(&format!("P<=0.34 [ {} ]", path.to_str().unwrap()));
    let mut holds = false;
    let st = c("(s,t)");
    assert_eq!(unsafe { pabisim_check(p, phi.as_ptr(), st.as_ptr(), &mut holds) }, PabisimStatus::Ok);
    assert!(holds);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { pabisim_model_write(p, &mut text) }, PabisimStatus::Ok);
    assert!(take(text).contains("state (s,t)"));
    unsafe {
        pabisim_model_free(p);
        pabisim_model_free(a);
        pabisim_model_free(b);
    }
}

#[test]
fn errors_map_to_codes() {
    let mut m = ptr::null_mut();
    let bad = c("pa x\nstate p\ntrans p -> 1:q\n");
    assert_eq!(unsafe { pabisim_model_parse(bad.as_ptr(), &mut m) }, PabisimStatus::ParseError);
    assert!(m.is_null());
    assert!(last_error().contains("`q`"), "{}", last_error());

    assert_eq!(unsafe { pabisim_model_parse(ptr::null(), &mut m) }, PabisimStatus::NullArgument);

    let m = parse(FIG1);
    let (rel, l, r) = (c("strong-9"), c("s"), c("r"));
    let mut out = false;
    let st = unsafe { pabisim_relate(m, rel.as_ptr(), 0, PabisimDirection::Default, l.as_ptr(), r.as_ptr(), &mut out) };
    assert_eq!(st, PabisimStatus::QueryError);
    let (rel, ghost) = (c("strong-1"), c("nobody"));
    let st = unsafe { pabisim_relate(m, rel.as_ptr(), 0, PabisimDirection::Both, l.as_ptr(), ghost.as_ptr(), &mut out) };
    assert_eq!(st, PabisimStatus::UnknownState);
    assert!(last_error().contains("nobody"));

    let phi = c("P>=0.5 [ X a1 ]");
    let st = unsafe { pabisim_check(m, phi.as_ptr(), l.as_ptr(), ptr::null_mut()) };
    assert_eq!(st, PabisimStatus::NullArgument);

    let ok = c("true");
    let mut holds = false;
    assert_eq!(unsafe { pabisim_check(m, ok.as_ptr(), l.as_ptr(), &mut holds) }, PabisimStatus::Ok);
    assert!(pabisim_last_error().is_null());
    unsafe { pabisim_model_free(m) };
    unsafe { pabisim_model_free(ptr::null_mut()) };
}

#[test]
fn header_declares_the_surface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/pabisim.h")).unwrap();
    for name in [
        "pabisim_model_parse",
        "pabisim_model_free",
        "pabisim_relate",
        "pabisim_path_value",
        "pabisim_last_error",
        "PABISIM_STATUS_RESOURCE_CAP",
        "typedef struct PabisimModel PabisimModel",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", concat!(env!("CARGO_MANIFEST_DIR"), "/include/pabisim.h")])
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
