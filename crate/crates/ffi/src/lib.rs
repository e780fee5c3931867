//! C ABI over the pabisim toolkit.
//!
//! Models are opaque handles created by [`pabisim_model_parse`] and released
//! with [`pabisim_model_free`]. Every call returns a [`PabisimStatus`]; on
//! failure [`pabisim_last_error`] describes it. Strings handed out by the
//! library are released with [`pabisim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pabisim::logic::{check, parse_formula, parse_path, path_values};
use pabisim::model::automaton::{ProbAutomaton, StateId};
use pabisim::model::compose::interleave;
use pabisim::model::format::{parse_model, write_model};
use pabisim::reach::Mode;
use pabisim::relations::{relate, Direction, RelationName, RelationQuery};
use pabisim::Error;

/// Result codes of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PabisimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    QueryError = 4,
    UnknownState = 5,
    ResourceCap = 6,
    Panic = 7,
}

/// Scheduler optimum for [`pabisim_path_value`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PabisimMode {
    Inf = 0,
    Sup = 1,
}

/// Clause direction for [`pabisim_relate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PabisimDirection {
    /// At-least for bisimulations, at-most for simulations.
    Default = 0,
    AtLeast = 1,
    AtMost = 2,
    Both = 3,
}

/// An automaton. Opaque to C.
pub struct PabisimModel {
    inner: ProbAutomaton,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PabisimStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ResourceCap { .. } => PabisimStatus::ResourceCap,
            Error::UnknownState(_) => PabisimStatus::UnknownState,
            Error::Syntax { .. }
            | Error::FormulaSyntax { .. }
            | Error::DistributionSum { .. }
            | Error::UndeclaredState { .. }
            | Error::InvalidDistribution(_)
            | Error::Threshold(_) => PabisimStatus::ParseError,
            _ => PabisimStatus::QueryError,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PabisimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PabisimStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PabisimStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PabisimStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PabisimStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or a handle from this library.
unsafe fn model<'a>(p: *const PabisimModel) -> Result<&'a ProbAutomaton, Fail> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| Fail(PabisimStatus::NullArgument, "model is null".into()))
}

fn out_ptr<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(PabisimStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn state(a: &ProbAutomaton, name: &str) -> Result<StateId, Fail> {
    Ok(a.state(name)?)
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on this thread.
#[no_mangle]
pub extern "C" fn pabisim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses model text into a new handle.
///
/// # Safety
/// `model_text` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pabisim_model_parse(model_text: *const c_char, out: *mut *mut PabisimModel) -> PabisimStatus {
    guard(|| {
        out_ptr(out)?;
        let a = parse_model(text(model_text, "model text")?)?;
        *out = Box::into_raw(Box::new(PabisimModel { inner: a }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pabisim_model_free(m: *mut PabisimModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `m` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pabisim_model_state_count(m: *const PabisimModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// Model text of a handle, released with [`pabisim_string_free`].
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pabisim_model_write(m: *const PabisimModel, out: *mut *mut c_char) -> PabisimStatus {
    guard(|| {
        out_ptr(out)?;
        *out = owned_string(write_model(model(m)?));
        Ok(())
    })
}

/// Interleaving of two models, as a new handle.
///
/// # Safety
/// `left` and `right` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pabisim_interleave(
    left: *const PabisimModel,
    right: *const PabisimModel,
    out: *mut *mut PabisimModel,
) -> PabisimStatus {
    guard(|| {
        out_ptr(out)?;
        let p = interleave(model(left)?, model(right)?);
        *out = Box::into_raw(Box::new(PabisimModel { inner: p }));
        Ok(())
    })
}

/// Does the state formula hold at the named state?
///
/// # Safety
/// Pointers are live handles, nul-terminated strings and a writable flag.
#[no_mangle]
pub unsafe extern "C" fn pabisim_check(
    m: *const PabisimModel,
    formula: *const c_char,
    state_name: *const c_char,
    holds: *mut bool,
) -> PabisimStatus {
    guard(|| {
        out_ptr(holds)?;
        let a = model(m)?;
        let phi = parse_formula(text(formula, "formula")?)?;
        let s = state(a, text(state_name, "state")?)?;
        *holds = check(a, &phi)?[s];
        Ok(())
    })
}

/// Optimal probability of a path formula at a state, written as `p/q`
/// (or an integer) and released with [`pabisim_string_free`].
///
/// # Safety
/// Pointers are live handles, nul-terminated strings and a writable slot.
#[no_mangle]
pub unsafe extern "C" fn pabisim_path_value(
    m: *const PabisimModel,
    path: *const c_char,
    state_name: *const c_char,
    mode: PabisimMode,
    out: *mut *mut c_char,
) -> PabisimStatus {
    guard(|| {
        out_ptr(out)?;
        let a = model(m)?;
        let psi = parse_path(text(path, "path")?)?;
        let s = state(a, text(state_name, "state")?)?;
        let mode = match mode {
            PabisimMode::Inf => Mode::Inf,
            PabisimMode::Sup => Mode::Sup,
        };
        *out = owned_string(path_values(a, &psi, mode)?[s].to_string());
        Ok(())
    })
}

/// Computes a relation by name (`strong-1`, `weak-bisim`, ...) and reports
/// whether it relates `left` to `right`. `depth` 0 means no depth.
///
/// # Safety
/// Pointers are live handles, nul-terminated strings and a writable flag.
#[no_mangle]
pub unsafe extern "C" fn pabisim_relate(
    m: *const PabisimModel,
    relation: *const c_char,
    depth: usize,
    direction: PabisimDirection,
    left: *const c_char,
    right: *const c_char,
    related: *mut bool,
) -> PabisimStatus {
    guard(|| {
        out_ptr(related)?;
        let a = model(m)?;
        let name: RelationName = text(relation, "relation")?.parse()?;
        let mut q = RelationQuery::new(name);
        if depth > 0 {
            q = q.depth(depth);
        }
        q = match direction {
            PabisimDirection::Default => q,
            PabisimDirection::AtLeast => q.direction(Direction::AtLeast),
            PabisimDirection::AtMost => q.direction(Direction::AtMost),
            PabisimDirection::Both => q.direction(Direction::Both),
        };
        let pair = (state(a, text(left, "left")?)?, state(a, text(right, "right")?)?);
        *related = relate(a, &q, Some(pair))?.related == Some(true);
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pabisim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
