//! C ABI for agorad.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Fallible calls return an [`AgoradStatus`]
//! and write their result through an out-pointer; on failure the message is
//! available from [`agorad_last_error`] on the same thread. Strings returned
//! to the caller are owned by it and released with [`agorad_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use agorad::classify::{self, AnalysisReport, AnalyzeOptions};
use agorad::domain::{parse_domain, Domain, Limits};
use agorad::error::Error;
use agorad::search::{self, SearchBudget, SearchOutcome, SearchStatus};
use agorad::{algebra, blockedness, fixtures, AggregatorTuple};

/// Result of a fallible call. The first four values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgoradStatus {
    Ok = 0,
    /// A search ran out of budget; nothing was decided.
    Unknown = 1,
    InputError = 2,
    Capacity = 3,
    /// A search covered its whole space without finding a witness.
    NotFound = 4,
    NullArgument = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgoradWitnessKind {
    Binary = 0,
    Majority = 1,
    Minority = 2,
    Uniform = 3,
}

/// A parsed, validated domain.
pub struct AgoradDomain(Domain);

/// A verified aggregator.
pub struct AgoradAggregator(AggregatorTuple);

/// An analysis report.
pub struct AgoradReport(AnalysisReport);

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

fn status_of(e: &Error) -> AgoradStatus {
    match e {
        Error::Capacity(_) => AgoradStatus::Capacity,
        Error::Invariant(_) => AgoradStatus::Internal,
        _ => AgoradStatus::InputError,
    }
}

fn guard(f: impl FnOnce() -> Result<AgoradStatus, (AgoradStatus, String)>) -> AgoradStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside agorad");
            AgoradStatus::Internal
        }
    }
}

fn fail(e: Error) -> (AgoradStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_arg(name: &str) -> (AgoradStatus, String) {
    (AgoradStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (AgoradStatus, String)> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (AgoradStatus::InputError, format!("`{name}` is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

fn budget(max_nodes: u64, max_millis: u64) -> SearchBudget {
    let d = SearchBudget::default();
    SearchBudget {
        max_nodes: if max_nodes == 0 { d.max_nodes } else { max_nodes },
        max_millis: if max_millis == 0 { d.max_millis } else { max_millis },
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next agorad call on this thread.
#[no_mangle]
pub extern "C" fn agorad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn agorad_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates domain text. With `allow_large` the desk-scale
/// limits are lifted.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_parse(
    text: *const c_char,
    allow_large: bool,
    out: *mut *mut AgoradDomain,
) -> AgoradStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let text = str_arg(text, "text")?;
        let limits = if allow_large {
            Limits::unbounded()
        } else {
            Limits::default()
        };
        let d = parse_domain(text).map_err(fail)?.with_limits(limits);
        d.ensure_analyzable().map_err(fail)?;
        *out = Box::into_raw(Box::new(AgoradDomain(d)));
        Ok(AgoradStatus::Ok)
    })
}

/// Loads a built-in domain by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_fixture(
    name: *const c_char,
    out: *mut *mut AgoradDomain,
) -> AgoradStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let d = fixtures::by_name(str_arg(name, "name")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(AgoradDomain(d)));
        Ok(AgoradStatus::Ok)
    })
}

/// # Safety
/// `d` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_free(d: *mut AgoradDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of issues, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_issue_count(d: *const AgoradDomain) -> usize {
    d.as_ref().map_or(0, |d| d.0.issue_count())
}

/// Number of feasible tuples, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_feasible_count(d: *const AgoradDomain) -> usize {
    d.as_ref().map_or(0, |d| d.0.rows().len())
}

/// Canonical domain text, or null for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agorad_domain_serialize(d: *const AgoradDomain) -> *mut c_char {
    d.as_ref().map_or(ptr::null_mut(), |d| into_c_string(d.0.serialize()))
}

/// Full analysis. Zero budgets select the defaults. Returns `Unknown` (with
/// the report still written) when a decision was left open.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_analyze(
    d: *const AgoradDomain,
    max_nodes: u64,
    max_millis: u64,
    validate: bool,
    out: *mut *mut AgoradReport,
) -> AgoradStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null_arg("domain"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let options = AnalyzeOptions {
            budget: budget(max_nodes, max_millis),
            validate,
            ..AnalyzeOptions::default()
        };
        let report = classify::analyze(&d.0, options).map_err(fail)?;
        let unknown = report.has_unknown();
        *out = Box::into_raw(Box::new(AgoradReport(report)));
        Ok(if unknown {
            AgoradStatus::Unknown
        } else {
            AgoradStatus::Ok
        })
    })
}

/// The `key = value` report text.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agorad_report_text(r: *const AgoradReport) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| into_c_string(r.0.to_text()))
}

/// Value of one report key, or null if the key does not exist.
///
/// # Safety
/// `r` must be null or a live handle; `key` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn agorad_report_get(r: *const AgoradReport, key: *const c_char) -> *mut c_char {
    let (Some(r), Ok(key)) = (r.as_ref(), str_arg(key, "key")) else {
        return ptr::null_mut();
    };
    r.0.get(key).map_or(ptr::null_mut(), into_c_string)
}

/// # Safety
/// `r` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn agorad_report_free(r: *mut AgoradReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

unsafe fn write_witness(
    outcome: SearchOutcome,
    out: *mut *mut AgoradAggregator,
) -> Result<AgoradStatus, (AgoradStatus, String)> {
    match (outcome.status, outcome.witness) {
        (SearchStatus::Found, Some(w)) => {
            *out = Box::into_raw(Box::new(AgoradAggregator(w.into_tuple())));
            Ok(AgoradStatus::Ok)
        }
        (SearchStatus::BudgetExceeded, _) => Ok(AgoradStatus::Unknown),
        _ => Ok(AgoradStatus::NotFound),
    }
}

/// Searches for an aggregator of the given kind. `Ok` writes a handle;
/// `NotFound` means none exists of that kind; `Unknown` means the budget ran
/// out. Binary searches use the blockedness graph unless `direct` is set.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_witness(
    d: *const AgoradDomain,
    kind: AgoradWitnessKind,
    direct: bool,
    max_nodes: u64,
    max_millis: u64,
    out: *mut *mut AgoradAggregator,
) -> AgoradStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null_arg("domain"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let b = budget(max_nodes, max_millis);
        let outcome = match kind {
            AgoradWitnessKind::Binary => search::find_binary_nondictatorial(&d.0, direct, b),
            AgoradWitnessKind::Majority => search::find_majority(&d.0, b),
            AgoradWitnessKind::Minority => search::find_minority(&d.0, b),
            AgoradWitnessKind::Uniform => search::find_uniform(&d.0, b),
        }
        .map_err(fail)?;
        write_witness(outcome, out)
    })
}

/// Ternary aggregator whose component `issue` (1-based) is commutative on
/// the two values `u`, `v` of `X_issue`.
///
/// # Safety
/// `d` must be a live handle; `u`, `v` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_witness_component(
    d: *const AgoradDomain,
    issue: usize,
    u: *const c_char,
    v: *const c_char,
    max_nodes: u64,
    max_millis: u64,
    out: *mut *mut AgoradAggregator,
) -> AgoradStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null_arg("domain"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let m = d.0.issue_count();
        if issue == 0 || issue > m {
            return Err(fail(Error::IssueOutOfRange { index: issue, issues: m }));
        }
        let j = issue - 1;
        let local = |tok: &str| {
            d.0.local_of(j, tok).ok_or_else(|| {
                fail(Error::InvalidPair(format!("`{tok}` is not a value of X_{issue}")))
            })
        };
        let pair = (local(str_arg(u, "u")?)?, local(str_arg(v, "v")?)?);
        let outcome =
            search::find_component_nonprojection(&d.0, j, pair, budget(max_nodes, max_millis))
                .map_err(fail)?;
        write_witness(outcome, out)
    })
}

/// Arity of the aggregator, or 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn agorad_aggregator_arity(a: *const AgoradAggregator) -> usize {
    a.as_ref().map_or(0, |a| a.0.arity())
}

/// Witness text of `a` over `d`, or null on a null handle.
///
/// # Safety
/// `d` and `a` must be null or live handles, `a` obtained for `d`.
#[no_mangle]
pub unsafe extern "C" fn agorad_aggregator_serialize(
    d: *const AgoradDomain,
    a: *const AgoradAggregator,
) -> *mut c_char {
    match (d.as_ref(), a.as_ref()) {
        (Some(d), Some(a)) => into_c_string(algebra::serialize_witness(&d.0, &a.0)),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `a` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn agorad_aggregator_free(a: *mut AgoradAggregator) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// DOT text of the blockedness graph.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn agorad_graph_dot(d: *const AgoradDomain, out: *mut *mut c_char) -> AgoradStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null_arg("domain"))?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let g = blockedness::build_graph(&d.0).map_err(fail)?;
        *out = into_c_string(g.to_dot(&d.0));
        Ok(AgoradStatus::Ok)
    })
}
