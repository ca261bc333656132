//! C interface to `pebbling`.
//!
//! Graphs and reports are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a `PebStatus`;
//! on failure `peb_last_error` describes the problem. Strings returned
//! through out-parameters are freed with `peb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use pebbling::generate::{generate, InstanceSpec};
use pebbling::io::{parse_dag, parse_schedule, write_schedule, NamedDag};
use pebbling::schedule::{simulate, PebbleMetrics};
use pebbling::schedulers::{ScheduleError, SchedulerReport, Strategy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PebStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidSpec = 4,
    UnknownStrategy = 5,
    /// The strategy does not apply to this graph.
    Precondition = 6,
    ScheduleFailed = 7,
    IllegalMove = 8,
    NotFull = 9,
    Panic = 10,
}

/// A parsed or generated DAG.
pub struct PebDag {
    graph: Arc<NamedDag>,
}

/// A schedule with its bounds and simulated metrics.
pub struct PebReport {
    graph: Arc<NamedDag>,
    report: SchedulerReport,
    metrics: PebbleMetrics,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let s = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn fail(status: PebStatus, msg: impl Into<Vec<u8>>) -> PebStatus {
    set_error(msg);
    status
}

fn guarded(f: impl FnOnce() -> PebStatus) -> PebStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == PebStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(PebStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, PebStatus> {
    if p.is_null() {
        return Err(fail(PebStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PebStatus::InvalidUtf8, "string is not valid UTF-8"))
}

fn export_string(s: String, out: *mut *mut c_char) -> PebStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            PebStatus::Ok
        }
        Err(_) => fail(PebStatus::InvalidUtf8, "output contains a nul byte"),
    }
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn peb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses an edge list or DOT text into `*out`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn peb_dag_parse(text: *const c_char, out: *mut *mut PebDag) -> PebStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PebStatus::NullArgument, "null out pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_dag(text) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(PebDag { graph: Arc::new(g) }));
                PebStatus::Ok
            }
            Err(e) => fail(PebStatus::ParseError, e.to_string()),
        }
    })
}

/// Generates an instance from a spec such as `grid:width=4,height=3,seed=1`.
///
/// # Safety
/// `spec` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn peb_dag_generate(spec: *const c_char, out: *mut *mut PebDag) -> PebStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PebStatus::NullArgument, "null out pointer");
        }
        let spec = match read_str(spec) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let dag = spec.parse::<InstanceSpec>().and_then(|s| generate(&s));
        match dag {
            Ok(dag) => {
                *out = Box::into_raw(Box::new(PebDag { graph: Arc::new(NamedDag::with_ids(dag)) }));
                PebStatus::Ok
            }
            Err(e) => fail(PebStatus::InvalidSpec, e.to_string()),
        }
    })
}

/// # Safety
/// `dag` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn peb_dag_free(dag: *mut PebDag) {
    if !dag.is_null() {
        drop(Box::from_raw(dag));
    }
}

/// # Safety
/// `dag` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_dag_vertex_count(dag: *const PebDag) -> usize {
    dag.as_ref().map_or(0, |d| d.graph.dag.vertex_count())
}

/// # Safety
/// `dag` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_dag_edge_count(dag: *const PebDag) -> usize {
    dag.as_ref().map_or(0, |d| d.graph.dag.edge_count())
}

/// # Safety
/// `dag` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_dag_max_in_degree(dag: *const PebDag) -> usize {
    dag.as_ref().map_or(0, |d| d.graph.dag.max_in_degree())
}

/// Runs the strategy named by `strategy` (e.g. `general`, `budget=3/2`) and
/// simulates the result.
///
/// # Safety
/// `dag` must be a live handle, `strategy` a nul-terminated string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn peb_schedule(
    dag: *const PebDag,
    strategy: *const c_char,
    out: *mut *mut PebReport,
) -> PebStatus {
    guarded(|| {
        let (Some(dag), false) = (dag.as_ref(), out.is_null()) else {
            return fail(PebStatus::NullArgument, "null dag or out pointer");
        };
        let tag = match read_str(strategy) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let strategy: Strategy = match tag.parse() {
            Ok(s) => s,
            Err(e) => return fail(PebStatus::UnknownStrategy, e.to_string()),
        };
        let g = &dag.graph;
        let report = match strategy.run(&g.dag) {
            Ok(r) => r,
            Err(e @ ScheduleError::Precondition(_)) => return fail(PebStatus::Precondition, e.to_string()),
            Err(e) => return fail(PebStatus::ScheduleFailed, e.to_string()),
        };
        let metrics = match simulate(&g.dag, &report.schedule) {
            Ok(m) => m,
            Err(e) => return fail(PebStatus::IllegalMove, e.to_string()),
        };
        *out = Box::into_raw(Box::new(PebReport { graph: g.clone(), report, metrics }));
        PebStatus::Ok
    })
}

/// # Safety
/// `report` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn peb_report_free(report: *mut PebReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Guaranteed upper bound on the peak pebble count.
///
/// # Safety
/// `report` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_report_space_bound(report: *const PebReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.space_bound)
}

/// Writes the move bound to `*out` and returns true when the strategy claims
/// one that fits in 64 bits.
///
/// # Safety
/// `report` must be a live handle or null; `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn peb_report_move_bound(report: *const PebReport, out: *mut u64) -> bool {
    match report.as_ref().and_then(|r| r.report.move_bound).and_then(|t| u64::try_from(t).ok()) {
        Some(t) if !out.is_null() => {
            *out = t;
            true
        }
        _ => false,
    }
}

/// Simulated peak pebble count.
///
/// # Safety
/// `report` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_report_peak(report: *const PebReport) -> usize {
    report.as_ref().map_or(0, |r| r.metrics.peak)
}

/// Simulated move count.
///
/// # Safety
/// `report` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn peb_report_moves(report: *const PebReport) -> u64 {
    report.as_ref().map_or(0, |r| r.metrics.moves)
}

/// The schedule as `P v` / `S u v` / `R v` lines, using vertex names.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn peb_report_schedule_text(report: *const PebReport, out: *mut *mut c_char) -> PebStatus {
    guarded(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(PebStatus::NullArgument, "null report or out pointer");
        };
        let mut buf = Vec::new();
        write_schedule(&mut buf, &r.report.schedule, &r.graph).expect("writing to memory");
        export_string(String::from_utf8(buf).expect("names are UTF-8"), out)
    })
}

/// Checks a schedule given as text. Returns `Ok` when it is legal and
/// pebbles every vertex, `IllegalMove` or `NotFull` otherwise; peak and move
/// count are written when the schedule is legal and the pointers are non-null.
///
/// # Safety
/// `dag` must be a live handle and `schedule` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn peb_verify(
    dag: *const PebDag,
    schedule: *const c_char,
    out_peak: *mut usize,
    out_moves: *mut u64,
) -> PebStatus {
    guarded(|| {
        let Some(dag) = dag.as_ref() else {
            return fail(PebStatus::NullArgument, "null dag");
        };
        let text = match read_str(schedule) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let g = &dag.graph;
        let s = match parse_schedule(text, g) {
            Ok(s) => s,
            Err(e) => return fail(PebStatus::ParseError, e.to_string()),
        };
        let m = match simulate(&g.dag, &s) {
            Ok(m) => m,
            Err(e) => return fail(PebStatus::IllegalMove, e.to_string()),
        };
        if !out_peak.is_null() {
            *out_peak = m.peak;
        }
        if !out_moves.is_null() {
            *out_moves = m.moves;
        }
        if m.is_full(&g.dag) {
            PebStatus::Ok
        } else {
            fail(PebStatus::NotFull, format!("{} vertices never pebbled", g.dag.vertex_count() - m.covered.len()))
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn peb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
