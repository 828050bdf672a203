//! C ABI for the catquery engine.
//!
//! Categories and results are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`CqStatus`]; on failure the message is available from
//! [`cq_last_error`] until the next failing call on the same thread.
//! Strings returned through out-parameters are allocated here and must be
//! released with [`cq_string_free`]; strings returned directly are borrowed
//! from their handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catquery::compile::CompileOptions;
use catquery::io::{category_from_json_str, category_to_json_string, load_workspace, relation_to_json_lines};
use catquery::pipeline::{compile_source, run_source, QueryError};
use catquery::InstanceCategory;

/// Result codes. Query errors follow the command-line exit codes' split
/// between parse/safety, compile and runtime failures.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Reading or decoding input data failed.
    Load = 3,
    /// The query does not parse, or is not safe.
    Parse = 4,
    Compile = 5,
    Runtime = 6,
    OutOfRange = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// A loaded instance category.
pub struct CqCategory {
    inner: InstanceCategory,
}

/// A query result with its cells rendered as text.
pub struct CqRelation {
    columns: Vec<CString>,
    cells: Vec<Vec<CString>>,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: CqStatus, message: impl Into<String>) -> CqStatus {
    set_error(message);
    status
}

fn guarded(f: impl FnOnce() -> CqStatus) -> CqStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CqStatus::Internal, "internal error"))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, CqStatus> {
    if s.is_null() {
        return Err(fail(CqStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CqStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

fn query_status(e: &QueryError, src: &str) -> CqStatus {
    let status = match e {
        QueryError::Parse(_) | QueryError::Unsafe(_) => CqStatus::Parse,
        QueryError::Compile(_) => CqStatus::Compile,
        QueryError::Eval(_) => CqStatus::Runtime,
    };
    fail(status, e.diagnostic(src))
}

/// The library version, as a static string.
#[no_mangle]
pub extern "C" fn cq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message of the last failure on this thread (empty if none). Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a workspace file (TOML or JSON sources list) or a category JSON
/// file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_category_load(path: *const c_char, out: *mut *mut CqCategory) -> CqStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CqStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let path = match text(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_workspace(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CqCategory { inner }));
                CqStatus::Ok
            }
            Err(e) => fail(CqStatus::Load, e.to_string()),
        }
    })
}

/// Builds a category from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_category_from_json(json: *const c_char, out: *mut *mut CqCategory) -> CqStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CqStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let json = match text(json) {
            Ok(j) => j,
            Err(s) => return s,
        };
        match category_from_json_str(json) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CqCategory { inner }));
                CqStatus::Ok
            }
            Err(e) => fail(CqStatus::Load, e.to_string()),
        }
    })
}

/// Writes the category as JSON into a new string.
///
/// # Safety
/// `cat` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_category_to_json(cat: *const CqCategory, out: *mut *mut c_char) -> CqStatus {
    guarded(|| {
        if cat.is_null() || out.is_null() {
            return fail(CqStatus::NullArgument, "null argument");
        }
        *out = c_string(category_to_json_string(&(*cat).inner)).into_raw();
        CqStatus::Ok
    })
}

/// Number of objects, or 0 for a null handle.
///
/// # Safety
/// `cat` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cq_category_object_count(cat: *const CqCategory) -> usize {
    cat.as_ref().map_or(0, |c| c.inner.objects().len())
}

/// # Safety
/// `cat` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn cq_category_free(cat: *mut CqCategory) {
    if !cat.is_null() {
        drop(Box::from_raw(cat));
    }
}

/// Parses, compiles and evaluates a query.
///
/// # Safety
/// `cat` must come from this library, `query` must be a NUL-terminated
/// string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_query_run(cat: *const CqCategory, query: *const c_char, out: *mut *mut CqRelation) -> CqStatus {
    guarded(|| {
        if cat.is_null() || out.is_null() {
            return fail(CqStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let src = match text(query) {
            Ok(q) => q,
            Err(s) => return s,
        };
        let cat = &(*cat).inner;
        match run_source(src, cat, &CompileOptions::default()) {
            Ok(rel) => {
                let columns = rel.columns().iter().map(|c| c_string(c.var.clone())).collect();
                let cells = rel
                    .rows()
                    .iter()
                    .map(|r| r.iter().map(|id| c_string(cat.display_element(id))).collect())
                    .collect();
                let json = c_string(relation_to_json_lines(&rel, cat));
                *out = Box::into_raw(Box::new(CqRelation { columns, cells, json }));
                CqStatus::Ok
            }
            Err(e) => query_status(&e, src),
        }
    })
}

/// Compiles a query and writes the plan text into a new string.
///
/// # Safety
/// As [`cq_query_run`], with `out` receiving a string.
#[no_mangle]
pub unsafe extern "C" fn cq_query_compile(cat: *const CqCategory, query: *const c_char, out: *mut *mut c_char) -> CqStatus {
    guarded(|| {
        if cat.is_null() || out.is_null() {
            return fail(CqStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let src = match text(query) {
            Ok(q) => q,
            Err(s) => return s,
        };
        match compile_source(src, &(*cat).inner, &CompileOptions::default()) {
            Ok(plan) => {
                *out = c_string(plan.to_text()).into_raw();
                CqStatus::Ok
            }
            Err(e) => query_status(&e, src),
        }
    })
}

/// # Safety
/// `rel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_row_count(rel: *const CqRelation) -> usize {
    rel.as_ref().map_or(0, |r| r.cells.len())
}

/// # Safety
/// `rel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_column_count(rel: *const CqRelation) -> usize {
    rel.as_ref().map_or(0, |r| r.columns.len())
}

/// The name of column `i`, borrowed from `rel`; null if out of range.
///
/// # Safety
/// `rel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_column_name(rel: *const CqRelation, i: usize) -> *const c_char {
    rel.as_ref()
        .and_then(|r| r.columns.get(i))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// The element in `row`, `col`, shown by label, borrowed from `rel`.
///
/// # Safety
/// `rel` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_cell(rel: *const CqRelation, row: usize, col: usize, out: *mut *const c_char) -> CqStatus {
    if rel.is_null() || out.is_null() {
        return fail(CqStatus::NullArgument, "null argument");
    }
    let rel = &*rel;
    match rel.cells.get(row).and_then(|r| r.get(col)) {
        Some(c) => {
            *out = c.as_ptr();
            CqStatus::Ok
        }
        None => fail(CqStatus::OutOfRange, format!("no cell ({row}, {col})")),
    }
}

/// The result as JSON lines, borrowed from `rel`.
///
/// # Safety
/// `rel` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_json(rel: *const CqRelation) -> *const c_char {
    rel.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `rel` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn cq_relation_free(rel: *mut CqRelation) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// Releases a string returned through an out-parameter.
///
/// # Safety
/// `s` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn cq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
