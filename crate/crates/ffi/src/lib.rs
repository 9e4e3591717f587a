//! C ABI over the `lspace` core.
//!
//! Objects are opaque handles owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`LsStatus`];
//! on failure the message is available from [`ls_last_error_message`] on the
//! same thread. Strings handed out by the library are released with
//! [`ls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lspace::cli::{format_ribbon, parse_graph, parse_ribbon, CliError};
use lspace::f2sympl::{IndexSet, Lagrangian};
use lspace::homomap;
use lspace::matrixops::{interlace_polynomial, FramedGraphMatrix};
use lspace::ribbon::RibbonGraph;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Precondition = 4,
    Internal = 5,
}

/// Topological counts of a ribbon graph.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LsCounts {
    pub edges: usize,
    pub vertices: usize,
    pub boundary: usize,
    pub euler_characteristic: i64,
    pub orientable: bool,
}

/// Opaque ribbon graph.
pub struct LsRibbonGraph(RibbonGraph);

/// Opaque Lagrangian subspace.
pub struct LsLagrangian(Lagrangian);

/// Opaque framed graph matrix.
pub struct LsFramedMatrix(FramedGraphMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(LsStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Parse(_) => LsStatus::Parse,
            CliError::Precondition(_) => LsStatus::Precondition,
            CliError::Internal(_) => LsStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn domain<E>(e: E) -> Failure
where
    CliError: From<E>,
{
    CliError::from(e).into()
}

fn null(what: &str) -> Failure {
    Failure(LsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            LsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LsStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("input string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(LsStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let s = CString::new(s).map_err(|e| Failure(LsStatus::Internal, e.to_string()))?;
    *out = s.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a ribbon file (`ribbon` / `edges` / `twist` / `vertex` lines).
///
/// # Safety
/// `text_in` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_parse(text_in: *const c_char, out: *mut *mut LsRibbonGraph) -> LsStatus {
    guard(|| {
        let rs = parse_ribbon(text(text_in)?)?;
        emit(out, LsRibbonGraph(RibbonGraph::from_rotation(&rs)))
    })
}

/// Releases a ribbon graph. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_free(g: *mut LsRibbonGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Edge, vertex and boundary counts, Euler characteristic and orientability.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_counts(g: *const LsRibbonGraph, out: *mut LsCounts) -> LsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = LsCounts {
            edges: g.edge_count(),
            vertices: g.vertex_count(),
            boundary: g.boundary_count(),
            euler_characteristic: g.euler_characteristic(),
            orientable: g.is_orientable(),
        };
        Ok(())
    })
}

/// Partial dual with respect to the 1-based edge labels in `edges[0..len]`.
///
/// # Safety
/// `g` must be a live handle, `edges` must point to `len` values (or be null
/// when `len` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_partial_dual(
    g: *const LsRibbonGraph,
    edges: *const usize,
    len: usize,
    out: *mut *mut LsRibbonGraph,
) -> LsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let labels = match len {
            0 => &[][..],
            _ if edges.is_null() => return Err(null("edge list")),
            _ => std::slice::from_raw_parts(edges, len),
        };
        let n = g.edge_count();
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > n) {
            return Err(Failure(LsStatus::Precondition, format!("edge {bad} out of range 1..={n}")));
        }
        emit(out, LsRibbonGraph(g.partial_dual(IndexSet::from_indices(labels.iter().copied()))))
    })
}

/// Applies the first (`kind == 1`) or second (`kind == 2`) move at `arc`.
/// `fixed` names the fixed edge of the second move and is ignored otherwise.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_vassiliev(
    g: *const LsRibbonGraph,
    kind: u32,
    arc: usize,
    fixed: usize,
    out: *mut *mut LsRibbonGraph,
) -> LsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let moved = match kind {
            1 => g.vassiliev1(arc),
            2 => g.vassiliev2(arc, fixed),
            _ => return Err(Failure(LsStatus::Precondition, format!("move kind {kind} is not 1 or 2"))),
        };
        emit(out, LsRibbonGraph(moved.map_err(domain)?))
    })
}

/// The L-space of a ribbon graph.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_lspace(g: *const LsRibbonGraph, out: *mut *mut LsLagrangian) -> LsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        emit(out, LsLagrangian(homomap::lspace(g).map_err(domain)?))
    })
}

/// The framed intersection matrix of a one-vertex ribbon graph.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_intersection_matrix(
    g: *const LsRibbonGraph,
    out: *mut *mut LsFramedMatrix,
) -> LsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        emit(out, LsFramedMatrix(homomap::intersection_matrix(g).map_err(domain)?))
    })
}

/// Serializes a ribbon graph in the ribbon file format.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_ribbon_to_text(g: *const LsRibbonGraph, out: *mut *mut c_char) -> LsStatus {
    guard(|| emit_string(out, format_ribbon(&handle(g, "graph")?.0.to_rotation())))
}

/// Releases a Lagrangian. Null is ignored.
///
/// # Safety
/// `l` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_lagrangian_free(l: *mut LsLagrangian) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Grade (half the ambient dimension) of a Lagrangian, or 0 for null.
///
/// # Safety
/// `l` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_lagrangian_grade(l: *const LsLagrangian) -> usize {
    l.as_ref().map_or(0, |l| l.0.grade())
}

/// Basis rows as text, one `e-block|f-block` row per line.
///
/// # Safety
/// `l` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_lagrangian_to_text(l: *const LsLagrangian, out: *mut *mut c_char) -> LsStatus {
    guard(|| emit_string(out, handle(l, "lagrangian")?.0.to_string()))
}

/// Parses a graph file (`graph` / `vertices` / `frame` / `edge` lines).
///
/// # Safety
/// `text_in` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_matrix_parse(text_in: *const c_char, out: *mut *mut LsFramedMatrix) -> LsStatus {
    guard(|| emit(out, LsFramedMatrix(parse_graph(text(text_in)?)?)))
}

/// Releases a framed matrix. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ls_matrix_free(m: *mut LsFramedMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Rows of the matrix as space-separated bits.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_matrix_to_text(m: *const LsFramedMatrix, out: *mut *mut c_char) -> LsStatus {
    guard(|| emit_string(out, handle(m, "matrix")?.0.to_string()))
}

/// The interlace polynomial in `x` and `y`, e.g. `x^2 - 2x + 2y`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_matrix_interlace(m: *const LsFramedMatrix, out: *mut *mut c_char) -> LsStatus {
    guard(|| {
        let q = interlace_polynomial(&handle(m, "matrix")?.0).map_err(domain)?;
        emit_string(out, q.to_string())
    })
}
