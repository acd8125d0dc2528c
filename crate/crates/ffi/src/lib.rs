//! C ABI over `critgraph`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every fallible call returns a [`CgStatus`]; the message
//! of the last failure on the calling thread is available from
//! [`cg_last_error`]. Vertex labels are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use critgraph::degrees::{ChildSequence, DegreeSequence};
use critgraph::exact::{enumerate, wright_ratio};
use critgraph::graphs::{component_census, sample_cm, sample_connected, sample_simple, MultiGraph};
use critgraph::limits::area_moment;
use critgraph::plane_tree::{sample_tree, PlaneTree};
use critgraph::rng::{rng_from_seed, SimRng};
use critgraph::surgery::PairSetRule;
use critgraph::vacant::vacant_critical;
use critgraph::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotTenable = 3,
    BudgetExceeded = 4,
    AttemptsExhausted = 5,
    BufferTooSmall = 6,
    Panic = 7,
    Internal = 8,
}

/// Seeded generator.
pub struct CgRng(SimRng);

/// Multigraph on vertices `0..n`.
pub struct CgGraph(MultiGraph);

/// Plane tree in depth-first order, root 0.
pub struct CgTree(PlaneTree);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> CgStatus {
    match err {
        Error::NotTenable(_) | Error::NoDegreeOne => CgStatus::NotTenable,
        Error::BudgetExceeded(_) => CgStatus::BudgetExceeded,
        Error::AttemptsExhausted(_) => CgStatus::AttemptsExhausted,
        Error::Io(_) | Error::Json(_) => CgStatus::Internal,
        _ => CgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), CgStatus>) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside critgraph");
            CgStatus::Panic
        }
    }
}

fn check<T>(r: critgraph::Result<T>) -> Result<T, CgStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> CgStatus {
    set_error("null pointer argument");
    CgStatus::NullPointer
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], CgStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn degrees(p: *const u32, len: usize) -> Result<DegreeSequence, CgStatus> {
    check(DegreeSequence::new(slice(p, len)?.to_vec()))
}

unsafe fn rng_mut<'a>(rng: *mut CgRng) -> Result<&'a mut SimRng, CgStatus> {
    rng.as_mut().map(|r| &mut r.0).ok_or_else(null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), CgStatus> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn cg_rng_new(seed: u64) -> *mut CgRng {
    Box::into_raw(Box::new(CgRng(rng_from_seed(seed))))
}

/// # Safety
/// `rng` must come from [`cg_rng_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_rng_free(rng: *mut CgRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Configuration model multigraph with degrees `degrees[0..n]`.
///
/// # Safety
/// `degrees` must point to `n` values; `rng` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_sample_cm(
    degrees_ptr: *const u32,
    n: usize,
    rng: *mut CgRng,
    out: *mut *mut CgGraph,
) -> CgStatus {
    guard(|| {
        let d = degrees(degrees_ptr, n)?;
        let g = check(sample_cm(&d, rng_mut(rng)?))?;
        put(out, CgGraph(g))
    })
}

/// Uniform simple graph; `attempts` (may be null) receives the number of
/// configuration-model draws used.
///
/// # Safety
/// As for [`cg_sample_cm`]; `attempts` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn cg_sample_simple(
    degrees_ptr: *const u32,
    n: usize,
    max_attempts: u64,
    rng: *mut CgRng,
    out: *mut *mut CgGraph,
    attempts: *mut u64,
) -> CgStatus {
    guard(|| {
        let d = degrees(degrees_ptr, n)?;
        let s = check(sample_simple(&d, rng_mut(rng)?, max_attempts))?;
        if !attempts.is_null() {
            *attempts = s.attempts;
        }
        put(out, CgGraph(s.graph))
    })
}

/// Uniform connected simple graph with surplus `k`; some vertex needs degree 1.
///
/// # Safety
/// As for [`cg_sample_cm`].
#[no_mangle]
pub unsafe extern "C" fn cg_sample_connected(
    degrees_ptr: *const u32,
    n: usize,
    k: usize,
    rng: *mut CgRng,
    out: *mut *mut CgGraph,
) -> CgStatus {
    guard(|| {
        let d = degrees(degrees_ptr, n)?;
        let g = check(sample_connected(&d, k, rng_mut(rng)?))?;
        put(out, CgGraph(g))
    })
}

/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_vertex_count(g: *const CgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_edge_count(g: *const CgGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edges().len())
}

/// Writes the edges as `2 * edge_count` endpoints into `out[0..capacity]`.
///
/// # Safety
/// `g` live; `out` points to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_edges(
    g: *const CgGraph,
    out: *mut u32,
    capacity: usize,
) -> CgStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(null)?;
        let need = 2 * g.0.edges().len();
        if capacity < need {
            set_error(format!("need room for {need} endpoints"));
            return Err(CgStatus::BufferTooSmall);
        }
        if need > 0 && out.is_null() {
            return Err(null());
        }
        for (i, &(a, b)) in g.0.edges().iter().enumerate() {
            *out.add(2 * i) = a;
            *out.add(2 * i + 1) = b;
        }
        Ok(())
    })
}

/// Size of the largest connected component.
///
/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_largest_component(g: *const CgGraph) -> usize {
    g.as_ref()
        .map_or(0, |g| component_census(&g.0).largest_size())
}

/// # Safety
/// `g` must come from a sampler and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_graph_free(g: *mut CgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Uniform plane tree; `children[i]` is the children count of vertex `i`.
///
/// # Safety
/// `children` points to `m` values; `rng` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_sample_tree(
    children: *const u32,
    m: usize,
    rng: *mut CgRng,
    out: *mut *mut CgTree,
) -> CgStatus {
    guard(|| {
        let cs = ChildSequence::new(slice(children, m)?.to_vec());
        let t = check(sample_tree(&cs, rng_mut(rng)?))?;
        put(out, CgTree(t))
    })
}

/// # Safety
/// `t` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn cg_tree_len(t: *const CgTree) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Parent of every vertex in depth-first order; the root gets -1.
///
/// # Safety
/// `t` live; `out` points to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn cg_tree_parents(
    t: *const CgTree,
    out: *mut i64,
    capacity: usize,
) -> CgStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(null)?;
        if capacity < t.0.len() {
            set_error(format!("need room for {} parents", t.0.len()));
            return Err(CgStatus::BufferTooSmall);
        }
        if out.is_null() {
            return Err(null());
        }
        for v in 0..t.0.len() {
            *out.add(v) = t.0.parent(v).map_or(-1, |p| p as i64);
        }
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`cg_sample_tree`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_tree_free(t: *mut CgTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Exact counts for `(degrees, k)` as a JSON object; release the string with
/// [`cg_string_free`].
///
/// # Safety
/// `degrees_ptr` points to `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_enumerate_json(
    degrees_ptr: *const u32,
    n: usize,
    k: usize,
    out: *mut *mut c_char,
) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let d = degrees(degrees_ptr, n)?;
        let r = check(enumerate(&d, k, PairSetRule::SimpleSurgery))?;
        let s = check(serde_json::to_string(&r).map_err(Error::from))?;
        *out = CString::new(s).map_err(|_| CgStatus::Internal)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Wright ratio as a float.
///
/// # Safety
/// `degrees_ptr` points to `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_wright_ratio(
    degrees_ptr: *const u32,
    n: usize,
    k: usize,
    out: *mut f64,
) -> CgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let d = degrees(degrees_ptr, n)?;
        *out = check(wright_ratio(&d, k))?.value;
        Ok(())
    })
}

/// Monte Carlo `E[(∫e)^k]` on a grid of `2 * grid` steps.
///
/// # Safety
/// `value` and `standard_error` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_area_moment(
    k: u32,
    grid: usize,
    samples: usize,
    seed: u64,
    value: *mut f64,
    standard_error: *mut f64,
) -> CgStatus {
    guard(|| {
        if value.is_null() || standard_error.is_null() {
            return Err(null());
        }
        let e = check(area_moment(k, grid, samples, seed))?;
        *value = e.value;
        *standard_error = e.standard_error;
        Ok(())
    })
}

/// `u★` and `p_vac` for random `r`-regular graphs.
///
/// # Safety
/// `u_star` and `p_vac` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_vacant_critical(r: u32, u_star: *mut f64, p_vac: *mut f64) -> CgStatus {
    guard(|| {
        if u_star.is_null() || p_vac.is_null() {
            return Err(null());
        }
        let c = check(vacant_critical(r, 0.0))?;
        *u_star = c.u_star;
        *p_vac = c.p_vac;
        Ok(())
    })
}

/// Copy of the last error message, for callers that prefer owned strings.
pub fn last_error_string() -> String {
    // SAFETY: the pointer refers to the thread-local CString just read
    unsafe { CStr::from_ptr(cg_last_error()) }
        .to_string_lossy()
        .into_owned()
}
