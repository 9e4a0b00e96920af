//! C ABI over the `hardy_sobolev` crate.
//!
//! Objects cross the boundary as opaque handles created by `hs_*_new` style calls and
//! released with the matching `hs_*_free`. Every fallible call returns an [`HsStatus`];
//! the message of the most recent failure on the calling thread is available through
//! [`hs_last_error`]. Panics are caught at the boundary and reported as
//! [`HsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use hardy_sobolev::functionals::{hardy_quotient, hs_quotient, Params};
use hardy_sobolev::grid::{CylGrid, Grading, GridFunction, RadialGrid};
use hardy_sobolev::minimizer::{minimize_hs, DescentOptions, Init, MinimizationTrace};
use hardy_sobolev::rearrange::double_star;
use hardy_sobolev::sharp_constant::{eps_quotient_closed_form, hardy_constant};
use hardy_sobolev::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter tuple failed validation; the message names the clause.
    InvalidParams = 2,
    Domain = 3,
    Config = 4,
    Usage = 5,
    Degenerate = 6,
    Io = 7,
    Panic = 99,
}

/// Radial cell layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsGrading {
    Uniform = 0,
    /// `param` is the ratio between consecutive widths.
    Geometric = 1,
    /// `param` is the break radius.
    Split = 2,
    EqualMeasure = 3,
}

/// One radial factor: dimension, outer radius, cell count, layout.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsRadialSpec {
    pub dim: usize,
    pub r_max: f64,
    pub cells: usize,
    pub grading: HsGrading,
    pub param: f64,
}

pub struct HsGrid {
    inner: Arc<CylGrid>,
}

pub struct HsParams {
    inner: Params,
}

pub struct HsFunction {
    inner: GridFunction,
}

pub struct HsTrace {
    inner: MinimizationTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| {
        let mut bytes = msg.into_bytes();
        bytes.retain(|b| *b != 0);
        bytes.push(0);
        *e.borrow_mut() = bytes;
    });
}

fn status_of(err: &Error) -> HsStatus {
    match err {
        Error::Invalid(_) => HsStatus::InvalidParams,
        Error::Domain(_) => HsStatus::Domain,
        Error::Config(_) | Error::Toml(_) => HsStatus::Config,
        Error::Usage(_) => HsStatus::Usage,
        Error::Degenerate(_) => HsStatus::Degenerate,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => HsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            HsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length including the terminator; 0 if there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 && !msg.is_empty() {
            let n = msg.len().min(len);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        msg.len()
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// `p^p / (α + k)^p`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_hardy_constant(
    p: f64,
    alpha: f64,
    k: usize,
    out: *mut f64,
) -> HsStatus {
    guard(|| write(out, hardy_constant(p, alpha, k)?, "out"))
}

/// Closed-form Hardy quotient of the radial ε-family.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_eps_quotient(
    eps: f64,
    p: f64,
    alpha: f64,
    n: usize,
    out: *mut f64,
) -> HsStatus {
    guard(|| write(out, eps_quotient_closed_form(eps, p, alpha, n)?, "out"))
}

/// Validated Hardy parameters `(N, k, p, α)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_params_hardy(
    n: usize,
    k: usize,
    p: f64,
    alpha: f64,
    out: *mut *mut HsParams,
) -> HsStatus {
    guard(|| {
        let params = Params::hardy(n, k, p, alpha)?;
        write(out, boxed(HsParams { inner: params }), "out")
    })
}

/// Parameters under condition (H); `q` is derived.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_params_hardy_sobolev(
    n: usize,
    k: usize,
    p: f64,
    beta: f64,
    out: *mut *mut HsParams,
) -> HsStatus {
    guard(|| {
        let params = Params::hardy_sobolev(n, k, p, beta)?;
        write(out, boxed(HsParams { inner: params }), "out")
    })
}

/// The exponent `q` of a parameter handle, or NaN for null.
///
/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_params_q(params: *const HsParams) -> f64 {
    params.as_ref().map_or(f64::NAN, |p| p.inner.q)
}

/// # Safety
/// `params` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_params_free(params: *mut HsParams) {
    free(params)
}

fn radial(spec: &HsRadialSpec) -> Result<RadialGrid, Error> {
    let grading = match spec.grading {
        HsGrading::Uniform => Grading::Uniform,
        HsGrading::Geometric => Grading::Geometric { ratio: spec.param },
        HsGrading::Split => Grading::Split {
            r_break: spec.param,
        },
        HsGrading::EqualMeasure => Grading::EqualMeasure,
    };
    RadialGrid::new(spec.dim, spec.r_max, spec.cells, grading)
}

/// Cylindrical grid; pass `t = NULL` for a purely radial grid.
///
/// # Safety
/// `s` must be valid; `t` null or valid; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_grid_new(
    s: *const HsRadialSpec,
    t: *const HsRadialSpec,
    out: *mut *mut HsGrid,
) -> HsStatus {
    guard(|| {
        let s = radial(borrow(s, "s")?)?;
        let t = t.as_ref().map(radial).transpose()?;
        write(
            out,
            boxed(HsGrid {
                inner: Arc::new(CylGrid::new(s, t)?),
            }),
            "out",
        )
    })
}

/// Number of cells, or 0 for null.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_grid_len(grid: *const HsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_grid_free(grid: *mut HsGrid) {
    free(grid)
}

/// Grid function from `len` row-major values (`s` outer, `t` inner).
///
/// # Safety
/// `grid` must be live, `values` valid for `len` reads and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_function_new(
    grid: *const HsGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut HsFunction,
) -> HsStatus {
    guard(|| {
        let grid = borrow(grid, "grid")?;
        if values.is_null() {
            return Err(Fail::Null("values"));
        }
        let values = slice::from_raw_parts(values, len).to_vec();
        let f = GridFunction::new(grid.inner.clone(), values)?;
        write(out, boxed(HsFunction { inner: f }), "out")
    })
}

/// Copies up to `len` values into `buf`; returns the function's length (0 for null).
///
/// # Safety
/// `f` must be null or live; `buf` null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hs_function_values(
    f: *const HsFunction,
    buf: *mut f64,
    len: usize,
) -> usize {
    let Some(f) = f.as_ref() else { return 0 };
    let v = f.inner.values();
    if !buf.is_null() {
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len().min(len));
    }
    v.len()
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_function_free(f: *mut HsFunction) {
    free(f)
}

/// Hardy quotient `∫|∇u|^p|y|^{α+p} / ∫|u|^p|y|^α`.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_hardy_quotient(
    f: *const HsFunction,
    params: *const HsParams,
    out: *mut f64,
) -> HsStatus {
    guard(|| {
        let r = hardy_quotient(&borrow(f, "f")?.inner, &borrow(params, "params")?.inner)?;
        write(out, r.value, "out")
    })
}

/// Hardy–Sobolev quotient `∫|∇u|^p / (∫|u|^q|y|^{-β})^{p/q}`.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_sobolev_quotient(
    f: *const HsFunction,
    params: *const HsParams,
    out: *mut f64,
) -> HsStatus {
    guard(|| {
        let r = hs_quotient(&borrow(f, "f")?.inner, &borrow(params, "params")?.inner)?;
        write(out, r.value, "out")
    })
}

/// Schwarz symmetrization in `y`, then in `z`.
///
/// # Safety
/// `f` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_double_star(
    f: *const HsFunction,
    out: *mut *mut HsFunction,
) -> HsStatus {
    guard(|| {
        let g = double_star(&borrow(f, "f")?.inner)?;
        write(out, boxed(HsFunction { inner: g }), "out")
    })
}

/// Minimizes the Hardy–Sobolev quotient from the seeded perturbed bump
/// (`amplitude = 0` gives the plain bump).
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_minimize(
    params: *const HsParams,
    grid: *const HsGrid,
    tol: f64,
    max_iter: usize,
    seed: u64,
    amplitude: f64,
    out: *mut *mut HsTrace,
) -> HsStatus {
    guard(|| {
        let params = &borrow(params, "params")?.inner;
        let grid = borrow(grid, "grid")?.inner.clone();
        let opts = DescentOptions {
            tol,
            max_iter,
            ..DescentOptions::default()
        };
        let init = if amplitude == 0.0 {
            Init::Bump
        } else {
            Init::Perturbed { seed, amplitude }
        };
        let trace = minimize_hs(params, grid, &init, &opts)?;
        write(out, boxed(HsTrace { inner: trace }), "out")
    })
}

/// Final quotient of a trace, or NaN for null.
///
/// # Safety
/// `trace` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_quotient(trace: *const HsTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.inner.quotient)
}

/// Accepted iterations, excluding the initial state.
///
/// # Safety
/// `trace` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_iterations(trace: *const HsTrace) -> usize {
    trace
        .as_ref()
        .map_or(0, |t| t.inner.iterations.len().saturating_sub(1))
}

/// # Safety
/// `trace` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_converged(trace: *const HsTrace) -> bool {
    trace.as_ref().is_some_and(|t| t.inner.converged)
}

/// Copies the final iterate into a new function handle.
///
/// # Safety
/// `trace` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_final(
    trace: *const HsTrace,
    out: *mut *mut HsFunction,
) -> HsStatus {
    guard(|| {
        let f = borrow(trace, "trace")?.inner.final_u.clone();
        write(out, boxed(HsFunction { inner: f }), "out")
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_trace_free(trace: *mut HsTrace) {
    free(trace)
}
