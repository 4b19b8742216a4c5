//! C ABI over `behavior-metrics`.
//!
//! Subspaces and behaviors cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`BmStatus`]; on failure a message is available from
//! [`bm_last_error`] on the same thread. Matrices are exchanged as dense
//! `double` buffers: subspace bases column-major, trajectories sample-major.
//! A negative `rel_tol` selects the automatic rank tolerance.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use behavior_metrics::behaviors::{
    behavior_from_data, behavior_from_kernel, complexity, integer_invariants, FiniteHorizonBehavior, KernelRep,
    Trajectory,
};
use behavior_metrics::linalg::{orthonormal_basis, principal_angles, RankTolerance, Subspace};
use behavior_metrics::metrics::{distance, l_gap, premetric, MetricKind};
use behavior_metrics::modeling::{misfit, utility, Dataset};
use behavior_metrics::Error;
use nalgebra::DMatrix;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmStatus {
    Ok = 0,
    InvalidInput = 1,
    DimensionMismatch = 2,
    InsufficientData = 3,
    Falsified = 4,
    Config = 5,
    Parse = 6,
    Io = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmMetric {
    Chordal = 0,
    Grassmann = 1,
    Procrustes = 2,
}

impl From<BmMetric> for MetricKind {
    fn from(m: BmMetric) -> Self {
        match m {
            BmMetric::Chordal => MetricKind::Chordal,
            BmMetric::Grassmann => MetricKind::Grassmann,
            BmMetric::Procrustes => MetricKind::Procrustes,
        }
    }
}

/// Opaque subspace handle.
pub struct BmSubspace(Subspace);

/// Opaque finite-horizon behavior handle.
pub struct BmBehavior(FiniteHorizonBehavior);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BmStatus {
    match e {
        Error::InvalidInput(_) => BmStatus::InvalidInput,
        Error::DimensionMismatch { .. } => BmStatus::DimensionMismatch,
        Error::InsufficientData(_) => BmStatus::InsufficientData,
        Error::Falsified { .. } => BmStatus::Falsified,
        Error::Config(_) => BmStatus::Config,
        Error::Parse(_) => BmStatus::Parse,
        Error::Io(_) => BmStatus::Io,
    }
}

/// Internal failure: either a library error or an FFI-level problem.
enum Fail {
    Lib(Error),
    Status(BmStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null_ptr(what: &str) -> Fail {
    Fail::Status(BmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BmStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let (status, message) = match outcome {
        Ok(Ok(())) => return BmStatus::Ok,
        Ok(Err(Fail::Lib(e))) => (status_of(&e), e.to_string()),
        Ok(Err(Fail::Status(s, m))) => (s, m),
        Err(_) => (BmStatus::Panic, "internal panic".to_string()),
    };
    set_last_error(message);
    status
}

fn tolerance(rel_tol: f64) -> RankTolerance {
    if rel_tol < 0.0 {
        RankTolerance::Auto
    } else {
        RankTolerance::Relative(rel_tol)
    }
}

/// # Safety
/// `data` must be valid for `len` reads unless `len` is zero.
unsafe fn input<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null_ptr(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

fn checked_len(a: usize, b: usize) -> Result<usize, Fail> {
    a.checked_mul(b)
        .ok_or_else(|| Fail::Status(BmStatus::InvalidInput, "buffer size overflows".into()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null_ptr(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null_ptr("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn store_value<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null_ptr("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn trajectory(samples: *const f64, len: usize, q: usize) -> Result<Trajectory, Fail> {
    let values = input(samples, checked_len(len, q)?, "samples")?;
    Ok(Trajectory::new(q, values.to_vec())?)
}

unsafe fn kernel(coeffs: *const f64, p: usize, q: usize, degree: usize) -> Result<KernelRep, Fail> {
    let block = checked_len(p, q)?;
    let count = degree
        .checked_add(1)
        .ok_or_else(|| Fail::Status(BmStatus::InvalidInput, "degree overflows".into()))?;
    let values = input(coeffs, checked_len(block, count)?, "coefficients")?;
    let mats = (0..count)
        .map(|i| DMatrix::from_row_slice(p, q, &values[i * block..(i + 1) * block]))
        .collect();
    Ok(KernelRep::new(mats)?)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Orthonormal basis of the column space of a column-major `rows × cols` matrix.
///
/// # Safety
/// `data` must hold `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_from_columns(
    data: *const f64,
    rows: usize,
    cols: usize,
    rel_tol: f64,
    out: *mut *mut BmSubspace,
) -> BmStatus {
    guard(|| {
        let values = input(data, checked_len(rows, cols)?, "data")?;
        let m = DMatrix::from_column_slice(rows, cols, values);
        store(out, BmSubspace(orthonormal_basis(&m, tolerance(rel_tol))?))
    })
}

/// # Safety
/// `s` must be NULL or a handle obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_free(s: *mut BmSubspace) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension of the subspace; 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_dim(s: *const BmSubspace) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Ambient dimension; 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_ambient_dim(s: *const BmSubspace) -> usize {
    s.as_ref().map_or(0, |s| s.0.ambient_dim())
}

/// Copies the column-major `ambient × dim` basis into `out`.
///
/// # Safety
/// `s` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_basis(s: *const BmSubspace, out: *mut f64, capacity: usize) -> BmStatus {
    guard(|| {
        let s = handle(s, "subspace")?;
        let basis = s.0.basis().as_slice();
        if capacity < basis.len() {
            return Err(Fail::Status(
                BmStatus::BufferTooSmall,
                format!("basis needs {} doubles, buffer holds {capacity}", basis.len()),
            ));
        }
        if !basis.is_empty() {
            if out.is_null() {
                return Err(null_ptr("output buffer"));
            }
            ptr::copy_nonoverlapping(basis.as_ptr(), out, basis.len());
        }
        Ok(())
    })
}

/// Zero-pads the subspace into `R^{n_target}`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bm_subspace_embed(
    s: *const BmSubspace,
    n_target: usize,
    out: *mut *mut BmSubspace,
) -> BmStatus {
    guard(|| {
        let s = handle(s, "subspace")?;
        store(out, BmSubspace(s.0.zero_pad(n_target)?))
    })
}

/// Writes the `min(dim a, dim b)` principal angles (ascending, radians) into
/// `out` and their count into `out_len`.
///
/// # Safety
/// Handles must be live; `out` valid for `capacity` writes; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_principal_angles(
    a: *const BmSubspace,
    b: *const BmSubspace,
    out: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> BmStatus {
    guard(|| {
        let (a, b) = (handle(a, "subspace a")?, handle(b, "subspace b")?);
        let angles = principal_angles(&a.0, &b.0)?;
        store_value(out_len, angles.len())?;
        if capacity < angles.len() {
            return Err(Fail::Status(
                BmStatus::BufferTooSmall,
                format!("{} angles do not fit in {capacity}", angles.len()),
            ));
        }
        if !angles.is_empty() {
            if out.is_null() {
                return Err(null_ptr("output buffer"));
            }
            ptr::copy_nonoverlapping(angles.angles().as_ptr(), out, angles.len());
        }
        Ok(())
    })
}

/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_premetric(
    metric: BmMetric,
    a: *const BmSubspace,
    b: *const BmSubspace,
    out: *mut f64,
) -> BmStatus {
    guard(|| {
        let (a, b) = (handle(a, "subspace a")?, handle(b, "subspace b")?);
        store_value(out, premetric(metric.into(), &a.0, &b.0)?)
    })
}

/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_distance(
    metric: BmMetric,
    a: *const BmSubspace,
    b: *const BmSubspace,
    out: *mut f64,
) -> BmStatus {
    guard(|| {
        let (a, b) = (handle(a, "subspace a")?, handle(b, "subspace b")?);
        store_value(out, distance(metric.into(), &a.0, &b.0)?)
    })
}

/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_l_gap(a: *const BmSubspace, b: *const BmSubspace, out: *mut f64) -> BmStatus {
    guard(|| {
        let (a, b) = (handle(a, "subspace a")?, handle(b, "subspace b")?);
        store_value(out, l_gap(&a.0, &b.0)?)
    })
}

/// Behavior spanned by the depth-`horizon` Hankel matrix of one trajectory
/// given as `len` samples of `q` values each.
///
/// # Safety
/// `samples` must hold `len * q` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_from_data(
    samples: *const f64,
    len: usize,
    q: usize,
    horizon: usize,
    rel_tol: f64,
    out: *mut *mut BmBehavior,
) -> BmStatus {
    guard(|| {
        let w = trajectory(samples, len, q)?;
        store(out, BmBehavior(behavior_from_data(&[w], horizon, tolerance(rel_tol))?))
    })
}

/// Behavior `ker R(σ)` restricted to `horizon` steps. `coeffs` holds
/// `degree + 1` row-major `p × q` blocks, `R_0` first.
///
/// # Safety
/// `coeffs` must hold `(degree + 1) * p * q` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_from_kernel(
    coeffs: *const f64,
    p: usize,
    q: usize,
    degree: usize,
    horizon: usize,
    out: *mut *mut BmBehavior,
) -> BmStatus {
    guard(|| {
        let r = kernel(coeffs, p, q, degree)?;
        store(out, BmBehavior(behavior_from_kernel(&r, horizon)?))
    })
}

/// Number of inputs, lag and order of a kernel representation (same layout
/// as [`bm_behavior_from_kernel`]).
///
/// # Safety
/// `coeffs` as for [`bm_behavior_from_kernel`]; output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn bm_kernel_invariants(
    coeffs: *const f64,
    p: usize,
    q: usize,
    degree: usize,
    num_inputs: *mut usize,
    lag: *mut usize,
    order: *mut usize,
) -> BmStatus {
    guard(|| {
        let inv = integer_invariants(&kernel(coeffs, p, q, degree)?)?;
        store_value(num_inputs, inv.num_inputs)?;
        store_value(lag, inv.lag)?;
        store_value(order, inv.order)
    })
}

/// # Safety
/// `b` must be NULL or a handle obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_free(b: *mut BmBehavior) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Dimension of the behavior; 0 for NULL.
///
/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_dim(b: *const BmBehavior) -> usize {
    b.as_ref().map_or(0, |b| b.0.dim())
}

/// # Safety
/// `b` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_complexity(b: *const BmBehavior, out: *mut f64) -> BmStatus {
    guard(|| store_value(out, complexity(&handle(b, "behavior")?.0)))
}

/// New subspace handle holding a copy of the behavior's subspace.
///
/// # Safety
/// `b` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_behavior_subspace(b: *const BmBehavior, out: *mut *mut BmSubspace) -> BmStatus {
    guard(|| {
        let b = handle(b, "behavior")?;
        store(out, BmSubspace(b.0.subspace().clone()))
    })
}

/// Squared premetric between the data's MPUM and `b` at `b`'s horizon.
///
/// # Safety
/// `samples` must hold `len * q` doubles; `b` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_misfit(
    samples: *const f64,
    len: usize,
    q: usize,
    b: *const BmBehavior,
    metric: BmMetric,
    out: *mut f64,
) -> BmStatus {
    guard(|| {
        let b = handle(b, "behavior")?;
        let data = Dataset::from(trajectory(samples, len, q)?);
        store_value(out, misfit(&data, &b.0, metric.into(), b.0.horizon())?)
    })
}

/// Utility of `b` for the data, at `b`'s horizon.
///
/// # Safety
/// `samples` must hold `len * q` doubles; `b` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bm_utility(
    samples: *const f64,
    len: usize,
    q: usize,
    b: *const BmBehavior,
    metric: BmMetric,
    out: *mut f64,
) -> BmStatus {
    guard(|| {
        let b = handle(b, "behavior")?;
        let data = Dataset::from(trajectory(samples, len, q)?);
        store_value(out, utility(&data, &b.0, metric.into(), b.0.horizon())?)
    })
}
