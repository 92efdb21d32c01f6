//! C interface to the contour library.
//!
//! Data sets and estimates are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`ContourStatus`]; on failure, [`contour_last_error`] describes the cause
//! for the calling thread. Matrices cross the boundary in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use contour::baselines::{ols_direction, phd_fit, save_fit, sir_fit, SliceSpec};
use contour::gcr::{gcr_fit, TubeConfig};
use contour::harness::{fit_method, MethodConfig};
use contour::linalg::basis_distance;
use contour::scr::{scr_fit, ThresholdSpec};
use contour::{Dataset, Error, Norm, SubspaceEstimate};
use nalgebra::{DMatrix, DVector};

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFiniteInput = 4,
    SingularCovariance = 5,
    EmptySelection = 6,
    DegenerateData = 7,
    InsufficientData = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

/// Subspace distance norm.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourNorm {
    Frobenius = 0,
    Spectral = 1,
}

/// Predictor matrix and response vector.
pub struct ContourDataset(Dataset);

/// Fitted reduction: basis, kernel spectrum and method.
pub struct ContourEstimate(SubspaceEstimate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> ContourStatus {
    match err {
        Error::NonFiniteInput => ContourStatus::NonFiniteInput,
        Error::SingularCovariance { .. } => ContourStatus::SingularCovariance,
        Error::DimensionMismatch { .. } => ContourStatus::DimensionMismatch,
        Error::EmptySelection => ContourStatus::EmptySelection,
        Error::DegeneratePair { .. } | Error::ZeroDirection | Error::DegenerateConditioning { .. } => {
            ContourStatus::DegenerateData
        }
        Error::TooFewSlices { .. } | Error::InsufficientData(_) => ContourStatus::InsufficientData,
        Error::InvalidArgument(_) | Error::Config(_) | Error::Parse { .. } | Error::NonNumericCell { .. } => {
            ContourStatus::InvalidArgument
        }
        Error::Io(_) => ContourStatus::Internal,
    }
}

fn fail(status: ContourStatus, message: &str) -> ContourStatus {
    set_last_error(message);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ContourStatus>) -> ContourStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ContourStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(ContourStatus::Internal, "internal panic"),
    }
}

fn check<T>(r: contour::Result<T>) -> Result<T, ContourStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), ContourStatus> {
    if p.is_null() {
        Err(fail(ContourStatus::NullPointer, &format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn contour_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn contour_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies an `n`×`p` row-major predictor matrix and an `n`-vector response
/// into a new data set.
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n` doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn contour_dataset_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut ContourDataset,
) -> ContourStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(x, "x")?;
        non_null(y, "y")?;
        let len = n
            .checked_mul(p)
            .ok_or_else(|| fail(ContourStatus::InvalidArgument, "n * p overflows"))?;
        let xs = std::slice::from_raw_parts(x, len);
        let ys = std::slice::from_raw_parts(y, n);
        let data = check(Dataset::new(DMatrix::from_row_slice(n, p, xs), DVector::from_column_slice(ys)))?;
        *out = Box::into_raw(Box::new(ContourDataset(data)));
        Ok(())
    })
}

/// Releases a data set. Null is ignored.
///
/// # Safety
/// `ds` must come from [`contour_dataset_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn contour_dataset_free(ds: *mut ContourDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

unsafe fn fit_with(
    ds: *const ContourDataset,
    out: *mut *mut ContourEstimate,
    f: impl FnOnce(&Dataset) -> contour::Result<SubspaceEstimate>,
) -> ContourStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(ds, "dataset")?;
        let est = check(f(&(*ds).0))?;
        *out = Box::into_raw(Box::new(ContourEstimate(est)));
        Ok(())
    })
}

/// Simple contour regression keeping the fraction `r` of pairs with the
/// smallest response increments.
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_scr(
    ds: *const ContourDataset,
    q: usize,
    r: f64,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    fit_with(ds, out, |d| scr_fit(d, q, ThresholdSpec::Proportion(r)))
}

/// General contour regression with tube radius `rho` on the standardized
/// scale, keeping the fraction `r` of pairs with the smallest tube variance.
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_gcr(
    ds: *const ContourDataset,
    q: usize,
    r: f64,
    rho: f64,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    fit_with(ds, out, |d| gcr_fit(d, q, &TubeConfig::new(rho, ThresholdSpec::Proportion(r))))
}

/// Sliced inverse regression with `slices` equal-count slices.
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_sir(
    ds: *const ContourDataset,
    q: usize,
    slices: usize,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    fit_with(ds, out, |d| sir_fit(d, q, SliceSpec::equal_count(slices)))
}

/// Sliced average variance estimation with `slices` equal-count slices.
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_save(
    ds: *const ContourDataset,
    q: usize,
    slices: usize,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    fit_with(ds, out, |d| save_fit(d, q, SliceSpec::equal_count(slices)))
}

/// Principal Hessian directions.
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_phd(
    ds: *const ContourDataset,
    q: usize,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    fit_with(ds, out, |d| phd_fit(d, q))
}

/// Least-squares slope direction (one-dimensional).
///
/// # Safety
/// `ds` must be a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit_ols(ds: *const ContourDataset, out: *mut *mut ContourEstimate) -> ContourStatus {
    fit_with(ds, out, ols_direction)
}

/// Fits a method given as text, e.g. `"gcr:r=0.05:rho=2"`, `"scr:r=6qn"` or `"sir:h=6"`.
///
/// # Safety
/// `method` must be a NUL-terminated string, `ds` a live data set and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_fit(
    ds: *const ContourDataset,
    method: *const c_char,
    q: usize,
    out: *mut *mut ContourEstimate,
) -> ContourStatus {
    if method.is_null() {
        if !out.is_null() {
            *out = ptr::null_mut();
        }
        return fail(ContourStatus::NullPointer, "method is null");
    }
    let parsed = match CStr::from_ptr(method).to_str() {
        Ok(s) => s.parse::<MethodConfig>(),
        Err(_) => Err(Error::InvalidArgument("method is not valid UTF-8".into())),
    };
    fit_with(ds, out, |d| fit_method(&parsed?, d, q))
}

/// Writes the predictor dimension and reduction dimension of an estimate.
///
/// # Safety
/// `est` must be a live estimate; `p` and `q` must be writable.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_dims(
    est: *const ContourEstimate,
    p: *mut usize,
    q: *mut usize,
) -> ContourStatus {
    guard(|| {
        non_null(est, "estimate")?;
        non_null(p, "p")?;
        non_null(q, "q")?;
        *p = (*est).0.p();
        *q = (*est).0.q();
        Ok(())
    })
}

/// Copies the `p`×`q` basis (orthonormal columns, original predictor scale)
/// row-major into `buf`, which must hold at least `len` doubles.
///
/// # Safety
/// `est` must be a live estimate and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_basis(
    est: *const ContourEstimate,
    buf: *mut f64,
    len: usize,
) -> ContourStatus {
    guard(|| {
        non_null(est, "estimate")?;
        non_null(buf, "buf")?;
        let b = &(*est).0.basis;
        let need = b.nrows() * b.ncols();
        if len < need {
            return Err(fail(ContourStatus::BufferTooSmall, &format!("basis needs {need} doubles, got {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for i in 0..b.nrows() {
            for k in 0..b.ncols() {
                dst[i * b.ncols() + k] = b[(i, k)];
            }
        }
        Ok(())
    })
}

/// Copies the `p` kernel eigenvalues, descending, into `buf`.
///
/// # Safety
/// `est` must be a live estimate and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_eigenvalues(
    est: *const ContourEstimate,
    buf: *mut f64,
    len: usize,
) -> ContourStatus {
    guard(|| {
        non_null(est, "estimate")?;
        non_null(buf, "buf")?;
        let e = &(*est).0.eigenvalues;
        if len < e.len() {
            return Err(fail(
                ContourStatus::BufferTooSmall,
                &format!("spectrum needs {} doubles, got {len}", e.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, e.len()).copy_from_slice(e.as_slice());
        Ok(())
    })
}

/// Distance between the subspaces spanned by two estimates.
///
/// # Safety
/// `a` and `b` must be live estimates and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_distance(
    a: *const ContourEstimate,
    b: *const ContourEstimate,
    norm: ContourNorm,
    out: *mut f64,
) -> ContourStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let norm = match norm {
            ContourNorm::Frobenius => Norm::Frobenius,
            ContourNorm::Spectral => Norm::Spectral,
        };
        *out = check(basis_distance(&(*a).0.basis, &(*b).0.basis, norm))?;
        Ok(())
    })
}

/// Distance between an estimate and a caller-supplied `p`×`k` row-major basis.
///
/// # Safety
/// `est` must be a live estimate, `basis` must point to `p * k` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_distance_to(
    est: *const ContourEstimate,
    basis: *const f64,
    p: usize,
    k: usize,
    norm: ContourNorm,
    out: *mut f64,
) -> ContourStatus {
    guard(|| {
        non_null(est, "estimate")?;
        non_null(basis, "basis")?;
        non_null(out, "out")?;
        let len = p
            .checked_mul(k)
            .ok_or_else(|| fail(ContourStatus::InvalidArgument, "p * k overflows"))?;
        let target = DMatrix::from_row_slice(p, k, std::slice::from_raw_parts(basis, len));
        let norm = match norm {
            ContourNorm::Frobenius => Norm::Frobenius,
            ContourNorm::Spectral => Norm::Spectral,
        };
        *out = check(basis_distance(&(*est).0.basis, &target, norm))?;
        Ok(())
    })
}

/// Releases an estimate. Null is ignored.
///
/// # Safety
/// `est` must come from a `contour_fit*` function and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn contour_estimate_free(est: *mut ContourEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}
