//! C ABI over `als-core`.
//!
//! Every object is an opaque heap handle created by an `als_*_new`/producer
//! function and released by the matching `als_*_free`. Fallible functions
//! return an [`AlsStatus`] and write results through out-pointers; on
//! failure [`als_last_error_message`] describes what went wrong on the
//! calling thread. Panics never cross the boundary.
//!
//! Complex data is exchanged as interleaved `(re, im)` doubles in row-major
//! order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use als_core::als::{AlsMode as CoreMode, AlsStart as CoreStart, AnyFactorization, Factorization};
use als_core::io::{load_matrix, AnyMatrix};
use als_core::svd::{AnySvd, SvdTriplet};
use als_core::testmat::{build_test_matrix, TestMatrixSpec, Transform};
use als_core::{approximation_error, c64, factorization_to_svd, gaussian_matrix, AlsConfig, AlsError, DenseMatrix, ErrorNorm, Scalar};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    RankDeficient = 4,
    Config = 5,
    BudgetExceeded = 6,
    Format = 7,
    Io = 8,
    FieldMismatch = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsField {
    Real = 0,
    Complex = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsMode {
    Stabilized = 0,
    Raw = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsStart {
    Gaussian = 0,
    Range = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsTransform {
    Dft = 0,
    RealOrthogonal = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsNorm {
    Frobenius = 0,
    /// 100 power iterations with the default start seed.
    Spectral = 1,
    /// Dense SVD of the residual.
    SpectralExact = 2,
}

/// Options for [`als_run`]. Start from [`als_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AlsOptions {
    pub rank_k: usize,
    pub iterations_j: usize,
    pub seed: u64,
    pub mode: AlsMode,
    pub start: AlsStart,
    pub track_errors: bool,
    pub pinv_fallback: bool,
    /// Allow raw mode beyond the default iteration cap.
    pub raw_risk_acknowledged: bool,
}

/// Dense real or complex matrix.
pub struct AlsMatrix(AnyMatrix);

/// Output of [`als_run`].
pub struct AlsFactorization(AnyFactorization);

/// Thin SVD `U diag(sigma) V*`.
pub struct AlsSvd(AnySvd);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &AlsError) -> AlsStatus {
    match e {
        AlsError::DimensionMismatch { .. } => AlsStatus::DimensionMismatch,
        AlsError::InvalidMatrix(_) => AlsStatus::InvalidArgument,
        AlsError::RankDeficient { .. } => AlsStatus::RankDeficient,
        AlsError::Config(_) => AlsStatus::Config,
        AlsError::BudgetExceeded { .. } => AlsStatus::BudgetExceeded,
        AlsError::Format(_) | AlsError::Json(_) | AlsError::Csv(_) => AlsStatus::Format,
        AlsError::Io(_) => AlsStatus::Io,
    }
}

struct Fail(AlsStatus, String);

impl From<AlsError> for Fail {
    fn from(e: AlsError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AlsStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            AlsStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            AlsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: the caller passes a handle obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    // SAFETY: checked non-null; the caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) };
    s.to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail(AlsStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: `p` came from `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(p) });
    }
}

fn words(field: AlsField, rows: usize, cols: usize) -> Result<usize, Fail> {
    let per = match field {
        AlsField::Real => 1,
        AlsField::Complex => 2,
    };
    rows.checked_mul(cols)
        .and_then(|n| n.checked_mul(per))
        .ok_or_else(|| Fail(AlsStatus::InvalidArgument, "matrix size overflows".into()))
}

fn field_of(m: &AnyMatrix) -> AlsField {
    match m {
        AnyMatrix::Real(_) => AlsField::Real,
        AnyMatrix::Complex(_) => AlsField::Complex,
    }
}

fn flatten<T: Scalar>(m: &DenseMatrix<T>, buf: &mut [f64]) {
    let w = T::WORDS;
    for (i, x) in m.as_slice().iter().enumerate() {
        buf[w * i] = x.re();
        if w == 2 {
            buf[w * i + 1] = x.im();
        }
    }
}

// ---- library -------------------------------------------------------------

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn als_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn als_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

// ---- matrices ------------------------------------------------------------

/// Copy `rows * cols` doubles (row-major) into a new real matrix.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_new_real(rows: usize, cols: usize, data: *const f64, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = words(AlsField::Real, rows, cols)?;
        // SAFETY: the caller guarantees `n` readable doubles.
        let v = unsafe { std::slice::from_raw_parts(data, n) }.to_vec();
        let m = DenseMatrix::from_vec(rows, cols, v)?;
        unsafe { store(out, AlsMatrix(m.into())) }
    })
}

/// Copy `2 * rows * cols` interleaved doubles into a new complex matrix.
///
/// # Safety
/// `data` must point to `2 * rows * cols` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_new_complex(rows: usize, cols: usize, data: *const f64, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = words(AlsField::Complex, rows, cols)?;
        // SAFETY: the caller guarantees `n` readable doubles.
        let raw = unsafe { std::slice::from_raw_parts(data, n) };
        let v = raw.chunks_exact(2).map(|p| c64::new(p[0], p[1])).collect();
        let m = DenseMatrix::from_vec(rows, cols, v)?;
        unsafe { store(out, AlsMatrix(m.into())) }
    })
}

/// Seeded standard normal matrix (complex entries have unit total variance).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_gaussian(rows: usize, cols: usize, field: AlsField, seed: u64, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        if rows == 0 || cols == 0 {
            return Err(Fail(AlsStatus::InvalidArgument, "dimensions must be positive".into()));
        }
        words(field, rows, cols)?;
        let m = match field {
            AlsField::Real => AnyMatrix::Real(gaussian_matrix(rows, cols, seed)),
            AlsField::Complex => AnyMatrix::Complex(gaussian_matrix(rows, cols, seed)),
        };
        unsafe { store(out, AlsMatrix(m)) }
    })
}

/// Synthetic test matrix with prescribed singular values; see the README.
/// DFT matrices are complex, real-orthogonal ones real. `seed` only affects
/// the real-orthogonal transform.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn als_test_matrix(
    m: usize,
    n: usize,
    k: usize,
    delta: f64,
    transform: AlsTransform,
    seed: u64,
    out: *mut *mut AlsMatrix,
) -> AlsStatus {
    guard(|| {
        let t = match transform {
            AlsTransform::Dft => Transform::Dft,
            AlsTransform::RealOrthogonal => Transform::RealOrthogonal,
        };
        let a = build_test_matrix(&TestMatrixSpec::new(m, n, k, delta, t).with_seed(seed))?;
        unsafe { store(out, AlsMatrix(a)) }
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_free(m: *mut AlsMatrix) {
    unsafe { free_handle(m) }
}

/// # Safety
/// `m` must be a live handle; `rows`, `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_shape(m: *const AlsMatrix, rows: *mut usize, cols: *mut usize) -> AlsStatus {
    guard(|| {
        let m = unsafe { deref(m, "matrix") }?;
        if rows.is_null() || cols.is_null() {
            return Err(null("output pointer"));
        }
        let (r, c) = m.0.shape();
        // SAFETY: checked non-null.
        unsafe {
            *rows = r;
            *cols = c;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `field` writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_field(m: *const AlsMatrix, field: *mut AlsField) -> AlsStatus {
    guard(|| {
        let m = unsafe { deref(m, "matrix") }?;
        if field.is_null() {
            return Err(null("output pointer"));
        }
        // SAFETY: checked non-null.
        unsafe { *field = field_of(&m.0) };
        Ok(())
    })
}

/// Copy the entries out: `rows * cols` doubles for real matrices,
/// `2 * rows * cols` interleaved doubles for complex ones. `len` is the
/// capacity of `buf` in doubles and must be at least that.
///
/// # Safety
/// `m` must be a live handle; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_copy_data(m: *const AlsMatrix, buf: *mut f64, len: usize) -> AlsStatus {
    guard(|| {
        let m = unsafe { deref(m, "matrix") }?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let (r, c) = m.0.shape();
        let need = words(field_of(&m.0), r, c)?;
        if len < need {
            return Err(Fail(AlsStatus::InvalidArgument, format!("buffer holds {len} doubles, need {need}")));
        }
        // SAFETY: the caller guarantees `len >= need` writable doubles.
        let out = unsafe { std::slice::from_raw_parts_mut(buf, need) };
        match &m.0 {
            AnyMatrix::Real(a) => flatten(a, out),
            AnyMatrix::Complex(a) => flatten(a, out),
        }
        Ok(())
    })
}

/// Read a matrix in the library's binary format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_read(path: *const c_char, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        let p = unsafe { path_arg(path) }?;
        let m = load_matrix(p)?;
        unsafe { store(out, AlsMatrix(m)) }
    })
}

/// Write a matrix in the library's binary format.
///
/// # Safety
/// `m` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn als_matrix_write(m: *const AlsMatrix, path: *const c_char) -> AlsStatus {
    guard(|| {
        let m = unsafe { deref(m, "matrix") }?;
        let p = unsafe { path_arg(path) }?;
        let f = std::fs::File::create(p).map_err(AlsError::from)?;
        m.0.write_to(std::io::BufWriter::new(f))?;
        Ok(())
    })
}

// ---- iteration -----------------------------------------------------------

/// Stabilized mode, Gaussian start, no tracking, no fallback.
#[no_mangle]
pub extern "C" fn als_options_default(rank_k: usize, iterations_j: usize, seed: u64) -> AlsOptions {
    AlsOptions {
        rank_k,
        iterations_j,
        seed,
        mode: AlsMode::Stabilized,
        start: AlsStart::Gaussian,
        track_errors: false,
        pinv_fallback: false,
        raw_risk_acknowledged: false,
    }
}

fn config_of(o: &AlsOptions) -> AlsConfig {
    let mut c = AlsConfig::new(o.rank_k, o.iterations_j, o.seed)
        .with_mode(match o.mode {
            AlsMode::Stabilized => CoreMode::Stabilized,
            AlsMode::Raw => CoreMode::Raw,
        })
        .with_start(match o.start {
            AlsStart::Gaussian => CoreStart::Gaussian,
            AlsStart::Range => CoreStart::Range,
        })
        .with_tracking(o.track_errors)
        .with_pinv_fallback(o.pinv_fallback);
    if o.raw_risk_acknowledged {
        c = c.acknowledge_raw_risk();
    }
    c
}

/// Rank-`k` approximation `A ~ S T` after `iterations_j` rounds.
///
/// # Safety
/// `a` must be a live handle, `options` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_run(a: *const AlsMatrix, options: *const AlsOptions, out: *mut *mut AlsFactorization) -> AlsStatus {
    guard(|| {
        let a = unsafe { deref(a, "matrix") }?;
        let o = unsafe { deref(options, "options") }?;
        let cfg = config_of(o);
        let f = match &a.0 {
            AnyMatrix::Real(a) => AnyFactorization::Real(als_core::als_run(a, &cfg)?),
            AnyMatrix::Complex(a) => AnyFactorization::Complex(als_core::als_run(a, &cfg)?),
        };
        unsafe { store(out, AlsFactorization(f)) }
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_free(f: *mut AlsFactorization) {
    unsafe { free_handle(f) }
}

/// New handle holding a copy of `S` (`m x k`).
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_s(f: *const AlsFactorization, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        let f = unsafe { deref(f, "factorization") }?;
        let m = match &f.0 {
            AnyFactorization::Real(f) => AnyMatrix::Real(f.s.clone()),
            AnyFactorization::Complex(f) => AnyMatrix::Complex(f.s.clone()),
        };
        unsafe { store(out, AlsMatrix(m)) }
    })
}

/// New handle holding a copy of `T` (`k x n`).
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_t(f: *const AlsFactorization, out: *mut *mut AlsMatrix) -> AlsStatus {
    guard(|| {
        let f = unsafe { deref(f, "factorization") }?;
        let m = match &f.0 {
            AnyFactorization::Real(f) => AnyMatrix::Real(f.t.clone()),
            AnyFactorization::Complex(f) => AnyMatrix::Complex(f.t.clone()),
        };
        unsafe { store(out, AlsMatrix(m)) }
    })
}

/// Length of the Frobenius error trace (0 when tracking was off).
///
/// # Safety
/// `f` must be a live handle; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_trace_len(f: *const AlsFactorization, len: *mut usize) -> AlsStatus {
    guard(|| {
        let f = unsafe { deref(f, "factorization") }?;
        if len.is_null() {
            return Err(null("output pointer"));
        }
        let n = trace(&f.0).map_or(0, <[f64]>::len);
        // SAFETY: checked non-null.
        unsafe { *len = n };
        Ok(())
    })
}

/// Copy the error trace into `buf` (capacity `len`).
///
/// # Safety
/// `f` must be a live handle; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_trace(f: *const AlsFactorization, buf: *mut f64, len: usize) -> AlsStatus {
    guard(|| {
        let f = unsafe { deref(f, "factorization") }?;
        let t = trace(&f.0).unwrap_or(&[]);
        copy_out(t, buf, len)
    })
}

fn trace(f: &AnyFactorization) -> Option<&[f64]> {
    match f {
        AnyFactorization::Real(f) => f.frobenius_error_trace.as_deref(),
        AnyFactorization::Complex(f) => f.frobenius_error_trace.as_deref(),
    }
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Fail(AlsStatus::InvalidArgument, format!("buffer holds {len} doubles, need {}", src.len())));
    }
    // SAFETY: the caller guarantees `len >= src.len()` writable doubles.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

fn error_of<T: Scalar>(a: &DenseMatrix<T>, f: &Factorization<T>, norm: AlsNorm) -> Result<f64, AlsError> {
    let n = match norm {
        AlsNorm::Frobenius => ErrorNorm::Frobenius,
        AlsNorm::Spectral => ErrorNorm::spectral(),
        AlsNorm::SpectralExact => ErrorNorm::SpectralExact,
    };
    approximation_error(a, f, n)
}

/// `||A - S T||` in the requested norm.
///
/// # Safety
/// `a`, `f` must be live handles; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn als_approximation_error(
    a: *const AlsMatrix,
    f: *const AlsFactorization,
    norm: AlsNorm,
    value: *mut f64,
) -> AlsStatus {
    guard(|| {
        let a = unsafe { deref(a, "matrix") }?;
        let f = unsafe { deref(f, "factorization") }?;
        if value.is_null() {
            return Err(null("output pointer"));
        }
        let e = match (&a.0, &f.0) {
            (AnyMatrix::Real(a), AnyFactorization::Real(f)) => error_of(a, f, norm)?,
            (AnyMatrix::Complex(a), AnyFactorization::Complex(f)) => error_of(a, f, norm)?,
            _ => return Err(Fail(AlsStatus::FieldMismatch, "matrix and factorization fields differ".into())),
        };
        // SAFETY: checked non-null.
        unsafe { *value = e };
        Ok(())
    })
}

/// SVD form of `S T` without forming the product.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_factorization_to_svd(f: *const AlsFactorization, out: *mut *mut AlsSvd) -> AlsStatus {
    guard(|| {
        let f = unsafe { deref(f, "factorization") }?;
        let svd = match &f.0 {
            AnyFactorization::Real(f) => AnySvd::Real(factorization_to_svd(&f.s, &f.t)),
            AnyFactorization::Complex(f) => AnySvd::Complex(factorization_to_svd(&f.s, &f.t)),
        };
        unsafe { store(out, AlsSvd(svd)) }
    })
}

// ---- SVD -----------------------------------------------------------------

fn sigma_of(s: &AnySvd) -> &[f64] {
    match s {
        AnySvd::Real(t) => &t.sigma,
        AnySvd::Complex(t) => &t.sigma,
    }
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn als_svd_free(s: *mut AlsSvd) {
    unsafe { free_handle(s) }
}

/// Number of singular triplets.
///
/// # Safety
/// `s` must be a live handle; `rank` writable.
#[no_mangle]
pub unsafe extern "C" fn als_svd_rank(s: *const AlsSvd, rank: *mut usize) -> AlsStatus {
    guard(|| {
        let s = unsafe { deref(s, "svd") }?;
        if rank.is_null() {
            return Err(null("output pointer"));
        }
        // SAFETY: checked non-null.
        unsafe { *rank = sigma_of(&s.0).len() };
        Ok(())
    })
}

/// Copy the singular values (descending) into `buf` (capacity `len`).
///
/// # Safety
/// `s` must be a live handle; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn als_svd_sigma(s: *const AlsSvd, buf: *mut f64, len: usize) -> AlsStatus {
    guard(|| {
        let s = unsafe { deref(s, "svd") }?;
        copy_out(sigma_of(&s.0), buf, len)
    })
}

fn factor<T: Scalar>(t: &SvdTriplet<T>, left: bool) -> DenseMatrix<T> {
    if left {
        t.u.clone()
    } else {
        t.v.clone()
    }
}

unsafe fn svd_factor(s: *const AlsSvd, out: *mut *mut AlsMatrix, left: bool) -> AlsStatus {
    guard(|| {
        let s = unsafe { deref(s, "svd") }?;
        let m = match &s.0 {
            AnySvd::Real(t) => AnyMatrix::Real(factor(t, left)),
            AnySvd::Complex(t) => AnyMatrix::Complex(factor(t, left)),
        };
        unsafe { store(out, AlsMatrix(m)) }
    })
}

/// New handle holding a copy of `U` (`m x r`).
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_svd_u(s: *const AlsSvd, out: *mut *mut AlsMatrix) -> AlsStatus {
    unsafe { svd_factor(s, out, true) }
}

/// New handle holding a copy of `V` (`n x r`).
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn als_svd_v(s: *const AlsSvd, out: *mut *mut AlsMatrix) -> AlsStatus {
    unsafe { svd_factor(s, out, false) }
}
