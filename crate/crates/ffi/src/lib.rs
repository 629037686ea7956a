//! C ABI over the `unitaylor` core.
//!
//! Every fallible call returns a [`UtStatus`]. On failure a message is kept in
//! thread-local storage and can be read with [`ut_last_error_message`]. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Strings returned through `char **` out-params are
//! owned by the caller and released with [`ut_string_free`].
//!
//! Complex inputs are flat arrays of interleaved `(re, im)` doubles, so a point
//! in C^d takes `2 * d` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use unitaylor::poly::{CoefficientStream, Poly};
use unitaylor::scenario::Scenario;
use unitaylor::universal::{run_construction, Certificate, Construction};
use unitaylor::verify::verify_certificate;
use unitaylor::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed JSON or a document that violates the schema.
    InvalidInput = 3,
    /// Dimensions or indices out of range for the object.
    InvalidArgument = 4,
    /// The numerical engine gave up (budget, conditioning, sampling limits).
    Numerical = 5,
    /// The verifier refused to compare mismatched artifacts.
    Refused = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Sparse multivariate polynomial in parameters w and variables z.
pub struct UtPoly(Poly);

/// Append-only coefficient stream produced by the constructor.
pub struct UtStream(CoefficientStream);

/// Sealed construction certificate.
pub struct UtCertificate(Certificate);

/// Stream, certificate and fit reports of one constructor run.
pub struct UtConstruction(Construction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> UtStatus {
    match err {
        Error::Json(_)
        | Error::Io(_)
        | Error::UnknownTag(_)
        | Error::InvalidTable(_)
        | Error::NotGraded(_)
        | Error::EmptySet(_)
        | Error::OverlappingPieces
        | Error::CatalogIndex(_) => UtStatus::InvalidInput,
        Error::DimensionMismatch { .. }
        | Error::BeyondTable { .. }
        | Error::NotInTable(_)
        | Error::InvalidArgument(_)
        | Error::BeyondMaterialized { .. }
        | Error::FrozenPrefix { .. }
        | Error::NoInterior(_) => UtStatus::InvalidArgument,
        Error::Refused(_) => UtStatus::Refused,
        _ => UtStatus::Numerical,
    }
}

struct Fail(UtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(UtStatus::InvalidInput, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> UtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            UtStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(UtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(UtStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn read_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_point(p: *const f64, dim: usize, what: &str) -> Result<Vec<Complex64>, Fail> {
    if dim == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    let flat = std::slice::from_raw_parts(p, 2 * dim);
    Ok(flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|e| Fail(UtStatus::InvalidArgument, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_complex(out: *mut f64, v: Complex64) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = v.re;
    *out.add(1) = v.im;
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn ut_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ut_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ut_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a polynomial from its JSON term list. Dimensions are inferred from
/// the exponent lengths.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_from_json(json: *const c_char, out: *mut *mut UtPoly) -> UtStatus {
    guard(|| {
        let p = Poly::from_json(read_str(json, "json")?, None, None)?;
        write_out(out, UtPoly(p))
    })
}

/// Serializes a polynomial to its JSON term list.
///
/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_to_json(poly: *const UtPoly, out: *mut *mut c_char) -> UtStatus {
    guard(|| write_string(out, read_ref(poly, "poly")?.0.to_json()))
}

/// Parameter dimension r, or 0 for a null handle.
///
/// # Safety
/// `poly` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_r(poly: *const UtPoly) -> usize {
    poly.as_ref().map_or(0, |p| p.0.r())
}

/// Variable dimension d, or 0 for a null handle.
///
/// # Safety
/// `poly` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_d(poly: *const UtPoly) -> usize {
    poly.as_ref().map_or(0, |p| p.0.d())
}

/// Evaluates at (w, z). `w` holds 2r doubles, `z` holds 2d doubles, `out`
/// receives 2 doubles.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_eval(poly: *const UtPoly, w: *const f64, z: *const f64, out: *mut f64) -> UtStatus {
    guard(|| {
        let p = &read_ref(poly, "poly")?.0;
        let v = p.eval(&read_point(w, p.r(), "w")?, &read_point(z, p.d(), "z")?)?;
        write_complex(out, v)
    })
}

/// Taylor coefficient of z -> p(w, z) about `zeta` at multi-index `m`
/// (`m` holds d exponents).
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_gamma(
    poly: *const UtPoly,
    w: *const f64,
    zeta: *const f64,
    m: *const u32,
    out: *mut f64,
) -> UtStatus {
    guard(|| {
        let p = &read_ref(poly, "poly")?.0;
        let idx = if p.d() == 0 {
            Vec::new()
        } else if m.is_null() {
            return Err(null("m"));
        } else {
            std::slice::from_raw_parts(m, p.d()).to_vec()
        };
        let v = p.gamma(&read_point(w, p.r(), "w")?, &read_point(zeta, p.d(), "zeta")?, &idx.into())?;
        write_complex(out, v)
    })
}

/// Releases a polynomial. Null is ignored.
///
/// # Safety
/// `poly` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ut_poly_free(poly: *mut UtPoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Parses a coefficient stream document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_stream_from_json(json: *const c_char, out: *mut *mut UtStream) -> UtStatus {
    guard(|| write_out(out, UtStream(CoefficientStream::from_json(read_str(json, "json")?)?)))
}

/// Serializes a coefficient stream.
///
/// # Safety
/// `stream` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_stream_to_json(stream: *const UtStream, out: *mut *mut c_char) -> UtStatus {
    guard(|| write_string(out, read_ref(stream, "stream")?.0.to_json()))
}

/// Evaluates the n-th partial sum of the stream at (w, z).
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ut_stream_partial_sum_eval(
    stream: *const UtStream,
    n: u64,
    w: *const f64,
    z: *const f64,
    out: *mut f64,
) -> UtStatus {
    guard(|| {
        let s = &read_ref(stream, "stream")?.0;
        let v = s.partial_sum(n)?.eval(&read_point(w, s.r(), "w")?, &read_point(z, s.d(), "z")?)?;
        write_complex(out, v)
    })
}

/// Releases a stream. Null is ignored.
///
/// # Safety
/// `stream` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ut_stream_free(stream: *mut UtStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Parses a certificate document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_certificate_from_json(json: *const c_char, out: *mut *mut UtCertificate) -> UtStatus {
    guard(|| write_out(out, UtCertificate(Certificate::from_json(read_str(json, "json")?)?)))
}

/// Serializes a certificate.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_certificate_to_json(cert: *const UtCertificate, out: *mut *mut c_char) -> UtStatus {
    guard(|| write_string(out, read_ref(cert, "certificate")?.0.to_json()))
}

/// Whether the certificate records every stage as passing; false for null.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ut_certificate_passed(cert: *const UtCertificate) -> bool {
    cert.as_ref().is_some_and(|c| c.0.body.passed)
}

/// Releases a certificate. Null is ignored.
///
/// # Safety
/// `cert` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ut_certificate_free(cert: *mut UtCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Plans and runs a scenario. A run whose stages fail still returns `Ok` with a
/// handle; check [`ut_construction_passed`]. Errors are reserved for invalid
/// scenarios and engine failures that leave no partial result.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_construct(scenario_json: *const c_char, out: *mut *mut UtConstruction) -> UtStatus {
    guard(|| {
        let plan = Scenario::from_json(read_str(scenario_json, "scenario_json")?)?.plan()?;
        write_out(out, UtConstruction(run_construction(&plan)?))
    })
}

/// Whether every stage passed; false for null.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ut_construction_passed(c: *const UtConstruction) -> bool {
    c.as_ref().is_some_and(|c| c.0.passed())
}

/// Copies the constructed stream into a new handle.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_construction_stream(c: *const UtConstruction, out: *mut *mut UtStream) -> UtStatus {
    guard(|| write_out(out, UtStream(read_ref(c, "construction")?.0.stream.clone())))
}

/// Copies the certificate into a new handle.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_construction_certificate(
    c: *const UtConstruction,
    out: *mut *mut UtCertificate,
) -> UtStatus {
    guard(|| write_out(out, UtCertificate(read_ref(c, "construction")?.0.certificate.clone())))
}

/// Releases a construction. Null is ignored.
///
/// # Safety
/// `c` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ut_construction_free(c: *mut UtConstruction) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Recomputes a certificate against a stream. `ok` receives the verdict and,
/// if `report_json` is non-null, it receives the full report. A mismatched
/// pair returns `Refused`.
///
/// # Safety
/// Handles must be live; `ok` must be writable; `report_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn ut_verify(
    stream: *const UtStream,
    cert: *const UtCertificate,
    ok: *mut bool,
    report_json: *mut *mut c_char,
) -> UtStatus {
    guard(|| {
        let report = verify_certificate(&read_ref(stream, "stream")?.0, &read_ref(cert, "certificate")?.0)?;
        if ok.is_null() {
            return Err(null("ok"));
        }
        *ok = report.ok;
        if !report_json.is_null() {
            write_string(report_json, serde_json::to_string_pretty(&report)?)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_a_status() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let st = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(st, UtStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ut_last_error_message()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn error_kinds_map_to_statuses() {
        assert_eq!(status_of(&Error::Refused("x".into())), UtStatus::Refused);
        assert_eq!(status_of(&Error::UnknownTag("mu:x".into())), UtStatus::InvalidInput);
        assert_eq!(status_of(&Error::DimensionMismatch { expected: 1, got: 2 }), UtStatus::InvalidArgument);
        assert_eq!(status_of(&Error::IllConditioned(1e20)), UtStatus::Numerical);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(ut_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
