//! C ABI over `car-core`.
//!
//! Mechanisms and multicovers cross the boundary as opaque handles or as
//! JSON text in the same wire format the `car` tool reads and writes. Every
//! fallible function returns a [`CarStatus`]; on failure a message is
//! available from [`car_last_error`] on the same thread. Strings returned
//! through out-pointers are owned by the caller and released with
//! [`car_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use car_core::decompose::decompose;
use car_core::extremes::{check_car, enumerate_extremes, is_extreme, CarCheck, EnumerationLimit};
use car_core::fibonacci::{verify_theorem3, DEFAULT_MAX_N};
use car_core::json::{self, CarWire};
use car_core::multicover::{canonicalize, from_multicover, to_multicover};
use car_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarStatus {
    Ok = 0,
    /// Well-formed input with a negative answer: not CAR, or a mechanism or
    /// multicover that fails validation.
    Negative = 1,
    NullPointer = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    InvalidArgument = 5,
    BoundExceeded = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque CAR mechanism.
pub struct CarMechanismHandle(car_core::CarMechanism);

/// Opaque uniform multicover.
pub struct CarMulticoverHandle(car_core::UniformMulticover);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CarStatus {
    match err {
        Error::Json(_) | Error::ParseRational(_) | Error::InvalidSubset(_) | Error::Format(_) => CarStatus::ParseError,
        Error::InvalidMechanism(_)
        | Error::InvalidMixture(_)
        | Error::InvalidMulticover(_)
        | Error::NotPartition(_) => CarStatus::Negative,
        Error::BoundExceeded { .. } | Error::SpaceTooLarge(_) => CarStatus::BoundExceeded,
        Error::Internal(_) | Error::Io(_) => CarStatus::Internal,
        _ => CarStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<CarStatus, (CarStatus, String)>) -> CarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside car-ffi".into());
            CarStatus::Panic
        }
    }
}

fn core<T>(r: car_core::Result<T>) -> Result<T, (CarStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn input<'a>(s: *const c_char) -> Result<&'a str, (CarStatus, String)> {
    if s.is_null() {
        return Err((CarStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (CarStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn handle<'a, T>(h: *const T) -> Result<&'a T, (CarStatus, String)> {
    h.as_ref().ok_or((CarStatus::NullPointer, "null handle".into()))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (CarStatus, String)> {
    if out.is_null() {
        return Err((CarStatus::NullPointer, "null out-pointer".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn store_string(out: *mut *mut c_char, s: String) -> Result<(), (CarStatus, String)> {
    if out.is_null() {
        return Err((CarStatus::NullPointer, "null out-pointer".into()));
    }
    *out = CString::new(s).map_err(|e| (CarStatus::Internal, e.to_string()))?.into_raw();
    Ok(())
}

unsafe fn store_bool(out: *mut bool, v: bool) -> Result<(), (CarStatus, String)> {
    if out.is_null() {
        return Err((CarStatus::NullPointer, "null out-pointer".into()));
    }
    *out = v;
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn car_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn car_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn car_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a CAR mechanism from its JSON form `{"n": .., "pi": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_from_json(json: *const c_char, out: *mut *mut CarMechanismHandle) -> CarStatus {
    guard(|| {
        let car = core(json::car_from_json(input(json)?))?;
        store(out, CarMechanismHandle(car))?;
        Ok(CarStatus::Ok)
    })
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_to_json(h: *const CarMechanismHandle, out: *mut *mut c_char) -> CarStatus {
    guard(|| {
        store_string(out, json::car_to_json(&handle(h)?.0))?;
        Ok(CarStatus::Ok)
    })
}

/// Number of elements of the mechanism's sample space, or 0 for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_size(h: *const CarMechanismHandle) -> usize {
    h.as_ref().map_or(0, |h| h.0.space().size())
}

/// # Safety
/// `h` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_free(h: *mut CarMechanismHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes whether the mechanism is extreme. When `certificate` is not NULL it
/// receives a JSON description of the extremality certificate.
///
/// # Safety
/// `h` must be a live handle; `extreme` must be writable; `certificate` must
/// be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_is_extreme(
    h: *const CarMechanismHandle,
    extreme: *mut bool,
    certificate: *mut *mut c_char,
) -> CarStatus {
    guard(|| {
        let report = is_extreme(&handle(h)?.0);
        store_bool(extreme, report.is_extreme())?;
        if !certificate.is_null() {
            store_string(certificate, report.to_string())?;
        }
        Ok(CarStatus::Ok)
    })
}

/// Checks a coarsening mechanism given as JSON. Returns `CAR_STATUS_OK` and
/// writes the collapsed CAR mechanism if it is CAR, `CAR_STATUS_NEGATIVE`
/// (with the reason in [`car_last_error`]) if it is valid but not CAR or fails
/// validation.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_check_coarsening_json(
    json: *const c_char,
    out: *mut *mut CarMechanismHandle,
) -> CarStatus {
    guard(|| {
        let mech = core(json::coarsening_from_json(input(json)?))?;
        match check_car(&mech) {
            Ok(CarCheck::Car(car)) => {
                store(out, CarMechanismHandle(car))?;
                Ok(CarStatus::Ok)
            }
            Ok(CarCheck::NotCar(v)) => {
                let lines: Vec<String> = v.iter().map(ToString::to_string).collect();
                Err((CarStatus::Negative, format!("not CAR: {}", lines.join("; "))))
            }
            Err(e) => Err((CarStatus::Negative, e.to_string())),
        }
    })
}

/// Canonical multicover generating the mechanism.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_to_multicover(
    h: *const CarMechanismHandle,
    out: *mut *mut CarMulticoverHandle,
) -> CarStatus {
    guard(|| {
        store(out, CarMulticoverHandle(to_multicover(&handle(h)?.0)))?;
        Ok(CarStatus::Ok)
    })
}

/// Writes an extreme decomposition of the mechanism as mixture JSON.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_mechanism_decompose_json(
    h: *const CarMechanismHandle,
    allow_large: bool,
    out: *mut *mut c_char,
) -> CarStatus {
    guard(|| {
        let limit = if allow_large { EnumerationLimit::overridden() } else { EnumerationLimit::default() };
        let mixture = core(decompose(&handle(h)?.0, limit))?;
        store_string(out, json::mixture_to_json(&mixture))?;
        Ok(CarStatus::Ok)
    })
}

/// Parses a uniform multicover from `{"n": .., "k": .., "sets": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_multicover_from_json(
    json: *const c_char,
    out: *mut *mut CarMulticoverHandle,
) -> CarStatus {
    guard(|| {
        let mc = core(json::multicover_from_json(input(json)?))?;
        store(out, CarMulticoverHandle(mc))?;
        Ok(CarStatus::Ok)
    })
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_multicover_to_json(h: *const CarMulticoverHandle, out: *mut *mut c_char) -> CarStatus {
    guard(|| {
        store_string(out, json::multicover_to_json(&handle(h)?.0))?;
        Ok(CarStatus::Ok)
    })
}

/// New handle holding the canonical form of `h`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_multicover_canonicalize(
    h: *const CarMulticoverHandle,
    out: *mut *mut CarMulticoverHandle,
) -> CarStatus {
    guard(|| {
        store(out, CarMulticoverHandle(canonicalize(&handle(h)?.0)))?;
        Ok(CarStatus::Ok)
    })
}

/// CAR mechanism generated by the multicover; `CAR_STATUS_NEGATIVE` if some
/// element is not covered exactly k times.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_multicover_to_mechanism(
    h: *const CarMulticoverHandle,
    out: *mut *mut CarMechanismHandle,
) -> CarStatus {
    guard(|| {
        let car = core(from_multicover(&handle(h)?.0))?;
        store(out, CarMechanismHandle(car))?;
        Ok(CarStatus::Ok)
    })
}

/// # Safety
/// `h` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn car_multicover_free(h: *mut CarMulticoverHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// JSON array of every extreme CAR mechanism on `n` elements.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_enumerate_extremes_json(n: usize, allow_large: bool, out: *mut *mut c_char) -> CarStatus {
    guard(|| {
        let limit = if allow_large { EnumerationLimit::overridden() } else { EnumerationLimit::default() };
        let all = core(enumerate_extremes(n, limit))?;
        let wires: Vec<CarWire> = all.iter().map(CarWire::from).collect();
        store_string(out, json::pretty(&wires))?;
        Ok(CarStatus::Ok)
    })
}

/// Builds S_n for odd `n` and runs every Fibonacci-height check; `passed`
/// receives the overall verdict.
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn car_verify_fibonacci(n: usize, allow_large: bool, passed: *mut bool) -> CarStatus {
    guard(|| {
        let bound = if allow_large { 63 } else { DEFAULT_MAX_N };
        let report = core(verify_theorem3(n, bound))?;
        store_bool(passed, report.passed())?;
        Ok(CarStatus::Ok)
    })
}
