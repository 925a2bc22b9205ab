//! C ABI over `feynparts`.
//!
//! Every fallible function returns an [`FpStatus`]; on anything but
//! `FP_OK` the message is available from [`fp_last_error`] until the next
//! call on the same thread. Handles are opaque and owned by the caller,
//! who releases them with the matching `_free` function. Weights and basis
//! functions are passed in the expression grammar (`"poly(1, 1/2)"`,
//! `"legendre(2)"`, ...); kernels likewise (`"term(1, [1; 0.5; 0])"`).

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use feynparts::config::RunConfig;
use feynparts::cylinder::CylinderFunctional;
use feynparts::expr::{parse_kernel, parse_l2};
use feynparts::l2::{inner_product, L2Fn, OrthogonalSet, WeightFn};
use feynparts::report::verify_json;
use feynparts::theorems::run_suite;
use feynparts::{Error, C64};

/// Status codes. Zero is success.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpStatus {
    FP_OK = 0,
    /// A required pointer was null or a string was not UTF-8.
    FP_NULL_POINTER = 1,
    FP_PARSE_ERROR = 2,
    FP_INVALID_ARGUMENT = 3,
    /// Basis not orthogonal, weight not admitted, arity or domain mismatch.
    FP_INCOMPATIBLE = 4,
    /// Kernel without Gaussian decay under the requested parameter.
    FP_NO_DECAY = 5,
    FP_CONFIG_ERROR = 6,
    /// `fp_verify_json` ran, but at least one identity failed.
    FP_CHECK_FAILED = 7,
    FP_PANIC = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FpComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for FpComplex {
    fn from(z: C64) -> Self {
        FpComplex { re: z.re, im: z.im }
    }
}

/// An element of `L2[0, T]`.
pub struct FpFunction(L2Fn);

/// A cylinder functional `F(x) = f(⟨α_1, x⟩, …, ⟨α_n, x⟩)`.
pub struct FpFunctional(CylinderFunctional);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FpStatus {
    match e {
        Error::Parse { .. } => FpStatus::FP_PARSE_ERROR,
        Error::Config(_) | Error::Io(_) => FpStatus::FP_CONFIG_ERROR,
        Error::NoGaussianDecay { .. } => FpStatus::FP_NO_DECAY,
        Error::DomainMismatch { .. }
        | Error::GridMismatch { .. }
        | Error::NotOrthogonal { .. }
        | Error::ZeroMember(_)
        | Error::EmptySet
        | Error::NotSuppInf(_)
        | Error::IncompatibleWeight { .. }
        | Error::NoCompatibleWeight(_)
        | Error::ArityMismatch { .. }
        | Error::BasisMismatch
        | Error::SampledKernel
        | Error::OrderExhausted => FpStatus::FP_INCOMPATIBLE,
        Error::InvalidLambda { .. } | Error::ZeroQ | Error::InvalidP(_) | Error::InvalidArgument(_) => {
            FpStatus::FP_INVALID_ARGUMENT
        }
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
    Checks(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, recording any failure or panic in the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FpStatus::FP_OK
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("{what} is null or not valid UTF-8"));
            FpStatus::FP_NULL_POINTER
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Checks(msg))) => {
            set_error(&msg);
            FpStatus::FP_CHECK_FAILED
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            FpStatus::FP_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn out<T>(p: *mut T, what: &'static str) -> Result<*mut T, Fail> {
    if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(p)
    }
}

fn weight(src: &str, t_end: f64) -> Result<WeightFn, Fail> {
    Ok(WeightFn::new(parse_l2(src, t_end)?)?)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a function on `[0, t_end]`.
#[no_mangle]
pub unsafe extern "C" fn fp_function_parse(src: *const c_char, t_end: f64, result: *mut *mut FpFunction) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = parse_l2(text(src, "src")?, t_end)?;
        *result = Box::into_raw(Box::new(FpFunction(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_function_free(f: *mut FpFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_function_eval(f: *const FpFunction, t: f64, result: *mut f64) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = handle(f, "f")?.0.eval(t);
        Ok(())
    })
}

/// `(u, v)_2`.
#[no_mangle]
pub unsafe extern "C" fn fp_inner_product(u: *const FpFunction, v: *const FpFunction, result: *mut f64) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = inner_product(&handle(u, "u")?.0, &handle(v, "v")?.0)?;
        Ok(())
    })
}

/// Builds a functional from `n` basis expressions and a kernel expression.
/// The basis must be orthogonal and the kernel arity must equal `n`.
#[no_mangle]
pub unsafe extern "C" fn fp_functional_new(
    basis: *const *const c_char,
    n: usize,
    t_end: f64,
    kernel: *const c_char,
    result: *mut *mut FpFunctional,
) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        if basis.is_null() {
            return Err(Fail::Null("basis"));
        }
        let members = (0..n)
            .map(|j| Ok(parse_l2(text(*basis.add(j), "basis entry")?, t_end)?))
            .collect::<Result<Vec<_>, Fail>>()?;
        let f = CylinderFunctional::new(OrthogonalSet::new(members)?, parse_kernel(text(kernel, "kernel")?)?)?;
        *result = Box::into_raw(Box::new(FpFunctional(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_functional_free(f: *mut FpFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_functional_arity(f: *const FpFunctional) -> usize {
    f.as_ref().map_or(0, |f| f.0.arity())
}

/// Kernel value `f(u_1, …, u_n)`.
#[no_mangle]
pub unsafe extern "C" fn fp_functional_eval_at(
    f: *const FpFunctional,
    u: *const f64,
    n: usize,
    result: *mut FpComplex,
) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        if u.is_null() && n > 0 {
            return Err(Fail::Null("u"));
        }
        let u = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(u, n)
        };
        *result = handle(f, "f")?.0.eval_at(u)?.into();
        Ok(())
    })
}

/// `∫^{anf_q} F(Z_h(x, ·)) dm(x)` for real nonzero `q`.
#[no_mangle]
pub unsafe extern "C" fn fp_feynman_integral(
    f: *const FpFunctional,
    h: *const c_char,
    q: f64,
    result: *mut FpComplex,
) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = &handle(f, "f")?.0;
        let h = weight(text(h, "h")?, f.basis().domain_end())?;
        *result = feynparts::feynman::feynman_integral(f, &h, q)?.into();
        Ok(())
    })
}

/// `E[F(λ^{-1/2} Z_h(x, ·))]` analytically continued to `Re λ > 0`.
#[no_mangle]
pub unsafe extern "C" fn fp_analytic_wiener_integral(
    f: *const FpFunctional,
    h: *const c_char,
    lambda: FpComplex,
    result: *mut FpComplex,
) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = &handle(f, "f")?.0;
        let h = weight(text(h, "h")?, f.basis().domain_end())?;
        let lambda = C64::new(lambda.re, lambda.im);
        *result = feynparts::feynman::analytic_wiener_integral(f, &h, lambda)?.into();
        Ok(())
    })
}

/// `T_{q,k}^{(p)}(F)` as a new functional over the same basis.
#[no_mangle]
pub unsafe extern "C" fn fp_gfft(
    f: *const FpFunctional,
    k: *const c_char,
    q: f64,
    p: f64,
    result: *mut *mut FpFunctional,
) -> FpStatus {
    guard(|| {
        let result = out(result, "result")?;
        let f = &handle(f, "f")?.0;
        let k = weight(text(k, "k")?, f.basis().domain_end())?;
        let t = feynparts::gfft::gfft(f, &k, q, p)?;
        *result = Box::into_raw(Box::new(FpFunctional(t.functional)));
        Ok(())
    })
}

/// Runs the identity suite for a TOML configuration (null or empty for
/// the defaults) and returns the JSON report through `json`, to be released
/// with [`fp_string_free`]. The report is produced even when a check fails,
/// in which case the status is `FP_CHECK_FAILED`.
#[no_mangle]
pub unsafe extern "C" fn fp_verify_json(config: *const c_char, json: *mut *mut c_char) -> FpStatus {
    guard(|| {
        let json = out(json, "json")?;
        *json = ptr::null_mut();
        let src = if config.is_null() { "" } else { text(config, "config")? };
        let cfg = RunConfig::from_toml(src)?;
        let reports = run_suite(&cfg.suite())?;
        let doc = CString::new(verify_json(&reports, cfg.run.seed)).expect("JSON has no interior NUL");
        *json = doc.into_raw();
        let failed = reports.iter().filter(|r| !r.pass).count();
        if failed > 0 {
            return Err(Fail::Checks(format!(
                "{failed} of {} identity checks failed",
                reports.len()
            )));
        }
        Ok(())
    })
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
