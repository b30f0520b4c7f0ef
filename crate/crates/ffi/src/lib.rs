//! C ABI over the `copson` crate.
//!
//! Conventions:
//! - every fallible call returns a [`CopsonStatus`] and writes results through
//!   out-pointers, which are left untouched on failure;
//! - families and weight traces are opaque handles released with their
//!   `*_free` function (passing `NULL` is a no-op);
//! - after a failure, [`copson_last_error`] returns a message owned by the
//!   library and valid until the next failing call on the same thread;
//! - strings returned through out-pointers are released with
//!   [`copson_string_free`];
//! - panics never cross the boundary; they surface as `COPSON_STATUS_PANIC`.
//!
//! Indices `n` are 1-based, as in the underlying library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use copson::auxiliary::{aux_eval, aux_sign_scan, AuxFunction, AuxParams};
use copson::certify::{
    check_gap_bound, check_index_condition, check_polynomial_criterion_f64,
    check_relaxed_gap_bound, check_threshold_criterion, Certificate, ConditionId,
};
use copson::estimate::{
    brute_force_oracle, extremal_probe, minimize_ratio, stationarity_check, OptimizerConfig,
};
use copson::inequality::{copson_lhs, dual_sides, ratio_functional, TruncatedSequence};
use copson::params::{Exponents, Param};
use copson::polynomials::{a1, a2, relaxed_threshold, small_gap_threshold};
use copson::weight_trace::{build_weights, verify_mean_identity, verify_weighted_condition, WeightTrace};
use copson::weights::WeightFamily;
use copson::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopsonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IndexOutOfRange = 3,
    NonFinite = 4,
    InvalidSequence = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
}

/// Which condition a [`CopsonCertificate`] is about.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopsonCondition {
    IndexCondition = 0,
    GapBound = 1,
    RelaxedGapBound = 2,
    PolynomialCriterion = 3,
    ThresholdCriterion = 4,
    WeightedIndexCondition = 5,
}

/// Verdict summary; the full record is available as JSON.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopsonCertificate {
    pub condition: CopsonCondition,
    pub passed: bool,
    pub min_margin: f64,
    /// 0 for criteria not indexed by n.
    pub argmin_n: usize,
    pub horizon: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopsonSignReport {
    pub min_value: f64,
    pub argmin_x: f64,
    pub floor: f64,
    pub min_margin: f64,
    pub certified_regime: bool,
    pub anomaly: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopsonEstimate {
    /// Upper bound on the truncated infimum of the ratio.
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Opaque weight family.
pub struct CopsonFamily {
    inner: WeightFamily,
}

/// Opaque auxiliary weight sequence.
pub struct CopsonTrace {
    inner: WeightTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CopsonStatus {
    match e {
        Error::InvalidParameter(_) => CopsonStatus::InvalidArgument,
        Error::IndexOutOfRange { .. } => CopsonStatus::IndexOutOfRange,
        Error::NonFinite { .. } => CopsonStatus::NonFinite,
        Error::InvalidSequence(_) => CopsonStatus::InvalidSequence,
        Error::Parse(_) => CopsonStatus::Parse,
        Error::Io(_) => CopsonStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `f`, converting errors and panics to a status and the thread's last error.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> CopsonStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CopsonStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            CopsonStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            CopsonStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &'static str) -> FfiResult<&'a T> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn sequence(ptr: *const f64, len: usize) -> FfiResult<TruncatedSequence> {
    Ok(TruncatedSequence::new(slice(ptr, len, "x")?.to_vec())?)
}

unsafe fn string<'a>(ptr: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Parse(format!("{what} is not UTF-8"))))
}

fn condition(id: ConditionId) -> CopsonCondition {
    match id {
        ConditionId::IndexCondition => CopsonCondition::IndexCondition,
        ConditionId::GapBound => CopsonCondition::GapBound,
        ConditionId::RelaxedGapBound => CopsonCondition::RelaxedGapBound,
        ConditionId::PolynomialCriterion => CopsonCondition::PolynomialCriterion,
        ConditionId::ThresholdCriterion => CopsonCondition::ThresholdCriterion,
        ConditionId::WeightedIndexCondition => CopsonCondition::WeightedIndexCondition,
    }
}

fn summary(c: &Certificate) -> CopsonCertificate {
    CopsonCertificate {
        condition: condition(c.condition_id),
        passed: c.passed,
        min_margin: c.min_margin,
        argmin_n: c.argmin_n,
        horizon: c.horizon,
    }
}

fn json_string(c: &Certificate) -> FfiResult<*mut c_char> {
    let text = serde_json::to_string_pretty(&c.to_json_value())
        .map_err(|e| Failure::Lib(Error::Parse(e.to_string())))?;
    Ok(CString::new(text).map_err(|e| Failure::Lib(Error::Parse(e.to_string())))?.into_raw())
}

/// Writes the certificate summary and, when `json_out` is non-null, its JSON.
unsafe fn deliver(c: &Certificate, cert_out: *mut CopsonCertificate, json_out: *mut *mut c_char) -> FfiResult<()> {
    let dst = out(cert_out, "certificate out")?;
    if !json_out.is_null() {
        *json_out = json_string(c)?;
    }
    *dst = summary(c);
    Ok(())
}

/// Message describing the last failure on this thread, or `NULL`.
#[no_mangle]
pub extern "C" fn copson_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn copson_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn copson_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- families ----

unsafe fn new_family(f: WeightFamily, family_out: *mut *mut CopsonFamily) -> FfiResult<()> {
    let dst = out(family_out, "family out")?;
    *dst = Box::into_raw(Box::new(CopsonFamily { inner: f }));
    Ok(())
}

/// # Safety
/// `family_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn copson_family_unit(family_out: *mut *mut CopsonFamily) -> CopsonStatus {
    guard(|| new_family(WeightFamily::Unit, family_out))
}

/// `λ_n = n^α − (n−1)^α`, `α ≥ 1`.
///
/// # Safety
/// `family_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn copson_family_power_diff(alpha: f64, family_out: *mut *mut CopsonFamily) -> CopsonStatus {
    guard(|| new_family(WeightFamily::power_diff(alpha)?, family_out))
}

/// `λ_n = n^{α−1}`, `α ≥ 1`.
///
/// # Safety
/// `family_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn copson_family_power_kernel(alpha: f64, family_out: *mut *mut CopsonFamily) -> CopsonStatus {
    guard(|| new_family(WeightFamily::power_kernel(alpha)?, family_out))
}

/// Finite family from `len` positive values (copied).
///
/// # Safety
/// `values` must point to `len` doubles; `family_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_family_custom(
    values: *const f64,
    len: usize,
    family_out: *mut *mut CopsonFamily,
) -> CopsonStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        new_family(WeightFamily::custom(v)?, family_out)
    })
}

/// Parses `unit`, `powerdiff:A`, `powerkernel:A` or `custom:PATH`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `family_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_family_from_spec(
    spec: *const c_char,
    family_out: *mut *mut CopsonFamily,
) -> CopsonStatus {
    guard(|| {
        let s = string(spec, "spec")?;
        new_family(WeightFamily::from_spec(s)?, family_out)
    })
}

/// # Safety
/// `family` must come from a `copson_family_*` constructor, or be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_family_free(family: *mut CopsonFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_family_lambda(family: *const CopsonFamily, n: usize, value_out: *mut f64) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = f.inner.lambda(n)?;
        Ok(())
    })
}

/// `Λ_n = λ_1 + … + λ_n`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_family_big_lambda(
    family: *const CopsonFamily,
    n: usize,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = f.inner.big_lambda(n)?;
        Ok(())
    })
}

/// `Λ_{n+1}/λ_{n+1} − Λ_n/λ_n`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_family_gap(family: *const CopsonFamily, n: usize, value_out: *mut f64) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = f.inner.l_gap(n)?;
        Ok(())
    })
}

// ---- inequality ----

/// Left side `Σ_n (Λ_n^{-1} Σ_{k≥n} λ_k x_k)^p` over `x[0..len]`.
///
/// # Safety
/// `x` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_lhs_value(
    family: *const CopsonFamily,
    x: *const f64,
    len: usize,
    p: f64,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = copson_lhs(&f.inner, &sequence(x, len)?, p)?;
        Ok(())
    })
}

/// Ratio of the left side to `Σ x_n^p`.
///
/// # Safety
/// `x` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_ratio(
    family: *const CopsonFamily,
    x: *const f64,
    len: usize,
    p: f64,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = ratio_functional(&f.inner, &sequence(x, len)?, p)?;
        Ok(())
    })
}

/// Both sides of the dual inequality (`lhs ≤ rhs` expected); needs every `x_n > 0`.
///
/// # Safety
/// `x` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_dual_sides(
    family: *const CopsonFamily,
    x: *const f64,
    len: usize,
    p: f64,
    l: f64,
    lhs_out: *mut f64,
    rhs_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let lhs = out(lhs_out, "lhs out")?;
        let rhs = out(rhs_out, "rhs out")?;
        let d = dual_sides(&f.inner, &sequence(x, len)?, &Exponents::new(p, l)?)?;
        *lhs = d.lhs;
        *rhs = d.rhs;
        Ok(())
    })
}

// ---- polynomials ----

#[no_mangle]
pub extern "C" fn copson_a1(l: f64, p: f64) -> f64 {
    a1(l, p)
}

#[no_mangle]
pub extern "C" fn copson_a2(l: f64, p: f64) -> f64 {
    a2(l, p)
}

/// `L²/4` for `0 < L < 1`.
///
/// # Safety
/// `value_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_small_gap_threshold(l: f64, value_out: *mut f64) -> CopsonStatus {
    guard(|| {
        let dst = out(value_out, "value out")?;
        *dst = small_gap_threshold(l)?;
        Ok(())
    })
}

/// Relaxed threshold for `1/2 < L < 1`, `L + 2M < 1`.
///
/// # Safety
/// `value_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_relaxed_threshold(l: f64, m: f64, value_out: *mut f64) -> CopsonStatus {
    guard(|| {
        let dst = out(value_out, "value out")?;
        *dst = relaxed_threshold(l, m)?.value;
        Ok(())
    })
}

// ---- certificates ----
// `json_out` may be NULL; otherwise it receives a string to release with
// `copson_string_free`.

/// Per-index condition for `n = 1..=horizon`.
///
/// # Safety
/// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_check_index_condition(
    family: *const CopsonFamily,
    p: f64,
    l: f64,
    horizon: usize,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let c = check_index_condition(&f.inner, &Exponents::new(p, l)?, horizon, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

/// # Safety
/// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_check_gap_bound(
    family: *const CopsonFamily,
    l: f64,
    horizon: usize,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let c = check_gap_bound(&f.inner, l, horizon, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

/// # Safety
/// `family` and `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_check_relaxed_gap_bound(
    family: *const CopsonFamily,
    l: f64,
    m: f64,
    horizon: usize,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let c = check_relaxed_gap_bound(&f.inner, l, m, horizon, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

/// Polynomial criterion, decided exactly on the binary values of `l` and `p`.
///
/// # Safety
/// `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_check_polynomial_criterion(
    l: f64,
    p: f64,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let c = check_polynomial_criterion_f64(l, p, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

/// Threshold criterion; `m < 0` means "no M".
///
/// # Safety
/// `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_check_threshold_criterion(
    l: f64,
    m: f64,
    p: f64,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let m = if m < 0.0 { None } else { Some(Param::from_f64(m)?) };
        let c = check_threshold_criterion(&Param::from_f64(l)?, m.as_ref(), &Param::from_f64(p)?, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

// ---- weight traces ----

/// Builds `w_1..w_{horizon+1}`.
///
/// # Safety
/// `family` and `trace_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_build(
    family: *const CopsonFamily,
    p: f64,
    l: f64,
    horizon: usize,
    trace_out: *mut *mut CopsonTrace,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(trace_out, "trace out")?;
        let t = build_weights(&f.inner, &Exponents::new(p, l)?, horizon)?;
        *dst = Box::into_raw(Box::new(CopsonTrace { inner: t }));
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`copson_trace_build`], or be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_free(trace: *mut CopsonTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Horizon `N` of the trace, or 0 for `NULL`.
///
/// # Safety
/// `trace` must be valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_horizon(trace: *const CopsonTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.horizon())
}

/// `ln w_n` for `1 ≤ n ≤ N+1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_log_w(trace: *const CopsonTrace, n: usize, value_out: *mut f64) -> CopsonStatus {
    guard(|| {
        let t = deref(trace, "trace")?;
        let dst = out(value_out, "value out")?;
        let len = t.inner.horizon() + 1;
        if n == 0 || n > len {
            return Err(Error::IndexOutOfRange { index: n, len }.into());
        }
        *dst = t.inner.log_w(n);
        Ok(())
    })
}

/// Largest relative residual of the mean identity along the trace.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_mean_identity(
    family: *const CopsonFamily,
    trace: *const CopsonTrace,
    residual_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let t = deref(trace, "trace")?;
        let dst = out(residual_out, "residual out")?;
        *dst = verify_mean_identity(&f.inner, t.inner.exponents(), &t.inner)?;
        Ok(())
    })
}

/// Weighted index condition for `n ≤ horizon` using the trace.
///
/// # Safety
/// `family`, `trace` and `cert_out` must be valid; `json_out` valid or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_trace_verify(
    family: *const CopsonFamily,
    trace: *const CopsonTrace,
    horizon: usize,
    tol: f64,
    cert_out: *mut CopsonCertificate,
    json_out: *mut *mut c_char,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let t = deref(trace, "trace")?;
        let c = verify_weighted_condition(&f.inner, t.inner.exponents(), &t.inner, horizon, tol)?;
        deliver(&c, cert_out, json_out)
    })
}

// ---- auxiliary functions ----

/// Evaluates the auxiliary function named `id` (e.g. `"g"`, `"v_LMp"`) at `x`.
///
/// # Safety
/// `id` must be a NUL-terminated string; `value_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_aux_eval(
    id: *const c_char,
    l: f64,
    m: f64,
    p: f64,
    x: f64,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let fun: AuxFunction = string(id, "id")?.parse()?;
        let dst = out(value_out, "value out")?;
        *dst = aux_eval(fun, &AuxParams::new(l, m, p), x)?;
        Ok(())
    })
}

/// Minimum of the auxiliary function over `x = i/grid`, `i = 1..=grid`.
///
/// # Safety
/// `id` must be a NUL-terminated string; `report_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_aux_sign_scan(
    id: *const c_char,
    l: f64,
    m: f64,
    p: f64,
    grid: usize,
    tol: f64,
    report_out: *mut CopsonSignReport,
) -> CopsonStatus {
    guard(|| {
        let fun: AuxFunction = string(id, "id")?.parse()?;
        let dst = out(report_out, "report out")?;
        let r = aux_sign_scan(fun, &AuxParams::new(l, m, p), grid, tol)?;
        *dst = CopsonSignReport {
            min_value: r.min_value,
            argmin_x: r.argmin_x,
            floor: r.floor,
            min_margin: r.min_margin,
            certified_regime: r.certified_regime,
            anomaly: r.anomaly,
        };
        Ok(())
    })
}

// ---- best constant ----

/// Ratio at `x_n = n^{−1/p−ε}`, `n ≤ horizon`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_extremal_probe(
    family: *const CopsonFamily,
    p: f64,
    eps: f64,
    horizon: usize,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = extremal_probe(&f.inner, p, eps, horizon)?;
        Ok(())
    })
}

/// Minimises the ratio over sequences of length `horizon` with the default
/// optimiser settings and the given iteration cap and seed. When
/// `sequence_out` is non-null it receives the `horizon` entries of the
/// achieving sequence, normalised to `Σ x_n^p = 1`.
///
/// # Safety
/// `family` and `estimate_out` must be valid; `sequence_out` must hold
/// `horizon` doubles or be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_minimize_ratio(
    family: *const CopsonFamily,
    p: f64,
    horizon: usize,
    max_iters: usize,
    seed: u64,
    estimate_out: *mut CopsonEstimate,
    sequence_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(estimate_out, "estimate out")?;
        let config = OptimizerConfig {
            max_iters,
            seed,
            ..OptimizerConfig::default().with_n(horizon)
        };
        let est = minimize_ratio(&f.inner, p, &config)?;
        if !sequence_out.is_null() {
            std::slice::from_raw_parts_mut(sequence_out, horizon).copy_from_slice(&est.sequence);
        }
        *dst = CopsonEstimate {
            value: est.value,
            iterations: est.iterations,
            residual: est.residual,
            converged: est.converged,
        };
        Ok(())
    })
}

/// Exhaustive grid minimum of the ratio for `horizon ∈ {1,2,3}`.
///
/// # Safety
/// `family` and `value_out` must be valid; `sequence_out` must hold
/// `horizon` doubles or be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn copson_brute_force_oracle(
    family: *const CopsonFamily,
    p: f64,
    horizon: usize,
    resolution: usize,
    value_out: *mut f64,
    sequence_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        let o = brute_force_oracle(&f.inner, p, horizon, resolution)?;
        if !sequence_out.is_null() {
            std::slice::from_raw_parts_mut(sequence_out, horizon).copy_from_slice(&o.sequence);
        }
        *dst = o.value;
        Ok(())
    })
}

/// Norm of the scale-projected log-coordinate gradient of the ratio at `x`.
///
/// # Safety
/// `x` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn copson_stationarity(
    family: *const CopsonFamily,
    x: *const f64,
    len: usize,
    p: f64,
    value_out: *mut f64,
) -> CopsonStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let dst = out(value_out, "value out")?;
        *dst = stationarity_check(&f.inner, &sequence(x, len)?, p)?;
        Ok(())
    })
}
