//! C ABI for the scurve toolkit.
//!
//! Conventions:
//! - Objects are opaque handles created by `*_new` functions and released by
//!   the matching `*_free`; handles are never shared across creations.
//! - Every fallible function returns a [`ScurveStatus`] and writes its result
//!   through out-pointers, which are only written on `SCURVE_STATUS_OK`.
//! - `scurve_last_error_message` returns a thread-local, NUL-terminated
//!   description of the most recent failure on the calling thread. The
//!   pointer stays valid until the next failing call on that thread.
//!
//! The generated header lives at `include/scurve.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use scurve_core::curves::{SigmoidFamily, SigmoidSpec};
use scurve_core::damping::DampingSpec;
use scurve_core::error::Error;
use scurve_core::fitting::{fit_ls, FitConfig};
use scurve_core::ode::OdeSigmoid;
use scurve_core::scenario::{self, RunOptions};
use scurve_core::series::TimeSeries;

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScurveStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    NumericError = 4,
    IoError = 5,
    ParseError = 6,
    Utf8Error = 7,
}

/// Closed-form sigmoid families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScurveFamily {
    Logistic = 0,
    Algebraic = 1,
    ErrorFunction = 2,
    Gompertz = 3,
}

impl From<ScurveFamily> for SigmoidFamily {
    fn from(f: ScurveFamily) -> Self {
        match f {
            ScurveFamily::Logistic => SigmoidFamily::Logistic,
            ScurveFamily::Algebraic => SigmoidFamily::Algebraic,
            ScurveFamily::ErrorFunction => SigmoidFamily::ErrorFunction,
            ScurveFamily::Gompertz => SigmoidFamily::Gompertz,
        }
    }
}

/// Damping-function families for the growth-law process.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScurveDampingKind {
    /// `H(y) = 1 - y/L`; `param_a` = L, `param_b` unused.
    Linear = 0,
    /// `H(y) = min(1, 2 - 2y/L)`; `param_a` = L, `param_b` unused.
    PiecewiseLinear = 1,
    /// Power tail; `param_a` = L, `param_b` = exponent (>= 1).
    PowerTail = 2,
    /// Straight tail; `param_a` = scale, `param_b` = slope (< 0).
    SlopeTail = 3,
}

/// Opaque closed-form sigmoid.
pub struct ScurveSigmoid {
    spec: SigmoidSpec,
}

/// Opaque damping-function growth process.
pub struct ScurveOde {
    ode: OdeSigmoid,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).ok();
    });
}

fn status_of(err: &Error) -> ScurveStatus {
    match err {
        Error::Domain(_) => ScurveStatus::DomainError,
        Error::InvalidInput(_) => ScurveStatus::InvalidArgument,
        Error::Numeric(_) => ScurveStatus::NumericError,
        Error::Parse(_) => ScurveStatus::ParseError,
        Error::Io(_) => ScurveStatus::IoError,
    }
}

fn fail(err: Error) -> ScurveStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn fail_null(what: &str) -> ScurveStatus {
    set_error(format!("null pointer: {what}"));
    ScurveStatus::NullPointer
}

/// A NUL-terminated description of the last error on this thread, or NULL if
/// none occurred. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scurve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// The crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scurve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a closed-form sigmoid.
///
/// # Safety
/// `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn scurve_sigmoid_new(
    family: ScurveFamily,
    l: f64,
    alpha: f64,
    beta: f64,
    shift: f64,
    out: *mut *mut ScurveSigmoid,
) -> ScurveStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match SigmoidSpec::new(family.into(), l, alpha, beta, shift) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(ScurveSigmoid { spec }));
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases a sigmoid handle. NULL is a no-op.
///
/// # Safety
/// `handle` must have come from [`scurve_sigmoid_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn scurve_sigmoid_free(handle: *mut ScurveSigmoid) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Evaluates the curve at `t`.
///
/// # Safety
/// `handle` must be a live sigmoid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_sigmoid_eval(
    handle: *const ScurveSigmoid,
    t: f64,
    out: *mut f64,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if out.is_null() {
        return fail_null("out");
    }
    match h.spec.eval(t) {
        Ok(v) => {
            *out = v;
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Evaluates the growth rate `dy/dt` at `t`.
///
/// # Safety
/// `handle` must be a live sigmoid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_sigmoid_derivative(
    handle: *const ScurveSigmoid,
    t: f64,
    out: *mut f64,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if out.is_null() {
        return fail_null("out");
    }
    match h.spec.derivative(t) {
        Ok(v) => {
            *out = v;
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The inflection point of the curve.
///
/// # Safety
/// `handle` must be a live sigmoid handle; `out_t0`/`out_y0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_sigmoid_inflection(
    handle: *const ScurveSigmoid,
    out_t0: *mut f64,
    out_y0: *mut f64,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if out_t0.is_null() || out_y0.is_null() {
        return fail_null("out_t0/out_y0");
    }
    let (t0, y0) = h.spec.inflection();
    *out_t0 = t0;
    *out_y0 = y0;
    ScurveStatus::Ok
}

fn damping_from(kind: ScurveDampingKind, a: f64, b: f64) -> Result<DampingSpec, Error> {
    let spec = match kind {
        ScurveDampingKind::Linear => DampingSpec::Linear { l: a },
        ScurveDampingKind::PiecewiseLinear => DampingSpec::PiecewiseLinear { l: a },
        ScurveDampingKind::PowerTail => {
            if !(b.is_finite() && b >= 1.0 && b.fract() == 0.0 && b <= u32::MAX as f64) {
                return Err(Error::InvalidInput(format!(
                    "power-tail exponent must be a positive integer, got {b}"
                )));
            }
            DampingSpec::PowerTail { l: a, p: b as u32 }
        }
        ScurveDampingKind::SlopeTail => DampingSpec::SlopeTail { scale: a, slope: b },
    };
    spec.validate()?;
    Ok(spec)
}

/// Creates a growth-law process `y' = k H(y) y` anchored at `y(0)`.
/// `param_a`/`param_b` are interpreted per [`ScurveDampingKind`].
///
/// # Safety
/// `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn scurve_ode_new(
    kind: ScurveDampingKind,
    param_a: f64,
    param_b: f64,
    k: f64,
    y_at_zero: f64,
    out: *mut *mut ScurveOde,
) -> ScurveStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let damping = match damping_from(kind, param_a, param_b) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    match OdeSigmoid::new(damping, k, y_at_zero) {
        Ok(ode) => {
            *out = Box::into_raw(Box::new(ScurveOde { ode }));
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases an ODE handle. NULL is a no-op.
///
/// # Safety
/// `handle` must have come from [`scurve_ode_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn scurve_ode_free(handle: *mut ScurveOde) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Integrates the process over `times` (strictly increasing, length `len`)
/// into `out_values`. `out_reached_asymptote` reports whether the solution
/// saturated at the asymptote inside the grid.
///
/// # Safety
/// `times` and `out_values` must point to `len` readable/writable doubles;
/// `out_reached_asymptote` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn scurve_ode_integrate(
    handle: *const ScurveOde,
    times: *const f64,
    len: usize,
    out_values: *mut f64,
    out_reached_asymptote: *mut bool,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if times.is_null() || out_values.is_null() {
        return fail_null("times/out_values");
    }
    let grid = std::slice::from_raw_parts(times, len);
    match h.ode.integrate(grid) {
        Ok(sol) => {
            let values = sol.series.values();
            std::ptr::copy_nonoverlapping(values.as_ptr(), out_values, values.len());
            if !out_reached_asymptote.is_null() {
                *out_reached_asymptote = sol.reached_asymptote;
            }
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Elapsed time for the solution to climb from `y_from` to `y_to`.
/// Diverging passages (at the asymptote) report +infinity.
///
/// # Safety
/// `handle` must be a live ODE handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_ode_time_to_reach(
    handle: *const ScurveOde,
    y_from: f64,
    y_to: f64,
    out: *mut f64,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if out.is_null() {
        return fail_null("out");
    }
    match h.ode.time_to_reach(y_from, y_to) {
        Ok(t) => {
            *out = t;
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// The inflection point `(t0, y0)` of the process.
///
/// # Safety
/// `handle` must be a live ODE handle; `out_t0`/`out_y0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_ode_inflection(
    handle: *const ScurveOde,
    out_t0: *mut f64,
    out_y0: *mut f64,
) -> ScurveStatus {
    let Some(h) = handle.as_ref() else {
        return fail_null("handle");
    };
    if out_t0.is_null() || out_y0.is_null() {
        return fail_null("out_t0/out_y0");
    }
    match h.ode.inflection() {
        Ok((t0, y0)) => {
            *out_t0 = t0;
            *out_y0 = y0;
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Result of a logistic prefix fit.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ScurveFitResult {
    /// Fitted asymptote.
    pub l: f64,
    /// Fitted growth rate.
    pub k: f64,
    /// Fitted inflection time.
    pub t0: f64,
    /// Root mean squared residual on the window.
    pub rmse: f64,
    pub converged: bool,
    /// The input window was not increasing.
    pub degenerate_input: bool,
}

/// Multi-start least-squares fit of one sigmoid family to `(times, values)`.
/// Deterministic for a fixed `seed`. Needs at least 4 samples.
///
/// # Safety
/// `times`/`values` must point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn scurve_fit(
    family: ScurveFamily,
    times: *const f64,
    values: *const f64,
    len: usize,
    n_starts: usize,
    seed: u64,
    out: *mut ScurveFitResult,
) -> ScurveStatus {
    if times.is_null() || values.is_null() {
        return fail_null("times/values");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let times = std::slice::from_raw_parts(times, len);
    let values = std::slice::from_raw_parts(values, len);
    let series = match TimeSeries::new(times.to_vec(), values.to_vec()) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let cfg = FitConfig { n_starts: n_starts.max(1), seed, ..FitConfig::default() };
    match fit_ls(&series, family.into(), &cfg) {
        Ok(fit) => {
            *out = ScurveFitResult {
                l: fit.asymptote(),
                k: fit.rate(),
                t0: fit.t0(),
                rmse: fit.rmse,
                converged: fit.converged,
                degenerate_input: fit.degenerate_input,
            };
            ScurveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Runs a scenario file (or bundled scenario name), as the `scurve run`
/// command would. `out_dir` may be NULL to use the scenario's own directory;
/// `seed_override` may be NULL to keep the scenario's seed.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_dir` NULL or NUL-terminated;
/// `seed_override` NULL or pointing to a readable u64.
#[no_mangle]
pub unsafe extern "C" fn scurve_run_scenario(
    path: *const c_char,
    out_dir: *const c_char,
    seed_override: *const u64,
    quiet: bool,
) -> ScurveStatus {
    if path.is_null() {
        return fail_null("path");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("scenario path is not valid UTF-8");
        return ScurveStatus::Utf8Error;
    };
    let out_dir = if out_dir.is_null() {
        None
    } else {
        match CStr::from_ptr(out_dir).to_str() {
            Ok(s) => Some(PathBuf::from(s)),
            Err(_) => {
                set_error("output directory is not valid UTF-8");
                return ScurveStatus::Utf8Error;
            }
        }
    };
    let opts = RunOptions {
        out_dir,
        seed: if seed_override.is_null() { None } else { Some(*seed_override) },
        quiet,
    };
    match scenario::run(path, &opts) {
        Ok(_) => ScurveStatus::Ok,
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(scurve_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn sigmoid_roundtrip_through_the_c_api() {
        let mut handle: *mut ScurveSigmoid = std::ptr::null_mut();
        let status = unsafe {
            scurve_sigmoid_new(ScurveFamily::Logistic, 1.0, 1.0, 1.0, 0.0, &mut handle)
        };
        assert_eq!(status, ScurveStatus::Ok);
        assert!(!handle.is_null());

        let mut y = 0.0;
        assert_eq!(
            unsafe { scurve_sigmoid_eval(handle, 0.0, &mut y) },
            ScurveStatus::Ok
        );
        assert!((y - 0.5).abs() < 1e-15);

        let mut d = 0.0;
        assert_eq!(
            unsafe { scurve_sigmoid_derivative(handle, 0.0, &mut d) },
            ScurveStatus::Ok
        );
        assert!((d - 0.25).abs() < 1e-15);

        let (mut t0, mut y0) = (0.0, 0.0);
        assert_eq!(
            unsafe { scurve_sigmoid_inflection(handle, &mut t0, &mut y0) },
            ScurveStatus::Ok
        );
        assert_eq!((t0, y0), (0.0, 0.5));

        unsafe { scurve_sigmoid_free(handle) };
    }

    #[test]
    fn invalid_arguments_set_the_error_message() {
        let mut handle: *mut ScurveSigmoid = std::ptr::null_mut();
        let status = unsafe {
            scurve_sigmoid_new(ScurveFamily::Logistic, -1.0, 1.0, 1.0, 0.0, &mut handle)
        };
        assert_eq!(status, ScurveStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(scurve_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("positive"));

        // domain error: non-finite evaluation point
        let status = unsafe {
            scurve_sigmoid_new(ScurveFamily::Logistic, 1.0, 1.0, 1.0, 0.0, &mut handle)
        };
        assert_eq!(status, ScurveStatus::Ok);
        let mut y = 0.0;
        assert_eq!(
            unsafe { scurve_sigmoid_eval(handle, f64::NAN, &mut y) },
            ScurveStatus::DomainError
        );
        unsafe { scurve_sigmoid_free(handle) };
    }

    #[test]
    fn ode_integration_through_the_c_api() {
        let mut handle: *mut ScurveOde = std::ptr::null_mut();
        let status = unsafe {
            scurve_ode_new(ScurveDampingKind::Linear, 1.0, 0.0, 1.0, 0.5, &mut handle)
        };
        assert_eq!(status, ScurveStatus::Ok);

        let times = [-2.0, 0.0, 2.0];
        let mut values = [0.0; 3];
        let mut reached = false;
        let status = unsafe {
            scurve_ode_integrate(handle, times.as_ptr(), 3, values.as_mut_ptr(), &mut reached)
        };
        assert_eq!(status, ScurveStatus::Ok);
        assert_eq!(values[1], 0.5);
        let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
        assert!((values[0] - logistic(-2.0)).abs() < 1e-8);
        assert!((values[2] - logistic(2.0)).abs() < 1e-8);
        assert!(!reached);

        let mut t = 0.0;
        let status = unsafe { scurve_ode_time_to_reach(handle, 0.5, 0.9, &mut t) };
        assert_eq!(status, ScurveStatus::Ok);
        assert!((t - (0.9f64 / 0.1 / 1.0).ln()).abs() < 1e-8);

        let mut t_inf = 0.0;
        let status = unsafe { scurve_ode_time_to_reach(handle, 0.5, 1.0, &mut t_inf) };
        assert_eq!(status, ScurveStatus::Ok);
        assert!(t_inf.is_infinite());

        unsafe { scurve_ode_free(handle) };
    }

    #[test]
    fn fit_through_the_c_api() {
        let spec = SigmoidSpec::logistic(2.0, 0.8, 1.0).unwrap();
        let times: Vec<f64> = (0..60).map(|i| -5.0 + 0.2 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| spec.eval_raw(t)).collect();
        let mut out = ScurveFitResult {
            l: 0.0,
            k: 0.0,
            t0: 0.0,
            rmse: 0.0,
            converged: false,
            degenerate_input: false,
        };
        let status = unsafe {
            scurve_fit(
                ScurveFamily::Logistic,
                times.as_ptr(),
                values.as_ptr(),
                times.len(),
                16,
                7,
                &mut out,
            )
        };
        assert_eq!(status, ScurveStatus::Ok);
        assert!((out.l - 2.0).abs() < 1e-5, "L = {}", out.l);
        assert!((out.k - 0.8).abs() < 1e-5, "k = {}", out.k);
        assert!((out.t0 - 1.0).abs() < 1e-5, "t0 = {}", out.t0);
        assert!(out.converged);
    }

    #[test]
    fn null_pointers_are_rejected() {
        let status = unsafe {
            scurve_sigmoid_new(ScurveFamily::Logistic, 1.0, 1.0, 1.0, 0.0, std::ptr::null_mut())
        };
        assert_eq!(status, ScurveStatus::NullPointer);
        let mut y = 0.0;
        let status = unsafe { scurve_sigmoid_eval(std::ptr::null(), 0.0, &mut y) };
        assert_eq!(status, ScurveStatus::NullPointer);
    }
}
