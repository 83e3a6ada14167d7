//! C interface to `iwatsuka`.
//!
//! Every function returns an [`IwStatus`]. On failure a message describing
//! the error is kept per thread and can be copied out with
//! [`iw_last_error_message`]. Handles are created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use iwatsuka::bands::{sweep, BandProblem, BandSweep, SweepOptions};
use iwatsuka::comparison::{comparison_eigs, ComparisonSpec};
use iwatsuka::fiber::SolverOptions;
use iwatsuka::profiles::{AcCondition, ProfileSpec};
use iwatsuka::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    NumericalError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IwAcCondition {
    None = 0,
    Cond13 = 1,
    Cond14 = 2,
    Cond13Swapped = 3,
    Cond14Swapped = 4,
}

impl From<AcCondition> for IwAcCondition {
    fn from(c: AcCondition) -> Self {
        match c {
            AcCondition::Cond1_3 => IwAcCondition::Cond13,
            AcCondition::Cond1_4 => IwAcCondition::Cond14,
            AcCondition::Cond1_3Swapped => IwAcCondition::Cond13Swapped,
            AcCondition::Cond1_4Swapped => IwAcCondition::Cond14Swapped,
            AcCondition::None => IwAcCondition::None,
        }
    }
}

/// Essential lower/upper bounds of the field and potential tails; `plus`
/// is `x → +∞`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IwTailBounds {
    pub b_under_plus: f64,
    pub b_over_plus: f64,
    pub b_under_minus: f64,
    pub b_over_minus: f64,
    pub w_under_plus: f64,
    pub w_over_plus: f64,
    pub w_under_minus: f64,
    pub w_over_minus: f64,
    /// Non-zero when the bounds were sampled rather than known exactly.
    pub heuristic: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwAcDecision {
    pub verdict: i32,
    pub condition: IwAcCondition,
    pub margin: f64,
    pub heuristic: i32,
}

/// A field/potential pair.
pub struct IwProblem(BandProblem);

/// Band values over a `ξ` grid.
pub struct IwSweep(BandSweep);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(IwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Validation(_) | Error::Io(_) => IwStatus::InvalidArgument,
            e if e.is_config() => IwStatus::ParseError,
            _ => IwStatus::NumericalError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(IwStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err(Failure(
            IwStatus::BufferTooSmall,
            format!("output buffer holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

fn solver(h_max: f64) -> Result<SolverOptions, Failure> {
    if h_max.is_nan() || h_max < 0.0 {
        return Err(Failure(
            IwStatus::InvalidArgument,
            format!("h_max must be non-negative, got {h_max}"),
        ));
    }
    Ok(SolverOptions {
        h_max: (h_max > 0.0).then_some(h_max),
        ..SolverOptions::default()
    })
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length of the last error message on this thread, without the NUL; 0 if
/// the last call succeeded.
#[no_mangle]
pub extern "C" fn iw_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |m| m.as_bytes().len()))
}

/// Copy the last error message into `buf` (NUL-terminated).
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn iw_last_error_message(buf: *mut c_char, len: usize) -> IwStatus {
    if buf.is_null() {
        return IwStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&b""[..], |m| m.as_bytes());
        if len < bytes.len() + 1 {
            return IwStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        IwStatus::Ok
    })
}

/// Problem from the builtin catalog, e.g. `"iwatsuka-step"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_builtin(
    name: *const c_char,
    out: *mut *mut IwProblem,
) -> IwStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        store(out, IwProblem(BandProblem::builtin(name)?))
    })
}

/// Problem from JSON profile objects, `{"b": {...}, "w": {...}}`; `w`
/// defaults to zero.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_from_json(
    json: *const c_char,
    out: *mut *mut IwProblem,
) -> IwStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
        let mut parse = |key: &str| -> Result<Option<ProfileSpec>, Failure> {
            match value.get_mut(key).map(serde_json::Value::take) {
                None => Ok(None),
                Some(v) => Ok(Some(serde_json::from_value(v).map_err(Error::from)?)),
            }
        };
        let b = parse("b")?
            .ok_or_else(|| Failure(IwStatus::ParseError, "missing \"b\" profile".into()))?;
        let w = parse("w")?.unwrap_or(ProfileSpec::constant(0.0));
        store(out, IwProblem(BandProblem::new(b, w)?))
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_free(p: *mut IwProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live problem handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_tail_bounds(
    p: *const IwProblem,
    out: *mut IwTailBounds,
) -> IwStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        let t = &p.0.tails;
        *out = IwTailBounds {
            b_under_plus: t.b_under_plus,
            b_over_plus: t.b_over_plus,
            b_under_minus: t.b_under_minus,
            b_over_minus: t.b_over_minus,
            w_under_plus: t.w_under_plus,
            w_over_plus: t.w_over_plus,
            w_under_minus: t.w_under_minus,
            w_over_minus: t.w_over_minus,
            heuristic: i32::from(!t.is_exact()),
        };
        Ok(())
    })
}

/// # Safety
/// `p` must be a live problem handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_ac_decision(
    p: *const IwProblem,
    out: *mut IwAcDecision,
) -> IwStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        let d = p.0.ac_decision();
        *out = IwAcDecision {
            verdict: i32::from(d.verdict),
            condition: d.matched_condition.into(),
            margin: d.margin,
            heuristic: i32::from(d.heuristic),
        };
        Ok(())
    })
}

/// `A_y(x)` in the problem's gauge.
///
/// # Safety
/// `p` must be a live problem handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_vector_potential(
    p: *const IwProblem,
    x: f64,
    out: *mut f64,
) -> IwStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = p.0.gauge.eval(x);
        Ok(())
    })
}

/// Lowest `k` eigenvalues of the fiber operator at `xi`. `h_max = 0`
/// selects the default spacing.
///
/// # Safety
/// `p` must be a live problem handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iw_problem_band_values(
    p: *const IwProblem,
    xi: f64,
    k: usize,
    h_max: f64,
    out: *mut f64,
    len: usize,
) -> IwStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let out = out_slice(out, len, k)?;
        let sol = p.0.solve_fiber(xi, k, &solver(h_max)?)?;
        out.copy_from_slice(&sol.values);
        Ok(())
    })
}

/// Sweep the lowest `k` bands over `n` strictly increasing `xi` values.
///
/// # Safety
/// `p` must be a live problem handle, `xi` must hold `n` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_sweep_new(
    p: *const IwProblem,
    xi: *const f64,
    n: usize,
    k: usize,
    h_max: f64,
    out: *mut *mut IwSweep,
) -> IwStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        if xi.is_null() {
            return Err(null("xi"));
        }
        let grid = std::slice::from_raw_parts(xi, n);
        let opts = SweepOptions {
            solver: solver(h_max)?,
            ..SweepOptions::default()
        };
        store(out, IwSweep(sweep(&p.0, grid, k, &opts)?))
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iw_sweep_free(s: *mut IwSweep) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of grid points and bands.
///
/// # Safety
/// `s` must be a live sweep handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_sweep_dims(
    s: *const IwSweep,
    n_xi: *mut usize,
    k: *mut usize,
) -> IwStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sweep"))?;
        *n_xi.as_mut().ok_or_else(|| null("n_xi"))? = s.0.xi_grid.len();
        *k.as_mut().ok_or_else(|| null("k"))? = s.0.k;
        Ok(())
    })
}

/// Copy band `band` (1-based) into `out`.
///
/// # Safety
/// `s` must be a live sweep handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iw_sweep_band(
    s: *const IwSweep,
    band: usize,
    out: *mut f64,
    len: usize,
) -> IwStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sweep"))?;
        if band == 0 || band > s.0.k {
            return Err(Failure(
                IwStatus::InvalidArgument,
                format!("band must lie in 1..={}, got {band}", s.0.k),
            ));
        }
        let values = s.0.band(band);
        out_slice(out, len, values.len())?.copy_from_slice(values);
        Ok(())
    })
}

/// Smallest gap between consecutive bands; `INFINITY` for a single band.
///
/// # Safety
/// `s` must be a live sweep handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iw_sweep_min_gap(s: *const IwSweep, out: *mut f64) -> IwStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sweep"))?;
        *out.as_mut().ok_or_else(|| null("output"))? = s.0.min_gap().unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Lowest `k` eigenvalues of the glued harmonic comparison operator.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iw_comparison_eigs(
    omega: f64,
    omega_tilde: f64,
    x0: f64,
    alpha: f64,
    k: usize,
    out: *mut f64,
    len: usize,
) -> IwStatus {
    guard(|| {
        let out = out_slice(out, len, k)?;
        let spec = ComparisonSpec::new(omega, omega_tilde, x0, alpha)?;
        out.copy_from_slice(&comparison_eigs(&spec, k, &SolverOptions::default())?);
        Ok(())
    })
}
