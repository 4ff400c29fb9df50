//! C ABI over `lnr`.
//!
//! Setting bundles live behind the opaque [`LnrSettings`] handle. Every
//! fallible call returns an [`LnrStatus`]; on failure the message is kept
//! per thread and can be copied out with [`lnr_last_error_message`].
//! Vector arguments are three unit vectors packed row-major into nine
//! doubles. Angles are radians.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lnr::analysis::{optimal_category_i_settings, optimize_category_i, symmetric_category_ii_settings, threshold_visibility};
use lnr::bounds::min_abs_projection_closed_form;
use lnr::{CorrelationModel, Error, Settings, SettingsCategoryI, SettingsCategoryII, UnitVec3};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LnrStatus {
    Ok = 0,
    NullPointer = 1,
    /// Out-of-range or non-finite argument, or a zero vector.
    InvalidArgument = 2,
    /// Coincident or antipodal setting pair.
    DegenerateSettings = 3,
    LinearlyDependent = 4,
    /// Visibility too low for any violation.
    NoViolationPossible = 5,
    UndefinedThreshold = 6,
    /// A panic was caught at the boundary.
    Internal = 99,
}

/// Opaque setting bundle.
pub struct LnrSettings(Settings);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LnrBound {
    /// Minimum-projection value of the derived directions.
    pub l: f64,
    /// Smallest pair opening (category I) or largest adjacent angle
    /// (category II), radians.
    pub extremal_angle: f64,
    pub bound: f64,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LnrViolation {
    pub lhs: f64,
    pub bound: f64,
    /// `lhs − bound`; positive means violated.
    pub s: f64,
    /// `bound / lhs`, NaN when the left-hand side vanishes.
    pub ratio: f64,
    pub l: f64,
    pub extremal_angle: f64,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> LnrStatus {
    match e {
        Error::Range { .. } | Error::ZeroVector(..) | Error::UnrealizableAngles(..) | Error::Domain(_) => {
            LnrStatus::InvalidArgument
        }
        Error::DegeneratePair { .. } | Error::DegenerateSettings { .. } | Error::Settings(_) => {
            LnrStatus::DegenerateSettings
        }
        Error::LinearlyDependent(_) => LnrStatus::LinearlyDependent,
        Error::NoViolationPossible(_) => LnrStatus::NoViolationPossible,
        Error::UndefinedThreshold => LnrStatus::UndefinedThreshold,
    }
}

fn fail(status: LnrStatus, msg: impl Into<String>) -> LnrStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), LnrStatus>) -> LnrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            LnrStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(LnrStatus::Internal, "internal panic"),
    }
}

fn lift<T>(r: lnr::Result<T>) -> Result<T, LnrStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn null(what: &str) -> LnrStatus {
    fail(LnrStatus::NullPointer, format!("{what} is null"))
}

unsafe fn triple(p: *const f64, what: &str) -> Result<[UnitVec3; 3], LnrStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    let v = std::slice::from_raw_parts(p, 9);
    let mut out = [UnitVec3::Z; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = lift(UnitVec3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2]))?;
    }
    Ok(out)
}

unsafe fn settings<'a>(h: *const LnrSettings) -> Result<&'a Settings, LnrStatus> {
    h.as_ref().map(|s| &s.0).ok_or_else(|| null("settings handle"))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), LnrStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed(out: *mut *mut LnrSettings, s: Settings) -> Result<(), LnrStatus> {
    // Reject bundles whose bound is undefined up front.
    lift(s.bound())?;
    unsafe { write(out, Box::into_raw(Box::new(LnrSettings(s))), "out") }
}

fn model(visibility: f64) -> Result<CorrelationModel, LnrStatus> {
    lift(CorrelationModel::new(visibility))
}

fn violation_of(r: lnr::ViolationReport) -> LnrViolation {
    LnrViolation {
        lhs: r.lhs,
        bound: r.bound,
        s: r.s,
        ratio: r.ratio.unwrap_or(f64::NAN),
        l: r.l,
        extremal_angle: r.extremal_angle,
        degenerate: r.degenerate,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lnr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lnr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Category I bundle from Alice's `a`, Bob's `b` and `b2` directions.
/// Inputs are normalized.
///
/// # Safety
/// `a`, `b`, `b2` must point to nine doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_category_i_new(
    a: *const f64,
    b: *const f64,
    b2: *const f64,
    out: *mut *mut LnrSettings,
) -> LnrStatus {
    guard(|| {
        let s = SettingsCategoryI { a: triple(a, "a")?, b: triple(b, "b")?, b2: triple(b2, "b2")? };
        boxed(out, Settings::I(s))
    })
}

/// Category II bundle from Alice's `a` and Bob's cyclic `b` directions.
///
/// # Safety
/// `a`, `b` must point to nine doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_category_ii_new(
    a: *const f64,
    b: *const f64,
    out: *mut *mut LnrSettings,
) -> LnrStatus {
    guard(|| {
        let s = SettingsCategoryII { a: triple(a, "a")?, b: triple(b, "b")? };
        boxed(out, Settings::II(s))
    })
}

/// Symmetric-cone category II bundle with adjacent angle `delta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_symmetric_ii_new(delta: f64, out: *mut *mut LnrSettings) -> LnrStatus {
    guard(|| boxed(out, Settings::II(lift(symmetric_category_ii_settings(delta))?)))
}

/// Orthogonal category I bundle with common pair opening `beta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_optimal_i_new(beta: f64, out: *mut *mut LnrSettings) -> LnrStatus {
    guard(|| {
        if !(beta > 0.0 && beta <= std::f64::consts::PI) {
            return Err(fail(LnrStatus::InvalidArgument, format!("beta = {beta} is outside (0, pi]")));
        }
        boxed(out, Settings::I(optimal_category_i_settings(beta)))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_free(s: *mut LnrSettings) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// 1 for category I, 2 for category II, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lnr_settings_category(s: *const LnrSettings) -> c_int {
    match s.as_ref().map(|s| &s.0) {
        Some(Settings::I(_)) => 1,
        Some(Settings::II(_)) => 2,
        None => 0,
    }
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_bound(s: *const LnrSettings, out: *mut LnrBound) -> LnrStatus {
    guard(|| {
        let r = lift(settings(s)?.bound())?;
        let b = LnrBound { l: r.l, extremal_angle: r.extremal_angle, bound: r.bound, degenerate: r.degenerate };
        write(out, b, "out")
    })
}

/// Singlet prediction at `visibility` against the bound.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_violation(s: *const LnrSettings, visibility: f64, out: *mut LnrViolation) -> LnrStatus {
    guard(|| {
        let r = lift(model(visibility)?.evaluate_violation(settings(s)?))?;
        write(out, violation_of(r), "out")
    })
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_threshold_visibility(s: *const LnrSettings, out: *mut f64) -> LnrStatus {
    guard(|| {
        let t = lift(threshold_visibility(settings(s)?))?;
        write(out, t, "out")
    })
}

/// Best category I bundle at `visibility`. Writes the pair opening and the
/// evaluation; `settings_out` may be null.
///
/// # Safety
/// `beta_out` and `report_out` must be writable; `settings_out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_optimize_category_i(
    visibility: f64,
    beta_out: *mut f64,
    report_out: *mut LnrViolation,
    settings_out: *mut *mut LnrSettings,
) -> LnrStatus {
    guard(|| {
        if beta_out.is_null() || report_out.is_null() {
            return Err(null("output"));
        }
        let opt = lift(optimize_category_i(&model(visibility)?))?;
        write(beta_out, opt.beta, "beta_out")?;
        write(report_out, violation_of(opt.report), "report_out")?;
        if !settings_out.is_null() {
            settings_out.write(Box::into_raw(Box::new(LnrSettings(Settings::I(opt.settings)))));
        }
        Ok(())
    })
}

/// Closed-form minimum of `Σ|e_i·v|` over unit `v`; 0 for dependent triples.
///
/// # Safety
/// `e` must point to nine doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lnr_min_projection(e: *const f64, out: *mut f64) -> LnrStatus {
    guard(|| {
        let [a, b, c] = triple(e, "e")?;
        write(out, min_abs_projection_closed_form(&a, &b, &c), "out")
    })
}
