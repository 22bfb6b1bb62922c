//! C ABI for the slitflow engine.
//!
//! Every function returns an [`SfStatus`]; on failure the message is available
//! from [`sf_last_error`] on the same thread. Strings handed out by the
//! library are owned by the caller and released with [`sf_string_free`].
//! Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slitflow::dynamics::{build_skew, default_checkpoints, iterate, BirkhoffTrace, SkewState};
use slitflow::flatsurf::SlitSurface;
use slitflow::interval::ratio;
use slitflow::witness::{records_json, run_stages, StageConfig, RECORD_DIGITS};
use slitflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    /// Argument outside its domain, such as `c` outside `(-1, 1)`.
    Domain = 2,
    /// Certification failed at the working precision.
    Precision = 3,
    /// A configured size limit was exceeded.
    Resource = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

impl From<&Error> for SfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::Usage(_) => SfStatus::Domain,
            Error::Precision(_) | Error::BoundaryAmbiguity { .. } | Error::NoCertificate(_) => SfStatus::Precision,
            Error::Resource(_) => SfStatus::Resource,
            Error::Io(_) => SfStatus::Io,
            Error::Stage { source, .. } => SfStatus::from(source.as_ref()),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (SfStatus, String)>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SfStatus::Panic
        }
    }
}

fn fail(e: Error) -> (SfStatus, String) {
    (SfStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (SfStatus, String) {
    (SfStatus::NullPointer, format!("{what} is null"))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), (SfStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| (SfStatus::Io, "string contains a nul byte".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Convergent `p_k / q_k` of `alpha = [1, 4, 9, ...]` as decimal strings.
///
/// # Safety
/// `p_out` and `q_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_convergent(k: u64, p_out: *mut *mut c_char, q_out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        if p_out.is_null() || q_out.is_null() {
            return Err(null("output pointer"));
        }
        let c = slitflow::cfrac::ContinuedFraction::squares().convergent(k).map_err(fail)?;
        out_string(c.p.to_string(), p_out)?;
        out_string(c.q.to_string(), q_out)
    })
}

/// The surface with slit `(1 + c) b`, `c = c_num / c_den`.
pub struct SfSurface {
    inner: SlitSurface,
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_surface_new(c_num: i64, c_den: i64, out: *mut *mut SfSurface) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if c_den == 0 {
            return Err((SfStatus::Domain, "c has a zero denominator".into()));
        }
        let inner = SlitSurface::standard().with_c(ratio(c_num, c_den)).map_err(fail)?;
        *out = Box::into_raw(Box::new(SfSurface { inner }));
        Ok(())
    })
}

/// # Safety
/// `surface` must come from [`sf_surface_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_surface_free(surface: *mut SfSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Enclosure of the slit width `b_c` with width at most `2^-bits`, as
/// outward-rounded decimal strings.
///
/// # Safety
/// `surface` must be a live handle; `lo_out` and `hi_out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_surface_slit_width(
    surface: *const SfSurface,
    bits: u32,
    lo_out: *mut *mut c_char,
    hi_out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        if lo_out.is_null() || hi_out.is_null() {
            return Err(null("output pointer"));
        }
        let w = s.inner.slit_width_bits(bits).map_err(fail)?;
        let (lo, hi) = w.decimal_bounds(RECORD_DIGITS);
        out_string(lo, lo_out)?;
        out_string(hi, hi_out)
    })
}

/// Stage records `k_min..=k_max` as a JSON array.
///
/// # Safety
/// `surface` must be a live handle; `json_out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_stages_json(
    surface: *const SfSurface,
    k_min: u64,
    k_max: u64,
    json_out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        let records = run_stages(k_min, k_max, &StageConfig::new(s.inner.clone())).map_err(fail)?;
        out_string(records_json(&records).map_err(fail)?, json_out)
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SfCheckpoint {
    pub n: u64,
    /// Orbit points `i < n` on sheet 0.
    pub hits: u64,
    pub flips: u64,
}

/// A Birkhoff trace of the sheet indicator.
pub struct SfBirkhoff {
    trace: BirkhoffTrace,
}

/// Iterates the skew rotation from `(start_num / start_den, sheet 0)` for `n`
/// steps with the default checkpoint schedule.
///
/// # Safety
/// `surface` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_birkhoff_run(
    surface: *const SfSurface,
    start_num: i64,
    start_den: i64,
    n: u64,
    out: *mut *mut SfBirkhoff,
) -> SfStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if start_den == 0 {
            return Err((SfStatus::Domain, "start has a zero denominator".into()));
        }
        let system = build_skew(&s.inner, n).map_err(fail)?;
        let cps = default_checkpoints(s.inner.cf(), n).map_err(fail)?;
        let start = SkewState::new(ratio(start_num, start_den), 0).map_err(fail)?;
        let trace = iterate(&system, &start, n, &cps).map_err(fail)?;
        *out = Box::into_raw(Box::new(SfBirkhoff { trace }));
        Ok(())
    })
}

/// Number of checkpoints, 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_birkhoff_len(trace: *const SfBirkhoff) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.checkpoints.len())
}

/// # Safety
/// `trace` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sf_birkhoff_checkpoint(trace: *const SfBirkhoff, index: usize, out: *mut SfCheckpoint) -> SfStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let cp = t
            .trace
            .checkpoints
            .get(index)
            .ok_or_else(|| (SfStatus::Domain, format!("checkpoint {index} out of range")))?;
        *out = SfCheckpoint { n: cp.n, hits: cp.hits, flips: cp.flips };
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`sf_birkhoff_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sf_birkhoff_free(trace: *mut SfBirkhoff) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
