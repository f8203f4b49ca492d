//! C ABI for `sorspec`.
//!
//! Profiles live behind an opaque [`SorspecProfile`] handle. Every fallible
//! function returns a [`SorspecStatus`] and writes results through out
//! pointers; on failure [`sorspec_last_error`] describes the problem. Strings
//! returned by the library must be released with [`sorspec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sorspec::{bounds, profile, slsolver, spectrum};
use sorspec::{Error, MetricProfile, ProfileSpec, QuadratureConfig, SolverConfig};

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SorspecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Capability = 4,
    Accuracy = 5,
    Inapplicable = 6,
    NotConverged = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque handle to a validated metric profile.
pub struct SorspecProfile {
    inner: MetricProfile,
}

/// Eigen-solver settings; see [`sorspec_solver_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SorspecSolverConfig {
    pub n_initial: usize,
    pub n_max: usize,
    pub rel_tol: f64,
    pub use_richardson: bool,
}

impl From<SorspecSolverConfig> for SolverConfig {
    fn from(c: SorspecSolverConfig) -> Self {
        SolverConfig {
            n_initial: c.n_initial,
            n_max: c.n_max,
            rel_tol: c.rel_tol,
            use_richardson: c.use_richardson,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SorspecStatus {
    match e {
        Error::InvalidSpec { .. } | Error::Json(_) | Error::Csv(_) => SorspecStatus::InvalidArgument,
        Error::Domain(_) => SorspecStatus::Domain,
        Error::Capability(_) => SorspecStatus::Capability,
        Error::Accuracy { .. } => SorspecStatus::Accuracy,
        Error::Inapplicable(_) => SorspecStatus::Inapplicable,
        Error::NotConverged { .. } => SorspecStatus::NotConverged,
        Error::Io(_) => SorspecStatus::Io,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard<F>(body: F) -> SorspecStatus
where
    F: FnOnce() -> Result<(), (SorspecStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SorspecStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SorspecStatus::Panic
        }
    }
}

fn lib<T>(r: sorspec::Result<T>) -> Result<T, (SorspecStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SorspecStatus, String) {
    (SorspecStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn profile_ref<'a>(p: *const SorspecProfile) -> Result<&'a MetricProfile, (SorspecStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("profile"))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SorspecStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (SorspecStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (SorspecStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn quadrature(abs_tol: f64) -> QuadratureConfig {
    if abs_tol > 0.0 {
        QuadratureConfig::with_tol(abs_tol)
    } else {
        QuadratureConfig::default()
    }
}

fn index(v: u32, what: &str) -> Result<u32, (SorspecStatus, String)> {
    if v == 0 {
        Err((SorspecStatus::InvalidArgument, format!("`{what}` must be at least 1")))
    } else {
        Ok(v)
    }
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn sorspec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default solver settings.
#[no_mangle]
pub extern "C" fn sorspec_solver_config_default() -> SorspecSolverConfig {
    let d = SolverConfig::default();
    SorspecSolverConfig {
        n_initial: d.n_initial,
        n_max: d.n_max,
        rel_tol: d.rel_tol,
        use_richardson: d.use_richardson,
    }
}

/// Creates a builtin profile (`"canonical"` or `"paper-example"`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_profile_builtin(name: *const c_char, out: *mut *mut SorspecProfile) -> SorspecStatus {
    guard(|| {
        let name = text(name, "name")?;
        let spec = ProfileSpec::builtin(name)
            .ok_or_else(|| (SorspecStatus::InvalidArgument, format!("unknown builtin profile `{name}`")))?;
        let inner = lib(sorspec::build_profile(&spec))?;
        write(out, Box::into_raw(Box::new(SorspecProfile { inner })), "out")
    })
}

/// Creates a profile from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_profile_from_json(json: *const c_char, out: *mut *mut SorspecProfile) -> SorspecStatus {
    guard(|| {
        let spec = lib(ProfileSpec::from_json(text(json, "json")?))?;
        let inner = lib(sorspec::build_profile(&spec))?;
        write(out, Box::into_raw(Box::new(SorspecProfile { inner })), "out")
    })
}

/// Releases a profile. Null is ignored.
///
/// # Safety
/// `p` must come from a profile constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sorspec_profile_free(p: *mut SorspecProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Gauss curvature K(x) = -f''(x)/2 for x in [-1, 1].
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_curvature_at(p: *const SorspecProfile, x: f64, out: *mut f64) -> SorspecStatus {
    guard(|| {
        let v = lib(profile::curvature_at(profile_ref(p)?, x))?;
        write(out, v, "out")
    })
}

/// ∫ f^l dx. A non-positive `abs_tol` selects the default tolerance.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_moment(p: *const SorspecProfile, l: u32, abs_tol: f64, out: *mut f64) -> SorspecStatus {
    guard(|| {
        let v = lib(profile::integrate_moment(profile_ref(p)?, l, &quadrature(abs_tol)))?;
        write(out, v, "out")
    })
}

/// ∫ f^l K dx. A non-positive `abs_tol` selects the default tolerance.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_curvature_moment(
    p: *const SorspecProfile,
    l: u32,
    abs_tol: f64,
    out: *mut f64,
) -> SorspecStatus {
    guard(|| {
        let v = lib(profile::integrate_curvature_moment(profile_ref(p)?, l, &quadrature(abs_tol)))?;
        write(out, v, "out")
    })
}

/// The `count` lowest eigenvalues of mode `k`, written to `values[0..count]`.
/// `errors` (may be null) receives the error estimates and `converged` (may
/// be null) whether every estimate met the tolerance.
///
/// # Safety
/// `p` must be a live handle; `values` (and `errors` if non-null) must hold
/// `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn sorspec_eigenvalues(
    p: *const SorspecProfile,
    k: i64,
    count: usize,
    cfg: SorspecSolverConfig,
    values: *mut f64,
    errors: *mut f64,
    converged: *mut bool,
) -> SorspecStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let slice = lib(slsolver::eigenvalues(profile_ref(p)?, k, count, &cfg.into()))?;
        ptr::copy_nonoverlapping(slice.eigenvalues.as_ptr(), values, count);
        if !errors.is_null() {
            ptr::copy_nonoverlapping(slice.error_estimates.as_ptr(), errors, count);
        }
        if !converged.is_null() {
            converged.write(slice.converged);
        }
        Ok(())
    })
}

/// λ_k^1.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_first_eigenvalue(
    p: *const SorspecProfile,
    k: i64,
    cfg: SorspecSolverConfig,
    out: *mut f64,
) -> SorspecStatus {
    guard(|| {
        let v = lib(slsolver::first_eigenvalue(profile_ref(p)?, k, &cfg.into()))?;
        write(out, v, "out")
    })
}

/// Upper bound for λ_m from the trial exponent `l`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_ray_bound(
    p: *const SorspecProfile,
    m: u32,
    l: u32,
    abs_tol: f64,
    out: *mut f64,
) -> SorspecStatus {
    guard(|| {
        let v = lib(bounds::ray_bound(profile_ref(p)?, index(m, "m")?, index(l, "l")?, &quadrature(abs_tol)))?;
        write(out, v, "out")
    })
}

/// Ray bound with l = m.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_sharp_bound(p: *const SorspecProfile, m: u32, abs_tol: f64, out: *mut f64) -> SorspecStatus {
    guard(|| {
        let v = lib(bounds::sharp_bound(profile_ref(p)?, index(m, "m")?, &quadrature(abs_tol)))?;
        write(out, v, "out")
    })
}

/// Ray bound with l = 1.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_rough_bound(p: *const SorspecProfile, m: u32, abs_tol: f64, out: *mut f64) -> SorspecStatus {
    guard(|| {
        let v = lib(bounds::rough_bound(profile_ref(p)?, index(m, "m")?, &quadrature(abs_tol)))?;
        write(out, v, "out")
    })
}

/// m² + ∫fK/(2∫f); fails with `Inapplicable` when ∫f < 2.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sorspec_negative_curvature_bound(
    p: *const SorspecProfile,
    m: u32,
    abs_tol: f64,
    out: *mut f64,
) -> SorspecStatus {
    guard(|| {
        let b = lib(bounds::negative_curvature_bound(profile_ref(p)?, index(m, "m")?, &quadrature(abs_tol)))?;
        write(out, b.value, "out")
    })
}

unsafe fn emit_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), (SorspecStatus, String)> {
    let s = lib(serde_json::to_string(value).map_err(Error::from))?;
    let c = CString::new(s).map_err(|_| (SorspecStatus::Panic, "JSON contained NUL".to_string()))?;
    write(out, c.into_raw(), "out")
}

/// Distinct eigenvalues up to index `m_target` as a JSON document. A
/// non-positive `merge_tol` selects the default tolerance.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable. Free the string with
/// [`sorspec_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sorspec_spectrum_json(
    p: *const SorspecProfile,
    m_target: usize,
    cfg: SorspecSolverConfig,
    merge_tol: f64,
    out: *mut *mut c_char,
) -> SorspecStatus {
    guard(|| {
        let tol = (merge_tol > 0.0).then_some(merge_tol);
        let s = lib(spectrum::assemble_spectrum(profile_ref(p)?, m_target, &cfg.into(), tol))?;
        emit_json(&s, out)
    })
}

/// Trace report for mode `k` with `terms` eigenvalues as a JSON document.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable. Free the string with
/// [`sorspec_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sorspec_trace_json(
    p: *const SorspecProfile,
    k: i64,
    terms: usize,
    cfg: SorspecSolverConfig,
    out: *mut *mut c_char,
) -> SorspecStatus {
    guard(|| {
        let r = lib(slsolver::trace_check(profile_ref(p)?, k, terms, &cfg.into()))?;
        emit_json(&r, out)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sorspec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
