//! C ABI over `gtsc-ruin`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`. Every
//! fallible call returns a [`GtscStatus`] and writes its result through an out pointer;
//! the message of the last failure on the calling thread is available from
//! [`gtsc_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gtsc_ruin::laws::{gtsc_ladder, ruin_probability_asymptotic, LadderModel, LawKind};
use gtsc_ruin::model::{boundary_alpha, classify, GtscParams, Regime, RegimeReport};
use gtsc_ruin::simulator::{estimate_conditional_laws, SimScheme};
use gtsc_ruin::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    /// The call does not apply to the model's regime (for example at the boundary).
    State = 4,
    Accuracy = 5,
    Estimation = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtscRegime {
    Cramer = 0,
    ConvolutionEquivalent = 1,
    Boundary = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtscLawKind {
    Overshoot = 0,
    Undershoot = 1,
    MaxUndershoot = 2,
}

/// Regime and constants; absent constants are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GtscRegimeInfo {
    pub regime: GtscRegime,
    pub f_alpha: f64,
    pub nu0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub m_star: f64,
}

/// Summary of a conditional-law estimation run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GtscSimSummary {
    pub n_paths: u64,
    pub n_ruined: u64,
    pub n_censored: u64,
    pub ruin_fraction: f64,
    pub ruin_standard_error: f64,
    pub creep_fraction: f64,
    pub creep_standard_error: f64,
}

/// Opaque model handle.
pub struct GtscModel {
    params: GtscParams,
}

/// Opaque handle on the limit laws of one model.
pub struct GtscLaws {
    ladder: LadderModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GtscStatus {
    match e {
        Error::Domain(_) => GtscStatus::Domain,
        Error::InvalidParams(_) => GtscStatus::InvalidParams,
        Error::Accuracy { .. } => GtscStatus::Accuracy,
        Error::State(_) => GtscStatus::State,
        Error::Estimation(_) => GtscStatus::Estimation,
    }
}

/// Runs `f`, records failures and converts panics into `GtscStatus::Panic`.
fn guard<F: FnOnce() -> Result<(), GtscStatus>>(f: F) -> GtscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GtscStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            GtscStatus::Panic
        }
    }
}

fn lib<T>(r: gtsc_ruin::Result<T>) -> Result<T, GtscStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, GtscStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument");
        GtscStatus::NullPointer
    })
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), GtscStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(GtscStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

fn law_kind(k: GtscLawKind) -> LawKind {
    match k {
        GtscLawKind::Overshoot => LawKind::Overshoot,
        GtscLawKind::Undershoot => LawKind::Undershoot,
        GtscLawKind::MaxUndershoot => LawKind::MaxUndershoot,
    }
}

fn report(m: &GtscModel, boundary_tol: f64) -> Result<RegimeReport, GtscStatus> {
    lib(classify(&m.params, boundary_tol))
}

/// Message of the last failed call on this thread (empty if none). The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gtsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a model from (q, d_H, c, α, ρ).
///
/// # Safety
/// `out` must be null or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn gtsc_model_new(
    q: f64,
    d_h: f64,
    c: f64,
    alpha: f64,
    rho: f64,
    out: *mut *mut GtscModel,
) -> GtscStatus {
    guard(|| {
        let params = lib(GtscParams::new(q, d_h, c, alpha, rho))?;
        write(out, Box::into_raw(Box::new(GtscModel { params })))
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`gtsc_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gtsc_model_free(model: *mut GtscModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Regime classification with the given tolerance on f(α).
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_model_classify(
    model: *const GtscModel,
    boundary_tol: f64,
    out: *mut GtscRegimeInfo,
) -> GtscStatus {
    guard(|| {
        let r = report(deref(model)?, boundary_tol)?;
        let regime = match r.regime {
            Regime::Cramer => GtscRegime::Cramer,
            Regime::ConvolutionEquivalent => GtscRegime::ConvolutionEquivalent,
            Regime::Boundary => GtscRegime::Boundary,
        };
        write(
            out,
            GtscRegimeInfo {
                regime,
                f_alpha: r.f_alpha,
                nu0: r.nu0.unwrap_or(f64::NAN),
                beta1: r.beta1.unwrap_or(f64::NAN),
                beta2: r.beta2.unwrap_or(f64::NAN),
                m_star: r.m_star.unwrap_or(f64::NAN),
            },
        )
    })
}

/// The α at which f(α) = 0, other parameters fixed (requires 0 < ρ < 1).
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_model_boundary_alpha(
    model: *const GtscModel,
    out: *mut f64,
) -> GtscStatus {
    guard(|| {
        let a = lib(boundary_alpha(&deref(model)?.params))?;
        write(out, a)
    })
}

/// Asymptotic ruin probability at reserve `u`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_ruin_probability(
    model: *const GtscModel,
    boundary_tol: f64,
    u: f64,
    out: *mut f64,
) -> GtscStatus {
    guard(|| {
        let m = deref(model)?;
        let r = report(m, boundary_tol)?;
        let v = lib(ruin_probability_asymptotic(&m.params, &r, u))?;
        write(out, v)
    })
}

/// Builds the limit laws of a model off the regime boundary.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn gtsc_laws_new(
    model: *const GtscModel,
    boundary_tol: f64,
    out: *mut *mut GtscLaws,
) -> GtscStatus {
    guard(|| {
        let m = deref(model)?;
        let r = report(m, boundary_tol)?;
        let ladder = lib(gtsc_ladder(&m.params, &r))?;
        write(out, Box::into_raw(Box::new(GtscLaws { ladder })))
    })
}

/// Releases laws; null is ignored.
///
/// # Safety
/// `laws` must be null or a handle from [`gtsc_laws_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gtsc_laws_free(laws: *mut GtscLaws) {
    if !laws.is_null() {
        drop(Box::from_raw(laws));
    }
}

/// Limit CDF of one law at x.
///
/// # Safety
/// `laws` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_laws_cdf(
    laws: *const GtscLaws,
    kind: GtscLawKind,
    x: f64,
    out: *mut f64,
) -> GtscStatus {
    guard(|| {
        let v = lib(deref(laws)?.ladder.cdf(law_kind(kind), x))?;
        write(out, v)
    })
}

/// Mass the law places at +∞ (β₂ for the undershoots in the convolution-equivalent
/// regime, else 0).
///
/// # Safety
/// `laws` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_laws_mass_at_infinity(
    laws: *const GtscLaws,
    kind: GtscLawKind,
    out: *mut f64,
) -> GtscStatus {
    guard(|| {
        let l = deref(laws)?;
        write(out, 1.0 - l.ladder.total_mass(law_kind(kind)))
    })
}

/// Limiting probability of ruin by creeping.
///
/// # Safety
/// `laws` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_laws_creep_probability(
    laws: *const GtscLaws,
    out: *mut f64,
) -> GtscStatus {
    guard(|| {
        let l = deref(laws)?;
        write(out, l.ladder.creep_probability())
    })
}

/// Simulates paths with the default scheme until `n_ruined` ruins at `u` (or the
/// default path budget) and reports ruin and creep fractions.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn gtsc_simulate(
    model: *const GtscModel,
    boundary_tol: f64,
    u: f64,
    n_ruined: u64,
    seed: u64,
    workers: usize,
    out: *mut GtscSimSummary,
) -> GtscStatus {
    guard(|| {
        let m = deref(model)?;
        let r = report(m, boundary_tol)?;
        let scheme = lib(SimScheme::default_for(&m.params, &r, u, seed))?;
        let est = lib(estimate_conditional_laws(
            &m.params,
            u,
            n_ruined,
            &scheme,
            &[0.0],
            workers,
        ))?;
        write(
            out,
            GtscSimSummary {
                n_paths: est.n_paths,
                n_ruined: est.n_ruined,
                n_censored: est.n_censored,
                ruin_fraction: est.ruin_fraction,
                ruin_standard_error: est.ruin_standard_error,
                creep_fraction: est.creep_fraction,
                creep_standard_error: est.creep_standard_error,
            },
        )
    })
}
