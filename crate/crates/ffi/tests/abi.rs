use std::ffi::CStr;
use std::path::Path;
use std::ptr;

use gtsc_ruin_ffi::*;

fn model(alpha: f64) -> *mut GtscModel {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { gtsc_model_new(1.0, 0.5, 1.0, alpha, 0.5, &mut m) },
        GtscStatus::Ok
    );
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gtsc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn classify_both_regimes() {
    let m = model(0.10);
    let mut info = GtscRegimeInfo {
        regime: GtscRegime::Boundary,
        f_alpha: 0.0,
        nu0: 0.0,
        beta1: 0.0,
        beta2: 0.0,
        m_star: 0.0,
    };
    assert_eq!(
        unsafe { gtsc_model_classify(m, 1e-10, &mut info) },
        GtscStatus::Ok
    );
    assert_eq!(info.regime, GtscRegime::Cramer);
    assert!((info.nu0 - 0.097_704_257_673_642_34).abs() < 1e-12);
    assert!(info.beta2.is_nan());
    unsafe { gtsc_model_free(m) };

    let m = model(0.05);
    assert_eq!(
        unsafe { gtsc_model_classify(m, 1e-10, &mut info) },
        GtscStatus::Ok
    );
    assert_eq!(info.regime, GtscRegime::ConvolutionEquivalent);
    assert!(info.nu0.is_nan());
    // β₂ = −f(α)/q with Γ(−1/2) = −2√π
    let f = 0.5 * 0.05 - 1.0 + 2.0 * std::f64::consts::PI.sqrt() * 0.05_f64.sqrt();
    assert!((info.beta2 + f).abs() < 1e-14);
    unsafe { gtsc_model_free(m) };
}

#[test]
fn invalid_parameters_report_code_and_message() {
    let mut m = ptr::null_mut();
    let s = unsafe { gtsc_model_new(1.0, 0.5, 1.0, 0.1, 1.5, &mut m) };
    assert_eq!(s, GtscStatus::InvalidParams);
    assert!(m.is_null());
    assert!(last_error().contains("rho"), "{}", last_error());
}

#[test]
fn null_pointers_are_rejected() {
    let mut x = 0.0;
    assert_eq!(
        unsafe { gtsc_ruin_probability(ptr::null(), 1e-10, 10.0, &mut x) },
        GtscStatus::NullPointer
    );
    let m = model(0.10);
    assert_eq!(
        unsafe { gtsc_ruin_probability(m, 1e-10, 10.0, ptr::null_mut()) },
        GtscStatus::NullPointer
    );
    unsafe {
        gtsc_model_free(m);
        gtsc_model_free(ptr::null_mut());
        gtsc_laws_free(ptr::null_mut());
    }
}

#[test]
fn laws_through_handles() {
    let m = model(0.05);
    let mut laws = ptr::null_mut();
    assert_eq!(
        unsafe { gtsc_laws_new(m, 1e-10, &mut laws) },
        GtscStatus::Ok
    );
    let (mut lo, mut hi, mut inf, mut creep) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            gtsc_laws_cdf(laws, GtscLawKind::Undershoot, 1.0, &mut lo),
            GtscStatus::Ok
        );
        assert_eq!(
            gtsc_laws_cdf(laws, GtscLawKind::Undershoot, 10.0, &mut hi),
            GtscStatus::Ok
        );
        assert_eq!(
            gtsc_laws_mass_at_infinity(laws, GtscLawKind::Undershoot, &mut inf),
            GtscStatus::Ok
        );
        assert_eq!(
            gtsc_laws_creep_probability(laws, &mut creep),
            GtscStatus::Ok
        );
    }
    assert!(0.0 <= lo && lo <= hi && hi <= 1.0 - inf + 1e-12);
    assert!(inf > 0.0);
    // creep probability α d_H / q
    assert!((creep - 0.05 * 0.5).abs() < 1e-12);
    let mut x = 0.0;
    assert_eq!(
        unsafe { gtsc_laws_cdf(laws, GtscLawKind::Overshoot, -1.0, &mut x) },
        GtscStatus::Domain
    );
    unsafe {
        gtsc_laws_free(laws);
        gtsc_model_free(m);
    }
}

#[test]
fn boundary_is_a_state_error() {
    let base = model(0.10);
    let mut a0 = 0.0;
    assert_eq!(
        unsafe { gtsc_model_boundary_alpha(base, &mut a0) },
        GtscStatus::Ok
    );
    assert!((a0 - 0.0738).abs() < 1e-3);
    let m = model(a0);
    let mut laws = ptr::null_mut();
    assert_eq!(
        unsafe { gtsc_laws_new(m, 1e-10, &mut laws) },
        GtscStatus::State
    );
    assert!(laws.is_null());
    unsafe {
        gtsc_model_free(m);
        gtsc_model_free(base);
    }
}

#[test]
fn simulation_is_deterministic() {
    let m = model(0.10);
    let run = || {
        let mut s = GtscSimSummary {
            n_paths: 0,
            n_ruined: 0,
            n_censored: 0,
            ruin_fraction: 0.0,
            ruin_standard_error: 0.0,
            creep_fraction: 0.0,
            creep_standard_error: 0.0,
        };
        assert_eq!(
            unsafe { gtsc_simulate(m, 1e-10, 2.0, 300, 11, 1, &mut s) },
            GtscStatus::Ok
        );
        s
    };
    let (a, b) = (run(), run());
    assert_eq!(a.n_paths, b.n_paths);
    assert_eq!(a.ruin_fraction, b.ruin_fraction);
    assert!(a.n_ruined >= 300 && a.ruin_fraction > 0.0 && a.ruin_fraction < 1.0);
    unsafe { gtsc_model_free(m) };
}

#[test]
fn header_is_generated_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gtsc_ruin.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "gtsc_model_new",
        "gtsc_laws_cdf",
        "GTSC_STATUS_NULL_POINTER",
        "GtscSimSummary",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
