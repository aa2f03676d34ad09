use std::ffi::{c_void, CString};
use std::ptr;

use ppscore_ffi::*;

fn unit_square() -> *mut PpsWindow {
    let mut w = ptr::null_mut();
    let status = unsafe { pps_window_new([0.0, 0.0].as_ptr(), [1.0, 1.0].as_ptr(), 2, &mut w) };
    assert_eq!(status, PpsStatus::Ok);
    w
}

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { pps_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

extern "C" fn constant(_: *const f64, dim: usize, user: *mut c_void) -> f64 {
    assert_eq!(dim, 2);
    unsafe { *(user as *const f64) }
}

#[test]
fn poisson_score_of_constant_intensity() {
    let w = unit_square();
    let coords = [0.1, 0.2, 0.5, 0.5, 0.9, 0.3];
    let mut pattern = ptr::null_mut();
    let mut f = ptr::null_mut();
    let mut rate = 5.0f64;
    unsafe {
        assert_eq!(pps_spatial_pattern_new(w, coords.as_ptr(), 3, &mut pattern), PpsStatus::Ok);
        let user = (&mut rate as *mut f64).cast();
        assert_eq!(pps_intensity_callback_new(Some(constant), user, w, &mut f), PpsStatus::Ok);
        let mut mass = 0.0;
        assert_eq!(pps_intensity_total_mass(f, &mut mass), PpsStatus::Ok);
        assert!((mass - 5.0).abs() < 1e-12);
        let mut s = 0.0;
        assert_eq!(pps_score_intensity_poisson(f, pattern, &mut s), PpsStatus::Ok);
        assert!((s - (5.0 - 3.0 * 5f64.ln())).abs() < 1e-12);
        // normalized density is 1 so the log part vanishes: c · (5 − 3)²
        assert_eq!(pps_score_intensity_combined(f, pattern, 0.1, &mut s), PpsStatus::Ok);
        assert!((s - 0.4).abs() < 1e-12);
        pps_intensity_free(f);
        pps_spatial_pattern_free(pattern);
        pps_window_free(w);
    }
}

#[test]
fn catalog_handles_and_errors() {
    let w = unit_square();
    let mut f = ptr::null_mut();
    let bad = CString::new("f9").unwrap();
    let good = CString::new("f0").unwrap();
    unsafe {
        assert_eq!(pps_intensity_catalog_new(bad.as_ptr(), w, &mut f), PpsStatus::Config);
        assert!(f.is_null());
        assert!(last_error().contains("f9"));
        assert_eq!(pps_intensity_catalog_new(good.as_ptr(), w, &mut f), PpsStatus::Ok);
        let mut mass = 0.0;
        assert_eq!(pps_intensity_total_mass(f, &mut mass), PpsStatus::Ok);
        // 30 · ∫∫ sqrt(x² + y²) over the unit square
        let exact = 30.0 * (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) / 3.0;
        assert!((mass - exact).abs() < 1e-9);
        pps_intensity_free(f);
        assert_eq!(pps_intensity_catalog_new(ptr::null(), w, &mut f), PpsStatus::NullPointer);
        pps_window_free(w);
    }
}

#[test]
fn invalid_inputs_report_errors() {
    let w = unit_square();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(pps_spatial_pattern_new(w, [1.5, 0.5].as_ptr(), 1, &mut p), PpsStatus::InvalidArgument);
        assert!(last_error().contains("outside"));
        let mut t = ptr::null_mut();
        assert_eq!(pps_temporal_pattern_new([2.0, 1.0].as_ptr(), 2, 5.0, &mut t), PpsStatus::InvalidArgument);
        let mut lo = ptr::null_mut();
        assert_eq!(pps_window_new([1.0].as_ptr(), [0.0].as_ptr(), 1, &mut lo), PpsStatus::InvalidArgument);
        pps_window_free(ptr::null_mut());
        pps_window_free(w);
    }
}

#[test]
fn hawkes_log_score_matches_closed_form() {
    let mut f = ptr::null_mut();
    let mut t = ptr::null_mut();
    let times = [1.0, 2.0];
    unsafe {
        assert_eq!(pps_cond_intensity_hawkes_exponential_new(2.0, 2.0, 4.0, &mut f), PpsStatus::Ok);
        assert_eq!(pps_temporal_pattern_new(times.as_ptr(), 2, 3.0, &mut t), PpsStatus::Ok);
        let mut s = 0.0;
        assert_eq!(pps_score_cond_intensity_log(f, t, &mut s), PpsStatus::Ok);
        let g = |u: f64| 0.5 * (1.0 - (-4.0 * u).exp());
        let compensator = 6.0 + g(2.0) + g(1.0);
        let log_rates = 2f64.ln() + (2.0 + 2.0 * (-4f64).exp()).ln();
        assert!((s - (compensator - log_rates)).abs() < 1e-12);
        pps_temporal_pattern_free(t);
        pps_cond_intensity_free(f);
    }
}

#[test]
fn dm_test_through_the_abi() {
    let diffs: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { -1.0 } else { 0.5 }).collect();
    let mut r = PpsDmResult { n: 0, mean: 0.0, variance: 0.0, t: 0.0, p_value: 0.0, decision: 9, degenerate: true };
    unsafe {
        assert_eq!(pps_dm_test(diffs.as_ptr(), diffs.len(), 0.05, true, &mut r), PpsStatus::Ok);
    }
    assert_eq!(r.n, 50);
    assert!((r.mean + 0.25).abs() < 1e-15);
    assert!(r.t < -1.645 && r.decision == 1 && !r.degenerate);
    unsafe {
        assert_eq!(pps_dm_test(diffs.as_ptr(), 1, 0.05, true, &mut r), PpsStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ppscore.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.trim().strip_prefix("pub unsafe extern \"C\" fn ").or(l.trim().strip_prefix("pub extern \"C\" fn ")))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct PpsWindow PpsWindow;"));
}
