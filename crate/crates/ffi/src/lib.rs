//! C ABI over the scoring library.
//!
//! Objects are opaque handles created by `pps_*_new` functions and released
//! by the matching `pps_*_free`. Every fallible call returns a [`PpsStatus`];
//! on failure a message is available from [`pps_last_error_message`] on the
//! same thread. Results are written through out-pointers and left untouched
//! on failure.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use ppscore::catalog::{self, ForecastSpec};
use ppscore::config::ExperimentConfig;
use ppscore::evaluation::experiments::IntensityScore;
use ppscore::evaluation::{dm_test_with, Decision, DmSpec};
use ppscore::patterns::{SpatialPattern, TemporalPattern, Window};
use ppscore::scores::{score_cond_intensity_log, CondIntensityForecast, IntensityForecast};
use ppscore::triggering::TriggeringKernel;
use ppscore::{runner, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Config = 4,
    Io = 5,
    Panic = 6,
}

/// Rectangular observation window.
pub struct PpsWindow(Window);
/// Spatial point pattern with its window.
pub struct PpsSpatialPattern(SpatialPattern);
/// Event times on `[0, horizon]`.
pub struct PpsTemporalPattern(TemporalPattern);
/// Intensity forecast on a window.
pub struct PpsIntensityForecast(IntensityForecast);
/// Conditional intensity forecast of a temporal process.
pub struct PpsCondIntensity(CondIntensityForecast);

/// Diebold-Mariano test result. `decision` is 1 when the first forecast is
/// preferred, -1 when the second is, 0 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PpsDmResult {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub t: f64,
    pub p_value: f64,
    pub decision: i32,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(e: &Error) -> PpsStatus {
    match e {
        Error::Config { .. } | Error::UnknownCatalogEntry(_) => PpsStatus::Config,
        Error::Io(_) | Error::Csv(_) => PpsStatus::Io,
        Error::Factorization { .. } | Error::CallbackUndefined(_) => PpsStatus::Numeric,
        _ => PpsStatus::InvalidArgument,
    }
}

struct Failure(PpsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PpsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PpsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PpsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PpsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(PpsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the last error message of this thread into `buffer` (NUL
/// terminated, truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buffer` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pps_last_error_message(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buffer.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buffer.cast::<u8>(), n);
            *buffer.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `lower` and `upper` must hold `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_window_new(
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    out: *mut *mut PpsWindow,
) -> PpsStatus {
    guard(|| {
        let lo = slice(lower, dim, "lower")?.to_vec();
        let hi = slice(upper, dim, "upper")?.to_vec();
        put(out, PpsWindow(Window::new(lo, hi)?))
    })
}

/// # Safety
/// `window` must be null or a handle from [`pps_window_new`].
#[no_mangle]
pub unsafe extern "C" fn pps_window_free(window: *mut PpsWindow) {
    free(window)
}

/// Pattern from `n` points stored row-major (`n · dim` coordinates).
///
/// # Safety
/// `coords` must hold `n · dim` values for the window's dimension.
#[no_mangle]
pub unsafe extern "C" fn pps_spatial_pattern_new(
    window: *const PpsWindow,
    coords: *const f64,
    n: usize,
    out: *mut *mut PpsSpatialPattern,
) -> PpsStatus {
    guard(|| {
        let w = &get(window, "window")?.0;
        let c = slice(coords, n * w.dim(), "coords")?.to_vec();
        put(out, PpsSpatialPattern(SpatialPattern::new(c, w.clone())?))
    })
}

/// # Safety
/// `pattern` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_spatial_pattern_len(pattern: *const PpsSpatialPattern, out: *mut usize) -> PpsStatus {
    guard(|| write(out, get(pattern, "pattern")?.0.len()))
}

/// # Safety
/// `pattern` must be null or a handle from [`pps_spatial_pattern_new`].
#[no_mangle]
pub unsafe extern "C" fn pps_spatial_pattern_free(pattern: *mut PpsSpatialPattern) {
    free(pattern)
}

/// # Safety
/// `times` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn pps_temporal_pattern_new(
    times: *const f64,
    n: usize,
    horizon: f64,
    out: *mut *mut PpsTemporalPattern,
) -> PpsStatus {
    guard(|| {
        let t = slice(times, n, "times")?.to_vec();
        put(out, PpsTemporalPattern(TemporalPattern::new(t, horizon)?))
    })
}

/// # Safety
/// `pattern` must be null or a handle from [`pps_temporal_pattern_new`].
#[no_mangle]
pub unsafe extern "C" fn pps_temporal_pattern_free(pattern: *mut PpsTemporalPattern) {
    free(pattern)
}

/// Catalog intensity such as `"f0"` or `"f3(scale=50)"`, with exact masses.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `window` a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_intensity_catalog_new(
    spec: *const c_char,
    window: *const PpsWindow,
    out: *mut *mut PpsIntensityForecast,
) -> PpsStatus {
    guard(|| {
        let spec = ForecastSpec::parse(&string(spec, "spec")?)?;
        let f = catalog::intensity_forecast(&spec, &get(window, "window")?.0)?;
        put(out, PpsIntensityForecast(f))
    })
}

type IntensityCallback = extern "C" fn(point: *const f64, dim: usize, user_data: *mut c_void) -> f64;

struct Callback {
    f: IntensityCallback,
    user: *mut c_void,
}

// The caller guarantees the callback may be invoked from any thread.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, p: &[f64]) -> f64 {
        (self.f)(p.as_ptr(), p.len(), self.user)
    }
}

/// Intensity given by a callback that receives a point of `dim`
/// coordinates and `user_data`; masses by Gauss-Legendre quadrature.
/// The callback may be called concurrently and must outlive the handle.
///
/// # Safety
/// `user_data` must stay valid for the lifetime of the returned handle.
#[no_mangle]
pub unsafe extern "C" fn pps_intensity_callback_new(
    callback: Option<extern "C" fn(point: *const f64, dim: usize, user_data: *mut c_void) -> f64>,
    user_data: *mut c_void,
    window: *const PpsWindow,
    out: *mut *mut PpsIntensityForecast,
) -> PpsStatus {
    guard(|| {
        let f = callback.ok_or_else(|| null("callback"))?;
        let cb = Callback { f, user: user_data };
        let density = Arc::new(move |p: &[f64]| cb.call(p));
        let forecast = IntensityForecast::new("callback", density, get(window, "window")?.0.clone())?;
        put(out, PpsIntensityForecast(forecast))
    })
}

/// # Safety
/// `forecast` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pps_intensity_total_mass(forecast: *const PpsIntensityForecast, out: *mut f64) -> PpsStatus {
    guard(|| write(out, get(forecast, "forecast")?.0.total_mass()))
}

/// # Safety
/// `forecast` must be null or a handle from an intensity constructor.
#[no_mangle]
pub unsafe extern "C" fn pps_intensity_free(forecast: *mut PpsIntensityForecast) {
    free(forecast)
}

/// Log-likelihood score of the Poisson process with the given intensity.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_score_intensity_poisson(
    forecast: *const PpsIntensityForecast,
    pattern: *const PpsSpatialPattern,
    out: *mut f64,
) -> PpsStatus {
    guard(|| {
        let s = IntensityScore::S2.evaluate(&get(forecast, "forecast")?.0, &get(pattern, "pattern")?.0)?;
        write(out, s)
    })
}

/// Log score of the normalized intensity plus `c` times the squared error
/// of the total mass against the point count.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_score_intensity_combined(
    forecast: *const PpsIntensityForecast,
    pattern: *const PpsSpatialPattern,
    c: f64,
    out: *mut f64,
) -> PpsStatus {
    guard(|| {
        let s = IntensityScore::S1 { c }.evaluate(&get(forecast, "forecast")?.0, &get(pattern, "pattern")?.0)?;
        write(out, s)
    })
}

/// Catalog Hawkes forecast such as `"f1"` or `"f2(nu=1.5)"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pps_cond_intensity_catalog_new(
    spec: *const c_char,
    out: *mut *mut PpsCondIntensity,
) -> PpsStatus {
    guard(|| {
        let spec = ForecastSpec::parse(&string(spec, "spec")?)?;
        put(out, PpsCondIntensity(catalog::cond_intensity_forecast(&spec)?))
    })
}

/// Hawkes forecast with background `nu` and kernel `scale · exp(−rate · t)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_cond_intensity_hawkes_exponential_new(
    nu: f64,
    scale: f64,
    rate: f64,
    out: *mut *mut PpsCondIntensity,
) -> PpsStatus {
    guard(|| {
        let kernel = TriggeringKernel::Exponential { scale, rate };
        put(out, PpsCondIntensity(CondIntensityForecast::hawkes("hawkes", nu, kernel)?))
    })
}

/// # Safety
/// `forecast` must be null or a handle from a conditional intensity constructor.
#[no_mangle]
pub unsafe extern "C" fn pps_cond_intensity_free(forecast: *mut PpsCondIntensity) {
    free(forecast)
}

/// Log-likelihood score `∫λ − Σ log λ(t_i)` of a temporal pattern.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_score_cond_intensity_log(
    forecast: *const PpsCondIntensity,
    pattern: *const PpsTemporalPattern,
    out: *mut f64,
) -> PpsStatus {
    guard(|| write(out, score_cond_intensity_log(&get(forecast, "forecast")?.0, &get(pattern, "pattern")?.0)))
}

/// Diebold-Mariano test on score differences `a − b`.
///
/// # Safety
/// `diffs` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pps_dm_test(
    diffs: *const f64,
    n: usize,
    alpha: f64,
    one_sided: bool,
    out: *mut PpsDmResult,
) -> PpsStatus {
    guard(|| {
        let d = slice(diffs, n, "diffs")?;
        let spec = if one_sided { DmSpec::one_sided(alpha) } else { DmSpec::two_sided(alpha) };
        let r = dm_test_with(d, spec)?;
        let decision = match r.decision {
            Decision::PreferA => 1,
            Decision::PreferB => -1,
            Decision::NoDecision => 0,
        };
        write(
            out,
            PpsDmResult {
                n: r.n,
                mean: r.mean,
                variance: r.variance,
                t: r.t,
                p_value: r.p_value,
                decision,
                degenerate: r.degenerate,
            },
        )
    })
}

/// Runs an experiment configuration file and writes its CSV outputs into
/// `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pps_run_config(config_path: *const c_char, out_dir: *const c_char) -> PpsStatus {
    guard(|| {
        let config = ExperimentConfig::from_file(Path::new(&string(config_path, "config_path")?))?;
        runner::run(&config, Path::new(&string(out_dir, "out_dir")?))?;
        Ok(())
    })
}
