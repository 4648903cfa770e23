//! C ABI over `thzvr`: opaque handles, integer status codes and a
//! thread-local error message.
//!
//! Every function returns a [`ThzStatus`]; results come back through out
//! pointers. Handles come from the preset, TOML and analyze functions and are
//! released by the matching `*_free`. Strings returned to C are freed with
//! [`thz_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thzvr::cli::{guaranteed_report, tail_report, GuaranteedReport};
use thzvr::config::NetworkConfig;
use thzvr::simcore::{quantile, run_replications};
use thzvr::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Config = 4,
    Model = 5,
    Data = 6,
    Io = 7,
    Panic = 8,
}

/// Validated network configuration.
pub struct ThzConfig {
    inner: NetworkConfig,
}

/// Guaranteed-LoS end-to-end delay distribution.
pub struct ThzLosReport {
    inner: GuaranteedReport,
}

/// Pooled statistics from a batch of simulated sessions.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThzSimSummary {
    pub runs: u64,
    pub total_requests: u64,
    pub mean_e2e: f64,
    pub mean_e2e_stderr: f64,
    pub plos: f64,
    pub session_max_median: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ThzStatus {
    match e {
        Error::Parse { .. } => ThzStatus::Parse,
        Error::Config(_) => ThzStatus::Config,
        Error::Domain(_)
        | Error::ModelDomain { .. }
        | Error::Unstable { .. }
        | Error::Grid(_)
        | Error::Bracketing { .. } => ThzStatus::Model,
        Error::Data(_) => ThzStatus::Data,
        Error::Io(_) => ThzStatus::Io,
    }
}

/// Runs `f`, recording any error or panic for [`thz_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), (ThzStatus, String)>) -> ThzStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ThzStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside thzvr".into());
            ThzStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ThzStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ThzStatus, String) {
    (ThzStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (ThzStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (ThzStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `h` must be null or a live handle from this library.
unsafe fn config_ref<'a>(h: *const ThzConfig) -> Result<&'a NetworkConfig, (ThzStatus, String)> {
    h.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (ThzStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Loads a shipped preset (`table2_1thz` or `table2_0p2thz`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
/// On success `*out` owns a handle to release with [`thz_config_free`].
#[no_mangle]
pub unsafe extern "C" fn thz_config_preset(
    name: *const c_char,
    out: *mut *mut ThzConfig,
) -> ThzStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let inner = NetworkConfig::preset(name).map_err(lib)?;
        put(out, Box::into_raw(Box::new(ThzConfig { inner })))
    })
}

/// Parses and validates a TOML configuration document.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
/// On success `*out` owns a handle to release with [`thz_config_free`].
#[no_mangle]
pub unsafe extern "C" fn thz_config_from_toml(
    toml: *const c_char,
    out: *mut *mut ThzConfig,
) -> ThzStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        let inner = NetworkConfig::from_toml_str(text).map_err(lib)?;
        put(out, Box::into_raw(Box::new(ThzConfig { inner })))
    })
}

/// Releases a configuration handle. Null is a no-op.
///
/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn thz_config_free(config: *mut ThzConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the bandwidth in Hz; the handle is unchanged if validation fails.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn thz_config_set_bandwidth(config: *mut ThzConfig, hz: f64) -> ThzStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let mut next = c.inner.clone();
        next.channel.w = hz;
        next.validate().map_err(lib)?;
        c.inner = next;
        Ok(())
    })
}

/// Writes the 16-hex-digit parameter hash as a new string.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes. Free the
/// string with [`thz_string_free`].
#[no_mangle]
pub unsafe extern "C" fn thz_config_params_hash(
    config: *const ThzConfig,
    out: *mut *mut c_char,
) -> ThzStatus {
    guard(|| {
        let c = config_ref(config)?;
        let s = CString::new(c.params_hash()).expect("hex has no NUL");
        put(out, s.into_raw())
    })
}

/// Tail value-at-risk of the end-to-end delay, in seconds.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn thz_tail_tvar(
    config: *const ThzConfig,
    alpha_c: f64,
    out: *mut f64,
) -> ThzStatus {
    guard(|| {
        let c = config_ref(config)?;
        let v = tail_report(c).and_then(|r| r.tvar(alpha_c)).map_err(lib)?;
        put(out, v)
    })
}

/// Tail-based reliability `P(delay <= delta)` under blockage.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn thz_tail_reliability(
    config: *const ThzConfig,
    delta: f64,
    out: *mut f64,
) -> ThzStatus {
    guard(|| {
        let c = config_ref(config)?;
        let r = tail_report(c).map_err(lib)?;
        put(out, r.reliability(delta))
    })
}

/// Computes the guaranteed-LoS delay distribution.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes. Release
/// the report with [`thz_los_report_free`].
#[no_mangle]
pub unsafe extern "C" fn thz_los_analyze(
    config: *const ThzConfig,
    out: *mut *mut ThzLosReport,
) -> ThzStatus {
    guard(|| {
        let mut c = config_ref(config)?.clone();
        c.sim.guaranteed_los = true;
        let inner = guaranteed_report(&c).map_err(lib)?;
        put(out, Box::into_raw(Box::new(ThzLosReport { inner })))
    })
}

/// Reliability `P(delay <= delta)` from a guaranteed-LoS report.
///
/// # Safety
/// `report` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn thz_los_reliability(
    report: *const ThzLosReport,
    delta: f64,
    out: *mut f64,
) -> ThzStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        put(out, r.inner.reliability(delta).map_err(lib)?)
    })
}

/// Releases a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn thz_los_report_free(report: *mut ThzLosReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Simulates `runs` sessions with seeds `seed, seed + 1, ...`.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn thz_simulate(
    config: *const ThzConfig,
    runs: u64,
    seed: u64,
    out: *mut ThzSimSummary,
) -> ThzStatus {
    guard(|| {
        let c = config_ref(config)?;
        let agg = run_replications(c, runs as usize, seed).map_err(lib)?;
        put(
            out,
            ThzSimSummary {
                runs: agg.runs as u64,
                total_requests: agg.total_requests as u64,
                mean_e2e: agg.mean_e2e.value,
                mean_e2e_stderr: agg.mean_e2e.stderr,
                plos: agg.plos.value,
                session_max_median: quantile(&agg.session_maxima, 0.5).unwrap_or(f64::NAN),
            },
        )
    })
}

/// Copy of the calling thread's last error message, or null if none.
///
/// Free the result with [`thz_string_free`].
#[no_mangle]
pub extern "C" fn thz_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .clone()
            .map_or(ptr::null_mut(), CString::into_raw)
    })
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn thz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
