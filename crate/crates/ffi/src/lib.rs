//! C interface to the simulator.
//!
//! Objects cross the boundary as opaque handles created by `ua_*_load` /
//! `ua_*_parse` style constructors and released with the matching `*_free`.
//! Every fallible function returns a [`UaStatus`]; on failure a description is
//! available from [`ua_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use urllc_access::dqn::{checkpoint, QNetwork};
use urllc_access::harness::{self, Approach, ExperimentConfig, ExperimentSpec, SweepVar};
use urllc_access::scenario::QosThresholds;
use urllc_access::{urllc, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Io = 4,
    Checkpoint = 5,
    DimensionMismatch = 6,
    Internal = 7,
}

/// Opaque experiment configuration.
pub struct UaConfig {
    inner: ExperimentConfig,
}

/// Opaque Q-network loaded from a model file.
pub struct UaQNet {
    inner: QNetwork,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> UaStatus {
    match e {
        Error::Domain(_) => UaStatus::Domain,
        Error::Io { .. } | Error::Csv { .. } => UaStatus::Io,
        Error::Checkpoint(_) | Error::ArchitectureMismatch(..) => UaStatus::Checkpoint,
        Error::DimensionMismatch { .. } => UaStatus::DimensionMismatch,
        Error::Divergence(_) => UaStatus::Internal,
        _ => UaStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into a status plus the last-error text.
fn guard(f: impl FnOnce() -> Result<(), (UaStatus, String)>) -> UaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            UaStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UaStatus::Internal
        }
    }
}

fn lib(e: Error) -> (UaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (UaStatus, String) {
    (UaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (UaStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (UaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread; empty after a success. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ua_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ua_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lower real branch of the Lambert W function for `x` in `[-1/e, 0)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn ua_lambert_w_minus1(x: f64, out: *mut f64) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = urllc::lambert_w_minus1(x).map_err(lib)?;
        Ok(())
    })
}

/// Minimum spectral rate (bps/Hz) keeping the latency-violation probability of
/// a Poisson URLLC flow below `p_latency_max`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn ua_min_rate_urllc(
    arrival_per_slot: f64,
    mean_packet_bits: f64,
    latency_max_s: f64,
    p_latency_max: f64,
    bandwidth_hz: f64,
    slot_duration_s: f64,
    out: *mut f64,
) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let qos = QosThresholds {
            latency_max_s,
            p_latency_max,
            ..QosThresholds::default()
        };
        let b = urllc::min_rate_from_parts(
            arrival_per_slot,
            mean_packet_bits,
            &qos,
            bandwidth_hz,
            slot_duration_s,
        )
        .map_err(lib)?;
        *out = b.rate_min_urllc;
        Ok(())
    })
}

/// Built-in default configuration.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ua_config_default(out: *mut *mut UaConfig) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(UaConfig {
            inner: ExperimentConfig::default(),
        }));
        Ok(())
    })
}

/// Parses configuration text (flat `key = value` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` as in [`ua_config_default`].
#[no_mangle]
pub unsafe extern "C" fn ua_config_parse(text: *const c_char, out: *mut *mut UaConfig) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = harness::parse_config(str_arg(text, "text")?).map_err(lib)?;
        *out = Box::into_raw(Box::new(UaConfig { inner }));
        Ok(())
    })
}

/// Loads a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` as in [`ua_config_default`].
#[no_mangle]
pub unsafe extern "C" fn ua_config_load(path: *const c_char, out: *mut *mut UaConfig) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = harness::load_config(Path::new(str_arg(path, "path")?)).map_err(lib)?;
        *out = Box::into_raw(Box::new(UaConfig { inner }));
        Ok(())
    })
}

/// Number of links (C-devices plus D2D pairs) of a configuration.
///
/// # Safety
/// `cfg` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ua_config_num_links(cfg: *const UaConfig, out: *mut usize) -> UaStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = cfg.inner.scenario.num_links();
        Ok(())
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ua_config_free(cfg: *mut UaConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Loads a model file written by the `train` command.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ua_qnet_load(path: *const c_char, out: *mut *mut UaQNet) -> UaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = checkpoint::load(Path::new(str_arg(path, "path")?)).map_err(lib)?;
        *out = Box::into_raw(Box::new(UaQNet { inner }));
        Ok(())
    })
}

/// Input and output widths of a network.
///
/// # Safety
/// `net` must be null or a live handle; the outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ua_qnet_dims(
    net: *const UaQNet,
    input_dim: *mut usize,
    output_dim: *mut usize,
) -> UaStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        if input_dim.is_null() || output_dim.is_null() {
            return Err(null("output pointer"));
        }
        *input_dim = net.inner.input_dim();
        *output_dim = net.inner.output_dim();
        Ok(())
    })
}

/// Q-values of `state` (`state_len` doubles) written to `q_out` (`q_len`
/// doubles). Both lengths must match the network.
///
/// # Safety
/// `net` must be a live handle and the buffers valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn ua_qnet_forward(
    net: *const UaQNet,
    state: *const f64,
    state_len: usize,
    q_out: *mut f64,
    q_len: usize,
) -> UaStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        if state.is_null() || q_out.is_null() {
            return Err(null("buffer"));
        }
        if q_len != net.inner.output_dim() {
            return Err(lib(Error::DimensionMismatch {
                expected: net.inner.output_dim(),
                got: q_len,
            }));
        }
        let s = std::slice::from_raw_parts(state, state_len);
        let q = net.inner.forward(s).map_err(lib)?;
        std::slice::from_raw_parts_mut(q_out, q_len).copy_from_slice(&q);
        Ok(())
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ua_qnet_free(net: *mut UaQNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Runs an experiment and writes its CSV files to `out_dir`.
///
/// `approaches` is a comma-separated list (empty or null for all), `sweep` one
/// of `none`, `reliability`, `latency`, `arrival_rate` (null for `none`) and
/// `values` holds `num_values` sweep points.
///
/// # Safety
/// Strings must be NUL-terminated or null where allowed; `values` must be
/// valid for `num_values` doubles.
#[no_mangle]
pub unsafe extern "C" fn ua_run_experiment(
    cfg: *const UaConfig,
    approaches: *const c_char,
    sweep: *const c_char,
    values: *const f64,
    num_values: usize,
    out_dir: *const c_char,
) -> UaStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = str_arg(out_dir, "out_dir")?;
        let mut spec = ExperimentSpec::new(cfg.inner.clone());
        if !approaches.is_null() {
            let list = str_arg(approaches, "approaches")?;
            if !list.trim().is_empty() {
                spec.approaches = list
                    .split(',')
                    .map(|s| s.trim().parse::<Approach>())
                    .collect::<Result<_, _>>()
                    .map_err(lib)?;
            }
        }
        if !sweep.is_null() {
            spec.sweep = str_arg(sweep, "sweep")?.parse::<SweepVar>().map_err(lib)?;
        }
        if num_values > 0 {
            if values.is_null() {
                return Err(null("values"));
            }
            spec.values = std::slice::from_raw_parts(values, num_values).to_vec();
        }
        harness::run_experiment(&spec, Path::new(out), &mut |_| {}).map_err(lib)?;
        Ok(())
    })
}
