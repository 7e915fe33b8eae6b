//! C ABI over `ergodyn`.
//!
//! Every function returns an [`ErgodynStatus`]. Configurations live behind an
//! opaque [`ErgodynExperiment`] handle; strings handed out by the library are
//! freed with [`ergodyn_string_free`]. The message of the last failure on the
//! calling thread is available from [`ergodyn_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ergodyn::config::{Command, ExperimentConfig};
use ergodyn::noise::SeedStream;
use ergodyn::stationarity::{check_conditions, lyapunov_estimate, stationary_path};
use ergodyn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgodynStatus {
    Ok = 0,
    Config = 1,
    /// The governing condition fails; the result may still have been written.
    ConditionFails = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    Domain = 5,
    NonConvergence = 6,
    Refused = 7,
    Unsupported = 8,
    Io = 9,
    Internal = 10,
    Panic = 11,
}

/// Opaque validated experiment configuration.
pub struct ErgodynExperiment {
    cfg: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> ErgodynStatus {
    match err {
        Error::Config { .. } => ErgodynStatus::Config,
        Error::Domain(_) => ErgodynStatus::Domain,
        Error::NonConvergence(_) => ErgodynStatus::NonConvergence,
        Error::Refused(_) => ErgodynStatus::Refused,
        Error::Unsupported(_) => ErgodynStatus::Unsupported,
        Error::Io(_) => ErgodynStatus::Io,
        Error::Invariant(_) | Error::IntensityOverflow(_) => ErgodynStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), ErgodynStatus>>(f: F) -> ErgodynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ErgodynStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside ergodyn");
            ErgodynStatus::Panic
        }
    }
}

fn fail(err: Error) -> ErgodynStatus {
    set_error(err.to_string());
    status_of(&err)
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, ErgodynStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(ErgodynStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        ErgodynStatus::InvalidUtf8
    })
}

unsafe fn handle<'a>(h: *const ErgodynExperiment) -> Result<&'a ErgodynExperiment, ErgodynStatus> {
    h.as_ref().ok_or_else(|| {
        set_error("null experiment handle");
        ErgodynStatus::NullPointer
    })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), ErgodynStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(ErgodynStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn box_experiment(cfg: ExperimentConfig) -> *mut ErgodynExperiment {
    Box::into_raw(Box::new(ErgodynExperiment { cfg }))
}

/// Message of the last failure on this thread, or null. Owned by the library;
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ergodyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a configuration text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_experiment_parse(text: *const c_char, out: *mut *mut ErgodynExperiment) -> ErgodynStatus {
    guard(|| {
        let text = read_str(text)?;
        let cfg = ExperimentConfig::parse(text).map_err(fail)?;
        write_out(out, box_experiment(cfg))
    })
}

/// Loads one of the shipped presets.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_experiment_preset(name: *const c_char, out: *mut *mut ErgodynExperiment) -> ErgodynStatus {
    guard(|| {
        let name = read_str(name)?;
        let cfg = ergodyn::presets::preset(name).map_err(fail)?;
        write_out(out, box_experiment(cfg))
    })
}

/// # Safety
/// `h` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_experiment_free(h: *mut ErgodynExperiment) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Replaces the master seed.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_experiment_set_seed(h: *mut ErgodynExperiment, seed: u64) -> ErgodynStatus {
    guard(|| {
        let h = h.as_mut().ok_or_else(|| {
            set_error("null experiment handle");
            ErgodynStatus::NullPointer
        })?;
        h.cfg.run.seed = seed;
        Ok(())
    })
}

/// Canonical configuration text; free with [`ergodyn_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_experiment_serialize(h: *const ErgodynExperiment, out: *mut *mut c_char) -> ErgodynStatus {
    guard(|| {
        let h = handle(h)?;
        write_out(out, give_string(h.cfg.serialize()))
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Verdict map and certificate as text. `governing_holds` receives 1 when the
/// governing condition holds and 0 otherwise.
///
/// # Safety
/// `h` must be a live handle; `governing_holds` and `report` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_check(
    h: *const ErgodynExperiment,
    governing_holds: *mut c_int,
    report: *mut *mut c_char,
) -> ErgodynStatus {
    guard(|| {
        let h = handle(h)?;
        let r = check_conditions(&h.cfg.model, &h.cfg.covariate);
        let mut text = String::new();
        for c in &r.conditions {
            text.push_str(&c.to_string());
            text.push('\n');
        }
        text.push_str(&r.certificate.to_string());
        write_out(governing_holds, c_int::from(r.governing_holds()))?;
        write_out(report, give_string(text))
    })
}

/// Observations of a stationary path of length `len`, written to `buf`.
///
/// # Safety
/// `h` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_simulate(h: *const ErgodynExperiment, buf: *mut f64, len: usize) -> ErgodynStatus {
    guard(|| {
        let h = handle(h)?;
        if buf.is_null() {
            set_error("null output buffer");
            return Err(ErgodynStatus::NullPointer);
        }
        let c = &h.cfg;
        let traj = stationary_path(&c.model, &c.covariate, SeedStream::new(c.run.seed, 0), len, c.run.tol, c.run.s_max)
            .map_err(fail)?;
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (i, o) in out.iter_mut().enumerate() {
            *o = c.model.observation(traj.state(i));
        }
        Ok(())
    })
}

/// Lyapunov exponent estimate with `run.n` steps and `run.replicates` paths.
///
/// # Safety
/// `h` must be a live handle; `chi` and `stderr` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_lyapunov(h: *const ErgodynExperiment, chi: *mut f64, stderr: *mut f64) -> ErgodynStatus {
    guard(|| {
        let h = handle(h)?;
        let c = &h.cfg;
        let e = lyapunov_estimate(&c.model, &c.covariate, c.run.seed, c.run.n, c.run.replicates).map_err(fail)?;
        write_out(chi, e.chi)?;
        write_out(stderr, e.stderr)
    })
}

/// Runs a command by name and writes the report and tables into `out_dir`.
/// Returns [`ErgodynStatus::ConditionFails`] when the run exits with status 2.
///
/// # Safety
/// `h` must be a live handle; `command` and `out_dir` valid strings.
#[no_mangle]
pub unsafe extern "C" fn ergodyn_run(
    h: *const ErgodynExperiment,
    command: *const c_char,
    out_dir: *const c_char,
) -> ErgodynStatus {
    guard(|| {
        let h = handle(h)?;
        let command: Command = read_str(command)?.parse().map_err(fail)?;
        let dir = read_str(out_dir)?;
        let outcome = ergodyn::runner::run(&h.cfg, command, Path::new(dir)).map_err(fail)?;
        if outcome.exit_code == ergodyn::runner::EXIT_CONDITION {
            set_error("the governing condition fails or the run did not converge; see the report");
            return Err(ErgodynStatus::ConditionFails);
        }
        Ok(())
    })
}
