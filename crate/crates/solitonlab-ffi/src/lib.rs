//! C ABI for the soliton-collapse laboratory.
//!
//! The interface follows the usual conventions of C libraries:
//!
//! - every object lives behind an opaque handle ([`SlConfig`], [`SlRun`])
//!   with a paired `_free` function that accepts `NULL`;
//! - every fallible function returns an [`SlStatus`] code and writes its
//!   results through out-pointers, which are only written on `SL_OK`
//!   (handle out-pointers are nulled first so a failed call never leaves
//!   them dangling);
//! - arrays are retrieved by querying a length and then copying into a
//!   caller-owned buffer.
//!
//! Selector arguments (`model`, `profile`) are plain `int32_t` matched
//! against exported constants rather than C enums: an out-of-range value
//! arriving from C is then a checkable runtime error instead of undefined
//! behavior. Status and termination codes, which only flow outward, are
//! proper enums.
//!
//! Handles are not synchronized; use a handle from one thread at a time.
//! Configuration setters do not validate — build the configuration freely,
//! then check it with `sl_config_validate` or let `sl_run_execute` report
//! the first problem.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::time::Instant;

use solitonlab::fit::{compare_run, ComparisonReport};
use solitonlab::model::{geodesic_prediction, ModelKind};
use solitonlab::output::write_run;
use solitonlab::stepper::{run, Profile, RunConfig, RunRecord, StepError, Termination};

/// Charge-1 sector of (4+1)-dimensional Yang-Mills, radially reduced.
pub const SL_MODEL_YANG_MILLS_4P1: i32 = 0;
/// Charge-2 sector of the (2+1)-dimensional S² sigma model.
pub const SL_MODEL_SIGMA_CHARGE2: i32 = 1;

/// Initial data f(r, 0) = f₀, a horizontal line.
pub const SL_PROFILE_LINE: i32 = 0;
/// Initial data f(r, 0) = p·r² + f₀ with the slow-motion curvature p.
pub const SL_PROFILE_PARABOLA: i32 = 1;

/// Result code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum SlStatus {
    /// The call succeeded and all out-pointers are filled.
    SL_OK = 0,
    /// A required pointer argument was NULL.
    SL_ERR_NULL_ARGUMENT = 1,
    /// An argument was outside its documented domain (unknown selector,
    /// non-finite number, invalid UTF-8 path, ...).
    SL_ERR_INVALID_ARGUMENT = 2,
    /// The assembled configuration cannot be run (bad grid, bad stepping,
    /// wrong sign of v₀, ...).
    SL_ERR_INVALID_CONFIG = 3,
    /// The evolution failed numerically before producing a usable record.
    SL_ERR_NUMERICAL = 4,
    /// Writing artifacts failed.
    SL_ERR_IO = 5,
    /// The run produced no origin fit (stationary runs, or the trace never
    /// crossed the fit threshold).
    SL_ERR_NO_FIT = 6,
    /// A caller-owned buffer is shorter than the data.
    SL_ERR_BUFFER_TOO_SMALL = 7,
    /// An index was past the end of a collection.
    SL_ERR_OUT_OF_RANGE = 8,
    /// An internal invariant failed; the handle is still valid to free.
    SL_ERR_INTERNAL = 9,
}

use SlStatus::*;

/// Why an evolution stopped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum SlTermination {
    /// f(0,t) fell to the stop fraction of f₀ — the intended end of a
    /// collapse run.
    SL_TERMINATION_REACHED_STOP_FRACTION = 0,
    /// The clock ran out first.
    SL_TERMINATION_REACHED_T_MAX = 1,
    /// The field reached the singular set.
    SL_TERMINATION_BLOW_UP = 2,
    /// The field stopped being finite; artifacts up to that point are
    /// still available on the handle.
    SL_TERMINATION_NUMERICAL_INSTABILITY = 3,
}

/// Fitted and predicted collapse parameters for one run.
///
/// The origin trace f(0,t) is fitted with a(t − T)²; the slow-motion
/// analysis predicts a = v₀²/(4f₀) and T = 2f₀/|v₀|.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlFit {
    /// Fitted curvature a of the origin parabola.
    pub a_fit: f64,
    /// Fitted blow-up time T.
    pub t_blowup_fit: f64,
    /// Root-mean-square residual of the parabola fit.
    pub rms_residual: f64,
    /// Predicted curvature v₀²/(4f₀).
    pub a_predicted: f64,
    /// Predicted blow-up time 2f₀/|v₀|.
    pub t_blowup_predicted: f64,
    /// |a_fit − a_pred| / a_pred.
    pub rel_err_a: f64,
    /// |T_fit − T_pred| / T_pred.
    pub rel_err_t: f64,
}

/// Opaque evolution configuration; create with `sl_config_new` or
/// `sl_config_stationary`, release with `sl_config_free`.
pub struct SlConfig {
    inner: RunConfig,
}

/// Opaque result of one evolution; produced by `sl_run_execute`, released
/// with `sl_run_free`.
pub struct SlRun {
    record: RunRecord,
    report: ComparisonReport,
    wall_seconds: f64,
}

fn status_from_step_error(error: &StepError) -> SlStatus {
    match error {
        StepError::Config(_) | StepError::Grid(_) | StepError::Model(_) => SL_ERR_INVALID_CONFIG,
        StepError::NonFinite { .. } | StepError::SingularSet { .. } => SL_ERR_NUMERICAL,
    }
}

fn model_from_selector(model: i32) -> Option<ModelKind> {
    match model {
        SL_MODEL_YANG_MILLS_4P1 => Some(ModelKind::YangMills4p1),
        SL_MODEL_SIGMA_CHARGE2 => Some(ModelKind::SigmaCharge2),
        _ => None,
    }
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static NUL-terminated description of a status code. Total: unknown
/// codes yield a fallback message, never NULL.
#[no_mangle]
pub extern "C" fn sl_status_message(status: i32) -> *const c_char {
    let message: &'static str = match status {
        0 => "ok\0",
        1 => "a required pointer argument was NULL\0",
        2 => "an argument was outside its documented domain\0",
        3 => "the configuration cannot be run\0",
        4 => "the evolution failed numerically\0",
        5 => "writing artifacts failed\0",
        6 => "the run produced no origin fit\0",
        7 => "a caller-owned buffer is shorter than the data\0",
        8 => "an index was past the end of a collection\0",
        9 => "an internal invariant failed\0",
        _ => "unrecognized status code\0",
    };
    message.as_ptr() as *const c_char
}

/// Slow-motion collapse prediction a = v₀²/(4f₀), T = 2f₀/|v₀| for a
/// horizontal-line start at height `f0` with velocity `v0 < 0`.
///
/// # Safety
///
/// `a` and `t_blowup` must be valid for writing one `double` each.
#[no_mangle]
pub unsafe extern "C" fn sl_geodesic_prediction(
    f0: f64,
    v0: f64,
    a: *mut f64,
    t_blowup: *mut f64,
) -> SlStatus {
    if a.is_null() || t_blowup.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    match geodesic_prediction(f0, v0) {
        Ok(prediction) => {
            *a = prediction.a;
            *t_blowup = prediction.t_blowup;
            SL_OK
        }
        Err(_) => SL_ERR_INVALID_ARGUMENT,
    }
}

/// Create a collapse configuration: model selector, initial height
/// `f0 > 0`, initial velocity `v0 < 0`. Grid, stepping, and profile start
/// at their defaults (R = 10, Δr = 0.025, Δt = 0.001, horizontal line).
///
/// # Safety
///
/// `out` must be valid for writing one pointer. On success `*out` owns the
/// configuration and must be released with `sl_config_free`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_new(
    model: i32,
    f0: f64,
    v0: f64,
    out: *mut *mut SlConfig,
) -> SlStatus {
    if out.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *out = ptr::null_mut();
    let Some(kind) = model_from_selector(model) else {
        return SL_ERR_INVALID_ARGUMENT;
    };
    match RunConfig::new(kind, f0, v0) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SlConfig { inner }));
            SL_OK
        }
        Err(e) => status_from_step_error(&e),
    }
}

/// Create a stationary (v₀ = 0) configuration running until `t_max`;
/// useful for probing the stability of the constant solution.
///
/// # Safety
///
/// `out` must be valid for writing one pointer. On success `*out` owns the
/// configuration and must be released with `sl_config_free`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_stationary(
    model: i32,
    f0: f64,
    t_max: f64,
    out: *mut *mut SlConfig,
) -> SlStatus {
    if out.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *out = ptr::null_mut();
    let Some(kind) = model_from_selector(model) else {
        return SL_ERR_INVALID_ARGUMENT;
    };
    match RunConfig::stationary(kind, f0, t_max) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SlConfig { inner }));
            SL_OK
        }
        Err(e) => status_from_step_error(&e),
    }
}

/// Set the radial domain [0, `r_max`] and spacing `dr`.
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_grid(
    config: *mut SlConfig,
    r_max: f64,
    dr: f64,
) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    handle.inner = handle.inner.clone().with_grid(r_max, dr);
    SL_OK
}

/// Set the time step.
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_time_step(config: *mut SlConfig, dt: f64) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    handle.inner = handle.inner.clone().with_dt(dt);
    SL_OK
}

/// Set the time horizon.
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_t_max(config: *mut SlConfig, t_max: f64) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    handle.inner = handle.inner.clone().with_t_max(t_max);
    SL_OK
}

/// Choose the initial profile (`SL_PROFILE_LINE` or `SL_PROFILE_PARABOLA`).
/// The matching outer boundary rule is selected automatically.
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_profile(config: *mut SlConfig, profile: i32) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    let profile = match profile {
        SL_PROFILE_LINE => Profile::Line,
        SL_PROFILE_PARABOLA => Profile::Parabola,
        _ => return SL_ERR_INVALID_ARGUMENT,
    };
    handle.inner = handle.inner.clone().with_profile(profile);
    SL_OK
}

/// Set the fraction of f₀ at which a collapse run stops (default 0.05).
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_stop_fraction(
    config: *mut SlConfig,
    stop_fraction: f64,
) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    handle.inner = handle.inner.clone().with_stop_fraction(stop_fraction);
    SL_OK
}

/// Set how many steps apart full-field snapshots are kept (default 100).
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_set_snapshot_stride(
    config: *mut SlConfig,
    stride: usize,
) -> SlStatus {
    let Some(handle) = config.as_mut() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    handle.inner = handle.inner.clone().with_snapshot_stride(stride);
    SL_OK
}

/// Check the assembled configuration without running it.
///
/// # Safety
///
/// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_validate(config: *const SlConfig) -> SlStatus {
    let Some(handle) = config.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    match handle.inner.validate() {
        Ok(()) => SL_OK,
        Err(e) => status_from_step_error(&e),
    }
}

/// Release a configuration handle. `config` may be NULL.
///
/// # Safety
///
/// `config` must be NULL or a handle not yet freed; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_config_free(config: *mut SlConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the evolution described by `config` to termination and fit the
/// result. Returns `SL_OK` even when the evolution ends in
/// `SL_TERMINATION_NUMERICAL_INSTABILITY` — the partial record is still
/// queryable; check `sl_run_termination`.
///
/// # Safety
///
/// `config` must be a live configuration handle and `out` valid for
/// writing one pointer. On success `*out` owns the run and must be
/// released with `sl_run_free`.
#[no_mangle]
pub unsafe extern "C" fn sl_run_execute(config: *const SlConfig, out: *mut *mut SlRun) -> SlStatus {
    if out.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *out = ptr::null_mut();
    let Some(handle) = config.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let started = Instant::now();
        run(&handle.inner).map(|record| {
            let report = compare_run(&record);
            SlRun {
                record,
                report,
                wall_seconds: started.elapsed().as_secs_f64(),
            }
        })
    }));
    match outcome {
        Ok(Ok(run)) => {
            *out = Box::into_raw(Box::new(run));
            SL_OK
        }
        Ok(Err(e)) => status_from_step_error(&e),
        Err(_) => SL_ERR_INTERNAL,
    }
}

/// Release a run handle. `run` may be NULL.
///
/// # Safety
///
/// `run` must be NULL or a handle not yet freed; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_run_free(run: *mut SlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Why the run stopped.
///
/// # Safety
///
/// `run` must be a live run handle; `termination` must be valid for
/// writing one value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_termination(
    run: *const SlRun,
    termination: *mut SlTermination,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if termination.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *termination = match handle.record.termination {
        Termination::ReachedStopFraction => SlTermination::SL_TERMINATION_REACHED_STOP_FRACTION,
        Termination::ReachedTMax => SlTermination::SL_TERMINATION_REACHED_T_MAX,
        Termination::BlowUp => SlTermination::SL_TERMINATION_BLOW_UP,
        Termination::NumericalInstability => {
            SlTermination::SL_TERMINATION_NUMERICAL_INSTABILITY
        }
    };
    SL_OK
}

/// Number of time steps the run took.
///
/// # Safety
///
/// `run` must be a live run handle; `steps` must be valid for writing one
/// value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_step_count(run: *const SlRun, steps: *mut usize) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if steps.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *steps = handle.record.origin_trace.len().saturating_sub(1);
    SL_OK
}

/// The radial grid the run used. Any out-pointer may be NULL to skip that
/// value, but not all three.
///
/// # Safety
///
/// `run` must be a live run handle; non-NULL out-pointers must each be
/// valid for writing one value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_grid(
    run: *const SlRun,
    r_max: *mut f64,
    dr: *mut f64,
    n_points: *mut usize,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if r_max.is_null() && dr.is_null() && n_points.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let Ok(grid) = handle.record.config.grid() else {
        return SL_ERR_INTERNAL;
    };
    if !r_max.is_null() {
        *r_max = grid.r_max();
    }
    if !dr.is_null() {
        *dr = grid.dr();
    }
    if !n_points.is_null() {
        *n_points = grid.n_points();
    }
    SL_OK
}

/// Number of (t, f(0,t)) samples in the origin trace.
///
/// # Safety
///
/// `run` must be a live run handle; `len` must be valid for writing one
/// value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_origin_len(run: *const SlRun, len: *mut usize) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if len.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *len = handle.record.origin_trace.len();
    SL_OK
}

/// Copy the origin trace into caller-owned buffers of capacity `len`
/// elements each; `len` must be at least `sl_run_origin_len`.
///
/// # Safety
///
/// `run` must be a live run handle; `times` and `values` must each be
/// valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_run_origin_copy(
    run: *const SlRun,
    times: *mut f64,
    values: *mut f64,
    len: usize,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if times.is_null() || values.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let trace = &handle.record.origin_trace;
    if len < trace.len() {
        return SL_ERR_BUFFER_TOO_SMALL;
    }
    for (i, &(t, f)) in trace.iter().enumerate() {
        *times.add(i) = t;
        *values.add(i) = f;
    }
    SL_OK
}

/// Number of full-field snapshots the run kept.
///
/// # Safety
///
/// `run` must be a live run handle; `count` must be valid for writing one
/// value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_snapshot_count(run: *const SlRun, count: *mut usize) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if count.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    *count = handle.record.snapshots.len();
    SL_OK
}

/// Time of the `index`-th snapshot.
///
/// # Safety
///
/// `run` must be a live run handle; `t` must be valid for writing one
/// value.
#[no_mangle]
pub unsafe extern "C" fn sl_run_snapshot_time(
    run: *const SlRun,
    index: usize,
    t: *mut f64,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if t.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let Some(snapshot) = handle.record.snapshots.get(index) else {
        return SL_ERR_OUT_OF_RANGE;
    };
    *t = snapshot.t;
    SL_OK
}

/// Copy the field values of the `index`-th snapshot into a caller-owned
/// buffer of capacity `len`; `len` must be at least the grid's point count
/// (`sl_run_grid`). Node i sits at radius i·dr.
///
/// # Safety
///
/// `run` must be a live run handle; `values` must be valid for writing
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_run_snapshot_copy(
    run: *const SlRun,
    index: usize,
    values: *mut f64,
    len: usize,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if values.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let Some(snapshot) = handle.record.snapshots.get(index) else {
        return SL_ERR_OUT_OF_RANGE;
    };
    if len < snapshot.values.len() {
        return SL_ERR_BUFFER_TOO_SMALL;
    }
    ptr::copy_nonoverlapping(snapshot.values.as_ptr(), values, snapshot.values.len());
    SL_OK
}

/// Fitted origin parabola and its predicted counterpart. Fails with
/// `SL_ERR_NO_FIT` when the run has no fit (stationary runs, or the trace
/// never crossed the fit threshold).
///
/// # Safety
///
/// `run` must be a live run handle; `fit` must be valid for writing one
/// `SlFit`.
#[no_mangle]
pub unsafe extern "C" fn sl_run_fit(run: *const SlRun, fit: *mut SlFit) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if fit.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let report = &handle.report;
    let (Some(origin), Some(predicted), Some(rel_err_a), Some(rel_err_t)) = (
        report.origin.as_ref(),
        report.predicted.as_ref(),
        report.rel_err_a,
        report.rel_err_t,
    ) else {
        return SL_ERR_NO_FIT;
    };
    *fit = SlFit {
        a_fit: origin.a,
        t_blowup_fit: origin.t_blowup,
        rms_residual: origin.rms_residual,
        a_predicted: predicted.a,
        t_blowup_predicted: predicted.t_blowup,
        rel_err_a,
        rel_err_t,
    };
    SL_OK
}

/// Write the run's artifacts (manifest.json, origin.csv, slices/) into
/// `dir`, creating it if needed. `dir` is a NUL-terminated UTF-8 path.
///
/// # Safety
///
/// `run` must be a live run handle; `dir` must point to a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn sl_run_write_artifacts(
    run: *const SlRun,
    dir: *const c_char,
) -> SlStatus {
    let Some(handle) = run.as_ref() else {
        return SL_ERR_NULL_ARGUMENT;
    };
    if dir.is_null() {
        return SL_ERR_NULL_ARGUMENT;
    }
    let Ok(dir) = CStr::from_ptr(dir).to_str() else {
        return SL_ERR_INVALID_ARGUMENT;
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        write_run(
            Path::new(dir),
            &handle.record,
            &handle.report,
            handle.wall_seconds,
        )
    }));
    match outcome {
        Ok(Ok(())) => SL_OK,
        Ok(Err(_)) => SL_ERR_IO,
        Err(_) => SL_ERR_INTERNAL,
    }
}
