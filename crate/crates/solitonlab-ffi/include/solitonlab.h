/* C interface to the solitonlab soliton-collapse laboratory. */

#ifndef SOLITONLAB_H
#define SOLITONLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Charge-1 sector of (4+1)-dimensional Yang-Mills, radially reduced.
#define SL_MODEL_YANG_MILLS_4P1 0

// Charge-2 sector of the (2+1)-dimensional S² sigma model.
#define SL_MODEL_SIGMA_CHARGE2 1

// Initial data f(r, 0) = f₀, a horizontal line.
#define SL_PROFILE_LINE 0

// Initial data f(r, 0) = p·r² + f₀ with the slow-motion curvature p.
#define SL_PROFILE_PARABOLA 1

// Result code returned by every fallible function.
typedef enum SlStatus {
  // The call succeeded and all out-pointers are filled.
  SL_OK = 0,
  // A required pointer argument was NULL.
  SL_ERR_NULL_ARGUMENT = 1,
  // An argument was outside its documented domain (unknown selector,
  // non-finite number, invalid UTF-8 path, ...).
  SL_ERR_INVALID_ARGUMENT = 2,
  // The assembled configuration cannot be run (bad grid, bad stepping,
  // wrong sign of v₀, ...).
  SL_ERR_INVALID_CONFIG = 3,
  // The evolution failed numerically before producing a usable record.
  SL_ERR_NUMERICAL = 4,
  // Writing artifacts failed.
  SL_ERR_IO = 5,
  // The run produced no origin fit (stationary runs, or the trace never
  // crossed the fit threshold).
  SL_ERR_NO_FIT = 6,
  // A caller-owned buffer is shorter than the data.
  SL_ERR_BUFFER_TOO_SMALL = 7,
  // An index was past the end of a collection.
  SL_ERR_OUT_OF_RANGE = 8,
  // An internal invariant failed; the handle is still valid to free.
  SL_ERR_INTERNAL = 9,
} SlStatus;

// Why an evolution stopped.
typedef enum SlTermination {
  // f(0,t) fell to the stop fraction of f₀ — the intended end of a
  // collapse run.
  SL_TERMINATION_REACHED_STOP_FRACTION = 0,
  // The clock ran out first.
  SL_TERMINATION_REACHED_T_MAX = 1,
  // The field reached the singular set.
  SL_TERMINATION_BLOW_UP = 2,
  // The field stopped being finite; artifacts up to that point are
  // still available on the handle.
  SL_TERMINATION_NUMERICAL_INSTABILITY = 3,
} SlTermination;

// Opaque evolution configuration; create with `sl_config_new` or
// `sl_config_stationary`, release with `sl_config_free`.
typedef struct SlConfig SlConfig;

// Opaque result of one evolution; produced by `sl_run_execute`, released
// with `sl_run_free`.
typedef struct SlRun SlRun;

// Fitted and predicted collapse parameters for one run.
//
// The origin trace f(0,t) is fitted with a(t − T)²; the slow-motion
// analysis predicts a = v₀²/(4f₀) and T = 2f₀/|v₀|.
typedef struct SlFit {
  // Fitted curvature a of the origin parabola.
  double a_fit;
  // Fitted blow-up time T.
  double t_blowup_fit;
  // Root-mean-square residual of the parabola fit.
  double rms_residual;
  // Predicted curvature v₀²/(4f₀).
  double a_predicted;
  // Predicted blow-up time 2f₀/|v₀|.
  double t_blowup_predicted;
  // |a_fit − a_pred| / a_pred.
  double rel_err_a;
  // |T_fit − T_pred| / T_pred.
  double rel_err_t;
} SlFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string.
const char *sl_version(void);

// Static NUL-terminated description of a status code. Total: unknown
// codes yield a fallback message, never NULL.
const char *sl_status_message(int32_t status);

// Slow-motion collapse prediction a = v₀²/(4f₀), T = 2f₀/|v₀| for a
// horizontal-line start at height `f0` with velocity `v0 < 0`.
//
// # Safety
//
// `a` and `t_blowup` must be valid for writing one `double` each.
enum SlStatus sl_geodesic_prediction(double f0, double v0, double *a, double *t_blowup);

// Create a collapse configuration: model selector, initial height
// `f0 > 0`, initial velocity `v0 < 0`. Grid, stepping, and profile start
// at their defaults (R = 10, Δr = 0.025, Δt = 0.001, horizontal line).
//
// # Safety
//
// `out` must be valid for writing one pointer. On success `*out` owns the
// configuration and must be released with `sl_config_free`.
enum SlStatus sl_config_new(int32_t model, double f0, double v0, struct SlConfig **out);

// Create a stationary (v₀ = 0) configuration running until `t_max`;
// useful for probing the stability of the constant solution.
//
// # Safety
//
// `out` must be valid for writing one pointer. On success `*out` owns the
// configuration and must be released with `sl_config_free`.
enum SlStatus sl_config_stationary(int32_t model, double f0, double t_max, struct SlConfig **out);

// Set the radial domain [0, `r_max`] and spacing `dr`.
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_grid(struct SlConfig *config, double r_max, double dr);

// Set the time step.
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_time_step(struct SlConfig *config, double dt);

// Set the time horizon.
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_t_max(struct SlConfig *config, double t_max);

// Choose the initial profile (`SL_PROFILE_LINE` or `SL_PROFILE_PARABOLA`).
// The matching outer boundary rule is selected automatically.
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_profile(struct SlConfig *config, int32_t profile);

// Set the fraction of f₀ at which a collapse run stops (default 0.05).
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_stop_fraction(struct SlConfig *config, double stop_fraction);

// Set how many steps apart full-field snapshots are kept (default 100).
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_set_snapshot_stride(struct SlConfig *config, size_t stride);

// Check the assembled configuration without running it.
//
// # Safety
//
// `config` must be a live handle from `sl_config_new`/`sl_config_stationary`.
enum SlStatus sl_config_validate(const struct SlConfig *config);

// Release a configuration handle. `config` may be NULL.
//
// # Safety
//
// `config` must be NULL or a handle not yet freed; it is invalid afterwards.
void sl_config_free(struct SlConfig *config);

// Run the evolution described by `config` to termination and fit the
// result. Returns `SL_OK` even when the evolution ends in
// `SL_TERMINATION_NUMERICAL_INSTABILITY` — the partial record is still
// queryable; check `sl_run_termination`.
//
// # Safety
//
// `config` must be a live configuration handle and `out` valid for
// writing one pointer. On success `*out` owns the run and must be
// released with `sl_run_free`.
enum SlStatus sl_run_execute(const struct SlConfig *config, struct SlRun **out);

// Release a run handle. `run` may be NULL.
//
// # Safety
//
// `run` must be NULL or a handle not yet freed; it is invalid afterwards.
void sl_run_free(struct SlRun *run);

// Why the run stopped.
//
// # Safety
//
// `run` must be a live run handle; `termination` must be valid for
// writing one value.
enum SlStatus sl_run_termination(const struct SlRun *run, enum SlTermination *termination);

// Number of time steps the run took.
//
// # Safety
//
// `run` must be a live run handle; `steps` must be valid for writing one
// value.
enum SlStatus sl_run_step_count(const struct SlRun *run, size_t *steps);

// The radial grid the run used. Any out-pointer may be NULL to skip that
// value, but not all three.
//
// # Safety
//
// `run` must be a live run handle; non-NULL out-pointers must each be
// valid for writing one value.
enum SlStatus sl_run_grid(const struct SlRun *run, double *r_max, double *dr, size_t *n_points);

// Number of (t, f(0,t)) samples in the origin trace.
//
// # Safety
//
// `run` must be a live run handle; `len` must be valid for writing one
// value.
enum SlStatus sl_run_origin_len(const struct SlRun *run, size_t *len);

// Copy the origin trace into caller-owned buffers of capacity `len`
// elements each; `len` must be at least `sl_run_origin_len`.
//
// # Safety
//
// `run` must be a live run handle; `times` and `values` must each be
// valid for writing `len` doubles.
enum SlStatus sl_run_origin_copy(const struct SlRun *run,
                                 double *times,
                                 double *values,
                                 size_t len);

// Number of full-field snapshots the run kept.
//
// # Safety
//
// `run` must be a live run handle; `count` must be valid for writing one
// value.
enum SlStatus sl_run_snapshot_count(const struct SlRun *run, size_t *count);

// Time of the `index`-th snapshot.
//
// # Safety
//
// `run` must be a live run handle; `t` must be valid for writing one
// value.
enum SlStatus sl_run_snapshot_time(const struct SlRun *run, size_t index, double *t);

// Copy the field values of the `index`-th snapshot into a caller-owned
// buffer of capacity `len`; `len` must be at least the grid's point count
// (`sl_run_grid`). Node i sits at radius i·dr.
//
// # Safety
//
// `run` must be a live run handle; `values` must be valid for writing
// `len` doubles.
enum SlStatus sl_run_snapshot_copy(const struct SlRun *run,
                                   size_t index,
                                   double *values,
                                   size_t len);

// Fitted origin parabola and its predicted counterpart. Fails with
// `SL_ERR_NO_FIT` when the run has no fit (stationary runs, or the trace
// never crossed the fit threshold).
//
// # Safety
//
// `run` must be a live run handle; `fit` must be valid for writing one
// `SlFit`.
enum SlStatus sl_run_fit(const struct SlRun *run, struct SlFit *fit);

// Write the run's artifacts (manifest.json, origin.csv, slices/) into
// `dir`, creating it if needed. `dir` is a NUL-terminated UTF-8 path.
//
// # Safety
//
// `run` must be a live run handle; `dir` must point to a NUL-terminated
// string.
enum SlStatus sl_run_write_artifacts(const struct SlRun *run, const char *dir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SOLITONLAB_H */
