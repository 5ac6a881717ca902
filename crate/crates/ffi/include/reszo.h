/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef RESZO_H
#define RESZO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum {
  RESZO_STATUS_OK = 0,
  RESZO_STATUS_NULL_ARGUMENT = 1,
  RESZO_STATUS_INVALID_ARGUMENT = 2,
  RESZO_STATUS_DIMENSION_MISMATCH = 3,
  RESZO_STATUS_EVALUATION_FAILED = 4,
  RESZO_STATUS_NUMERIC = 5,
  RESZO_STATUS_NOT_ENOUGH_SAMPLES = 6,
  RESZO_STATUS_SINGULAR_UPDATE = 7,
  // The run left the finite region. Outputs still hold the last iterate.
  RESZO_STATUS_DIVERGED = 8,
  RESZO_STATUS_EXPERIMENT_FAILED = 9,
  RESZO_STATUS_CONFIG = 10,
  RESZO_STATUS_EXPORT = 11,
  RESZO_STATUS_IO = 12,
  // A Rust panic was caught at the boundary.
  RESZO_STATUS_PANIC = 13,
} ReszoStatus;

typedef enum {
  RESZO_METHOD_SZO = 0,
  RESZO_METHOD_RSZO = 1,
  RESZO_METHOD_TZO = 2,
  RESZO_METHOD_L_RESZO = 3,
  RESZO_METHOD_Q_RESZO = 4,
} ReszoMethod;

// Opaque experiment configuration.
typedef struct ReszoExperiment ReszoExperiment;

// Opaque experiment outcome.
typedef struct ReszoResult ReszoResult;

// Optimizer settings for [`reszo_minimize`]. Fill with
// [`reszo_options_default`] and adjust.
typedef struct {
  ReszoMethod method;
  double eta;
  double delta;
  // Warm-start step size and radius (regression methods only).
  double warm_eta;
  double warm_delta;
  // Regression window length.
  size_t window_m;
  size_t iterations;
  bool adaptive_delta;
  bool fast_path;
  // When true the objective is called once more per iteration, outside
  // the query budget, to record `f(x_{t+1})`.
  bool record_iterate_values;
  uint64_t seed;
} ReszoOptions;

// Objective callback: `x` points at `dim` doubles.
typedef double (*ReszoObjectiveFn)(const double *x, size_t dim, void *user_data);

typedef struct {
  // Last queried objective value.
  double last_query_value;
  // `f` at the returned point, or NaN when iterate values are not recorded.
  double final_value;
  // Black-box queries spent.
  uint64_t queries;
  size_t iterations;
  bool diverged;
} ReszoRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *reszo_version(void);

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next library call on the same thread.
const char *reszo_last_error_message(void);

// Defaults for `method` with zero step size and radius; set `eta`,
// `delta` and `iterations` before use.
//
// # Safety
// `out` must point to writable memory for one `ReszoOptions`.
ReszoStatus reszo_options_default(ReszoMethod method, ReszoOptions *out);

// Minimize a black-box function from `x0`.
//
// On `RESZO_STATUS_OK` and `RESZO_STATUS_DIVERGED`, `x_out` receives the
// last iterate and `summary_out` (optional) the run summary.
//
// # Safety
// `x0` and `x_out` must each point to `dim` doubles; they may alias.
// `options` must point to a valid `ReszoOptions`. `objective` must be safe
// to call with any `dim`-vector and the given `user_data`.
ReszoStatus reszo_minimize(ReszoObjectiveFn objective,
                           void *user_data,
                           size_t dim,
                           const double *x0,
                           const ReszoOptions *options,
                           double *x_out,
                           ReszoRunSummary *summary_out);

// Parse an experiment from TOML text (a run manifest works too).
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
ReszoStatus reszo_experiment_from_toml(const char *toml, ReszoExperiment **out);

// Load an experiment file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
ReszoStatus reszo_experiment_load(const char *path, ReszoExperiment **out);

// # Safety
// `experiment` must come from this library and not be freed.
ReszoStatus reszo_experiment_set_trials(ReszoExperiment *experiment, size_t trials);

// # Safety
// `experiment` must come from this library and not be freed.
ReszoStatus reszo_experiment_set_seed(ReszoExperiment *experiment, uint64_t base_seed);

// # Safety
// `experiment` must be NULL or come from this library; it is invalid
// afterwards.
void reszo_experiment_free(ReszoExperiment *experiment);

// Run every trial. Divergent trials are counted in the result; the call
// fails only when all trials diverge.
//
// # Safety
// `experiment` must be valid; `out` must be writable.
ReszoStatus reszo_experiment_run(const ReszoExperiment *experiment, ReszoResult **out);

// Number of points on the aggregated curve; 0 for NULL.
//
// # Safety
// `result` must be NULL or valid.
size_t reszo_result_curve_len(const ReszoResult *result);

// Copy the aggregated curve. Each non-NULL array must hold `capacity`
// elements; `capacity` must be at least the curve length.
//
// # Safety
// `result` must be valid; every non-NULL array must be writable for
// `capacity` elements.
ReszoStatus reszo_result_copy_curve(const ReszoResult *result,
                                    uint64_t *queries,
                                    double *mean_gap,
                                    double *ci_low,
                                    double *ci_high,
                                    size_t capacity);

// Mean optimality gap at the end of the curve, and the number of trials
// that diverged. Either output may be NULL.
//
// # Safety
// `result` must be valid; non-NULL outputs must be writable.
ReszoStatus reszo_result_final_gap(const ReszoResult *result,
                                   double *gap_out,
                                   size_t *diverged_out);

// Write curve, per-trial and manifest files into `dir`.
//
// # Safety
// `result` must be valid; `dir` must be a NUL-terminated string.
ReszoStatus reszo_result_export(const ReszoResult *result, const char *dir);

// # Safety
// `result` must be NULL or come from this library; it is invalid afterwards.
void reszo_result_free(ReszoResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESZO_H */
