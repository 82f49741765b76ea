#ifndef SCURVE_H
#define SCURVE_H

/* Generated by cbindgen from the scurve-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum {
  SCURVE_STATUS_OK = 0,
  SCURVE_STATUS_NULL_POINTER = 1,
  SCURVE_STATUS_INVALID_ARGUMENT = 2,
  SCURVE_STATUS_DOMAIN_ERROR = 3,
  SCURVE_STATUS_NUMERIC_ERROR = 4,
  SCURVE_STATUS_IO_ERROR = 5,
  SCURVE_STATUS_PARSE_ERROR = 6,
  SCURVE_STATUS_UTF8_ERROR = 7,
} ScurveStatus;

/**
 * Closed-form sigmoid families.
 */
typedef enum {
  SCURVE_FAMILY_LOGISTIC = 0,
  SCURVE_FAMILY_ALGEBRAIC = 1,
  SCURVE_FAMILY_ERROR_FUNCTION = 2,
  SCURVE_FAMILY_GOMPERTZ = 3,
} ScurveFamily;

/**
 * Damping-function families for the growth-law process.
 */
typedef enum {
  /**
   * `H(y) = 1 - y/L`; `param_a` = L, `param_b` unused.
   */
  SCURVE_DAMPING_KIND_LINEAR = 0,
  /**
   * `H(y) = min(1, 2 - 2y/L)`; `param_a` = L, `param_b` unused.
   */
  SCURVE_DAMPING_KIND_PIECEWISE_LINEAR = 1,
  /**
   * Power tail; `param_a` = L, `param_b` = exponent (>= 1).
   */
  SCURVE_DAMPING_KIND_POWER_TAIL = 2,
  /**
   * Straight tail; `param_a` = scale, `param_b` = slope (< 0).
   */
  SCURVE_DAMPING_KIND_SLOPE_TAIL = 3,
} ScurveDampingKind;

/**
 * Opaque damping-function growth process.
 */
typedef struct ScurveOde ScurveOde;

/**
 * Opaque closed-form sigmoid.
 */
typedef struct ScurveSigmoid ScurveSigmoid;

/**
 * Result of a logistic prefix fit.
 */
typedef struct {
  /**
   * Fitted asymptote.
   */
  double l;
  /**
   * Fitted growth rate.
   */
  double k;
  /**
   * Fitted inflection time.
   */
  double t0;
  /**
   * Root mean squared residual on the window.
   */
  double rmse;
  bool converged;
  /**
   * The input window was not increasing.
   */
  bool degenerate_input;
} ScurveFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * A NUL-terminated description of the last error on this thread, or NULL if
 * none occurred. Valid until the next failing call on the same thread.
 */
const char *scurve_last_error_message(void);

/**
 * The crate version as a static NUL-terminated string.
 */
const char *scurve_version(void);

/**
 * Creates a closed-form sigmoid.
 *
 * # Safety
 * `out` must point to writable memory for one pointer.
 */
ScurveStatus scurve_sigmoid_new(ScurveFamily family,
                                double l,
                                double alpha,
                                double beta,
                                double shift,
                                ScurveSigmoid **out);

/**
 * Releases a sigmoid handle. NULL is a no-op.
 *
 * # Safety
 * `handle` must have come from [`scurve_sigmoid_new`] and not be freed twice.
 */
void scurve_sigmoid_free(ScurveSigmoid *handle);

/**
 * Evaluates the curve at `t`.
 *
 * # Safety
 * `handle` must be a live sigmoid handle; `out` must be writable.
 */
ScurveStatus scurve_sigmoid_eval(const ScurveSigmoid *handle, double t, double *out);

/**
 * Evaluates the growth rate `dy/dt` at `t`.
 *
 * # Safety
 * `handle` must be a live sigmoid handle; `out` must be writable.
 */
ScurveStatus scurve_sigmoid_derivative(const ScurveSigmoid *handle, double t, double *out);

/**
 * The inflection point of the curve.
 *
 * # Safety
 * `handle` must be a live sigmoid handle; `out_t0`/`out_y0` must be writable.
 */
ScurveStatus scurve_sigmoid_inflection(const ScurveSigmoid *handle, double *out_t0, double *out_y0);

/**
 * Creates a growth-law process `y' = k H(y) y` anchored at `y(0)`.
 * `param_a`/`param_b` are interpreted per [`ScurveDampingKind`].
 *
 * # Safety
 * `out` must point to writable memory for one pointer.
 */
ScurveStatus scurve_ode_new(ScurveDampingKind kind,
                            double param_a,
                            double param_b,
                            double k,
                            double y_at_zero,
                            ScurveOde **out);

/**
 * Releases an ODE handle. NULL is a no-op.
 *
 * # Safety
 * `handle` must have come from [`scurve_ode_new`] and not be freed twice.
 */
void scurve_ode_free(ScurveOde *handle);

/**
 * Integrates the process over `times` (strictly increasing, length `len`)
 * into `out_values`. `out_reached_asymptote` reports whether the solution
 * saturated at the asymptote inside the grid.
 *
 * # Safety
 * `times` and `out_values` must point to `len` readable/writable doubles;
 * `out_reached_asymptote` must be writable or NULL.
 */
ScurveStatus scurve_ode_integrate(const ScurveOde *handle,
                                  const double *times,
                                  uintptr_t len,
                                  double *out_values,
                                  bool *out_reached_asymptote);

/**
 * Elapsed time for the solution to climb from `y_from` to `y_to`.
 * Diverging passages (at the asymptote) report +infinity.
 *
 * # Safety
 * `handle` must be a live ODE handle; `out` must be writable.
 */
ScurveStatus scurve_ode_time_to_reach(const ScurveOde *handle,
                                      double y_from,
                                      double y_to,
                                      double *out);

/**
 * The inflection point `(t0, y0)` of the process.
 *
 * # Safety
 * `handle` must be a live ODE handle; `out_t0`/`out_y0` must be writable.
 */
ScurveStatus scurve_ode_inflection(const ScurveOde *handle, double *out_t0, double *out_y0);

/**
 * Multi-start least-squares fit of one sigmoid family to `(times, values)`.
 * Deterministic for a fixed `seed`. Needs at least 4 samples.
 *
 * # Safety
 * `times`/`values` must point to `len` readable doubles; `out` must be
 * writable.
 */
ScurveStatus scurve_fit(ScurveFamily family,
                        const double *times,
                        const double *values,
                        uintptr_t len,
                        uintptr_t n_starts,
                        uint64_t seed,
                        ScurveFitResult *out);

/**
 * Runs a scenario file (or bundled scenario name), as the `scurve run`
 * command would. `out_dir` may be NULL to use the scenario's own directory;
 * `seed_override` may be NULL to keep the scenario's seed.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_dir` NULL or NUL-terminated;
 * `seed_override` NULL or pointing to a readable u64.
 */
ScurveStatus scurve_run_scenario(const char *path,
                                 const char *out_dir,
                                 const uint64_t *seed_override,
                                 bool quiet);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCURVE_H */
