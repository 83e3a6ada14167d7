#ifndef IWATSUKA_H
#define IWATSUKA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IwStatus {
  IW_STATUS_OK = 0,
  IW_STATUS_NULL_POINTER = 1,
  IW_STATUS_INVALID_ARGUMENT = 2,
  IW_STATUS_PARSE_ERROR = 3,
  IW_STATUS_NUMERICAL_ERROR = 4,
  IW_STATUS_BUFFER_TOO_SMALL = 5,
  IW_STATUS_PANIC = 6,
} IwStatus;

typedef enum IwAcCondition {
  IW_AC_CONDITION_NONE = 0,
  IW_AC_CONDITION_COND13 = 1,
  IW_AC_CONDITION_COND14 = 2,
  IW_AC_CONDITION_COND13_SWAPPED = 3,
  IW_AC_CONDITION_COND14_SWAPPED = 4,
} IwAcCondition;

/**
 * A field/potential pair.
 */
typedef struct IwProblem IwProblem;

/**
 * Band values over a `ξ` grid.
 */
typedef struct IwSweep IwSweep;

/**
 * Essential lower/upper bounds of the field and potential tails; `plus`
 * is `x → +∞`.
 */
typedef struct IwTailBounds {
  double b_under_plus;
  double b_over_plus;
  double b_under_minus;
  double b_over_minus;
  double w_under_plus;
  double w_over_plus;
  double w_under_minus;
  double w_over_minus;
  /**
   * Non-zero when the bounds were sampled rather than known exactly.
   */
  int32_t heuristic;
} IwTailBounds;

typedef struct IwAcDecision {
  int32_t verdict;
  enum IwAcCondition condition;
  double margin;
  int32_t heuristic;
} IwAcDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *iw_version(void);

/**
 * Length of the last error message on this thread, without the NUL; 0 if
 * the last call succeeded.
 */
size_t iw_last_error_length(void);

/**
 * Copy the last error message into `buf` (NUL-terminated).
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum IwStatus iw_last_error_message(char *buf, size_t len);

/**
 * Problem from the builtin catalog, e.g. `"iwatsuka-step"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum IwStatus iw_problem_builtin(const char *name, struct IwProblem **out);

/**
 * Problem from JSON profile objects, `{"b": {...}, "w": {...}}`; `w`
 * defaults to zero.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum IwStatus iw_problem_from_json(const char *json, struct IwProblem **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void iw_problem_free(struct IwProblem *p);

/**
 * # Safety
 * `p` must be a live problem handle; `out` must be writable.
 */
enum IwStatus iw_problem_tail_bounds(const struct IwProblem *p, struct IwTailBounds *out);

/**
 * # Safety
 * `p` must be a live problem handle; `out` must be writable.
 */
enum IwStatus iw_problem_ac_decision(const struct IwProblem *p, struct IwAcDecision *out);

/**
 * `A_y(x)` in the problem's gauge.
 *
 * # Safety
 * `p` must be a live problem handle; `out` must be writable.
 */
enum IwStatus iw_problem_vector_potential(const struct IwProblem *p, double x, double *out);

/**
 * Lowest `k` eigenvalues of the fiber operator at `xi`. `h_max = 0`
 * selects the default spacing.
 *
 * # Safety
 * `p` must be a live problem handle; `out` must hold `len` doubles.
 */
enum IwStatus iw_problem_band_values(const struct IwProblem *p,
                                     double xi,
                                     size_t k,
                                     double h_max,
                                     double *out,
                                     size_t len);

/**
 * Sweep the lowest `k` bands over `n` strictly increasing `xi` values.
 *
 * # Safety
 * `p` must be a live problem handle, `xi` must hold `n` doubles and `out`
 * must be writable.
 */
enum IwStatus iw_sweep_new(const struct IwProblem *p,
                           const double *xi,
                           size_t n,
                           size_t k,
                           double h_max,
                           struct IwSweep **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void iw_sweep_free(struct IwSweep *s);

/**
 * Number of grid points and bands.
 *
 * # Safety
 * `s` must be a live sweep handle; outputs must be writable.
 */
enum IwStatus iw_sweep_dims(const struct IwSweep *s, size_t *n_xi, size_t *k);

/**
 * Copy band `band` (1-based) into `out`.
 *
 * # Safety
 * `s` must be a live sweep handle; `out` must hold `len` doubles.
 */
enum IwStatus iw_sweep_band(const struct IwSweep *s, size_t band, double *out, size_t len);

/**
 * Smallest gap between consecutive bands; `INFINITY` for a single band.
 *
 * # Safety
 * `s` must be a live sweep handle; `out` must be writable.
 */
enum IwStatus iw_sweep_min_gap(const struct IwSweep *s, double *out);

/**
 * Lowest `k` eigenvalues of the glued harmonic comparison operator.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum IwStatus iw_comparison_eigs(double omega,
                                 double omega_tilde,
                                 double x0,
                                 double alpha,
                                 size_t k,
                                 double *out,
                                 size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IWATSUKA_H */
