#ifndef ATMR_H
#define ATMR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AtmrAlgorithm {
  ATMR_ALGORITHM_ATMR = 0,
  ATMR_ALGORITHM_NSGA2_CDP = 1,
} AtmrAlgorithm;

/**
 * Result code of every fallible call.
 */
typedef enum AtmrStatus {
  ATMR_STATUS_OK = 0,
  ATMR_STATUS_NULL_POINTER = 1,
  ATMR_STATUS_INVALID_ARGUMENT = 2,
  ATMR_STATUS_UNKNOWN_PROBLEM = 3,
  /**
   * Invalid algorithm configuration.
   */
  ATMR_STATUS_CONFIG = 4,
  /**
   * An objective or constraint evaluated to NaN or infinity.
   */
  ATMR_STATUS_EVALUATION = 5,
  /**
   * The request is outside what the library supports.
   */
  ATMR_STATUS_UNSUPPORTED = 6,
  /**
   * Output buffer too small.
   */
  ATMR_STATUS_BUFFER_TOO_SMALL = 7,
  ATMR_STATUS_PANIC = 8,
  ATMR_STATUS_INTERNAL = 9,
} AtmrStatus;

/**
 * Opaque problem handle.
 */
typedef struct AtmrProblem AtmrProblem;

/**
 * Opaque handle to a finished run.
 */
typedef struct AtmrRun AtmrRun;

/**
 * Evaluates `x` (length `n_var`) into `f` (`n_obj`), `g` (`n_ineq`) and `h`
 * (`n_eq`). Returns 0 on success; anything else fails the run. May be called
 * from several threads at once.
 */
typedef int (*AtmrEvalFn)(const double *x,
                          size_t n_var,
                          double *f,
                          double *g,
                          double *h,
                          void *user_data);

/**
 * Algorithm settings. Obtain defaults from [`atmr_config_default`].
 */
typedef struct AtmrConfig {
  /**
   * Population size; even and at least 4.
   */
  size_t n;
  uint64_t max_fes;
  /**
   * Equality constraint tolerance.
   */
  double delta;
  double pc;
  double pm;
  double eta_c;
  double eta_m;
  uint64_t seed;
} AtmrConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *atmr_last_error_message(void);

/**
 * Instantiates a built-in problem. `param_keys`/`param_values` hold
 * `n_params` entries and may be NULL when `n_params` is 0.
 *
 * # Safety
 * Pointers must be valid for the given lengths; strings NUL-terminated.
 */
enum AtmrStatus atmr_problem_new(const char *name,
                                 const char *const *param_keys,
                                 const double *param_values,
                                 size_t n_params,
                                 struct AtmrProblem **out);

/**
 * Defines a problem evaluated by a C callback.
 *
 * # Safety
 * `lower`/`upper` must hold `n_var` values. `eval` and `user_data` must stay
 * valid, and be safe to call from any thread, until the handle is freed.
 */
enum AtmrStatus atmr_problem_new_callback(const char *name,
                                          size_t n_var,
                                          size_t n_obj,
                                          size_t n_ineq,
                                          size_t n_eq,
                                          const double *lower,
                                          const double *upper,
                                          AtmrEvalFn eval,
                                          void *user_data,
                                          struct AtmrProblem **out);

/**
 * # Safety
 * `problem` must come from `atmr_problem_new*` and not be used afterwards.
 */
void atmr_problem_free(struct AtmrProblem *problem);

/**
 * Writes the problem dimensions; any output pointer may be NULL.
 *
 * # Safety
 * Non-null pointers must be writable.
 */
enum AtmrStatus atmr_problem_dims(const struct AtmrProblem *problem,
                                  size_t *n_var,
                                  size_t *n_obj,
                                  size_t *n_ineq,
                                  size_t *n_eq);

/**
 * Default settings for `problem` (population 100, 60000 evaluations,
 * mutation rate 1/D, seed 0). Writes zeros if `problem` is NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
struct AtmrConfig atmr_config_default(const struct AtmrProblem *problem);

/**
 * Runs an algorithm to completion.
 *
 * # Safety
 * `problem` and `config` must be live; `out` writable.
 */
enum AtmrStatus atmr_run(const struct AtmrProblem *problem,
                         enum AtmrAlgorithm algorithm,
                         const struct AtmrConfig *config,
                         struct AtmrRun **out);

/**
 * # Safety
 * `run` must come from `atmr_run` and not be used afterwards.
 */
void atmr_run_free(struct AtmrRun *run);

/**
 * Number of solutions in the final population (0 for NULL).
 *
 * # Safety
 * `run` must be NULL or live.
 */
size_t atmr_run_size(const struct AtmrRun *run);

/**
 * Function evaluations spent (0 for NULL).
 *
 * # Safety
 * `run` must be NULL or live.
 */
uint64_t atmr_run_fes(const struct AtmrRun *run);

/**
 * Number of traced generations, including the initial population.
 *
 * # Safety
 * `run` must be NULL or live.
 */
size_t atmr_run_generations(const struct AtmrRun *run);

/**
 * Copies final objectives, `size * n_obj` values row-major, into `out`.
 *
 * # Safety
 * `out` must be writable for `len` doubles.
 */
enum AtmrStatus atmr_run_objectives(const struct AtmrRun *run, double *out, size_t len);

/**
 * Copies final decision vectors, `size * n_var` values row-major, into `out`.
 *
 * # Safety
 * `out` must be writable for `len` doubles.
 */
enum AtmrStatus atmr_run_decisions(const struct AtmrRun *run, double *out, size_t len);

/**
 * Copies the constraint violation of each final solution (`size` values).
 *
 * # Safety
 * `out` must be writable for `len` doubles.
 */
enum AtmrStatus atmr_run_violations(const struct AtmrRun *run, double *out, size_t len);

/**
 * Inverted generational distance of `approx` (`n_approx` x `m`) against
 * `reference` (`n_ref` x `m`). Writes NaN when either set is empty.
 *
 * # Safety
 * Buffers must hold the stated number of values; `out` writable.
 */
enum AtmrStatus atmr_igd(const double *approx,
                         size_t n_approx,
                         const double *reference,
                         size_t n_ref,
                         size_t m,
                         double *out);

/**
 * Hypervolume of `points` (`n` x `m`, minimization) bounded by `ref_point`.
 * Supports `m` of 2 or 3.
 *
 * # Safety
 * Buffers must hold the stated number of values; `out` writable.
 */
enum AtmrStatus atmr_hypervolume(const double *points,
                                 size_t n,
                                 size_t m,
                                 const double *ref_point,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATMR_H */
