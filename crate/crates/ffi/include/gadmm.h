#ifndef GADMM_H
#define GADMM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum GadmmSolver {
  GADMM_SOLVER_M_ADMM = 0,
  GADMM_SOLVER_M_GADMM = 1,
  GADMM_SOLVER_GADMM_M = 2,
} GadmmSolver;

// Status codes returned by every fallible function.
typedef enum GadmmStatus {
  GADMM_STATUS_OK = 0,
  GADMM_STATUS_NULL_POINTER = 1,
  GADMM_STATUS_INVALID_ARGUMENT = 2,
  GADMM_STATUS_DIMENSION_MISMATCH = 3,
  GADMM_STATUS_INVALID_CONFIG = 4,
  GADMM_STATUS_SOLVE_FAILED = 5,
  GADMM_STATUS_BUFFER_TOO_SMALL = 6,
  GADMM_STATUS_PANIC = 7,
} GadmmStatus;

typedef enum GadmmTermination {
  GADMM_TERMINATION_CONVERGED = 0,
  GADMM_TERMINATION_MAX_ITER = 1,
  GADMM_TERMINATION_SUBPROBLEM_FAILURE = 2,
} GadmmTermination;

// A generated benchmark instance.
typedef struct GadmmInstance GadmmInstance;

// The outcome of one solve.
typedef struct GadmmReport GadmmReport;

// Solver parameters. Fill with [`gadmm_config_default`] before editing.
typedef struct GadmmConfig {
  double sigma;
  // Relaxation for G-ADMM-M and M-GADMM, in `(0, 2)`.
  double rho;
  // Dual step for M-ADMM, in `(0, (1 + sqrt 5) / 2)`.
  double tau;
  double tol;
  uint64_t max_iter;
} GadmmConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *gadmm_last_error_message(void);

// Writes the default parameters to `out`.
//
// # Safety
// `out` must be NULL or point to writable memory for one `GadmmConfig`.
enum GadmmStatus gadmm_config_default(struct GadmmConfig *out);

// Generates the seeded benchmark instance with `m` constraints and `n`
// variables. `chi` is the penalty weight; pass a negative value for the
// default `2 mu`.
//
// # Safety
// `out` must be NULL or point to writable memory for one pointer.
enum GadmmStatus gadmm_instance_generate(size_t m,
                                         size_t n,
                                         double chi,
                                         uint64_t seed,
                                         struct GadmmInstance **out);

// Writes the constraint count and variable count of `inst`.
//
// # Safety
// `inst` must be NULL or a live handle; `m` and `n` must be NULL or writable.
enum GadmmStatus gadmm_instance_dims(const struct GadmmInstance *inst, size_t *m, size_t *n);

// Releases an instance. NULL is ignored.
//
// # Safety
// `inst` must be NULL or a handle from [`gadmm_instance_generate`] that has
// not been freed.
void gadmm_instance_free(struct GadmmInstance *inst);

// Solves `inst` from the zero point. `config` may be NULL for defaults.
//
// # Safety
// `inst` must be NULL or a live handle, `config` NULL or readable, and
// `out` NULL or writable.
enum GadmmStatus gadmm_solve(const struct GadmmInstance *inst,
                             enum GadmmSolver solver,
                             const struct GadmmConfig *config,
                             struct GadmmReport **out);

// Number of iterations performed, 0 for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
uint64_t gadmm_report_iterations(const struct GadmmReport *report);

// Relative KKT residual at the final iterate, NaN for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
double gadmm_report_residual(const struct GadmmReport *report);

// Objective value at the final iterate, NaN for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
double gadmm_report_objective(const struct GadmmReport *report);

// Wall time of the solve in seconds, NaN for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
double gadmm_report_wall_time(const struct GadmmReport *report);

// Why the solve stopped. NULL reads as a subproblem failure.
//
// # Safety
// `report` must be NULL or a live handle.
enum GadmmTermination gadmm_report_termination(const struct GadmmReport *report);

// Copies the final `y` into `buf`. `len` must be at least the variable
// count; the count is written to `written` when it is non-NULL.
//
// # Safety
// `report` must be NULL or a live handle, `buf` NULL or writable for `len`
// doubles, and `written` NULL or writable.
enum GadmmStatus gadmm_report_copy_y(const struct GadmmReport *report,
                                     double *buf,
                                     size_t len,
                                     size_t *written);

// Releases a report. NULL is ignored.
//
// # Safety
// `report` must be NULL or a handle from [`gadmm_solve`] that has not been
// freed.
void gadmm_report_free(struct GadmmReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GADMM_H */
