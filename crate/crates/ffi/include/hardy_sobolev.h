#ifndef HARDY_SOBOLEV_H
#define HARDY_SOBOLEV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  // A parameter tuple failed validation; the message names the clause.
  HS_STATUS_INVALID_PARAMS = 2,
  HS_STATUS_DOMAIN = 3,
  HS_STATUS_CONFIG = 4,
  HS_STATUS_USAGE = 5,
  HS_STATUS_DEGENERATE = 6,
  HS_STATUS_IO = 7,
  HS_STATUS_PANIC = 99,
} HsStatus;

// Radial cell layout.
typedef enum HsGrading {
  HS_GRADING_UNIFORM = 0,
  // `param` is the ratio between consecutive widths.
  HS_GRADING_GEOMETRIC = 1,
  // `param` is the break radius.
  HS_GRADING_SPLIT = 2,
  HS_GRADING_EQUAL_MEASURE = 3,
} HsGrading;

typedef struct HsFunction HsFunction;

typedef struct HsGrid HsGrid;

typedef struct HsParams HsParams;

typedef struct HsTrace HsTrace;

// One radial factor: dimension, outer radius, cell count, layout.
typedef struct HsRadialSpec {
  size_t dim;
  double r_max;
  size_t cells;
  enum HsGrading grading;
  double param;
} HsRadialSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
// `len`). Returns the full message length including the terminator; 0 if there is none.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t hs_last_error(char *buf, size_t len);

// Crate version as a static NUL-terminated string.
const char *hs_version(void);

// `p^p / (α + k)^p`.
//
// # Safety
// `out` must be valid for a write.
enum HsStatus hs_hardy_constant(double p, double alpha, size_t k, double *out);

// Closed-form Hardy quotient of the radial ε-family.
//
// # Safety
// `out` must be valid for a write.
enum HsStatus hs_eps_quotient(double eps, double p, double alpha, size_t n, double *out);

// Validated Hardy parameters `(N, k, p, α)`.
//
// # Safety
// `out` must be valid for a write.
enum HsStatus hs_params_hardy(size_t n, size_t k, double p, double alpha, struct HsParams **out);

// Parameters under condition (H); `q` is derived.
//
// # Safety
// `out` must be valid for a write.
enum HsStatus hs_params_hardy_sobolev(size_t n,
                                      size_t k,
                                      double p,
                                      double beta,
                                      struct HsParams **out);

// The exponent `q` of a parameter handle, or NaN for null.
//
// # Safety
// `params` must be null or a live handle.
double hs_params_q(const struct HsParams *params);

// # Safety
// `params` must be null or a handle not yet freed.
void hs_params_free(struct HsParams *params);

// Cylindrical grid; pass `t = NULL` for a purely radial grid.
//
// # Safety
// `s` must be valid; `t` null or valid; `out` valid for a write.
enum HsStatus hs_grid_new(const struct HsRadialSpec *s,
                          const struct HsRadialSpec *t,
                          struct HsGrid **out);

// Number of cells, or 0 for null.
//
// # Safety
// `grid` must be null or a live handle.
size_t hs_grid_len(const struct HsGrid *grid);

// # Safety
// `grid` must be null or a handle not yet freed.
void hs_grid_free(struct HsGrid *grid);

// Grid function from `len` row-major values (`s` outer, `t` inner).
//
// # Safety
// `grid` must be live, `values` valid for `len` reads and `out` valid for a write.
enum HsStatus hs_function_new(const struct HsGrid *grid,
                              const double *values,
                              size_t len,
                              struct HsFunction **out);

// Copies up to `len` values into `buf`; returns the function's length (0 for null).
//
// # Safety
// `f` must be null or live; `buf` null or valid for `len` writes.
size_t hs_function_values(const struct HsFunction *f, double *buf, size_t len);

// # Safety
// `f` must be null or a handle not yet freed.
void hs_function_free(struct HsFunction *f);

// Hardy quotient `∫|∇u|^p|y|^{α+p} / ∫|u|^p|y|^α`.
//
// # Safety
// Handles must be live and `out` valid for a write.
enum HsStatus hs_hardy_quotient(const struct HsFunction *f,
                                const struct HsParams *params,
                                double *out);

// Hardy–Sobolev quotient `∫|∇u|^p / (∫|u|^q|y|^{-β})^{p/q}`.
//
// # Safety
// Handles must be live and `out` valid for a write.
enum HsStatus hs_sobolev_quotient(const struct HsFunction *f,
                                  const struct HsParams *params,
                                  double *out);

// Schwarz symmetrization in `y`, then in `z`.
//
// # Safety
// `f` must be live and `out` valid for a write.
enum HsStatus hs_double_star(const struct HsFunction *f, struct HsFunction **out);

// Minimizes the Hardy–Sobolev quotient from the seeded perturbed bump
// (`amplitude = 0` gives the plain bump).
//
// # Safety
// Handles must be live and `out` valid for a write.
enum HsStatus hs_minimize(const struct HsParams *params,
                          const struct HsGrid *grid,
                          double tol,
                          size_t max_iter,
                          uint64_t seed,
                          double amplitude,
                          struct HsTrace **out);

// Final quotient of a trace, or NaN for null.
//
// # Safety
// `trace` must be null or live.
double hs_trace_quotient(const struct HsTrace *trace);

// Accepted iterations, excluding the initial state.
//
// # Safety
// `trace` must be null or live.
size_t hs_trace_iterations(const struct HsTrace *trace);

// # Safety
// `trace` must be null or live.
bool hs_trace_converged(const struct HsTrace *trace);

// Copies the final iterate into a new function handle.
//
// # Safety
// `trace` must be live and `out` valid for a write.
enum HsStatus hs_trace_final(const struct HsTrace *trace, struct HsFunction **out);

// # Safety
// `trace` must be null or a handle not yet freed.
void hs_trace_free(struct HsTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARDY_SOBOLEV_H */
