#ifndef DUALCERT_H
#define DUALCERT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Polynomial basis of a built-in interval cone.
 */
typedef enum DcBasis {
  DC_BASIS_MONOMIAL = 0,
  DC_BASIS_CHEBYSHEV = 1,
} DcBasis;

/**
 * Status codes returned by every function.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  /**
   * The certificate does not certify the bound.
   */
  DC_STATUS_REJECTED = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solver stopped early; the result holds the last certified pair.
   */
  DC_STATUS_PARTIAL = 3,
  DC_STATUS_NUMERIC_FAILURE = 4,
  DC_STATUS_NULL_POINTER = 5,
  DC_STATUS_PANIC = 6,
} DcStatus;

/**
 * Opaque cone handle.
 */
typedef struct DcCone DcCone;

/**
 * Opaque solve result.
 */
typedef struct DcSolveResult DcSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *dc_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void dc_string_free(char *s);

/**
 * Builds the cone of polynomials nonnegative on [−1, 1] of degree 2d (`odd` = 0) or
 * 2d + 1 (`odd` ≠ 0).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DcStatus dc_cone_interval(uint32_t d, enum DcBasis basis, int32_t odd, struct DcCone **out);

/**
 * Parses a cone from the JSON cone-file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DcStatus dc_cone_from_json(const char *json, struct DcCone **out);

/**
 * # Safety
 * `cone` must come from this library and not be freed twice.
 */
void dc_cone_free(struct DcCone *cone);

/**
 * Coefficient count U of the cone, or 0 for a null handle.
 *
 * # Safety
 * `cone` must be null or a live handle.
 */
size_t dc_cone_dim(const struct DcCone *cone);

/**
 * Checks exactly whether `x` certifies t − c·1. Returns `Ok` or `Rejected`.
 *
 * # Safety
 * `t` and `x` must point to `n` NUL-terminated strings each; `c` must be one.
 */
enum DcStatus dc_verify(const struct DcCone *cone,
                        const char *const *t,
                        const char *c,
                        const char *const *x,
                        size_t n);

/**
 * Runs the bound iteration with radius 1/4 and automatic constants. On `Ok` or
 * `Partial`, `*out` receives a result handle.
 *
 * # Safety
 * `t` must point to `n` NUL-terminated strings and `out` must be valid.
 */
enum DcStatus dc_solve(const struct DcCone *cone,
                       const char *const *t,
                       size_t n,
                       double epsilon,
                       size_t max_iters,
                       struct DcSolveResult **out);

/**
 * # Safety
 * `res` must come from this library and not be freed twice.
 */
void dc_result_free(struct DcSolveResult *res);

/**
 * The certified bound as a newly allocated `"p/q"` string (free with `dc_string_free`).
 *
 * # Safety
 * `res` must be null or a live handle.
 */
char *dc_result_bound(const struct DcSolveResult *res);

/**
 * The certified bound rounded to a double, NaN for a null handle.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
double dc_result_bound_f64(const struct DcSolveResult *res);

/**
 * Entry `i` of the certificate as a newly allocated string, or null when out of range.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
char *dc_result_certificate(const struct DcSolveResult *res, size_t i);

/**
 * # Safety
 * `res` must be null or a live handle.
 */
size_t dc_result_iterations(const struct DcSolveResult *res);

/**
 * 1 when the stopping rule guarantees the bound is within ε of the optimum.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
int32_t dc_result_gap_guarantee(const struct DcSolveResult *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUALCERT_H */
