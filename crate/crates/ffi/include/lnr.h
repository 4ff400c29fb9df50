#ifndef LNR_H
#define LNR_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum LnrStatus {
  LNR_STATUS_OK = 0,
  LNR_STATUS_NULL_POINTER = 1,
  /**
   * Out-of-range or non-finite argument, or a zero vector.
   */
  LNR_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Coincident or antipodal setting pair.
   */
  LNR_STATUS_DEGENERATE_SETTINGS = 3,
  LNR_STATUS_LINEARLY_DEPENDENT = 4,
  /**
   * Visibility too low for any violation.
   */
  LNR_STATUS_NO_VIOLATION_POSSIBLE = 5,
  LNR_STATUS_UNDEFINED_THRESHOLD = 6,
  /**
   * A panic was caught at the boundary.
   */
  LNR_STATUS_INTERNAL = 99,
} LnrStatus;

/**
 * Opaque setting bundle.
 */
typedef struct LnrSettings LnrSettings;

typedef struct LnrBound {
  /**
   * Minimum-projection value of the derived directions.
   */
  double l;
  /**
   * Smallest pair opening (category I) or largest adjacent angle
   * (category II), radians.
   */
  double extremal_angle;
  double bound;
  bool degenerate;
} LnrBound;

typedef struct LnrViolation {
  double lhs;
  double bound;
  /**
   * `lhs − bound`; positive means violated.
   */
  double s;
  /**
   * `bound / lhs`, NaN when the left-hand side vanishes.
   */
  double ratio;
  double l;
  double extremal_angle;
  bool degenerate;
} LnrViolation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lnr_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t lnr_last_error_message(char *buf, size_t len);

/**
 * Category I bundle from Alice's `a`, Bob's `b` and `b2` directions.
 * Inputs are normalized.
 *
 * # Safety
 * `a`, `b`, `b2` must point to nine doubles each; `out` must be writable.
 */
enum LnrStatus lnr_settings_category_i_new(const double *a,
                                           const double *b,
                                           const double *b2,
                                           struct LnrSettings **out);

/**
 * Category II bundle from Alice's `a` and Bob's cyclic `b` directions.
 *
 * # Safety
 * `a`, `b` must point to nine doubles each; `out` must be writable.
 */
enum LnrStatus lnr_settings_category_ii_new(const double *a,
                                            const double *b,
                                            struct LnrSettings **out);

/**
 * Symmetric-cone category II bundle with adjacent angle `delta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LnrStatus lnr_settings_symmetric_ii_new(double delta, struct LnrSettings **out);

/**
 * Orthogonal category I bundle with common pair opening `beta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LnrStatus lnr_settings_optimal_i_new(double beta, struct LnrSettings **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void lnr_settings_free(struct LnrSettings *s);

/**
 * 1 for category I, 2 for category II, 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
int lnr_settings_category(const struct LnrSettings *s);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum LnrStatus lnr_bound(const struct LnrSettings *s, struct LnrBound *out);

/**
 * Singlet prediction at `visibility` against the bound.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum LnrStatus lnr_violation(const struct LnrSettings *s,
                             double visibility,
                             struct LnrViolation *out);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum LnrStatus lnr_threshold_visibility(const struct LnrSettings *s, double *out);

/**
 * Best category I bundle at `visibility`. Writes the pair opening and the
 * evaluation; `settings_out` may be null.
 *
 * # Safety
 * `beta_out` and `report_out` must be writable; `settings_out` null or writable.
 */
enum LnrStatus lnr_optimize_category_i(double visibility,
                                       double *beta_out,
                                       struct LnrViolation *report_out,
                                       struct LnrSettings **settings_out);

/**
 * Closed-form minimum of `Σ|e_i·v|` over unit `v`; 0 for dependent triples.
 *
 * # Safety
 * `e` must point to nine doubles; `out` must be writable.
 */
enum LnrStatus lnr_min_projection(const double *e, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LNR_H */
