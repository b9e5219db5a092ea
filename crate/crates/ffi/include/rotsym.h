#ifndef ROTSYM_H
#define ROTSYM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RotsymStatus {
  ROTSYM_STATUS_OK = 0,
  ROTSYM_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument, malformed input, or an unsupported combination.
   */
  ROTSYM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Non-convergence or a degenerate sample.
   */
  ROTSYM_STATUS_NUMERICAL_FAILURE = 3,
  ROTSYM_STATUS_IO = 4,
  ROTSYM_STATUS_PANIC = 5,
} RotsymStatus;

typedef enum RotsymTest {
  ROTSYM_TEST_WATSON = 0,
  ROTSYM_TEST_WALD = 1,
  ROTSYM_TEST_CONTIGUITY_WALD = 2,
  ROTSYM_TEST_STRICT_CONTIGUITY_WALD = 3,
  ROTSYM_TEST_ORACLE = 4,
} RotsymTest;

typedef enum RotsymRegime {
  ROTSYM_REGIME_AWAY = 0,
  ROTSYM_REGIME_BEYOND = 1,
  ROTSYM_REGIME_CONTIGUITY = 2,
  ROTSYM_REGIME_STRICT = 3,
} RotsymRegime;

/**
 * Opaque sample of unit vectors.
 */
typedef struct RotsymSample RotsymSample;

/**
 * Opaque confidence zone.
 */
typedef struct RotsymZone RotsymZone;

/**
 * Outcome of a test at level `alpha`.
 */
typedef struct RotsymTestResult {
  double statistic;
  double critical_value;
  /**
   * NaN when the null law has no closed-form tail.
   */
  double p_value;
  bool reject;
} RotsymTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *rotsym_last_error(void);

/**
 * Builds a sample from `n` row-major unit vectors of dimension `p`.
 *
 * # Safety
 * `data` must point to `n * p` doubles and `out` to writable storage.
 */
enum RotsymStatus rotsym_sample_new(const double *data,
                                    uintptr_t n,
                                    uintptr_t p,
                                    struct RotsymSample **out_sample);

/**
 * Loads a data file; `format` is "cartesian" or "angles_deg".
 *
 * # Safety
 * `path` and `format` must be NUL-terminated strings.
 */
enum RotsymStatus rotsym_sample_load(const char *path,
                                     const char *format,
                                     struct RotsymSample **out_sample);

/**
 * # Safety
 * `sample` must be null or a handle from `rotsym_sample_*` not yet freed.
 */
void rotsym_sample_free(struct RotsymSample *sample);

/**
 * # Safety
 * `sample` must be a live handle.
 */
enum RotsymStatus rotsym_sample_shape(const struct RotsymSample *sample,
                                      uintptr_t *out_n,
                                      uintptr_t *out_p);

/**
 * Statistic of `test` for H0: θ = `theta0` (`p` coordinates). `xi` is used
 * by the oracle and contiguity tests only.
 *
 * # Safety
 * `sample` must be a live handle and `theta0` must point to `p` doubles.
 */
enum RotsymStatus rotsym_statistic(const struct RotsymSample *sample,
                                   enum RotsymTest test,
                                   const double *theta0,
                                   uintptr_t p,
                                   double xi,
                                   double *out_value);

/**
 * Runs `test` at level `alpha` against its asymptotic null law.
 * Mixture-law critical values use `mc_draws` Monte-Carlo draws from `seed`.
 *
 * # Safety
 * As for `rotsym_statistic`; `out_result` must be writable.
 */
enum RotsymStatus rotsym_test(const struct RotsymSample *sample,
                              enum RotsymTest test,
                              const double *theta0,
                              uintptr_t p,
                              double xi,
                              double alpha,
                              uintptr_t mc_draws,
                              uint64_t seed,
                              struct RotsymTestResult *out_result);

/**
 * Concentration giving `E[X'θ] = target_e1`; `radial` is "fvml", "linear"
 * or "logistic".
 *
 * # Safety
 * `radial` must be a NUL-terminated string.
 */
enum RotsymStatus rotsym_calibrate_kappa(uintptr_t p,
                                         const char *radial,
                                         double target_e1,
                                         double *out_kappa);

/**
 * Asymptotic power at `‖τ‖ = tau_norm`. `e2_tilde` is needed for the away
 * regime only; pass NaN otherwise.
 *
 * # Safety
 * `out_power` must be writable.
 */
enum RotsymStatus rotsym_asymptotic_power(enum RotsymTest test,
                                          enum RotsymRegime regime,
                                          double xi,
                                          double e2_tilde,
                                          double tau_norm,
                                          uintptr_t p,
                                          double alpha,
                                          double *out_power);

/**
 * Inverts the Watson or Wald test on a grid of `resolution` points.
 *
 * # Safety
 * `sample` must be a live handle and `out_zone` writable.
 */
enum RotsymStatus rotsym_zone_new(const struct RotsymSample *sample,
                                  enum RotsymTest test,
                                  double level,
                                  uintptr_t resolution,
                                  struct RotsymZone **out_zone);

/**
 * # Safety
 * `zone` must be null or a handle from `rotsym_zone_new` not yet freed.
 */
void rotsym_zone_free(struct RotsymZone *zone);

/**
 * Grid size, member count and the member fraction of the sphere.
 *
 * # Safety
 * `zone` must be a live handle.
 */
enum RotsymStatus rotsym_zone_summary(const struct RotsymZone *zone,
                                      uintptr_t *out_grid_points,
                                      uintptr_t *out_members,
                                      double *out_area_fraction);

/**
 * Whether `theta` (`p` coordinates) satisfies the zone's membership rule.
 *
 * # Safety
 * `zone` must be a live handle and `theta` must point to `p` doubles.
 */
enum RotsymStatus rotsym_zone_contains(const struct RotsymZone *zone,
                                       const double *theta,
                                       uintptr_t p,
                                       bool *out_member);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTSYM_H */
