#ifndef BECKER_QC_H
#define BECKER_QC_H

/* Generated by cbindgen from the becker-qc-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BqcStatus {
  BQC_STATUS_OK = 0,
  BQC_STATUS_DOMAIN = 1,
  BQC_STATUS_SINGULARITY = 2,
  BQC_STATUS_CONVERGENCE = 3,
  BQC_STATUS_RANGE = 4,
  BQC_STATUS_STEP_FAILURE = 5,
  BQC_STATUS_SERIES = 6,
  BQC_STATUS_ZERO_DIVISOR = 7,
  BQC_STATUS_BRANCH = 8,
  BQC_STATUS_TRUNCATION = 9,
  BQC_STATUS_EVALUATION = 10,
  BQC_STATUS_PARSE = 11,
  BQC_STATUS_NULL_POINTER = 12,
  BQC_STATUS_BUFFER_TOO_SMALL = 13,
  BQC_STATUS_PANIC = 14,
} BqcStatus;

/**
 * Opaque Herglotz driver.
 */
typedef struct BqcDriver BqcDriver;

typedef struct BqcComplex {
  double re;
  double im;
} BqcComplex;

/**
 * Upper bounds for `|a_3|` at one `k`.
 */
typedef struct BqcBoundRow {
  double k;
  double becker_sharp;
  double fekete_szego;
  double krushkal;
} BqcBoundRow;

/**
 * Outcome of a grid check: `ok` is 1 when the condition holds.
 */
typedef struct BqcCheckReport {
  int32_t ok;
  double margin;
  struct BqcComplex worst_point;
} BqcCheckReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `len` bytes. Returns the full message length without the
 * terminator; passing a null buffer only queries the length.
 *
 * # Safety
 * `buf` is null or valid for `len` bytes.
 */
size_t bqc_last_error_message(char *buf, size_t len);

/**
 * `p = (1 − c z^n)/(1 + c z^n)` with `c = k e^{−iθ}`.
 *
 * # Safety
 * `out` is valid for writes.
 */
enum BqcStatus bqc_driver_constant_power(double k,
                                         double theta,
                                         uint32_t n,
                                         struct BqcDriver **out);

/**
 * The extremal driver for `Re a_3`.
 *
 * # Safety
 * `out` is valid for writes.
 */
enum BqcStatus bqc_driver_extremal_a3(double k, struct BqcDriver **out);

/**
 * Blaschke driver with rotation `alpha` and `n_zeros` zeros.
 *
 * # Safety
 * `zeros` is valid for `n_zeros` reads and `out` for writes.
 */
enum BqcStatus bqc_driver_blaschke(double k,
                                   double alpha,
                                   const struct BqcComplex *zeros,
                                   size_t n_zeros,
                                   struct BqcDriver **out);

/**
 * A renormalized copy of `d` with `p(0, t) = 1`, defined up to the image
 * of `t_max`.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_driver_normalize(const struct BqcDriver *d,
                                    double t_max,
                                    struct BqcDriver **out);

/**
 * Releases a driver; null is ignored.
 *
 * # Safety
 * `d` is null or came from a `bqc_driver_*` constructor and is not used
 * afterwards.
 */
void bqc_driver_free(struct BqcDriver *d);

/**
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_driver_k(const struct BqcDriver *d, double *out);

/**
 * `p(z, t)`.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_driver_eval(const struct BqcDriver *d,
                               struct BqcComplex z,
                               double t,
                               struct BqcComplex *out);

/**
 * The generated univalent map at `|z| < 1`.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_map_limit(const struct BqcDriver *d,
                             struct BqcComplex z,
                             double tol,
                             struct BqcComplex *out);

/**
 * The Becker extension at `|z| >= 1`.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_becker_extend(const struct BqcDriver *d,
                                 struct BqcComplex z,
                                 double tol,
                                 struct BqcComplex *out);

/**
 * Writes `a_2, ..., a_order` to `out`, which must hold `order − 1` values.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for `out_len` writes.
 */
enum BqcStatus bqc_coefficient_flow(const struct BqcDriver *d,
                                    size_t order,
                                    double tol,
                                    struct BqcComplex *out,
                                    size_t out_len);

/**
 * Beltrami coefficient of the Becker extension of `d` at `|z| > 1`.
 *
 * # Safety
 * `d` is a live driver and `out` is valid for writes.
 */
enum BqcStatus bqc_beltrami(const struct BqcDriver *d, struct BqcComplex z, struct BqcComplex *out);

/**
 * Closed-form Beltrami coefficient of the extremal extension.
 *
 * # Safety
 * `out` is valid for writes.
 */
enum BqcStatus bqc_extremal_beltrami(double k, struct BqcComplex z, struct BqcComplex *out);

/**
 * # Safety
 * `out` is valid for writes.
 */
enum BqcStatus bqc_bounds(double k, struct BqcBoundRow *out);

/**
 * Positive root of `4k² + (3 + 8√3/9)k − 1`.
 */
double bqc_threshold_k_star(void);

/**
 * Ahlfors–Weill type criterion for the map given as an expression in `z`.
 *
 * # Safety
 * `f` is a NUL-terminated string and `out` is valid for writes.
 */
enum BqcStatus bqc_check_aw_becker(const char *f, double k, struct BqcCheckReport *out);

/**
 * `(1 − |z|²)|f''/f'| <= k` for the map given as an expression in `z`.
 *
 * # Safety
 * `f` is a NUL-terminated string and `out` is valid for writes.
 */
enum BqcStatus bqc_check_pre_schwarzian(const char *f, double k, struct BqcCheckReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BECKER_QC_H */
