#ifndef ALS_FFI_H
#define ALS_FFI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AlsStatus {
  ALS_STATUS_OK = 0,
  ALS_STATUS_NULL_POINTER = 1,
  ALS_STATUS_INVALID_ARGUMENT = 2,
  ALS_STATUS_DIMENSION_MISMATCH = 3,
  ALS_STATUS_RANK_DEFICIENT = 4,
  ALS_STATUS_CONFIG = 5,
  ALS_STATUS_BUDGET_EXCEEDED = 6,
  ALS_STATUS_FORMAT = 7,
  ALS_STATUS_IO = 8,
  ALS_STATUS_FIELD_MISMATCH = 9,
  ALS_STATUS_PANIC = 10,
} AlsStatus;

typedef enum AlsField {
  ALS_FIELD_REAL = 0,
  ALS_FIELD_COMPLEX = 1,
} AlsField;

typedef enum AlsTransform {
  ALS_TRANSFORM_DFT = 0,
  ALS_TRANSFORM_REAL_ORTHOGONAL = 1,
} AlsTransform;

typedef enum AlsMode {
  ALS_MODE_STABILIZED = 0,
  ALS_MODE_RAW = 1,
} AlsMode;

typedef enum AlsStart {
  ALS_START_GAUSSIAN = 0,
  ALS_START_RANGE = 1,
} AlsStart;

typedef enum AlsNorm {
  ALS_NORM_FROBENIUS = 0,
  /**
   * 100 power iterations with the default start seed.
   */
  ALS_NORM_SPECTRAL = 1,
  /**
   * Dense SVD of the residual.
   */
  ALS_NORM_SPECTRAL_EXACT = 2,
} AlsNorm;

/**
 * Output of [`als_run`].
 */
typedef struct AlsFactorization AlsFactorization;

/**
 * Dense real or complex matrix.
 */
typedef struct AlsMatrix AlsMatrix;

/**
 * Thin SVD `U diag(sigma) V*`.
 */
typedef struct AlsSvd AlsSvd;

/**
 * Options for [`als_run`]. Start from [`als_options_default`].
 */
typedef struct AlsOptions {
  size_t rank_k;
  size_t iterations_j;
  uint64_t seed;
  enum AlsMode mode;
  enum AlsStart start;
  bool track_errors;
  bool pinv_fallback;
  /**
   * Allow raw mode beyond the default iteration cap.
   */
  bool raw_risk_acknowledged;
} AlsOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *als_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *als_last_error_message(void);

/**
 * Copy `rows * cols` doubles (row-major) into a new real matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles; `out` must be writable.
 */
enum AlsStatus als_matrix_new_real(size_t rows,
                                   size_t cols,
                                   const double *data,
                                   struct AlsMatrix **out);

/**
 * Copy `2 * rows * cols` interleaved doubles into a new complex matrix.
 *
 * # Safety
 * `data` must point to `2 * rows * cols` readable doubles; `out` must be
 * writable.
 */
enum AlsStatus als_matrix_new_complex(size_t rows,
                                      size_t cols,
                                      const double *data,
                                      struct AlsMatrix **out);

/**
 * Seeded standard normal matrix (complex entries have unit total variance).
 *
 * # Safety
 * `out` must be writable.
 */
enum AlsStatus als_matrix_gaussian(size_t rows,
                                   size_t cols,
                                   enum AlsField field,
                                   uint64_t seed,
                                   struct AlsMatrix **out);

/**
 * Synthetic test matrix with prescribed singular values; see the README.
 * DFT matrices are complex, real-orthogonal ones real. `seed` only affects
 * the real-orthogonal transform.
 *
 * # Safety
 * `out` must be writable.
 */
enum AlsStatus als_test_matrix(size_t m,
                               size_t n,
                               size_t k,
                               double delta,
                               enum AlsTransform transform,
                               uint64_t seed,
                               struct AlsMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void als_matrix_free(struct AlsMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `rows`, `cols` writable.
 */
enum AlsStatus als_matrix_shape(const struct AlsMatrix *m, size_t *rows, size_t *cols);

/**
 * # Safety
 * `m` must be a live handle; `field` writable.
 */
enum AlsStatus als_matrix_field(const struct AlsMatrix *m, enum AlsField *field);

/**
 * Copy the entries out: `rows * cols` doubles for real matrices,
 * `2 * rows * cols` interleaved doubles for complex ones. `len` is the
 * capacity of `buf` in doubles and must be at least that.
 *
 * # Safety
 * `m` must be a live handle; `buf` must hold `len` writable doubles.
 */
enum AlsStatus als_matrix_copy_data(const struct AlsMatrix *m, double *buf, size_t len);

/**
 * Read a matrix in the library's binary format.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` writable.
 */
enum AlsStatus als_matrix_read(const char *path, struct AlsMatrix **out);

/**
 * Write a matrix in the library's binary format.
 *
 * # Safety
 * `m` must be a live handle; `path` a NUL-terminated string.
 */
enum AlsStatus als_matrix_write(const struct AlsMatrix *m, const char *path);

/**
 * Stabilized mode, Gaussian start, no tracking, no fallback.
 */
struct AlsOptions als_options_default(size_t rank_k, size_t iterations_j, uint64_t seed);

/**
 * Rank-`k` approximation `A ~ S T` after `iterations_j` rounds.
 *
 * # Safety
 * `a` must be a live handle, `options` readable, `out` writable.
 */
enum AlsStatus als_run(const struct AlsMatrix *a,
                       const struct AlsOptions *options,
                       struct AlsFactorization **out);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
void als_factorization_free(struct AlsFactorization *f);

/**
 * New handle holding a copy of `S` (`m x k`).
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum AlsStatus als_factorization_s(const struct AlsFactorization *f, struct AlsMatrix **out);

/**
 * New handle holding a copy of `T` (`k x n`).
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum AlsStatus als_factorization_t(const struct AlsFactorization *f, struct AlsMatrix **out);

/**
 * Length of the Frobenius error trace (0 when tracking was off).
 *
 * # Safety
 * `f` must be a live handle; `len` writable.
 */
enum AlsStatus als_factorization_trace_len(const struct AlsFactorization *f, size_t *len);

/**
 * Copy the error trace into `buf` (capacity `len`).
 *
 * # Safety
 * `f` must be a live handle; `buf` must hold `len` writable doubles.
 */
enum AlsStatus als_factorization_trace(const struct AlsFactorization *f, double *buf, size_t len);

/**
 * `||A - S T||` in the requested norm.
 *
 * # Safety
 * `a`, `f` must be live handles; `value` writable.
 */
enum AlsStatus als_approximation_error(const struct AlsMatrix *a,
                                       const struct AlsFactorization *f,
                                       enum AlsNorm norm,
                                       double *value);

/**
 * SVD form of `S T` without forming the product.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum AlsStatus als_factorization_to_svd(const struct AlsFactorization *f, struct AlsSvd **out);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
void als_svd_free(struct AlsSvd *s);

/**
 * Number of singular triplets.
 *
 * # Safety
 * `s` must be a live handle; `rank` writable.
 */
enum AlsStatus als_svd_rank(const struct AlsSvd *s, size_t *rank);

/**
 * Copy the singular values (descending) into `buf` (capacity `len`).
 *
 * # Safety
 * `s` must be a live handle; `buf` must hold `len` writable doubles.
 */
enum AlsStatus als_svd_sigma(const struct AlsSvd *s, double *buf, size_t len);

/**
 * New handle holding a copy of `U` (`m x r`).
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum AlsStatus als_svd_u(const struct AlsSvd *s, struct AlsMatrix **out);

/**
 * New handle holding a copy of `V` (`n x r`).
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum AlsStatus als_svd_v(const struct AlsSvd *s, struct AlsMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALS_FFI_H */
