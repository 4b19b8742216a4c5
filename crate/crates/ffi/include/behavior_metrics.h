#ifndef BEHAVIOR_METRICS_H
#define BEHAVIOR_METRICS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BmStatus {
  BM_STATUS_OK = 0,
  BM_STATUS_INVALID_INPUT = 1,
  BM_STATUS_DIMENSION_MISMATCH = 2,
  BM_STATUS_INSUFFICIENT_DATA = 3,
  BM_STATUS_FALSIFIED = 4,
  BM_STATUS_CONFIG = 5,
  BM_STATUS_PARSE = 6,
  BM_STATUS_IO = 7,
  BM_STATUS_NULL_POINTER = 8,
  BM_STATUS_BUFFER_TOO_SMALL = 9,
  BM_STATUS_PANIC = 10,
} BmStatus;

typedef enum BmMetric {
  BM_METRIC_CHORDAL = 0,
  BM_METRIC_GRASSMANN = 1,
  BM_METRIC_PROCRUSTES = 2,
} BmMetric;

// Opaque finite-horizon behavior handle.
typedef struct BmBehavior BmBehavior;

// Opaque subspace handle.
typedef struct BmSubspace BmSubspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *bm_last_error(void);

// Library version as a static NUL-terminated string.
const char *bm_version(void);

// Orthonormal basis of the column space of a column-major `rows × cols` matrix.
//
// # Safety
// `data` must hold `rows * cols` doubles; `out` must be writable.
enum BmStatus bm_subspace_from_columns(const double *data,
                                       size_t rows,
                                       size_t cols,
                                       double rel_tol,
                                       struct BmSubspace **out);

// # Safety
// `s` must be NULL or a handle obtained from this library and not yet freed.
void bm_subspace_free(struct BmSubspace *s);

// Dimension of the subspace; 0 for NULL.
//
// # Safety
// `s` must be NULL or a live handle.
size_t bm_subspace_dim(const struct BmSubspace *s);

// Ambient dimension; 0 for NULL.
//
// # Safety
// `s` must be NULL or a live handle.
size_t bm_subspace_ambient_dim(const struct BmSubspace *s);

// Copies the column-major `ambient × dim` basis into `out`.
//
// # Safety
// `s` must be a live handle and `out` valid for `capacity` writes.
enum BmStatus bm_subspace_basis(const struct BmSubspace *s, double *out, size_t capacity);

// Zero-pads the subspace into `R^{n_target}`.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum BmStatus bm_subspace_embed(const struct BmSubspace *s,
                                size_t n_target,
                                struct BmSubspace **out);

// Writes the `min(dim a, dim b)` principal angles (ascending, radians) into
// `out` and their count into `out_len`.
//
// # Safety
// Handles must be live; `out` valid for `capacity` writes; `out_len` writable.
enum BmStatus bm_principal_angles(const struct BmSubspace *a,
                                  const struct BmSubspace *b,
                                  double *out,
                                  size_t capacity,
                                  size_t *out_len);

// # Safety
// Handles must be live; `out` writable.
enum BmStatus bm_premetric(enum BmMetric metric,
                           const struct BmSubspace *a,
                           const struct BmSubspace *b,
                           double *out);

// # Safety
// Handles must be live; `out` writable.
enum BmStatus bm_distance(enum BmMetric metric,
                          const struct BmSubspace *a,
                          const struct BmSubspace *b,
                          double *out);

// # Safety
// Handles must be live; `out` writable.
enum BmStatus bm_l_gap(const struct BmSubspace *a, const struct BmSubspace *b, double *out);

// Behavior spanned by the depth-`horizon` Hankel matrix of one trajectory
// given as `len` samples of `q` values each.
//
// # Safety
// `samples` must hold `len * q` doubles; `out` must be writable.
enum BmStatus bm_behavior_from_data(const double *samples,
                                    size_t len,
                                    size_t q,
                                    size_t horizon,
                                    double rel_tol,
                                    struct BmBehavior **out);

// Behavior `ker R(σ)` restricted to `horizon` steps. `coeffs` holds
// `degree + 1` row-major `p × q` blocks, `R_0` first.
//
// # Safety
// `coeffs` must hold `(degree + 1) * p * q` doubles; `out` must be writable.
enum BmStatus bm_behavior_from_kernel(const double *coeffs,
                                      size_t p,
                                      size_t q,
                                      size_t degree,
                                      size_t horizon,
                                      struct BmBehavior **out);

// Number of inputs, lag and order of a kernel representation (same layout
// as [`bm_behavior_from_kernel`]).
//
// # Safety
// `coeffs` as for [`bm_behavior_from_kernel`]; output pointers writable.
enum BmStatus bm_kernel_invariants(const double *coeffs,
                                   size_t p,
                                   size_t q,
                                   size_t degree,
                                   size_t *num_inputs,
                                   size_t *lag,
                                   size_t *order);

// # Safety
// `b` must be NULL or a handle obtained from this library and not yet freed.
void bm_behavior_free(struct BmBehavior *b);

// Dimension of the behavior; 0 for NULL.
//
// # Safety
// `b` must be NULL or a live handle.
size_t bm_behavior_dim(const struct BmBehavior *b);

// # Safety
// `b` must be a live handle; `out` writable.
enum BmStatus bm_behavior_complexity(const struct BmBehavior *b, double *out);

// New subspace handle holding a copy of the behavior's subspace.
//
// # Safety
// `b` must be a live handle; `out` writable.
enum BmStatus bm_behavior_subspace(const struct BmBehavior *b, struct BmSubspace **out);

// Squared premetric between the data's MPUM and `b` at `b`'s horizon.
//
// # Safety
// `samples` must hold `len * q` doubles; `b` live; `out` writable.
enum BmStatus bm_misfit(const double *samples,
                        size_t len,
                        size_t q,
                        const struct BmBehavior *b,
                        enum BmMetric metric,
                        double *out);

// Utility of `b` for the data, at `b`'s horizon.
//
// # Safety
// `samples` must hold `len * q` doubles; `b` live; `out` writable.
enum BmStatus bm_utility(const double *samples,
                         size_t len,
                         size_t q,
                         const struct BmBehavior *b,
                         enum BmMetric metric,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEHAVIOR_METRICS_H */
