#ifndef SLIDEFREQ_H
#define SLIDEFREQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_CONFIG = 2,
  SF_STATUS_LENGTH_MISMATCH = 3,
  SF_STATUS_NOT_WARMED_UP = 4,
  SF_STATUS_DEGENERATE_DENOMINATOR = 5,
  SF_STATUS_PARAMS_MISMATCH = 6,
  SF_STATUS_INVALID_ARGUMENT = 7,
  SF_STATUS_PANIC = 8,
} SfStatus;

typedef enum SfEstimator {
  SF_ESTIMATOR_PROPOSED = 0,
  SF_ESTIMATOR_CANDAN = 1,
  SF_ESTIMATOR_JACOBSEN = 2,
} SfEstimator;

/**
 * Opaque streaming sliding-DFT state.
 */
typedef struct SfSdft SfSdft;

/**
 * Result of [`sf_sdft_estimate`]. `freq_hz` is NaN when no sample rate was given.
 */
typedef struct SfEstimate {
  enum SfEstimator estimator;
  size_t peak_index;
  double delta;
  double omega;
  double freq_hz;
  bool clamped;
} SfEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a sliding DFT with `n_bins` bins and damping `damping` in (0, 1].
 * `resync_interval` is the number of samples between exact recomputations;
 * 0 disables resynchronisation.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum SfStatus sf_sdft_new(size_t n_bins,
                          double damping,
                          size_t resync_interval,
                          struct SfSdft **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a pointer from [`sf_sdft_new`] not yet freed.
 */
void sf_sdft_free(struct SfSdft *handle);

/**
 * # Safety
 * `handle` must be a live handle not used concurrently.
 */
enum SfStatus sf_sdft_push(struct SfSdft *handle, double re, double im);

/**
 * Push `n_samples` complex samples stored as interleaved `re, im` doubles.
 *
 * # Safety
 * `handle` must be a live handle not used concurrently; `samples` must point
 * to `2 * n_samples` readable doubles (may be null when `n_samples` is 0).
 */
enum SfStatus sf_sdft_push_interleaved(struct SfSdft *handle,
                                       const double *samples,
                                       size_t n_samples);

/**
 * Recompute every bin exactly from the current window.
 *
 * # Safety
 * `handle` must be a live handle not used concurrently.
 */
enum SfStatus sf_sdft_resync(struct SfSdft *handle);

/**
 * Number of samples pushed so far; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
uint64_t sf_sdft_samples_seen(const struct SfSdft *handle);

/**
 * Whether a full window has been observed; false for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
bool sf_sdft_is_valid(const struct SfSdft *handle);

/**
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t sf_sdft_n_bins(const struct SfSdft *handle);

/**
 * Copy the current bins as interleaved `re, im` doubles into `out`, which
 * holds room for `capacity` complex values (at least `n_bins`).
 *
 * # Safety
 * `handle` must be a live handle; `out` must point to `2 * capacity` writable doubles.
 */
enum SfStatus sf_sdft_bins(const struct SfSdft *handle, double *out, size_t capacity);

/**
 * Estimate the tone frequency from the current spectrum. Pass
 * `sample_rate_hz <= 0` to skip the conversion to Hz.
 *
 * # Safety
 * `handle` must be a live handle; `out` must be valid for one write.
 */
enum SfStatus sf_sdft_estimate(const struct SfSdft *handle,
                               enum SfEstimator estimator,
                               double sample_rate_hz,
                               struct SfEstimate *out);

/**
 * Damped geometric kernel value `f(alpha)` for an `n_bins`-point window.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for one write each.
 */
enum SfStatus sf_kernel_f(double alpha,
                          size_t n_bins,
                          double damping,
                          double *out_re,
                          double *out_im);

/**
 * Static, NUL-terminated description of a status code.
 */
const char *sf_status_message(enum SfStatus status);

/**
 * Library version, NUL-terminated.
 */
const char *sf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLIDEFREQ_H */
