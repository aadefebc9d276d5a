#ifndef HBFKIT_H
#define HBFKIT_H

/* Generated from the Rust sources by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Beamforming algorithm selector for the FLOP model.
 */
typedef enum HbfAlgorithm {
  /**
   * The closed-form design implemented by this library.
   */
  HBF_ALGORITHM_PROPOSED = 0,
  /**
   * Iterative least-squares reference with per-iteration factorizations.
   */
  HBF_ALGORITHM_LSAA = 1,
  /**
   * Accelerated variant of the reference algorithm.
   */
  HBF_ALGORITHM_LSAA_FAST = 2,
} HbfAlgorithm;

/**
 * Result of a fallible API call.
 */
typedef enum HbfStatus {
  /**
   * The call succeeded.
   */
  HBF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HBF_STATUS_NULL_POINTER = 1,
  /**
   * An argument or configuration was rejected.
   */
  HBF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A numerical routine failed on the given data.
   */
  HBF_STATUS_NUMERIC_FAILURE = 3,
  /**
   * An internal invariant was violated; the library caught a panic.
   */
  HBF_STATUS_PANIC = 4,
} HbfStatus;

/**
 * A designed hybrid beamformer: analog and digital stages for both link
 * ends (opaque).
 */
typedef struct HbfBeamformer HbfBeamformer;

/**
 * One multipath channel realization across all subcarriers (opaque).
 */
typedef struct HbfChannel HbfChannel;

/**
 * System dimensions plus power and noise levels (opaque).
 */
typedef struct HbfSystemConfig HbfSystemConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message for the most recent failure on the calling thread,
 * or an empty string if none occurred. The pointer stays valid until the
 * next failing call on the same thread.
 */
const char *hbf_last_error_message(void);

/**
 * Returns the library version as a static NUL-terminated string.
 */
const char *hbf_version(void);

/**
 * Creates a validated system configuration.
 *
 * `power_budget` is the total transmit power per subcarrier and
 * `noise_var` the per-antenna noise variance; both must be positive, and
 * `n_streams <= n_rf <= min(n_tx, n_rx)` must hold.
 *
 * # Safety
 *
 * `out` must point to writable storage for one pointer. On success it
 * receives a handle that must be released with `hbf_system_config_free`.
 */
enum HbfStatus hbf_system_config_new(size_t n_tx,
                                     size_t n_rx,
                                     size_t n_rf,
                                     size_t n_streams,
                                     size_t n_subcarriers,
                                     double power_budget,
                                     double noise_var,
                                     struct HbfSystemConfig **out);

/**
 * Releases a configuration handle. Passing null is a no-op.
 *
 * # Safety
 *
 * `cfg` must be a handle from `hbf_system_config_new` that has not been
 * freed before.
 */
void hbf_system_config_free(struct HbfSystemConfig *cfg);

/**
 * Draws one clustered-multipath channel realization.
 *
 * Angles are in radians. `master_seed` and `realization` select a
 * deterministic random substream: equal inputs give bit-identical
 * channels on every platform and thread.
 *
 * # Safety
 *
 * `out` must point to writable storage for one pointer. On success it
 * receives a handle that must be released with `hbf_channel_free`.
 */
enum HbfStatus hbf_channel_generate(size_t n_rx,
                                    size_t n_tx,
                                    size_t n_subcarriers,
                                    size_t n_clusters,
                                    size_t n_rays,
                                    double angular_spread_rx,
                                    double angular_spread_tx,
                                    double antenna_spacing_over_wavelength,
                                    uint64_t master_seed,
                                    uint64_t realization,
                                    struct HbfChannel **out);

/**
 * Builds a channel from caller-provided matrices.
 *
 * `data` holds `n_subcarriers` consecutive `n_rx x n_tx` matrices in the
 * interleaved row-major layout, `len` doubles in total
 * (`2 * n_rx * n_tx * n_subcarriers`).
 *
 * # Safety
 *
 * `data` must point to `len` readable doubles and `out` to writable
 * storage for one pointer. On success `out` receives a handle that must
 * be released with `hbf_channel_free`.
 */
enum HbfStatus hbf_channel_from_data(size_t n_rx,
                                     size_t n_tx,
                                     size_t n_subcarriers,
                                     const double *data,
                                     size_t len,
                                     struct HbfChannel **out);

/**
 * Number of receive antennas, or 0 if `channel` is null.
 *
 * # Safety
 *
 * `channel` must be a live handle or null.
 */
size_t hbf_channel_n_rx(const struct HbfChannel *channel);

/**
 * Number of transmit antennas, or 0 if `channel` is null.
 *
 * # Safety
 *
 * `channel` must be a live handle or null.
 */
size_t hbf_channel_n_tx(const struct HbfChannel *channel);

/**
 * Number of subcarriers, or 0 if `channel` is null.
 *
 * # Safety
 *
 * `channel` must be a live handle or null.
 */
size_t hbf_channel_n_subcarriers(const struct HbfChannel *channel);

/**
 * Copies subcarrier `k` of the channel into `buffer`
 * (`2 * n_rx * n_tx` doubles, interleaved row-major).
 *
 * # Safety
 *
 * `channel` must be a live handle and `buffer` must point to `len`
 * writable doubles.
 */
enum HbfStatus hbf_channel_get(const struct HbfChannel *channel,
                               size_t k,
                               double *buffer,
                               size_t len);

/**
 * Releases a channel handle. Passing null is a no-op.
 *
 * # Safety
 *
 * `channel` must be a handle from `hbf_channel_generate` or
 * `hbf_channel_from_data` that has not been freed before.
 */
void hbf_channel_free(struct HbfChannel *channel);

/**
 * Designs the closed-form hybrid beamformer for a channel realization.
 *
 * # Safety
 *
 * `channel` and `cfg` must be live handles; `out` must point to writable
 * storage for one pointer. On success it receives a handle that must be
 * released with `hbf_beamformer_free`.
 */
enum HbfStatus hbf_design_hybrid(const struct HbfChannel *channel,
                                 const struct HbfSystemConfig *cfg,
                                 struct HbfBeamformer **out);

/**
 * Number of subcarriers the beamformer was designed for, or 0 on null.
 *
 * # Safety
 *
 * `bf` must be a live handle or null.
 */
size_t hbf_beamformer_n_subcarriers(const struct HbfBeamformer *bf);

/**
 * Copies the analog precoder (`n_tx x n_rf`) into `buffer`.
 *
 * # Safety
 *
 * `bf` must be a live handle and `buffer` must point to `len` writable
 * doubles.
 */
enum HbfStatus hbf_beamformer_analog_precoder(const struct HbfBeamformer *bf,
                                              double *buffer,
                                              size_t len);

/**
 * Copies the analog combiner (`n_rx x n_rf`) into `buffer`.
 *
 * # Safety
 *
 * `bf` must be a live handle and `buffer` must point to `len` writable
 * doubles.
 */
enum HbfStatus hbf_beamformer_analog_combiner(const struct HbfBeamformer *bf,
                                              double *buffer,
                                              size_t len);

/**
 * Copies the digital precoder for subcarrier `k` (`n_rf x n_streams`)
 * into `buffer`.
 *
 * # Safety
 *
 * `bf` must be a live handle and `buffer` must point to `len` writable
 * doubles.
 */
enum HbfStatus hbf_beamformer_digital_precoder(const struct HbfBeamformer *bf,
                                               size_t k,
                                               double *buffer,
                                               size_t len);

/**
 * Copies the digital combiner for subcarrier `k` (`n_rf x n_streams`)
 * into `buffer`.
 *
 * # Safety
 *
 * `bf` must be a live handle and `buffer` must point to `len` writable
 * doubles.
 */
enum HbfStatus hbf_beamformer_digital_combiner(const struct HbfBeamformer *bf,
                                               size_t k,
                                               double *buffer,
                                               size_t len);

/**
 * Releases a beamformer handle. Passing null is a no-op.
 *
 * # Safety
 *
 * `bf` must be a handle from `hbf_design_hybrid` that has not been freed
 * before.
 */
void hbf_beamformer_free(struct HbfBeamformer *bf);

/**
 * Subcarrier-averaged spectral efficiency of a hybrid beamformer on a
 * channel, in bits/s/Hz.
 *
 * # Safety
 *
 * `channel`, `cfg`, and `bf` must be live handles; `out` must point to
 * one writable double.
 */
enum HbfStatus hbf_spectral_efficiency(const struct HbfChannel *channel,
                                       const struct HbfBeamformer *bf,
                                       const struct HbfSystemConfig *cfg,
                                       double *out);

/**
 * Spectral efficiency of the fully digital water-filling baseline on the
 * same channel, in bits/s/Hz. Designs the baseline internally.
 *
 * # Safety
 *
 * `channel` and `cfg` must be live handles; `out` must point to one
 * writable double.
 */
enum HbfStatus hbf_digital_baseline_se(const struct HbfChannel *channel,
                                       const struct HbfSystemConfig *cfg,
                                       double *out);

/**
 * FLOP count of one algorithm at explicit dimensions. `n_iter` only
 * affects the accelerated reference variant.
 *
 * # Safety
 *
 * `out` must point to one writable double.
 */
enum HbfStatus hbf_flops(enum HbfAlgorithm algorithm,
                         size_t n,
                         size_t n_rf,
                         size_t n_iter,
                         double *out);

/**
 * Fractional FLOP reduction of an algorithm relative to the iterative
 * reference at array scale `l` (antennas `8*l`, RF chains `l`).
 *
 * # Safety
 *
 * `out` must point to one writable double.
 */
enum HbfStatus hbf_reduction_vs_lsaa(enum HbfAlgorithm algorithm, size_t l, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HBFKIT_H */
