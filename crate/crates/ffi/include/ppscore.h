#ifndef PPSCORE_H
#define PPSCORE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum PpsStatus {
  PPS_STATUS_OK = 0,
  PPS_STATUS_NULL_POINTER = 1,
  PPS_STATUS_INVALID_ARGUMENT = 2,
  PPS_STATUS_NUMERIC = 3,
  PPS_STATUS_CONFIG = 4,
  PPS_STATUS_IO = 5,
  PPS_STATUS_PANIC = 6,
} PpsStatus;

/**
 * Conditional intensity forecast of a temporal process.
 */
typedef struct PpsCondIntensity PpsCondIntensity;

/**
 * Intensity forecast on a window.
 */
typedef struct PpsIntensityForecast PpsIntensityForecast;

/**
 * Spatial point pattern with its window.
 */
typedef struct PpsSpatialPattern PpsSpatialPattern;

/**
 * Event times on `[0, horizon]`.
 */
typedef struct PpsTemporalPattern PpsTemporalPattern;

/**
 * Rectangular observation window.
 */
typedef struct PpsWindow PpsWindow;

/**
 * Diebold-Mariano test result. `decision` is 1 when the first forecast is
 * preferred, -1 when the second is, 0 otherwise.
 */
typedef struct PpsDmResult {
  size_t n;
  double mean;
  double variance;
  double t;
  double p_value;
  int32_t decision;
  bool degenerate;
} PpsDmResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buffer` (NUL
 * terminated, truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buffer` must be null or valid for `len` bytes.
 */
size_t pps_last_error_message(char *buffer, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pps_version(void);

/**
 * # Safety
 * `lower` and `upper` must hold `dim` values; `out` must be writable.
 */
enum PpsStatus pps_window_new(const double *lower,
                              const double *upper,
                              size_t dim,
                              struct PpsWindow **out);

/**
 * # Safety
 * `window` must be null or a handle from [`pps_window_new`].
 */
void pps_window_free(struct PpsWindow *window);

/**
 * Pattern from `n` points stored row-major (`n · dim` coordinates).
 *
 * # Safety
 * `coords` must hold `n · dim` values for the window's dimension.
 */
enum PpsStatus pps_spatial_pattern_new(const struct PpsWindow *window,
                                       const double *coords,
                                       size_t n,
                                       struct PpsSpatialPattern **out);

/**
 * # Safety
 * `pattern` must be a live handle.
 */
enum PpsStatus pps_spatial_pattern_len(const struct PpsSpatialPattern *pattern, size_t *out);

/**
 * # Safety
 * `pattern` must be null or a handle from [`pps_spatial_pattern_new`].
 */
void pps_spatial_pattern_free(struct PpsSpatialPattern *pattern);

/**
 * # Safety
 * `times` must hold `n` values.
 */
enum PpsStatus pps_temporal_pattern_new(const double *times,
                                        size_t n,
                                        double horizon,
                                        struct PpsTemporalPattern **out);

/**
 * # Safety
 * `pattern` must be null or a handle from [`pps_temporal_pattern_new`].
 */
void pps_temporal_pattern_free(struct PpsTemporalPattern *pattern);

/**
 * Catalog intensity such as `"f0"` or `"f3(scale=50)"`, with exact masses.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `window` a live handle.
 */
enum PpsStatus pps_intensity_catalog_new(const char *spec,
                                         const struct PpsWindow *window,
                                         struct PpsIntensityForecast **out);

/**
 * Intensity given by a callback that receives a point of `dim`
 * coordinates and `user_data`; masses by Gauss-Legendre quadrature.
 * The callback may be called concurrently and must outlive the handle.
 *
 * # Safety
 * `user_data` must stay valid for the lifetime of the returned handle.
 */
enum PpsStatus pps_intensity_callback_new(double (*callback)(const double *point,
                                                             size_t dim,
                                                             void *user_data),
                                          void *user_data,
                                          const struct PpsWindow *window,
                                          struct PpsIntensityForecast **out);

/**
 * # Safety
 * `forecast` must be a live handle.
 */
enum PpsStatus pps_intensity_total_mass(const struct PpsIntensityForecast *forecast, double *out);

/**
 * # Safety
 * `forecast` must be null or a handle from an intensity constructor.
 */
void pps_intensity_free(struct PpsIntensityForecast *forecast);

/**
 * Log-likelihood score of the Poisson process with the given intensity.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum PpsStatus pps_score_intensity_poisson(const struct PpsIntensityForecast *forecast,
                                           const struct PpsSpatialPattern *pattern,
                                           double *out);

/**
 * Log score of the normalized intensity plus `c` times the squared error
 * of the total mass against the point count.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum PpsStatus pps_score_intensity_combined(const struct PpsIntensityForecast *forecast,
                                            const struct PpsSpatialPattern *pattern,
                                            double c,
                                            double *out);

/**
 * Catalog Hawkes forecast such as `"f1"` or `"f2(nu=1.5)"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string.
 */
enum PpsStatus pps_cond_intensity_catalog_new(const char *spec, struct PpsCondIntensity **out);

/**
 * Hawkes forecast with background `nu` and kernel `scale · exp(−rate · t)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PpsStatus pps_cond_intensity_hawkes_exponential_new(double nu,
                                                         double scale,
                                                         double rate,
                                                         struct PpsCondIntensity **out);

/**
 * # Safety
 * `forecast` must be null or a handle from a conditional intensity constructor.
 */
void pps_cond_intensity_free(struct PpsCondIntensity *forecast);

/**
 * Log-likelihood score `∫λ − Σ log λ(t_i)` of a temporal pattern.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum PpsStatus pps_score_cond_intensity_log(const struct PpsCondIntensity *forecast,
                                            const struct PpsTemporalPattern *pattern,
                                            double *out);

/**
 * Diebold-Mariano test on score differences `a − b`.
 *
 * # Safety
 * `diffs` must hold `n` values; `out` must be writable.
 */
enum PpsStatus pps_dm_test(const double *diffs,
                           size_t n,
                           double alpha,
                           bool one_sided,
                           struct PpsDmResult *out);

/**
 * Runs an experiment configuration file and writes its CSV outputs into
 * `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum PpsStatus pps_run_config(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPSCORE_H */
