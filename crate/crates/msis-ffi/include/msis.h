#ifndef MSIS_H
#define MSIS_H

/* Generated by cbindgen from msis-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum MsisStatus {
  MSIS_STATUS_OK = 0,
  MSIS_STATUS_NULL_POINTER = 1,
  MSIS_STATUS_INVALID_CONFIG = 2,
  MSIS_STATUS_DOMAIN = 3,
  MSIS_STATUS_BOUNDARY_SINGULARITY = 4,
  MSIS_STATUS_DEGENERATE_POSITION = 5,
  MSIS_STATUS_DIMENSION_MISMATCH = 6,
  MSIS_STATUS_ESTIMATION_FAILED = 7,
  MSIS_STATUS_ASYMMETRIC_ARCHITECTURE = 8,
  MSIS_STATUS_PANIC = 9,
} MsisStatus;

// Element radiation pattern.
typedef enum MsisPattern {
  MSIS_PATTERN_ISOTROPIC = 0,
  MSIS_PATTERN_DIRECTIVE = 1,
} MsisPattern;

// Opaque model handle.
typedef struct MsisModel MsisModel;

// System parameters. Fill with [`msis_config_default`] and override fields.
typedef struct MsisConfig {
  size_t sectors;
  size_t elements_per_sector;
  size_t sensors_per_sector;
  size_t snapshots;
  enum MsisPattern pattern;
  double p_tr_dbm;
  double sigma2_dbm;
  double f_c_hz;
  double rho_m;
  double alpha_t_re;
  double alpha_t_im;
  double d_ci_m;
  double zeta_src_rad;
} MsisConfig;

// Complex sample.
typedef struct MsisComplex {
  double re;
  double im;
} MsisComplex;

// Result of [`msis_estimate`].
typedef struct MsisEstimate {
  double theta_hat_rad;
  struct MsisComplex alpha_hat;
  double metric;
} MsisEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Writes the default configuration: 4 directive sectors of 6 elements,
// 24 snapshots, 45 dBm transmit power and -80 dBm noise.
//
// # Safety
// `out` must be null or valid for writes.
enum MsisStatus msis_config_default(struct MsisConfig *out);

// Builds a model. On success `*out` owns a handle for [`msis_model_free`].
//
// # Safety
// `config` must be null or point to a valid config; `out` must be null or
// valid for writes.
enum MsisStatus msis_model_new(const struct MsisConfig *config, struct MsisModel **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `model` must be null or a handle from [`msis_model_new`] not yet freed.
void msis_model_free(struct MsisModel *model);

// Number of complex samples in one observation.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_observation_len(const struct MsisModel *model, size_t *out);

// Exact angle bound at `theta_rad`, rad². Infinite where the angle is unobservable.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_crb_exact(const struct MsisModel *model, double theta_rad, double *out);

// Large-array approximation of the angle bound, rad². Needs a symmetric architecture.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_crb_approx(const struct MsisModel *model, double theta_rad, double *out);

// Correction factor of the large-array bound, in `(0, 1]`.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_gamma(const struct MsisModel *model, double theta_rad, double *out);

// Probing power reaching the target direction.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_probing_power(const struct MsisModel *model, double theta_rad, double *out);

// Squared angle rate of the response.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for writes.
enum MsisStatus msis_angle_rate(const struct MsisModel *model, double theta_rad, double *out);

// Draws one noisy observation into `out[0..len]`. `len` must equal
// [`msis_observation_len`]. The same seed always gives the same samples.
//
// # Safety
// `model` must be null or a live handle; `out` null or valid for `len` writes.
enum MsisStatus msis_observe(const struct MsisModel *model,
                             double theta_rad,
                             uint64_t seed,
                             struct MsisComplex *out,
                             size_t len);

// Maximum-likelihood estimate of azimuth and path gain from `y[0..len]`
// using a uniform search grid of `grid_points` nodes and refinement.
//
// # Safety
// `model` must be null or a live handle; `y` null or valid for `len`
// reads; `out` null or valid for writes.
enum MsisStatus msis_estimate(const struct MsisModel *model,
                              const struct MsisComplex *y,
                              size_t len,
                              size_t grid_points,
                              struct MsisEstimate *out);

// Copies the calling thread's last error message into `buf` with a
// terminating NUL, truncating to `cap` bytes. Returns the full message
// length without the NUL, or 0 if no error was recorded.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
size_t msis_last_error_message(char *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSIS_H */
