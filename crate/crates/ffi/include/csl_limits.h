#ifndef CSL_LIMITS_H
#define CSL_LIMITS_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum CslCoupling {
  CSL_COUPLING_MASS_PROPORTIONAL = 0,
  CSL_COUPLING_NON_MASS_PROPORTIONAL = 1,
} CslCoupling;

/**
 * Status codes. 2, 3 and 4 match the CLI exit codes.
 */
typedef enum CslStatus {
  CSL_STATUS_OK = 0,
  CSL_STATUS_NULL_POINTER = 1,
  CSL_STATUS_VALIDATION = 2,
  CSL_STATUS_IO = 3,
  CSL_STATUS_NUMERICAL = 4,
  CSL_STATUS_PANIC = 5,
} CslStatus;

/**
 * Opaque spectrum handle.
 */
typedef struct CslSpectrum CslSpectrum;

typedef struct CslExposure {
  double atoms_per_kg;
  double exposure_kg_day;
  double seconds_per_day;
  double electrons_per_atom;
} CslExposure;

typedef struct CslSynthConfig {
  double alpha_true;
  double e_min;
  double e_max;
  double bin_width;
  double flat_background_per_bin;
  uint64_t seed;
} CslSynthConfig;

typedef struct CslBin {
  /**
   * keV.
   */
  double center;
  /**
   * keV.
   */
  double width;
  uint64_t counts;
} CslBin;

typedef struct CslFit {
  double alpha_hat;
  double sigma_alpha;
  double chi2;
  double reduced_chi2;
  size_t n_bins;
} CslFit;

typedef struct CslBayesLimit {
  /**
   * s⁻¹.
   */
  double lambda_upper;
  double lambda_cap;
} CslBayesLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *csl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * excluding the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t csl_last_error_message(char *buf, size_t len);

/**
 * The default germanium exposure (80 kg·day, 30 electrons per atom).
 */
struct CslExposure csl_exposure_default(void);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_exposure_factor(struct CslExposure exposure, double *out);

/**
 * Rate coefficient D at `r_c` metres.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_coupling(enum CslCoupling coupling, double r_c, double *out);

/**
 * α per unit λ (counts·keV·s).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_alpha_per_lambda(enum CslCoupling coupling,
                                    double r_c,
                                    double c_exp,
                                    double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_lambda_from_alpha(double alpha,
                                     enum CslCoupling coupling,
                                     double r_c,
                                     double c_exp,
                                     double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` owns a handle to release with [`csl_spectrum_free`].
 */
enum CslStatus csl_spectrum_load(const char *path, struct CslSpectrum **out);

/**
 * Builds a spectrum from `n` bins of common `width`.
 *
 * # Safety
 * `centers` and `counts` must point to `n` readable elements; `out` must be valid.
 */
enum CslStatus csl_spectrum_from_bins(const double *centers,
                                      const uint64_t *counts,
                                      size_t n,
                                      double width,
                                      struct CslSpectrum **out);

/**
 * Draws a synthetic spectrum.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_spectrum_sample(struct CslSynthConfig config, struct CslSpectrum **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `spectrum` must be null or a handle from this library not yet freed.
 */
void csl_spectrum_free(struct CslSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_spectrum_len(const struct CslSpectrum *spectrum, size_t *out);

/**
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_spectrum_total_counts(const struct CslSpectrum *spectrum, uint64_t *out);

/**
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_spectrum_bin(const struct CslSpectrum *spectrum,
                                size_t index,
                                struct CslBin *out);

/**
 * # Safety
 * `spectrum` must be a live handle or null; `path` a NUL-terminated string.
 */
enum CslStatus csl_spectrum_save(const struct CslSpectrum *spectrum, const char *path);

/**
 * Keeps bins with centers in `[e_min, e_max]` and at least `min_counts`
 * counts, as a new handle.
 *
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_spectrum_select(const struct CslSpectrum *spectrum,
                                   double e_min,
                                   double e_max,
                                   uint64_t min_counts,
                                   struct CslSpectrum **out);

/**
 * Σ width/E over the bins, in keV⁻¹.
 *
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_spectrum_harmonic_sum(const struct CslSpectrum *spectrum, double *out);

/**
 * Weighted least-squares fit of α/E to every bin of `spectrum`.
 *
 * # Safety
 * `spectrum` must be a live handle or null; `out` a valid pointer.
 */
enum CslStatus csl_fit_alpha(const struct CslSpectrum *spectrum, struct CslFit *out);

/**
 * One-sided Gaussian bound `alpha_hat + z(confidence) * sigma_alpha`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_alpha_upper_bound(double alpha_hat,
                                     double sigma_alpha,
                                     double confidence,
                                     double *out);

/**
 * Flat-prior credible upper limit on λ from a total count.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_bayes_lambda_limit(uint64_t y_total,
                                      double harmonic,
                                      enum CslCoupling coupling,
                                      double r_c,
                                      double c_exp,
                                      double confidence,
                                      struct CslBayesLimit *out);

/**
 * Maps a limit `lambda_ref` found at `r_ref` onto `n` correlation lengths.
 *
 * # Safety
 * `grid` must point to `n` readable and `out` to `n` writable doubles.
 */
enum CslStatus csl_scan(double lambda_ref, double r_ref, const double *grid, size_t n, double *out);

/**
 * Regularized lower incomplete gamma P(shape, x).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_reg_inc_gamma(double shape, double x, double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_gamma_quantile(double shape, double p, double *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum CslStatus csl_normal_quantile(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSL_LIMITS_H */
