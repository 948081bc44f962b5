/* Bayesian limits from the published total, and a fit of a synthetic spectrum.
 *
 *   cc -Iinclude examples/limits.c target/debug/libcsl_limits_ffi.a -lm -lpthread -ldl -o limits
 */
#include <stdio.h>

#include "csl_limits.h"

static int report(CslStatus status) {
    if (status != CSL_STATUS_OK) {
        char msg[256];
        csl_last_error_message(msg, sizeof msg);
        fprintf(stderr, "error %d: %s\n", (int)status, msg);
    }
    return (int)status;
}

int main(void) {
    double c_exp = 0.0;
    if (report(csl_exposure_factor(csl_exposure_default(), &c_exp))) return 1;

    double centers[34];
    uint64_t counts[34];
    for (int i = 0; i < 34; i++) {
        centers[i] = 15.0 + i;
        counts[i] = 0;
    }
    CslSpectrum *grid = NULL;
    if (report(csl_spectrum_from_bins(centers, counts, 34, 1.0, &grid))) return 1;
    double s = 0.0;
    csl_spectrum_harmonic_sum(grid, &s);
    csl_spectrum_free(grid);

    CslBayesLimit mass, non_mass;
    if (report(csl_bayes_lambda_limit(130, s, CSL_COUPLING_MASS_PROPORTIONAL, 1e-7, c_exp, 0.95, &mass))) return 1;
    if (report(csl_bayes_lambda_limit(130, s, CSL_COUPLING_NON_MASS_PROPORTIONAL, 1e-7, c_exp, 0.95, &non_mass))) return 1;
    printf("lambda_mass=%.6e\nlambda_non_mass=%.6e\n", mass.lambda_upper, non_mass.lambda_upper);

    CslSynthConfig cfg = {115.0, 14.5, 48.5, 1.0, 0.0, 42};
    CslSpectrum *synth = NULL, *kept = NULL;
    if (report(csl_spectrum_sample(cfg, &synth))) return 1;
    uint64_t total = 0;
    csl_spectrum_total_counts(synth, &total);
    if (report(csl_spectrum_select(synth, 14.5, 48.5, 5, &kept))) return 1;
    CslFit fit;
    if (report(csl_fit_alpha(kept, &fit))) return 1;
    printf("total=%llu\nalpha_hat=%.6f\nsigma_alpha=%.6f\n", (unsigned long long)total, fit.alpha_hat, fit.sigma_alpha);
    csl_spectrum_free(kept);
    csl_spectrum_free(synth);

    CslStatus bad = csl_reg_inc_gamma(-1.0, 1.0, &s);
    printf("bad_shape_status=%d\n", (int)bad);
    return 0;
}
