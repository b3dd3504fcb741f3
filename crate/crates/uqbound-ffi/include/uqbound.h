#ifndef UQBOUND_H
#define UQBOUND_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  UqStatus_Ok = 0,
  UqStatus_NullPointer = 1,
  UqStatus_InvalidUtf8 = 2,
  UqStatus_ConfigError = 3,
  UqStatus_NumericalError = 4,
  UqStatus_InvalidArgument = 5,
} UqStatus;

/**
 * Opaque experiment configuration handle.
 */
typedef struct UqExperimentConfig UqExperimentConfig;

/**
 * Opaque risk-computation handle (performance measure + nominal rules).
 */
typedef struct UqRiskConfig UqRiskConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread, or null; the pointer
 * stays valid until the next failing call on the same thread.
 */
const char *uq_last_error_message(void);

/**
 * Parse a JSON experiment configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
UqStatus uq_config_parse(const char *json, UqExperimentConfig **out);

/**
 * Release a configuration handle; a null pointer is a no-op.
 *
 * # Safety
 * `cfg` must come from `uq_config_parse` and not be used afterwards.
 */
void uq_config_free(UqExperimentConfig *cfg);

/**
 * Resolve the relative-entropy budget B of a configuration; fails when
 * the configuration carries none.
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
UqStatus uq_config_budget(const UqExperimentConfig *cfg, double *out);

/**
 * Build the risk-computation handle (surrogate plus quadrature rules).
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
UqStatus uq_risk_build(const UqExperimentConfig *cfg, UqRiskConfig **out);

/**
 * Release a risk handle; a null pointer is a no-op.
 *
 * # Safety
 * `risk` must come from `uq_risk_build` and not be used afterwards.
 */
void uq_risk_free(UqRiskConfig *risk);

/**
 * Evaluate a risk-sensitive integral: `which` selects Lambda (0),
 * Lambda^1 (1) or Lambda^2 (2) at risk sensitivity `c`.
 *
 * # Safety
 * `risk` and `out` must be valid pointers.
 */
UqStatus uq_lambda(const UqRiskConfig *risk, int which, double c, double *out);

/**
 * The ambiguity-set bound B/c + lambda.
 */
double uq_bound(double b, double c, double lambda);

/**
 * Minimize B/c + Lambda_c^which. On success `*out_c_star` is the
 * minimizer and `*out_finite` is 1, or `*out_finite` is 0 when the
 * optimum is at c = infinity (then `*out_c_star` is not meaningful).
 *
 * # Safety
 * `risk` and the three output pointers must be valid.
 */
UqStatus uq_optimal_c(const UqRiskConfig *risk,
                      int which,
                      double b,
                      double tol,
                      double *out_c_star,
                      double *out_bound,
                      int *out_finite);

/**
 * The c -> infinity limit of Lambda^1 for a uniform nominal epistemic
 * law supported on [y_lo, y_hi].
 *
 * # Safety
 * `risk` and `out` must be valid pointers.
 */
UqStatus uq_lambda1_infinity(const UqRiskConfig *risk, double y_lo, double y_hi, double *out);

/**
 * Relative entropy R(p || q) from two JSON distribution specs; the
 * closed form is used when available, otherwise the numerical oracle.
 *
 * # Safety
 * `p_json`, `q_json` must be NUL-terminated strings; `out` valid.
 */
UqStatus uq_relative_entropy(const char *p_json, const char *q_json, double *out);

/**
 * Full risk-curve sweep as a CSV string (caller frees with
 * `uq_string_free`).
 *
 * # Safety
 * `cfg` and `out` must be valid pointers.
 */
UqStatus uq_sweep_csv(const UqExperimentConfig *cfg, char **out);

/**
 * Release a string returned by this library; a null pointer is a no-op.
 *
 * # Safety
 * `s` must come from a `uq_*` function returning an owned string.
 */
void uq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UQBOUND_H */
