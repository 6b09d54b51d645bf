#ifndef GTSC_RUIN_H
#define GTSC_RUIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GtscStatus {
  GTSC_STATUS_OK = 0,
  GTSC_STATUS_NULL_POINTER = 1,
  GTSC_STATUS_INVALID_PARAMS = 2,
  GTSC_STATUS_DOMAIN = 3,
  // The call does not apply to the model's regime (for example at the boundary).
  GTSC_STATUS_STATE = 4,
  GTSC_STATUS_ACCURACY = 5,
  GTSC_STATUS_ESTIMATION = 6,
  GTSC_STATUS_PANIC = 7,
} GtscStatus;

typedef enum GtscRegime {
  GTSC_REGIME_CRAMER = 0,
  GTSC_REGIME_CONVOLUTION_EQUIVALENT = 1,
  GTSC_REGIME_BOUNDARY = 2,
} GtscRegime;

typedef enum GtscLawKind {
  GTSC_LAW_KIND_OVERSHOOT = 0,
  GTSC_LAW_KIND_UNDERSHOOT = 1,
  GTSC_LAW_KIND_MAX_UNDERSHOOT = 2,
} GtscLawKind;

// Opaque handle on the limit laws of one model.
typedef struct GtscLaws GtscLaws;

// Opaque model handle.
typedef struct GtscModel GtscModel;

// Regime and constants; absent constants are NaN.
typedef struct GtscRegimeInfo {
  enum GtscRegime regime;
  double f_alpha;
  double nu0;
  double beta1;
  double beta2;
  double m_star;
} GtscRegimeInfo;

// Summary of a conditional-law estimation run.
typedef struct GtscSimSummary {
  uint64_t n_paths;
  uint64_t n_ruined;
  uint64_t n_censored;
  double ruin_fraction;
  double ruin_standard_error;
  double creep_fraction;
  double creep_standard_error;
} GtscSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty if none). The pointer stays
// valid until the next failing call on the same thread.
const char *gtsc_last_error_message(void);

// Creates a model from (q, d_H, c, α, ρ).
//
// # Safety
// `out` must be null or valid for writing a pointer.
enum GtscStatus gtsc_model_new(double q,
                               double d_h,
                               double c,
                               double alpha,
                               double rho,
                               struct GtscModel **out);

// Releases a model; null is ignored.
//
// # Safety
// `model` must be null or a handle from [`gtsc_model_new`] not yet freed.
void gtsc_model_free(struct GtscModel *model);

// Regime classification with the given tolerance on f(α).
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_model_classify(const struct GtscModel *model,
                                    double boundary_tol,
                                    struct GtscRegimeInfo *out);

// The α at which f(α) = 0, other parameters fixed (requires 0 < ρ < 1).
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_model_boundary_alpha(const struct GtscModel *model, double *out);

// Asymptotic ruin probability at reserve `u`.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_ruin_probability(const struct GtscModel *model,
                                      double boundary_tol,
                                      double u,
                                      double *out);

// Builds the limit laws of a model off the regime boundary.
//
// # Safety
// `model` must be a live handle and `out` valid for writing a pointer.
enum GtscStatus gtsc_laws_new(const struct GtscModel *model,
                              double boundary_tol,
                              struct GtscLaws **out);

// Releases laws; null is ignored.
//
// # Safety
// `laws` must be null or a handle from [`gtsc_laws_new`] not yet freed.
void gtsc_laws_free(struct GtscLaws *laws);

// Limit CDF of one law at x.
//
// # Safety
// `laws` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_laws_cdf(const struct GtscLaws *laws,
                              enum GtscLawKind kind,
                              double x,
                              double *out);

// Mass the law places at +∞ (β₂ for the undershoots in the convolution-equivalent
// regime, else 0).
//
// # Safety
// `laws` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_laws_mass_at_infinity(const struct GtscLaws *laws,
                                           enum GtscLawKind kind,
                                           double *out);

// Limiting probability of ruin by creeping.
//
// # Safety
// `laws` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_laws_creep_probability(const struct GtscLaws *laws, double *out);

// Simulates paths with the default scheme until `n_ruined` ruins at `u` (or the
// default path budget) and reports ruin and creep fractions.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum GtscStatus gtsc_simulate(const struct GtscModel *model,
                              double boundary_tol,
                              double u,
                              uint64_t n_ruined,
                              uint64_t seed,
                              size_t workers,
                              struct GtscSimSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GTSC_RUIN_H */
