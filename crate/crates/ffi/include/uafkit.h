/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef UAFKIT_H
#define UAFKIT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UafkitStatus {
  UAFKIT_STATUS_OK = 0,
  UAFKIT_STATUS_NULL_POINTER = 1,
  UAFKIT_STATUS_INVALID_ARGUMENT = 2,
  UAFKIT_STATUS_UNKNOWN_KIND = 3,
  UAFKIT_STATUS_OVERFLOW = 4,
  UAFKIT_STATUS_INVALID_JSON = 5,
  UAFKIT_STATUS_DIVERGED = 6,
  UAFKIT_STATUS_INDEX_OUT_OF_RANGE = 7,
  UAFKIT_STATUS_PANIC = 8,
} UafkitStatus;

typedef struct UafkitErrorReport UafkitErrorReport;

typedef struct UafkitFitResult UafkitFitResult;

typedef struct UafkitTrainReport UafkitTrainReport;

// The five UAF parameters.
typedef struct UafkitParams {
  double a;
  double b;
  double c;
  double d;
  double e;
} UafkitParams;

// Partial derivatives of the UAF at one input.
typedef struct UafkitGradient {
  double d_x;
  double d_a;
  double d_b;
  double d_c;
  double d_d;
  double d_e;
} UafkitGradient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after a
// success. Valid until the next `uafkit_` call on the same thread.
const char *uafkit_last_error(void);

// # Safety
// `s` must come from a `uafkit_*_to_json` or `_to_csv` function and not
// be freed yet.
void uafkit_string_free(char *s);

// Overflow-free evaluation.
//
// # Safety
// `params` must be readable and `out` writable.
enum UafkitStatus uafkit_eval_stable(const struct UafkitParams *params, double x, double *out);

// Direct evaluation; fails with `OVERFLOW` where `exp` would overflow.
//
// # Safety
// `params` must be readable and `out` writable.
enum UafkitStatus uafkit_eval_naive(const struct UafkitParams *params, double x, double *out);

// Evaluates `n` inputs from `xs` into `out`.
//
// # Safety
// `xs` and `out` must each hold `n` doubles.
enum UafkitStatus uafkit_eval_batch(const struct UafkitParams *params,
                                    const double *xs,
                                    size_t n,
                                    double *out);

// # Safety
// `params` must be readable and `out` writable.
enum UafkitStatus uafkit_grad(const struct UafkitParams *params,
                              double x,
                              struct UafkitGradient *out);

// Preset parameters by name, e.g. `"tanh"` or `"leaky_relu(0.05)"`.
//
// # Safety
// `kind` must be a NUL-terminated string and `out` writable.
enum UafkitStatus uafkit_preset(const char *kind, struct UafkitParams *out);

// Exact reference activation.
//
// # Safety
// `kind` must be a NUL-terminated string and `out` writable.
enum UafkitStatus uafkit_target_eval(const char *kind, double x, double *out);

// UAF minus target at `x`.
//
// # Safety
// Pointers must be valid as in [`uafkit_target_eval`].
enum UafkitStatus uafkit_approx_error(const struct UafkitParams *params,
                                      const char *kind,
                                      double x,
                                      double *out);

// RMSE over `n` evenly spaced points of `[lo, hi]`.
//
// # Safety
// Pointers must be valid as in [`uafkit_target_eval`].
enum UafkitStatus uafkit_interval_rmse(const struct UafkitParams *params,
                                       const char *kind,
                                       double lo,
                                       double hi,
                                       size_t n,
                                       double *out);

// # Safety
// `out` receives a handle to release with `uafkit_error_report_free`.
enum UafkitStatus uafkit_error_report(const struct UafkitParams *params,
                                      const char *kind,
                                      double lo,
                                      double hi,
                                      size_t n,
                                      struct UafkitErrorReport **out);

// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_error_report_max_abs_error(const struct UafkitErrorReport *report,
                                                    double *out);

// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_error_report_rmse(const struct UafkitErrorReport *report, double *out);

// Number of points where the maximum is attained.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_error_report_location_count(const struct UafkitErrorReport *report,
                                                     size_t *out);

// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_error_report_location(const struct UafkitErrorReport *report,
                                               size_t index,
                                               double *out);

// Full report as JSON; release with `uafkit_string_free`.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_error_report_to_json(const struct UafkitErrorReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void uafkit_error_report_free(struct UafkitErrorReport *report);

// Runs a built-in fit: `sigmoid-family`, `tanh-family`,
// `gaussian-family` or `relu-family`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` receives a handle to
// release with `uafkit_fit_result_free`.
enum UafkitStatus uafkit_fit_builtin(const char *name, struct UafkitFitResult **out);

// Runs a fit described by FitSpec JSON.
//
// # Safety
// As [`uafkit_fit_builtin`].
enum UafkitStatus uafkit_fit_json(const char *spec_json, struct UafkitFitResult **out);

// # Safety
// `result` must be a live handle; `out` writable.
enum UafkitStatus uafkit_fit_result_params(const struct UafkitFitResult *result,
                                           struct UafkitParams *out);

// # Safety
// `result` must be a live handle; `out` writable.
enum UafkitStatus uafkit_fit_result_rmse(const struct UafkitFitResult *result, double *out);

// # Safety
// `result` must be a live handle; `out` writable.
enum UafkitStatus uafkit_fit_result_iterations(const struct UafkitFitResult *result, size_t *out);

// # Safety
// `result` must be a live handle; `out` writable.
enum UafkitStatus uafkit_fit_result_converged(const struct UafkitFitResult *result, bool *out);

// # Safety
// `result` must be a live handle; `out` writable.
enum UafkitStatus uafkit_fit_result_to_json(const struct UafkitFitResult *result, char **out);

// # Safety
// `result` must be null or a handle not yet freed.
void uafkit_fit_result_free(struct UafkitFitResult *result);

// Trains on the synthetic gas-mixture regression set. Pass `INFINITY`
// as `snr_db` for noise-free inputs.
//
// # Safety
// `config_json` must be a NUL-terminated NetworkConfig JSON string; `out`
// receives a handle to release with `uafkit_train_report_free`.
enum UafkitStatus uafkit_train_gas(const char *config_json,
                                   uint64_t data_seed,
                                   size_t n_samples,
                                   size_t n_channels,
                                   size_t n_species,
                                   double snr_db,
                                   struct UafkitTrainReport **out);

// Trains on gaussian-cluster classification data.
//
// # Safety
// As [`uafkit_train_gas`].
enum UafkitStatus uafkit_train_blobs(const char *config_json,
                                     uint64_t data_seed,
                                     size_t n_samples,
                                     size_t n_classes,
                                     size_t n_features,
                                     double spread,
                                     struct UafkitTrainReport **out);

// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_epochs(const struct UafkitTrainReport *report, size_t *out);

// Mean training loss of epoch `index` (0-based).
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_loss(const struct UafkitTrainReport *report,
                                           size_t index,
                                           double *out);

// Validation metric after epoch `index` (0-based): RMSE for regression,
// accuracy for classification.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_metric(const struct UafkitTrainReport *report,
                                             size_t index,
                                             double *out);

// Final shared UAF parameters. Fails with `INVALID_ARGUMENT` when the
// activation was frozen.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_final_uaf(const struct UafkitTrainReport *report,
                                                struct UafkitParams *out);

// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_to_json(const struct UafkitTrainReport *report, char **out);

// Per-epoch CSV trace; release with `uafkit_string_free`.
//
// # Safety
// `report` must be a live handle; `out` writable.
enum UafkitStatus uafkit_train_report_to_csv(const struct UafkitTrainReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void uafkit_train_report_free(struct UafkitTrainReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAFKIT_H */
