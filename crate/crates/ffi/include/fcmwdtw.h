/* C interface for the fcmwdtw time series clustering and anomaly detection library. */

#ifndef FCMWDTW_H
#define FCMWDTW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. Anything other than `Ok` leaves a message readable
 * through `fcmwdtw_last_error`.
 */
typedef enum FcmwdtwStatus {
  /**
   * The call succeeded.
   */
  FcmwdtwStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  FcmwdtwStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FcmwdtwStatus_InvalidString = 2,
  /**
   * The inputs were rejected (bad shapes, hyperparameters, labels, ...).
   */
  FcmwdtwStatus_InvalidInput = 3,
  /**
   * Reading or writing a file failed.
   */
  FcmwdtwStatus_IoFailure = 4,
  /**
   * An internal invariant broke; the library state is still usable.
   */
  FcmwdtwStatus_Internal = 5,
} FcmwdtwStatus;

/**
 * How per-window scores are folded into per-observation scores.
 */
typedef enum FcmwdtwAggregation {
  /**
   * Average over every window covering the observation.
   */
  FcmwdtwAggregation_Mean = 0,
  /**
   * Maximum over every window covering the observation.
   */
  FcmwdtwAggregation_Max = 1,
} FcmwdtwAggregation;

/**
 * Opaque fitted model. Create with `fcmwdtw_fit` or `fcmwdtw_model_load`,
 * release with `fcmwdtw_model_free`.
 */
typedef struct FcmwdtwModel FcmwdtwModel;

/**
 * Fit settings. Fill with `fcmwdtw_fit_options_default` first, then adjust.
 */
typedef struct FcmwdtwFitOptions {
  /**
   * Sliding window length a (at least 2).
   */
  size_t window_length;
  /**
   * Step between consecutive window starts (at least 1).
   */
  size_t stride;
  /**
   * Cluster count c (at least 2).
   */
  size_t clusters;
  /**
   * Fuzzy coefficient m in (1, 2].
   */
  double fuzziness;
  /**
   * Dimension weight exponent q, below 0 or above 1.
   */
  double weight_exponent;
  /**
   * Relative loss improvement that counts as converged.
   */
  double epsilon;
  /**
   * Iteration cap.
   */
  size_t max_iters;
  /**
   * Seed for the density peak initialization.
   */
  uint64_t seed;
  /**
   * Rescale each dimension to [0, 1] before windowing; the model
   * remembers the transform and applies it when scoring.
   */
  bool normalize;
} FcmwdtwFitOptions;

/**
 * Shape and fit summary of a model.
 */
typedef struct FcmwdtwModelInfo {
  size_t clusters;
  size_t dims;
  size_t window_length;
  size_t center_length;
  size_t stride;
  double fuzziness;
  double weight_exponent;
  double final_loss;
  size_t iterations;
} FcmwdtwModelInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *fcmwdtw_version(void);

/**
 * Message describing this thread's most recent failure. Never null; empty
 * before the first failure. Valid until the next failing call on the same
 * thread.
 */
const char *fcmwdtw_last_error(void);

/**
 * Write the default fit settings into `options`.
 */
enum FcmwdtwStatus fcmwdtw_fit_options_default(struct FcmwdtwFitOptions *options);

/**
 * Fit a model on a row-major series of `observations` x `dims` values and
 * store the new handle in `out_model`.
 */
enum FcmwdtwStatus fcmwdtw_fit(const double *values,
                               size_t observations,
                               size_t dims,
                               const struct FcmwdtwFitOptions *options,
                               struct FcmwdtwModel **out_model);

/**
 * Save a model as JSON.
 */
enum FcmwdtwStatus fcmwdtw_model_save(const struct FcmwdtwModel *model, const char *path);

/**
 * Load a model saved by `fcmwdtw_model_save` and store the new handle in
 * `out_model`.
 */
enum FcmwdtwStatus fcmwdtw_model_load(const char *path, struct FcmwdtwModel **out_model);

/**
 * Release a model handle. Null is a no-op.
 */
void fcmwdtw_model_free(struct FcmwdtwModel *model);

/**
 * Describe a model's shape and fit summary.
 */
enum FcmwdtwStatus fcmwdtw_model_info(const struct FcmwdtwModel *model,
                                      struct FcmwdtwModelInfo *out_info);

/**
 * Score a row-major series of `observations` x `dims` values. Writes one
 * score per observation into `out_scores` (length `observations`); spots no
 * window covers become NaN.
 */
enum FcmwdtwStatus fcmwdtw_score_series(const struct FcmwdtwModel *model,
                                        const double *values,
                                        size_t observations,
                                        size_t dims,
                                        enum FcmwdtwAggregation aggregation,
                                        double *out_scores);

/**
 * Locally weighted warping distance between two row-major samples with
 * `dims` columns. `lambdas` may be null for uniform weights; otherwise it
 * must hold `dims` values on the probability simplex.
 */
enum FcmwdtwStatus fcmwdtw_distance(const double *x,
                                    size_t x_len,
                                    const double *y,
                                    size_t y_len,
                                    size_t dims,
                                    const double *lambdas,
                                    double weight_exponent,
                                    double *out_distance);

/**
 * Area under the ROC curve for `len` scored observations with 0/1 labels.
 */
enum FcmwdtwStatus fcmwdtw_roc_auc(const double *scores,
                                   const uint8_t *labels,
                                   size_t len,
                                   double *out_area);

/**
 * Area under the precision-recall curve for `len` scored observations with
 * 0/1 labels.
 */
enum FcmwdtwStatus fcmwdtw_pr_auc(const double *scores,
                                  const uint8_t *labels,
                                  size_t len,
                                  double *out_area);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FCMWDTW_H */
