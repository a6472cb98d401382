#ifndef LUCONC_H
#define LUCONC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes. Values 2 to 6 match the command-line exit codes.
typedef enum LuconcStatus {
  LUCONC_STATUS_OK = 0,
  // Null pointer, bad enum value or invalid UTF-8 argument.
  LUCONC_STATUS_INVALID_ARGUMENT = 1,
  LUCONC_STATUS_CONFIG = 2,
  LUCONC_STATUS_IO = 3,
  LUCONC_STATUS_FORMAT = 4,
  LUCONC_STATUS_INFEASIBLE = 5,
  // Domain, dimension, empty-region or convergence failure.
  LUCONC_STATUS_NUMERIC = 6,
  // A Rust panic was caught at the boundary.
  LUCONC_STATUS_INTERNAL = 7,
} LuconcStatus;

typedef enum LuconcMetric {
  LUCONC_METRIC_L2 = 0,
  LUCONC_METRIC_LINF = 1,
} LuconcMetric;

// Loaded or constructed dataset.
typedef struct LuconcDataset LuconcDataset;

// Union of balls produced by a search.
typedef struct LuconcRegion LuconcRegion;

typedef struct LuconcSearchParams {
  double alpha;
  double gamma;
  double epsilon;
  // Number of balls (T).
  size_t balls;
  enum LuconcMetric metric;
} LuconcSearchParams;

typedef struct LuconcEvaluation {
  double risk;
  double adv_risk;
  // NaN when no evaluated point falls in the region or there are no soft labels.
  double region_lu;
} LuconcEvaluation;

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *luconc_last_error_message(void);

// Loads a dataset. `points_path` ending in `.csv` is read as CSV, anything
// else as the binary point format. `soft_path` may be null.
//
// # Safety
// Path arguments must be null or NUL-terminated strings; `out` must be
// writable.
enum LuconcStatus luconc_dataset_load(const char *points_path,
                                      const char *labels_path,
                                      const char *soft_path,
                                      struct LuconcDataset **out);

// Builds a dataset from row-major `coords` (`m * n`), `labels` (`m`,
// each below `k`) and optional row-major `soft` (`m * k`, may be null).
// Ids are `"0"` to `"m-1"`.
//
// # Safety
// Non-null arrays must hold the stated number of elements.
enum LuconcStatus luconc_dataset_from_arrays(size_t m,
                                             size_t n,
                                             const float *coords,
                                             const uint32_t *labels,
                                             size_t k,
                                             const double *soft,
                                             struct LuconcDataset **out);

// # Safety
// `d` must be null or a pointer from this library not yet freed.
void luconc_dataset_free(struct LuconcDataset *d);

// Number of examples, or 0 for a null handle.
//
// # Safety
// `d` must be null or a live dataset handle.
size_t luconc_dataset_len(const struct LuconcDataset *d);

// Point dimension, or 0 for a null handle.
//
// # Safety
// `d` must be null or a live dataset handle.
size_t luconc_dataset_dim(const struct LuconcDataset *d);

// Label uncertainty of one example with soft label `soft_row` (`k` entries).
//
// # Safety
// `soft_row` must hold `k` values; `out` must be writable.
enum LuconcStatus luconc_example_lu(const double *soft_row, size_t k, size_t label, double *out);

// Mean label uncertainty over `members` (indices into `d`).
//
// # Safety
// `members` must hold `count` indices; `out` must be writable.
enum LuconcStatus luconc_region_lu(const struct LuconcDataset *d,
                                   const size_t *members,
                                   size_t count,
                                   double *out);

// Runs the greedy search on `train`. `mem_cap_bytes` of 0 selects the
// default distance-cache budget.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LuconcStatus luconc_search_run(const struct LuconcDataset *train,
                                    const struct LuconcSearchParams *params,
                                    size_t mem_cap_bytes,
                                    struct LuconcRegion **out);

// # Safety
// `r` must be null or a live region handle.
void luconc_region_free(struct LuconcRegion *r);

// # Safety
// `r` must be null or a live region handle.
size_t luconc_region_ball_count(const struct LuconcRegion *r);

// Center index (into the training set) and radius of ball `i`.
//
// # Safety
// `r` must be a live region handle; out-pointers must be writable.
enum LuconcStatus luconc_region_ball(const struct LuconcRegion *r,
                                     size_t i,
                                     size_t *center_index,
                                     double *radius);

// Region as JSON; free the string with `luconc_string_free`.
//
// # Safety
// `r` must be a live region handle; `out` must be writable.
enum LuconcStatus luconc_region_to_json(const struct LuconcRegion *r, char **out);

// Risk and expansion measure of `region` on `eval`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LuconcStatus luconc_evaluate_region(const struct LuconcRegion *region,
                                         const struct LuconcDataset *eval,
                                         double epsilon,
                                         struct LuconcEvaluation *out);

// Split, search and evaluate `n_trials` times with seeds `base_seed + i`;
// writes the summary report as JSON.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LuconcStatus luconc_repeated_trials_json(const struct LuconcDataset *d,
                                              const struct LuconcSearchParams *params,
                                              size_t n_trials,
                                              uint64_t base_seed,
                                              char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void luconc_string_free(char *s);

// `Phi(Phi^-1(alpha) + epsilon_std)`.
//
// # Safety
// `out` must be writable.
enum LuconcStatus luconc_gaussian_expansion(double alpha, double epsilon_std, double *out);

// Optimal l2 concentration of the mixture `N(-theta, sigma^2 I)/2 + N(theta, sigma^2 I)/2`.
//
// # Safety
// `theta` must hold `n` values; `out` must be writable.
enum LuconcStatus luconc_analytic_concentration(const double *theta,
                                                size_t n,
                                                double sigma,
                                                double alpha,
                                                double epsilon,
                                                double *out);

// Standard normal CDF.
double luconc_normal_cdf(double x);

// Standard normal quantile; NaN outside `[0, 1]`.
double luconc_normal_quantile(double p);

// Metric name for diagnostics (`"l2"` or `"linf"`); static storage.
const char *luconc_metric_name(enum LuconcMetric m);

#endif  /* LUCONC_H */
