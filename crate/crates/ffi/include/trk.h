#ifndef TRK_H
#define TRK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum TrkStatus {
  TRK_STATUS_OK = 0,
  TRK_STATUS_NULL_POINTER = 1,
  TRK_STATUS_INVALID_ARGUMENT = 2,
  TRK_STATUS_DIMENSION_MISMATCH = 3,
  TRK_STATUS_DUPLICATE_POINTS = 4,
  TRK_STATUS_NUMERICAL_FAILURE = 5,
  TRK_STATUS_FIT_FAILED = 6,
  TRK_STATUS_TUNING_FAILED = 7,
  TRK_STATUS_SINGULAR_CONFIGURATION = 8,
  TRK_STATUS_VERSION_MISMATCH = 9,
  TRK_STATUS_DESERIALIZATION = 10,
  TRK_STATUS_UNKNOWN_BENCHMARK = 11,
  TRK_STATUS_IO = 12,
  TRK_STATUS_PANIC = 13,
} TrkStatus;

typedef enum TrkBasis {
  TRK_BASIS_CONSTANT = 0,
  TRK_BASIS_LINEAR = 1,
} TrkBasis;

typedef enum TrkPenalty {
  TRK_PENALTY_NONE = 0,
  TRK_PENALTY_LASSO = 1,
  TRK_PENALTY_RIDGE = 2,
  TRK_PENALTY_ELASTIC_NET = 3,
} TrkPenalty;

// Training data.
typedef struct TrkDataset TrkDataset;

// A fitted predictor.
typedef struct TrkModel TrkModel;

// Optimizer settings. `theta_init` is broadcast to every dimension.
typedef struct TrkFitOptions {
  double theta_init;
  double theta_lower;
  double theta_upper;
  size_t max_iters;
  double epsilon;
} TrkFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *trk_last_error_message(void);

struct TrkFitOptions trk_fit_options_default(void);

// Copies `n x d` inputs `x` and `n` responses `y` into a new dataset.
//
// # Safety
// `x` must point to `n * d` doubles, `y` to `n` doubles and `out` to
// writable storage for one pointer.
enum TrkStatus trk_dataset_new(const double *x,
                               size_t n,
                               size_t d,
                               const double *y,
                               struct TrkDataset **out);

// # Safety
// `dataset` must be null or a handle from `trk_dataset_new` not yet freed.
void trk_dataset_free(struct TrkDataset *dataset);

// Fits a model. `coefficient` is the penalty weight of `penalty`; `alpha` is
// used by the elastic net only. `options` may be null for the defaults.
//
// # Safety
// `dataset` must be a live handle and `out` writable.
enum TrkStatus trk_fit(const struct TrkDataset *dataset,
                       enum TrkBasis basis,
                       enum TrkPenalty penalty,
                       double coefficient,
                       double alpha,
                       const struct TrkFitOptions *options,
                       struct TrkModel **out);

// # Safety
// `model` must be null or a live model handle.
void trk_model_free(struct TrkModel *model);

// Input dimension of `model`, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live model handle.
size_t trk_model_dim(const struct TrkModel *model);

// Copies the fitted `theta` (normalized input space) into `out[0..d]`.
//
// # Safety
// `model` must be live and `out` must hold `d` doubles.
enum TrkStatus trk_model_theta(const struct TrkModel *model, double *out, size_t d);

// Predicts at the `d`-vector `x`.
//
// # Safety
// `model` must be live, `x` must hold `d` doubles and `out` be writable.
enum TrkStatus trk_model_predict(const struct TrkModel *model,
                                 const double *x,
                                 size_t d,
                                 double *out);

// Predictive mean squared error at the `d`-vector `x`.
//
// # Safety
// As for [`trk_model_predict`].
enum TrkStatus trk_model_predict_mse(const struct TrkModel *model,
                                     const double *x,
                                     size_t d,
                                     double *out);

// Serializes `model` to a JSON document; release it with `trk_string_free`.
//
// # Safety
// `model` must be live and `out` writable.
enum TrkStatus trk_model_to_json(const struct TrkModel *model, char **out);

// Parses a document produced by `trk_model_to_json`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum TrkStatus trk_model_from_json(const char *json, struct TrkModel **out);

// # Safety
// `s` must be null or a string returned by this library.
void trk_string_free(char *s);

// Evaluates the registered benchmark `name` at the `d`-vector `x`.
//
// # Safety
// `name` must be NUL-terminated, `x` must hold `d` doubles and `out` be
// writable.
enum TrkStatus trk_benchmark_eval(const char *name, const double *x, size_t d, double *out);

// Writes an `n x d` Latin Hypercube design in `[0, 1)^d` to `out`.
//
// # Safety
// `out` must hold `n * d` doubles.
enum TrkStatus trk_lhs(size_t n, size_t d, uint64_t seed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRK_H */
