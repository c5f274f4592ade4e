#ifndef SCALEKIT_H
#define SCALEKIT_H

/* Generated by cbindgen from the scalekit-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/* Opaque handles; create and destroy through the functions below. */
typedef struct SkNetwork SkNetwork;
typedef struct SkRuntimeModel SkRuntimeModel;

/**
 * Status code of every fallible call.
 */
typedef enum SkStatus {
  SkOk = 0,
  SkNullPointer = 1,
  SkInvalidUtf8 = 2,
  SkParseError = 3,
  SkValidationError = 4,
  SkUsageError = 5,
  SkUnknownModel = 6,
  SkExhausted = 7,
  SkInternalError = 8,
} SkStatus;

/**
 * Complexity totals (also used for multiplier triples).
 */
typedef struct SkComplexity {
  double flops;
  double params;
  double acts;
} SkComplexity;

/**
 * A scaling strategy as exponents; `alpha` is meaningful only when
 * `has_alpha` is true.
 */
typedef struct SkPolicy {
  double e_d;
  double e_w;
  double e_r;
  double alpha;
  bool has_alpha;
} SkPolicy;

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sk_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *sk_version(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `text` must have been returned by a `scalekit` function and not freed yet.
 */
void sk_string_free(char *text);

/**
 * Parses a canonical network document.
 *
 * # Safety
 * `json` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_network_from_json(const char *json, SkNetwork **out);

/**
 * Builds one of the built-in registry models by name.
 *
 * # Safety
 * `name` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_network_from_registry(const char *name, SkNetwork **out);

/**
 * Destroys a network handle. Null is a no-op.
 *
 * # Safety
 * `network` must have come from this library and not been freed yet.
 */
void sk_network_free(SkNetwork *network);

/**
 * Serializes a network back to its canonical document.
 *
 * # Safety
 * `network` must be a live handle; `out` must be writable.
 */
enum SkStatus sk_network_to_json(const SkNetwork *network, char **out);

/**
 * Validates a network. Returns `SkOk` when valid; otherwise
 * `SkValidationError` with a newline-separated violation list in `out_report`
 * (which may be null if the caller does not want the text).
 *
 * # Safety
 * `network` must be a live handle; `out_report` must be writable or null.
 */
enum SkStatus sk_network_validate(const SkNetwork *network, char **out_report);

/**
 * Computes flop/parameter/activation totals of a network.
 *
 * # Safety
 * `network` must be a live handle; `out` must be writable.
 */
enum SkStatus sk_network_complexity(const SkNetwork *network, struct SkComplexity *out);

/**
 * Looks up a named strategy (d, w, r, dw, wr, dr, dwr, dWr).
 *
 * # Safety
 * `name` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_policy_from_name(const char *name, struct SkPolicy *out);

/**
 * Builds the alpha-family strategy for `alpha` in [0, 1].
 *
 * # Safety
 * `out` must be writable.
 */
enum SkStatus sk_fast_policy(double alpha, struct SkPolicy *out);

/**
 * Predicted complexity multipliers of scaling by `s` under `policy`.
 *
 * # Safety
 * `policy` and `out` must be valid pointers.
 */
enum SkStatus sk_predicted_multipliers(const struct SkPolicy *policy,
                                       double s,
                                       struct SkComplexity *out);

/**
 * Scales a network by flop factor `s` and discretizes the result into a new
 * handle.
 *
 * # Safety
 * `network` must be a live handle; `policy` and `out` must be valid.
 */
enum SkStatus sk_network_scale(const SkNetwork *network,
                               const struct SkPolicy *policy,
                               double s,
                               SkNetwork **out);

/**
 * Complexity of the continuous (unquantized) scaled network, without
 * materializing it.
 *
 * # Safety
 * `network` must be a live handle; `policy` and `out` must be valid.
 */
enum SkStatus sk_scaled_complexity(const SkNetwork *network,
                                   const struct SkPolicy *policy,
                                   double s,
                                   struct SkComplexity *out);

/**
 * Fits the linear epoch-time model from measurement CSV text (header
 * `model,strategy,flops,params,acts,epoch_time_min,batch_size`).
 *
 * # Safety
 * `csv_text` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_runtime_model_fit_csv(const char *csv_text, bool with_flops, SkRuntimeModel **out);

/**
 * Parses a fitted runtime model from its JSON document.
 *
 * # Safety
 * `json` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_runtime_model_from_json(const char *json, SkRuntimeModel **out);

/**
 * Serializes a runtime model to JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SkStatus sk_runtime_model_to_json(const SkRuntimeModel *model, char **out);

/**
 * Destroys a runtime-model handle. Null is a no-op.
 *
 * # Safety
 * `model` must have come from this library and not been freed yet.
 */
void sk_runtime_model_free(SkRuntimeModel *model);

/**
 * Predicts epoch minutes for a network under a fitted model. `clamped` is
 * set when a negative linear value was clamped to zero; it may be null.
 *
 * # Safety
 * `model` and `network` must be live handles; `minutes` must be writable;
 * `clamped` must be writable or null.
 */
enum SkStatus sk_predict_minutes(const SkRuntimeModel *model,
                                 const SkNetwork *network,
                                 double *minutes,
                                 bool *clamped);

/**
 * Samples RegNet models of the given kind ("Y" or "Z") inside
 * `target_flops * (1 +/- tolerance)` using the default design-space ranges,
 * and returns a JSON array of `{name, params, flops, params_count, acts}`
 * objects. Deterministic for a fixed seed.
 *
 * # Safety
 * `kind` must be a valid nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_sample_regnet(const char *kind,
                               double target_flops,
                               double tolerance,
                               size_t count,
                               uint64_t seed,
                               char **out);

#endif  /* SCALEKIT_H */
