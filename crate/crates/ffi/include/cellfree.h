#ifndef CELLFREE_H
#define CELLFREE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_ARGUMENT = 2,
  CF_STATUS_CONFIG = 3,
  CF_STATUS_IO = 4,
  CF_STATUS_PANIC = 5,
} CfStatus;

typedef enum CfMethod {
  CF_METHOD_CLOSED_FORM = 0,
  CF_METHOD_GRID = 1,
  CF_METHOD_ALTERNATING = 2,
} CfMethod;

/**
 * Opaque system configuration.
 */
typedef struct CfConfig CfConfig;

/**
 * Opaque per-drop large-scale fading matrix.
 */
typedef struct CfFading CfFading;

/**
 * Opaque equal-fading model.
 */
typedef struct CfModel CfModel;

typedef struct CfPlanOptimum {
  double n_star;
  size_t m_of_star;
  double ee_star;
  enum CfMethod method;
} CfPlanOptimum;

typedef struct CfNOptimum {
  /**
   * `false` when no fiber links are present and `N` is irrelevant.
   */
  bool has_value;
  double n_star;
  bool fallback_used;
} CfNOptimum;

typedef struct CfEvaluation {
  double sum_rate;
  double p_net;
  double omega;
  double ee;
} CfEvaluation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *cf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cf_version(void);

/**
 * Default (table) configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CfStatus cf_config_default(struct CfConfig **out);

/**
 * Load a TOML configuration file; `"default"` gives the defaults.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CfStatus cf_config_load(const char *path, struct CfConfig **out);

/**
 * Parse a configuration from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum CfStatus cf_config_from_toml(const char *text, struct CfConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a handle from this library not yet freed.
 */
void cf_config_free(struct CfConfig *cfg);

/**
 * Noise power `δ²` in Watt.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum CfStatus cf_config_noise_power(const struct CfConfig *cfg, double *out);

/**
 * Equal-fading model; `β` is resolved with `seed` when not configured.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum CfStatus cf_model_new(const struct CfConfig *cfg, uint64_t seed, struct CfModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library not yet freed.
 */
void cf_model_free(struct CfModel *model);

/**
 * Energy efficiency in bits/Joule with `m_of` fiber links of coefficient `n`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CfStatus cf_ee_symmetric(const struct CfModel *model, double n, size_t m_of, double *out);

/**
 * Exhaustive search over `N ∈ lo:hi:step` and every fiber count.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CfStatus cf_grid_search(const struct CfModel *model,
                             double n_lo,
                             double n_hi,
                             double n_step,
                             struct CfPlanOptimum *out);

/**
 * Closed-form optimal fiber count at coefficient `n`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CfStatus cf_optimal_m_of(const struct CfModel *model, double n, size_t *out);

/**
 * Closed-form optimal coefficient for `m_of` fiber links, `N >= 1`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CfStatus cf_optimal_n(const struct CfModel *model, size_t m_of, struct CfNOptimum *out);

/**
 * Alternate the two closed forms from `(init_n, init_m_of)`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CfStatus cf_alternating_optimize(const struct CfModel *model,
                                      double init_n,
                                      size_t init_m_of,
                                      size_t max_iters,
                                      struct CfPlanOptimum *out);

/**
 * Large-scale fading of random drop `drop_index` under `seed`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum CfStatus cf_fading_drop(const struct CfConfig *cfg,
                             uint64_t seed,
                             size_t drop_index,
                             struct CfFading **out);

/**
 * # Safety
 * `fading` must be NULL or a handle from this library not yet freed.
 */
void cf_fading_free(struct CfFading *fading);

/**
 * `β` between AP `ap` and UE `ue`.
 *
 * # Safety
 * `fading` must be a live handle and `out` writable.
 */
enum CfStatus cf_fading_get(const struct CfFading *fading, size_t ap, size_t ue, double *out);

/**
 * Rates, power and EE of a drop with the last `m_of` APs on fiber.
 *
 * # Safety
 * `cfg` and `fading` must be live handles and `out` writable.
 */
enum CfStatus cf_evaluate_plan(const struct CfConfig *cfg,
                               const struct CfFading *fading,
                               double n,
                               size_t m_of,
                               struct CfEvaluation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CELLFREE_H */
