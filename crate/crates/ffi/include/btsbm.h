#ifndef BTSBM_H
#define BTSBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtsbmStatus {
  BTSBM_STATUS_OK = 0,
  BTSBM_STATUS_NULL_POINTER = 1,
  BTSBM_STATUS_INVALID_CONFIG = 2,
  BTSBM_STATUS_INVALID_DATA = 3,
  BTSBM_STATUS_NUMERIC = 4,
  BTSBM_STATUS_IO = 5,
  BTSBM_STATUS_BUFFER_TOO_SMALL = 6,
  BTSBM_STATUS_OUT_OF_RANGE = 7,
  BTSBM_STATUS_PANIC = 8,
} BtsbmStatus;

/**
 * Opaque comparison data.
 */
typedef struct BtsbmData BtsbmData;

/**
 * Opaque posterior trace.
 */
typedef struct BtsbmTrace BtsbmTrace;

/**
 * Sampler settings. A non-positive `b` selects the aligned rate
 * `exp(digamma(a))`.
 */
typedef struct BtsbmConfig {
  size_t total_iters;
  size_t burn_in;
  size_t thin;
  size_t n_chains;
  uint64_t seed;
  double a;
  double b;
  double gamma;
  /**
   * Nonzero to renormalize strengths inside the chain every sweep.
   */
  uint8_t rescale_in_chain;
} BtsbmConfig;

typedef struct BtsbmComparison {
  double elpd_btsbm;
  double se_btsbm;
  double elpd_bt;
  double se_bt;
  double delta;
  double se_delta;
  size_t n_bad_k_btsbm;
  size_t n_bad_k_bt;
} BtsbmComparison;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *btsbm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *btsbm_version(void);

/**
 * Build data from `len` results; `counts` may be null (each row counts once).
 *
 * # Safety
 * `winners` and `losers` (and `counts` if not null) must point to `len`
 * readable values; `out` must be writable.
 */
enum BtsbmStatus btsbm_data_from_results(size_t n_items,
                                         const uint32_t *winners,
                                         const uint32_t *losers,
                                         const uint32_t *counts,
                                         size_t len,
                                         struct BtsbmData **out);

/**
 * Load a `winner,loser[,count]` CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BtsbmStatus btsbm_data_load_csv(const char *path, struct BtsbmData **out);

/**
 * # Safety
 * `data` must be a live handle; outputs must be writable.
 */
enum BtsbmStatus btsbm_data_shape(const struct BtsbmData *data, size_t *n_items, size_t *n_edges);

/**
 * # Safety
 * `data` must be null or a handle not yet freed.
 */
void btsbm_data_free(struct BtsbmData *data);

/**
 * Prior probabilities of K = 1..n written to `out[0..n]`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum BtsbmStatus btsbm_prior_pmf(size_t n, double gamma, double *out, size_t len);

/**
 * # Safety
 * `mean` and `var` must be writable.
 */
enum BtsbmStatus btsbm_prior_moments(size_t n, double gamma, double *mean, double *var);

/**
 * Defaults: 30000 sweeps, 10000 burn-in, thin 1, one chain, seed 1,
 * a = 2 with the aligned rate, gamma = 0.8, output-only rescaling.
 */
struct BtsbmConfig btsbm_config_default(void);

/**
 * Run the clustered-model sampler.
 *
 * # Safety
 * `data` must be a live handle, `config` readable, `out` writable.
 */
enum BtsbmStatus btsbm_fit(const struct BtsbmData *data,
                           const struct BtsbmConfig *config,
                           struct BtsbmTrace **out);

/**
 * Fit both models and compare them by PSIS-LOO; the standard error of the
 * difference uses the halved formula.
 *
 * # Safety
 * `data` must be a live handle, `config` readable, `out` writable.
 */
enum BtsbmStatus btsbm_compare(const struct BtsbmData *data,
                               const struct BtsbmConfig *config,
                               struct BtsbmComparison *out);

/**
 * # Safety
 * `trace` must be a live handle; outputs must be writable.
 */
enum BtsbmStatus btsbm_trace_shape(const struct BtsbmTrace *trace,
                                   size_t *n_draws,
                                   size_t *n_items,
                                   size_t *max_k);

/**
 * Block labels (0-based) of one draw into `labels[0..n_items]`.
 *
 * # Safety
 * `trace` must be a live handle; `labels` must hold `len` values.
 */
enum BtsbmStatus btsbm_trace_labels(const struct BtsbmTrace *trace,
                                    size_t draw,
                                    uint32_t *labels,
                                    size_t len);

/**
 * Block strengths of one draw (geometric mean one) into `out[0..K]`; K is
 * written to `k`.
 *
 * # Safety
 * `trace` must be a live handle; `out` must hold `len` values; `k` writable.
 */
enum BtsbmStatus btsbm_trace_strengths(const struct BtsbmTrace *trace,
                                       size_t draw,
                                       double *out,
                                       size_t len,
                                       size_t *k);

/**
 * Posterior probabilities of K = 1..max_k into `out[0..max_k]`, plus the
 * mode (smaller K on ties).
 *
 * # Safety
 * `trace` must be a live handle; `out` must hold `len` values; `mode` writable.
 */
enum BtsbmStatus btsbm_trace_k_pmf(const struct BtsbmTrace *trace,
                                   double *out,
                                   size_t len,
                                   size_t *mode);

/**
 * Partition minimizing the posterior expected variation of information,
 * as 0-based labels in `labels[0..n_items]`.
 *
 * # Safety
 * `trace` must be a live handle; `labels` must hold `len` values; `k` and
 * `expected_vi` writable.
 */
enum BtsbmStatus btsbm_trace_consensus(const struct BtsbmTrace *trace,
                                       uint32_t *labels,
                                       size_t len,
                                       size_t *k,
                                       double *expected_vi);

/**
 * # Safety
 * `trace` must be null or a handle not yet freed.
 */
void btsbm_trace_free(struct BtsbmTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BTSBM_H */
