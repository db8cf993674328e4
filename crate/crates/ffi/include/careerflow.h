/* Generated by cbindgen from src/lib.rs; do not edit. */

#ifndef CAREERFLOW_H
#define CAREERFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_ARGUMENT = 1,
  CF_STATUS_INVALID_UTF8 = 2,
  CF_STATUS_IO = 3,
  CF_STATUS_PARSE = 4,
  CF_STATUS_INVALID_INPUT = 5,
  CF_STATUS_NUMERIC = 6,
  CF_STATUS_PANIC = 7,
} CfStatus;

/**
 * Opaque validated corpus.
 */
typedef struct CfCorpus CfCorpus;

/**
 * Opaque logistic fit.
 */
typedef struct CfLogitFit CfLogitFit;

/**
 * Sample filter thresholds; country and discipline lists keep their
 * defaults (OECD members, 16 STEMM disciplines).
 */
typedef struct CfFilterConfig {
  uint32_t min_publications;
  int32_t min_academic_age;
  int32_t max_academic_age;
  int32_t active_window_years;
} CfFilterConfig;

typedef struct CfCorpusCounts {
  size_t journals;
  size_t authors;
  size_t publications;
  /**
   * Input lines rejected during parsing.
   */
  size_t rejects;
} CfCorpusCounts;

typedef struct CfFilterReport {
  size_t total;
  size_t removed_country;
  size_t removed_discipline;
  size_t removed_nonoccasional;
  size_t removed_academic_age;
  size_t removed_active;
  size_t retained;
} CfFilterReport;

typedef struct CfFitSummary {
  size_t n_used;
  size_t n_coefficients;
  double log_likelihood;
  double null_log_likelihood;
  double pseudo_r2;
  bool converged;
  size_t iterations;
} CfFitSummary;

typedef struct CfCoefficient {
  double estimate;
  double std_error;
  double odds_ratio;
  double ci_lower;
  double ci_upper;
  double p_value;
} CfCoefficient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *cf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cf_version(void);

/**
 * Default filter thresholds.
 */
struct CfFilterConfig cf_filter_config_default(void);

/**
 * Reads the three JSON Lines input files. Schema-violating lines are
 * skipped and counted; unreadable files fail with `CF_STATUS_IO`.
 *
 * # Safety
 * Paths must be NUL-terminated strings; `out` must be writable.
 */
enum CfStatus cf_corpus_load(const char *publications,
                             const char *journals,
                             const char *authors,
                             int32_t reference_year,
                             struct CfCorpus **out);

/**
 * Reads a cache written by `careerflow ingest`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CfStatus cf_corpus_load_cache(const char *path, struct CfCorpus **out);

/**
 * # Safety
 * `corpus` must come from a `cf_corpus_load*` call and not be freed twice.
 */
void cf_corpus_free(struct CfCorpus *corpus);

/**
 * # Safety
 * `corpus` must be a live handle; `out` must be writable.
 */
enum CfStatus cf_corpus_counts(const struct CfCorpus *corpus, struct CfCorpusCounts *out);

/**
 * Applies the sample filter. `config` may be null for the defaults.
 *
 * # Safety
 * `corpus` must be a live handle; `config` null or readable; `out` writable.
 */
enum CfStatus cf_corpus_filter(const struct CfCorpus *corpus,
                               const struct CfFilterConfig *config,
                               struct CfFilterReport *out);

/**
 * Runs the full analysis into `out_dir`. `ptypes` holds productivity type
 * numbers 1-4 (null/0 entries: all four); `config` may be null for the
 * default filter; `workers` 0 uses every core. Writes the number of output
 * files (manifest excluded) to `n_files` when it is not null.
 *
 * # Safety
 * `corpus` must be a live handle, `out_dir` NUL-terminated, `ptypes`
 * readable for `n_ptypes` entries.
 */
enum CfStatus cf_analyze(const struct CfCorpus *corpus,
                         const char *out_dir,
                         const struct CfFilterConfig *config,
                         const uint32_t *ptypes,
                         size_t n_ptypes,
                         size_t workers,
                         size_t *n_files);

/**
 * 20/60/20 classes of one cohort: 0 bottom, 1 middle, 2 top. Cohorts below
 * five members are all middle and set `too_small` (if not null).
 *
 * # Safety
 * `values` readable and `classes` writable for `n` entries.
 */
enum CfStatus cf_assign_classes(const double *values, size_t n, uint8_t *classes, bool *too_small);

/**
 * Row percentage in tenths of a percent, rounded half away from zero
 * (36,373 of 65,023 gives 559).
 *
 * # Safety
 * `out` must be writable.
 */
enum CfStatus cf_percent_tenths(uint64_t count, uint64_t size, uint64_t *out);

/**
 * Maximum-likelihood logistic fit of `y` (0/1, length `n`) on the
 * row-major `n x p` matrix `x`; an intercept is added.
 *
 * # Safety
 * `x` readable for `n * p` values, `y` for `n`; `out` writable.
 */
enum CfStatus cf_logit_fit(const double *x,
                           const uint8_t *y,
                           size_t n,
                           size_t p,
                           struct CfLogitFit **out);

/**
 * # Safety
 * `fit` must be a live handle; `out` writable.
 */
enum CfStatus cf_logit_summary(const struct CfLogitFit *fit, struct CfFitSummary *out);

/**
 * Coefficient `j`: 0 is the intercept, `1..=p` the predictors in column
 * order. Intercept bounds are on the log-odds scale.
 *
 * # Safety
 * `fit` must be a live handle; `out` writable.
 */
enum CfStatus cf_logit_coefficient(const struct CfLogitFit *fit,
                                   size_t j,
                                   struct CfCoefficient *out);

/**
 * # Safety
 * `fit` must come from `cf_logit_fit` and not be freed twice.
 */
void cf_logit_free(struct CfLogitFit *fit);

/**
 * Inverse-correlation diagonal of the `p` columns of the row-major
 * `n x p` matrix `x`, written to `out` (`p` values).
 *
 * # Safety
 * `x` readable for `n * p` values; `out` writable for `p`.
 */
enum CfStatus cf_vif(const double *x, size_t n, size_t p, double *out);

/**
 * Writes a synthetic corpus (publications/journals/authors.jsonl) into
 * `out_dir`, all other generator settings at their defaults.
 *
 * # Safety
 * `out_dir` must be a NUL-terminated string.
 */
enum CfStatus cf_synth_write(const char *out_dir,
                             uint64_t seed,
                             size_t n_authors,
                             size_t n_disciplines,
                             double rho,
                             int32_t reference_year);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAREERFLOW_H */
