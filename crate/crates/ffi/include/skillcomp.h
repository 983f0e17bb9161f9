#ifndef SKILLCOMP_H
#define SKILLCOMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Distribution family selector for [`skc_distribution_new`].
typedef enum SkcDistributionKind {
  SKC_DISTRIBUTION_KIND_UNIFORM = 0,
  SKC_DISTRIBUTION_KIND_ZIPF = 1,
  SKC_DISTRIBUTION_KIND_BINNED_ZIPF = 2,
} SkcDistributionKind;

// Result code of every fallible call.
typedef enum SkcStatus {
  SKC_STATUS_OK = 0,
  SKC_STATUS_NULL_POINTER = 1,
  SKC_STATUS_INVALID_ARGUMENT = 2,
  SKC_STATUS_DIVERGED = 3,
  SKC_STATUS_PARSE = 4,
  SKC_STATUS_GENERATION = 5,
  SKC_STATUS_CONFIG = 6,
  SKC_STATUS_IO = 7,
  SKC_STATUS_PANIC = 8,
} SkcStatus;

// Opaque skill distribution.
typedef struct SkcDistribution SkcDistribution;

// Opaque result of a finished experiment run.
typedef struct SkcRunReport SkcRunReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if it succeeded.
// The pointer stays valid until the next call on the same thread.
const char *skc_last_error(void);

// Library version as a static NUL-terminated string.
const char *skc_version(void);

// Builds a distribution over `d` skills in identity rank order. `alpha` is
// ignored for the uniform family and `m` is used only by the binned family.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SkcStatus skc_distribution_new(enum SkcDistributionKind kind,
                                    size_t d,
                                    double alpha,
                                    size_t m,
                                    struct SkcDistribution **out);

// # Safety
// `dist` must be null or a handle from [`skc_distribution_new`] not yet freed.
void skc_distribution_free(struct SkcDistribution *dist);

// Number of skills, or 0 for a null handle.
//
// # Safety
// `dist` must be null or a live handle.
size_t skc_distribution_len(const struct SkcDistribution *dist);

// Copies the per-skill probabilities into `out[0..len]`; `len` must equal the
// number of skills.
//
// # Safety
// `dist` must be a live handle and `out` must point to `len` writable doubles.
enum SkcStatus skc_distribution_weights(const struct SkcDistribution *dist,
                                        double *out,
                                        size_t len);

// Closed-form population loss of the `k`-fold product model at `w`.
//
// # Safety
// `w` and `wstar` must point to `len` doubles, `out` to one writable double.
enum SkcStatus skc_population_loss(const struct SkcDistribution *dist,
                                   const double *w,
                                   const double *wstar,
                                   size_t len,
                                   size_t k,
                                   double *out);

// Closed-form population gradient, written to `out[0..len]`.
//
// # Safety
// `w`, `wstar` and `out` must each point to `len` doubles.
enum SkcStatus skc_population_gradient(const struct SkcDistribution *dist,
                                       const double *w,
                                       const double *wstar,
                                       size_t len,
                                       size_t k,
                                       double *out);

// Composes two permutations of {1..5} given as one-line images: `g` first, then `h`.
//
// # Safety
// `g`, `h` and `out` must each point to 5 bytes.
enum SkcStatus skc_s5_compose(const uint8_t *g, const uint8_t *h, uint8_t *out);

// Evaluates an integer expression over `+`, `-` and `*` with the usual precedence.
//
// # Safety
// `expr` must be a NUL-terminated string and `out` a writable `int64_t`.
enum SkcStatus skc_eval_arithmetic(const char *expr, int64_t *out);

// Runs the experiment described by a TOML config file. `output_root` may be
// null to use the environment or config default; `parallelism` of 0 means no cap.
// A run whose trials diverged still succeeds; check [`skc_run_report_exit_code`].
//
// # Safety
// `config_path` must be a NUL-terminated string, `output_root` null or one,
// and `out` a valid pointer to writable storage for one handle.
enum SkcStatus skc_run_experiment(const char *config_path,
                                  const char *output_root,
                                  size_t parallelism,
                                  struct SkcRunReport **out);

// # Safety
// `report` must be null or a handle from [`skc_run_experiment`] not yet freed.
void skc_run_report_free(struct SkcRunReport *report);

// Output directory of the run, valid while the handle lives.
//
// # Safety
// `report` must be null or a live handle.
const char *skc_run_report_dir(const struct SkcRunReport *report);

// Process exit code the CLI would use for this run: 0, or 2 if any trial diverged.
//
// # Safety
// `report` must be null or a live handle.
int32_t skc_run_report_exit_code(const struct SkcRunReport *report);

// Number of artifacts listed in the run manifest.
//
// # Safety
// `report` must be null or a live handle.
size_t skc_run_report_artifact_count(const struct SkcRunReport *report);

// Relative path of artifact `index`, or null when out of range.
//
// # Safety
// `report` must be null or a live handle.
const char *skc_run_report_artifact(const struct SkcRunReport *report, size_t index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKILLCOMP_H */
