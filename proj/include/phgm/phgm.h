#ifndef PHGM_H
#define PHGM_H

/* C interface to the persistent-homology latent position library.
 * Every function returns a phgm_status; on failure phgm_last_error() holds a
 * message for the calling thread. Strings returned through char** must be
 * released with phgm_free_string. Handles are opaque. */

#include <stddef.h>
#include <stdint.h>

#if defined(PHGM_BUILDING_LIBRARY)
#define PHGM_API __attribute__((visibility("default")))
#else
#define PHGM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum phgm_status {
  PHGM_OK = 0,
  PHGM_INVALID_ARGUMENT = 1,
  PHGM_PARSE = 2,
  PHGM_IO = 3,
  PHGM_NON_FINITE = 4,
  PHGM_NOT_SYMMETRIC = 5,
  PHGM_ISOLATED_VERTEX = 6,
  PHGM_NO_SOLUTION = 7,
  PHGM_MISMATCHED_INFINITE_BARS = 8,
  PHGM_INCONSISTENT_BAR = 9,
  PHGM_NON_POSITIVE_RATE = 10,
  PHGM_DEGENERATE_BAR = 11,
  PHGM_ZERO_CONSENSUS = 12,
  PHGM_SHAPE_MISMATCH = 13,
  PHGM_INFEASIBLE_START = 14,
  PHGM_ALL_DIVERGENT = 15,
  PHGM_ZERO_VARIANCE = 16,
  PHGM_NOT_HIERARCHICAL = 17,
  PHGM_BAD_K = 18,
  PHGM_INTERNAL = 99
} phgm_status;

typedef enum phgm_input_kind {
  PHGM_INPUT_POINTS = 0,
  PHGM_INPUT_DISTANCES = 1,
  PHGM_INPUT_CONNECTIVITY = 2
} phgm_input_kind;

typedef struct phgm_features phgm_features;
typedef struct phgm_dataset phgm_dataset;
typedef struct phgm_fit phgm_fit;

PHGM_API const char* phgm_version(void);
PHGM_API const char* phgm_status_name(phgm_status status);
PHGM_API const char* phgm_last_error(void);
PHGM_API void phgm_free_string(char* s);

/* Features of one subject. data is row-major rows x cols. options_json may be
 * NULL or a JSON object with death_scale, max_radius, embed_dim, source. */
PHGM_API phgm_status phgm_features_extract(const double* data, size_t rows, size_t cols,
                                           phgm_input_kind kind, const char* options_json,
                                           phgm_features** out);
PHGM_API phgm_status phgm_features_read(const char* path, phgm_features** out);
PHGM_API phgm_status phgm_features_write(const phgm_features* f, const char* path);
PHGM_API phgm_status phgm_features_to_json(const phgm_features* f, char** out);
PHGM_API phgm_status phgm_features_from_json(const char* text, phgm_features** out);
PHGM_API int phgm_features_n(const phgm_features* f);
PHGM_API size_t phgm_features_loop_count(const phgm_features* f);
/* Log-likelihood of the features at a row-major n x n rate matrix. */
PHGM_API phgm_status phgm_features_loglik(const phgm_features* f, const double* lambda, size_t n,
                                          double* out);
PHGM_API void phgm_features_free(phgm_features* f);

/* Bottleneck distance between two subjects' diagrams in dimension dim. */
PHGM_API phgm_status phgm_bottleneck_distance(const phgm_features* a, const phgm_features* b,
                                              int dim, double* out);

/* H0 features simulated from a row-major n x n rate matrix. out_array must
 * have room for subjects handles. */
PHGM_API phgm_status phgm_simulate_from_model(const double* lambda, size_t n, int subjects,
                                              uint64_t seed, phgm_features** out_array);

PHGM_API phgm_status phgm_dataset_new(phgm_dataset** out);
/* Copies f into the group with the given label (created on first use). */
PHGM_API phgm_status phgm_dataset_add(phgm_dataset* d, const char* group, const phgm_features* f);
PHGM_API phgm_status phgm_dataset_read(const char* manifest_path, phgm_dataset** out);
PHGM_API size_t phgm_dataset_groups(const phgm_dataset* d);
PHGM_API size_t phgm_dataset_subjects(const phgm_dataset* d);
PHGM_API void phgm_dataset_free(phgm_dataset* d);

/* Warm start followed by NUTS. options_json: model and sampler options. */
PHGM_API phgm_status phgm_fit_run(const phgm_dataset* d, const char* options_json, phgm_fit** out);
/* Warm start only; the fit then holds a single draw at the mode. */
PHGM_API phgm_status phgm_fit_map(const phgm_dataset* d, const char* options_json, phgm_fit** out);
PHGM_API phgm_status phgm_fit_write_draws(const phgm_fit* f, const char* path);
PHGM_API phgm_status phgm_fit_read_draws(const char* path, phgm_fit** out);
PHGM_API int phgm_fit_n(const phgm_fit* f);
PHGM_API int phgm_fit_groups(const phgm_fit* f);
PHGM_API size_t phgm_fit_draws(const phgm_fit* f);
/* Posterior mean of the rate matrix of a group into out (n * n, row-major). */
PHGM_API phgm_status phgm_fit_lambda_mean(const phgm_fit* f, int group, double* out);
PHGM_API void phgm_fit_free(phgm_fit* f);

/* Selected vertices (ascending) into out; count receives their number. */
PHGM_API phgm_status phgm_fdr_select(const double* probs, size_t len, double level, int* out,
                                     size_t* count);

/* Command-level entry points used by the CLI. Each writes its files under
 * out_dir and returns a JSON summary through summary_json (may be NULL). */
PHGM_API phgm_status phgm_cmd_simulate(const char* kind, const char* options_json,
                                       const char* out_dir, char** summary_json);
PHGM_API phgm_status phgm_cmd_extract(const char* options_json, const char* out_dir,
                                      char** summary_json);
PHGM_API phgm_status phgm_cmd_fit(const char* options_json, const char* out_dir,
                                  char** summary_json);
PHGM_API phgm_status phgm_cmd_diagnose(const char* options_json, const char* out_dir,
                                       char** summary_json);
PHGM_API phgm_status phgm_cmd_analyze(const char* options_json, const char* out_dir,
                                      char** summary_json);
PHGM_API phgm_status phgm_cmd_classify(const char* options_json, const char* out_dir,
                                       char** summary_json);
PHGM_API phgm_status phgm_cmd_bottleneck_knn(const char* options_json, const char* out_dir,
                                             char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
