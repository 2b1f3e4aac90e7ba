/* C interface to the facetag library. Every function returns FT_OK or an
 * error status; the message of the last failure on the calling thread is
 * available from ft_last_error(). Strings returned through char** belong to
 * the caller and are released with ft_free(). Handles are released with
 * their own *_free function; passing NULL to any *_free is a no-op. */
#ifndef FACETAG_FACETAG_H
#define FACETAG_FACETAG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FT_API __declspec(dllexport)
#else
#define FT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ft_status {
  FT_OK = 0,
  FT_ERR_INVALID_ARGUMENT = 1,
  FT_ERR_PARSE = 2,
  FT_ERR_UNKNOWN_LABEL = 3,
  FT_ERR_VALIDATION = 4,
  FT_ERR_IO = 5,
  FT_ERR_PROTOCOL = 6,
  FT_ERR_TIMEOUT = 7,
  FT_ERR_MISSING_RESPONSE = 8,
  FT_ERR_NON_CONVERGENCE = 9,
  FT_ERR_INTERNAL = 10
} ft_status;

typedef struct ft_corpus ft_corpus;
typedef struct ft_examples ft_examples;
typedef struct ft_model ft_model;
typedef struct ft_predictions ft_predictions;

FT_API const char* ft_version(void);
FT_API const char* ft_status_name(ft_status status);
FT_API const char* ft_last_error(void);
FT_API void ft_free(void* p);

/* Run configuration as JSON. config_path and overrides_json may be NULL;
 * overrides win over the file. The result has every field filled in. */
FT_API ft_status ft_config_resolve(const char* config_path, const char* overrides_json,
                                   char** resolved_json);

/* Corpus. config_json (nullable) supplies format, tagset_registry,
 * tagset_id, role_map and fold_count. */
FT_API ft_status ft_corpus_load(const char* path, const char* config_json, ft_corpus** out);
FT_API ft_status ft_corpus_save(const ft_corpus* corpus, const char* path);
FT_API ft_status ft_corpus_summary(const ft_corpus* corpus, char** json);
FT_API ft_status ft_corpus_dedupe(const ft_corpus* corpus, ft_corpus** out, char** report_json);
/* Dialog-act by face-act phi matrix. text may be NULL. */
FT_API ft_status ft_corpus_correlate(const ft_corpus* corpus, char** json, char** text);
FT_API void ft_corpus_free(ft_corpus* corpus);

/* Examples. variant is "fos", "ta", "mtl-fa" or "mtl-da". */
FT_API ft_status ft_examples_build(const ft_corpus* corpus, const char* variant, int context_size,
                                   ft_examples** out);
FT_API ft_status ft_examples_mix(const ft_examples* face_acts, const ft_corpus* da_corpus,
                                 double sample_fraction, uint64_t seed, int context_size,
                                 ft_examples** out, char** report_json);
FT_API ft_status ft_examples_load(const char* path, ft_examples** out);
FT_API ft_status ft_examples_save(const ft_examples* examples, const char* path);
FT_API size_t ft_examples_count(const ft_examples* examples);
FT_API void ft_examples_free(ft_examples* examples);

/* Naive Bayes baseline. With holdout_fold non-NULL, examples of that fold
 * are left out of training. */
FT_API ft_status ft_model_train(const ft_examples* examples, double alpha,
                                const int* holdout_fold, ft_model** out);
FT_API ft_status ft_model_load(const char* path, ft_model** out);
FT_API ft_status ft_model_save(const ft_model* model, const char* path);
FT_API ft_status ft_model_summary(const ft_model* model, char** json);
FT_API ft_status ft_model_predict_text(const ft_model* model, const char* input, char** label);
FT_API void ft_model_free(ft_model* model);

/* Predictions, repaired onto the task label sets. */
FT_API ft_status ft_predict_baseline(const ft_model* model, const ft_examples* test,
                                     ft_predictions** out);
FT_API ft_status ft_predict_crossval(const ft_examples* examples, double alpha, int jobs,
                                     ft_predictions** out);
/* train (nullable) provides repair tie-break frequencies; without it the
 * test examples' own targets are used. */
FT_API ft_status ft_predict_external(const ft_examples* test, const ft_examples* train,
                                     const char* endpoint_json, ft_predictions** out);
FT_API ft_status ft_predictions_load(const char* path, ft_predictions** out);
FT_API ft_status ft_predictions_save(const ft_predictions* predictions, const char* path);
FT_API ft_status ft_predictions_summary(const ft_predictions* predictions, char** json);
FT_API size_t ft_predictions_count(const ft_predictions* predictions);
FT_API void ft_predictions_free(ft_predictions* predictions);

/* Evaluation and analysis. task is "face acts" or "dialog acts"; config_json
 * may be NULL for defaults; text outputs may be NULL. */
FT_API ft_status ft_evaluate(const ft_predictions* predictions, const ft_corpus* gold,
                             const char* task, const char* config_json, char** json, char** text);
FT_API ft_status ft_confusion(const ft_predictions* predictions, const ft_corpus* gold,
                              const char* task, int normalized, char** json, char** text);
/* reports are evaluation JSON documents as produced by ft_evaluate.
 * options_json: {"metric", "level", "aggregate"} plus config fields. */
FT_API ft_status ft_compare(const char* const* names, const char* const* reports, size_t count,
                            const char* options_json, char** json, char** text);
/* Pearson correlation between label support and F1 in an evaluation report. */
FT_API ft_status ft_correlate_report(const char* report_json, char** json, char** text);
FT_API ft_status ft_sample_errors(const ft_predictions* predictions, const ft_examples* examples,
                                  const char* config_json, const char* sheet_path, char** json);
FT_API ft_status ft_tally_errors(const char* sheet_path, char** json, char** text);
FT_API ft_status ft_shift(const ft_predictions* system_a, const ft_predictions* system_b,
                          const ft_corpus* gold, const char* target, const char* config_json,
                          char** json, char** text);

/* Primitives. */
FT_API ft_status ft_levenshtein(const char* a, const char* b, size_t* out);
/* labelset_json: array of labels, NULL for the nine face acts.
 * freqs_json: object label -> count, may be NULL. */
FT_API ft_status ft_repair_label(const char* raw, const char* labelset_json,
                                 const char* freqs_json, char** record_json);
FT_API ft_status ft_chi2_sf(double x, int df, double* out);
FT_API ft_status ft_pearson(const double* xs, const double* ys, size_t n, double* out);
FT_API ft_status ft_phi(const int* x, const int* y, size_t n, double* out);
/* values: n*k row-major block matrix. options_json (nullable):
 * {"alpha_levels", "exact", "permutation_draws", "seed"}. */
FT_API ft_status ft_friedman(const double* values, size_t n, size_t k, const char* options_json,
                             char** result_json);

#ifdef __cplusplus
}
#endif

#endif
