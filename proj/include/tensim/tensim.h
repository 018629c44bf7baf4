#ifndef TENSIM_H
#define TENSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TENSIM_BUILDING)
#    define TENSIM_API __declspec(dllexport)
#  else
#    define TENSIM_API __declspec(dllimport)
#  endif
#else
#  define TENSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tensim_status {
    TENSIM_OK = 0,
    TENSIM_ERR_INVALID_ARGUMENT = 1,
    TENSIM_ERR_DIMENSION_MISMATCH = 2,
    TENSIM_ERR_NUMERICAL = 3,
    TENSIM_ERR_PARSE = 4,
    TENSIM_ERR_IO = 5,
    TENSIM_ERR_INTERNAL = 6
} tensim_status;

/* Values match the CLI exit codes of `tensim similar`. */
typedef enum tensim_verdict {
    TENSIM_SAME_SCALED_TERMS = 0,
    TENSIM_SHARED_STRUCTURE_NON_SCALAR = 2,
    TENSIM_INCLUSION_FAILED = 3,
    TENSIM_UNRELIABLE = 4
} tensim_verdict;

typedef struct tensim_tensor tensim_tensor;
typedef struct tensim_report tensim_report;
typedef struct tensim_signals tensim_signals;
typedef struct tensim_bss_config tensim_bss_config;
typedef struct tensim_bss_result tensim_bss_result;

/* Message of the last failed call on this thread; "" after a success. */
TENSIM_API const char* tensim_last_error(void);
TENSIM_API const char* tensim_status_string(tensim_status status);
/* Frees strings returned through char** out-parameters. */
TENSIM_API void tensim_string_free(char* s);

/* Tensors. Data is first-index-fastest; `im` may be NULL for real data. */
TENSIM_API tensim_status tensim_tensor_create(size_t order, const size_t* dims, const double* re, const double* im,
                                              tensim_tensor** out);
TENSIM_API tensim_status tensim_tensor_read(const char* path, tensim_tensor** out);
TENSIM_API tensim_status tensim_tensor_write(const tensim_tensor* t, const char* path);
TENSIM_API tensim_status tensim_tensor_order(const tensim_tensor* t, size_t* order);
/* Writes min(order, capacity) dimensions. */
TENSIM_API tensim_status tensim_tensor_dims(const tensim_tensor* t, size_t* dims, size_t capacity);
/* Zero-based multi-index. */
TENSIM_API tensim_status tensim_tensor_get(const tensim_tensor* t, const size_t* index, double* re, double* im);
TENSIM_API void tensim_tensor_free(tensim_tensor* t);

/* Mode-set matricization written as CSV. `modes` are one-based and must
 * form a nonempty proper subset. */
TENSIM_API tensim_status tensim_unfold_csv(const tensim_tensor* t, const size_t* modes, size_t count,
                                           const char* path);

/* Similarity. modes = 0 analyzes every mode; eig_tol = 0 picks it from the data. */
typedef struct tensim_similarity_config {
    size_t modes;
    double residual_tol;
    double eig_tol;
    double scalar_tol;
    double inclusion_thresh;
    double cond_ceiling;
    double block_tol;
} tensim_similarity_config;

TENSIM_API void tensim_similarity_config_default(tensim_similarity_config* config);
/* `config` may be NULL. Term recovery runs when the verdict permits it. */
TENSIM_API tensim_status tensim_similar(const tensim_tensor* a, const tensim_tensor* b,
                                        const tensim_similarity_config* config, tensim_report** out);
TENSIM_API tensim_status tensim_report_verdict(const tensim_report* r, tensim_verdict* verdict);
TENSIM_API tensim_status tensim_report_terms(const tensim_report* r, size_t* terms);
TENSIM_API tensim_status tensim_report_modes(const tensim_report* r, size_t* modes);
TENSIM_API tensim_status tensim_report_lambda(const tensim_report* r, size_t term, double* re, double* im);
/* Zero-based mode and term. */
TENSIM_API tensim_status tensim_report_multiplicity(const tensim_report* r, size_t mode, size_t term, size_t* l);
TENSIM_API tensim_status tensim_report_json(const tensim_report* r, char** json);
TENSIM_API void tensim_report_free(tensim_report* r);

/* Signals CSV and Hankelization. `column` is one-based. */
TENSIM_API tensim_status tensim_signals_read(const char* path, tensim_signals** out);
TENSIM_API tensim_status tensim_signals_shape(const tensim_signals* s, size_t* samples, size_t* columns);
TENSIM_API tensim_status tensim_hankelize(const tensim_signals* s, size_t column, size_t i1, size_t i2, size_t i3,
                                          tensim_tensor** out);
TENSIM_API void tensim_signals_free(tensim_signals* s);

/* Mixture classification experiment. */
TENSIM_API tensim_status tensim_bss_config_default(tensim_bss_config** out);
TENSIM_API tensim_status tensim_bss_config_read(const char* path, tensim_bss_config** out);
TENSIM_API tensim_status tensim_bss_config_set_seed(tensim_bss_config* c, uint64_t seed);
TENSIM_API tensim_status tensim_bss_config_set_sigma_rel(tensim_bss_config* c, double sigma_rel);
TENSIM_API tensim_status tensim_bss_config_set_tau(tensim_bss_config* c, double tau);
TENSIM_API tensim_status tensim_bss_config_set_thresh(tensim_bss_config* c, double thresh);
TENSIM_API void tensim_bss_config_free(tensim_bss_config* c);

TENSIM_API tensim_status tensim_bss_run(const tensim_bss_config* c, tensim_bss_result** out);
TENSIM_API tensim_status tensim_bss_result_dot(const tensim_bss_result* r, char** dot);
TENSIM_API tensim_status tensim_bss_result_json(const tensim_bss_result* r, char** json);
TENSIM_API tensim_status tensim_bss_result_score(const tensim_bss_result* r, double* precision, double* recall);
TENSIM_API tensim_status tensim_bss_result_edges(const tensim_bss_result* r, size_t* predicted, size_t* truth);
TENSIM_API void tensim_bss_result_free(tensim_bss_result* r);

#ifdef __cplusplus
}
#endif

#endif
