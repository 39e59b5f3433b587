/* C interface to the henn library. All functions are thread-compatible; the
 * last-error message is thread-local. Handles are opaque and owned by the
 * caller once created. */
#ifndef HENN_H
#define HENN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HENN_API __declspec(dllexport)
#elif defined(__GNUC__)
#define HENN_API __attribute__((visibility("default")))
#else
#define HENN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum henn_status {
    HENN_OK = 0,
    HENN_ERR_VALIDATION = 1,
    HENN_ERR_IO = 2,
    HENN_ERR_DOMAIN = 3,
    HENN_ERR_PARSE = 4,
    HENN_ERR_UNSUPPORTED = 5,
    HENN_ERR_CHECK_FAILED = 6,
    HENN_ERR_INVALID_ARGUMENT = 7,
    HENN_ERR_INTERNAL = 8
} henn_status;

typedef struct henn_partition henn_partition;
typedef struct henn_model henn_model;

HENN_API const char* henn_version(void);
HENN_API const char* henn_status_name(henn_status status);
/* Message for the most recent failure on this thread; "" after success. */
HENN_API const char* henn_last_error_message(void);

/* Partition of classes 0..k-1. `members` lists the groups back to back;
 * `group_sizes[j]` says how many entries belong to group j. */
HENN_API henn_status henn_partition_create(size_t k, const size_t* members, const size_t* group_sizes,
                                           size_t num_groups, henn_partition** out);
HENN_API void henn_partition_destroy(henn_partition* partition);
HENN_API size_t henn_partition_num_classes(const henn_partition* partition);
HENN_API size_t henn_partition_num_groups(const henn_partition* partition);
HENN_API size_t henn_partition_num_composite(const henn_partition* partition);
/* K + number of composite groups. */
HENN_API size_t henn_partition_evidence_width(const henn_partition* partition);

/* Uncertainty measures of the opinion built from an evidence vector over the
 * singletons followed by the composite groups. Any output may be NULL. */
HENN_API henn_status henn_opinion_measures(const henn_partition* partition, const double* evidence, size_t width,
                                           double* vacuity, double* vagueness, double* dissonance);

typedef struct henn_gdd_stats {
    double log_normalizer;
    double entropy;
    double kl_to_flat;
} henn_gdd_stats;

/* alpha has K entries and c one entry per group (0 for singleton groups). */
HENN_API henn_status henn_gdd_mean(const henn_partition* partition, const double* alpha, const double* c,
                                   double* mean_out);
HENN_API henn_status henn_gdd_stats_compute(const henn_partition* partition, const double* alpha, const double* c,
                                            henn_gdd_stats* out);

/* Total loss for a 0/1 label of length K. reg_mode is "kl", "entropy",
 * "dirichlet-kl" or "none" (NULL means "kl"). Gradient outputs may be NULL;
 * d_c has one entry per group. */
HENN_API henn_status henn_loss(const henn_partition* partition, const double* alpha, const double* c,
                               const uint8_t* label, double lambda, const char* reg_mode, double* total,
                               double* d_alpha, double* d_c);

typedef struct henn_prediction {
    int is_composite;           /* 1 if the predicted set is a composite group */
    size_t set_index;           /* class index, or group index when composite */
    size_t singleton_prediction;
    double vacuity;
    double vagueness;
    double dissonance;
} henn_prediction;

HENN_API henn_status henn_model_load(const char* checkpoint_path, henn_model** out);
HENN_API void henn_model_destroy(henn_model* model);
HENN_API size_t henn_model_input_dim(const henn_model* model);
HENN_API size_t henn_model_evidence_width(const henn_model* model);
/* evidence_out (may be NULL) receives henn_model_evidence_width() values. */
HENN_API henn_status henn_model_predict(const henn_model* model, const double* x, size_t dim, double* evidence_out,
                                        henn_prediction* out);

typedef void (*henn_output_fn)(const char* text, size_t len, void* user);

/* Runs a command ("gen-data", "train", "eval", "uncertainty", "verify") with a
 * JSON config object (NULL or "" for defaults). Output text goes to `sink`
 * if given. A failed verify check returns HENN_ERR_CHECK_FAILED. */
HENN_API henn_status henn_run(const char* command, const char* config_json, henn_output_fn sink, void* user);

#ifdef __cplusplus
}
#endif

#endif
