/* C interface to the dfamcar library. All handles are opaque; every call
 * that can fail returns a dfc_status and leaves a message retrievable with
 * dfc_last_error() on the calling thread. */
#ifndef DFAMCAR_H
#define DFAMCAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DFC_API __declspec(dllexport)
#else
#define DFC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dfc_status {
  DFC_OK = 0,
  DFC_ERR_CONFIG = 1,
  DFC_ERR_DATA_QUALITY = 2,
  DFC_ERR_ALIGNMENT = 3,
  DFC_ERR_SHAPE = 4,
  DFC_ERR_TRAINING = 5,
  DFC_ERR_PARSE = 6,
  DFC_ERR_IO = 7,
  DFC_ERR_EMPTY_RESULT = 8,
  DFC_ERR_ARGUMENT = 9,
  DFC_ERR_INTERNAL = 10
} dfc_status;

typedef struct dfc_config dfc_config;
typedef struct dfc_model dfc_model;

typedef struct dfc_counts {
  size_t windows;
  size_t events;
  size_t s1_calls;
  size_t s3_calls;
  size_t watch_windows_processed;
} dfc_counts;

typedef void (*dfc_log_fn)(const char* message, void* user);

DFC_API const char* dfc_version(void);
DFC_API const char* dfc_status_name(dfc_status status);
/* Message of the last failed call on this thread; "" after success. */
DFC_API const char* dfc_last_error(void);
DFC_API void dfc_set_log_callback(dfc_log_fn fn, void* user);

/* Configuration: string key/value pairs, validated on set.
 * Keys: W, g, fs, cutoff, boundaries, sensors, devices, seed, model, models,
 * protocol, k, block_size, task, placements, noise, participants, duration,
 * train_size, queries, reps, reset, stream_windows, s1_devices, s3_devices,
 * threads, allow_any_W, knn_k, dt_max_depth, dt_min_leaf, rf_trees,
 * rf_max_depth, rf_min_leaf, rf_max_features, svm_lambda, svm_epochs.
 * W and g accept comma lists; single-model calls use the first entry. */
DFC_API dfc_status dfc_config_create(dfc_config** out);
DFC_API void dfc_config_destroy(dfc_config* config);
DFC_API dfc_status dfc_config_set(dfc_config* config, const char* key, const char* value);

/* Writes labels.csv and recordings/ into out_dir. */
DFC_API dfc_status dfc_generate_corpus(const dfc_config* config, const char* out_dir);
/* Writes a mixed activity stream: recording CSV, context CSV and a
 * window_index,label truth CSV (truth_path may be NULL). */
DFC_API dfc_status dfc_generate_stream(const dfc_config* config, const char* recording_path, const char* context_path,
                                       const char* truth_path);

DFC_API dfc_status dfc_model_train(const dfc_config* config, const char* corpus_dir, dfc_model** out);
DFC_API dfc_status dfc_model_load(const char* path, dfc_model** out);
DFC_API dfc_status dfc_model_save(const dfc_model* model, const char* path);
DFC_API void dfc_model_destroy(dfc_model* model);
DFC_API dfc_status dfc_model_label_count(const dfc_model* model, size_t* out);
/* Copies label i into buf (NUL-terminated); fails if it does not fit. */
DFC_API dfc_status dfc_model_label(const dfc_model* model, size_t i, char* buf, size_t len);

/* Labels every window of a recording; writes window_index,label,score. */
DFC_API dfc_status dfc_classify_recording(const dfc_model* model, const dfc_config* config, const char* recording_path,
                                          const char* out_csv);

/* Runs the configured protocol over the (W, g, model) grid. Writes
 * report.json and cells.csv into out_dir. A NULL corpus_dir evaluates a
 * corpus generated from the config. */
DFC_API dfc_status dfc_evaluate(const dfc_config* config, const char* corpus_dir, const char* out_dir);

/* Replays the hierarchical recogniser; writes one JSON event per line. */
DFC_API dfc_status dfc_replay(const dfc_config* config, const dfc_model* s1, const dfc_model* s3,
                              const char* recording_path, const char* context_path, const char* events_path,
                              dfc_counts* counts);

/* Latency benchmark; writes JSON to out_json and CSV to out_csv (either may
 * be NULL). */
DFC_API dfc_status dfc_bench(const dfc_config* config, const char* out_json, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif
