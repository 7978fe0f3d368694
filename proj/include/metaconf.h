/*
 * metaconf — C interface to the confidence-scoring toolkit.
 *
 * Everything behind this header lives in the shared library. Objects are
 * opaque handles created and destroyed by the library; every fallible call
 * returns an mc_status, and mc_last_error() holds a human-readable message
 * for the most recent failing call on the current thread.
 *
 * Conventions:
 *   - Out-parameters are written only on MC_OK.
 *   - Passing NULL where a handle or pointer is required yields
 *     MC_ERR_INVALID_ARGUMENT, never a crash.
 *   - Strings returned by the library (mc_last_error, mc_version,
 *     mc_config_out_dir) are owned by the library; do not free them.
 *     mc_config_out_dir's result stays valid until the next call that
 *     mutates or frees that config handle.
 *   - Handles are not thread-safe; share-nothing across threads or guard
 *     with your own lock. Distinct handles are independent.
 */
#ifndef METACONF_H
#define METACONF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__) || defined(__clang__)
#define MC_API __attribute__((visibility("default")))
#else
#define MC_API
#endif

/* ------------------------------------------------------------------ */
/* Status codes                                                        */

typedef enum mc_status {
    MC_OK = 0,
    MC_ERR_INVALID_ARGUMENT = 1,   /* bad value, shape, or null pointer   */
    MC_ERR_IO = 2,                 /* unreadable/unwritable path          */
    MC_ERR_FORMAT = 3,             /* malformed file contents             */
    MC_ERR_DEGENERATE_LABELS = 4,  /* a task needs both classes present   */
    MC_ERR_STALE_PROBE = 5,        /* probe set fit against another model */
    MC_ERR_CONFIG = 6,             /* invalid experiment configuration    */
    MC_ERR_INCOMPATIBLE_ARTIFACT = 7, /* artifact from another version    */
    MC_ERR_TRAINING_DIVERGED = 8,  /* optimization produced non-finite    */
    MC_ERR_INTERNAL = 9            /* invariant breach inside the library */
} mc_status;

/* Message describing the most recent failing call on this thread; empty
 * string when the most recent call succeeded. */
MC_API const char* mc_last_error(void);

/* Library version, semver "major.minor.patch". */
MC_API const char* mc_version(void);

/* ------------------------------------------------------------------ */
/* Opaque handles                                                      */

typedef struct mc_config mc_config;   /* a full experiment description   */
typedef struct mc_dataset mc_dataset; /* feature matrix + labels         */
typedef struct mc_model mc_model;     /* trained base classifier         */
typedef struct mc_probes mc_probes;   /* per-layer linear probes         */

/* ------------------------------------------------------------------ */
/* Experiment configuration                                            */

/* Parse a JSON config file / string. Unknown keys, wrong types, and
 * out-of-range values are MC_ERR_CONFIG with the offending field named
 * in mc_last_error(). */
MC_API mc_status mc_config_load(const char* path, mc_config** out);
MC_API mc_status mc_config_parse(const char* json_text, mc_config** out);

/* Command-line style overrides, applied after parsing. */
MC_API mc_status mc_config_set_seed(mc_config* cfg, uint64_t seed);
MC_API mc_status mc_config_set_out_dir(mc_config* cfg, const char* dir);
/* Comma-separated subset of: softmax, temperature, blackbox-lr,
 * blackbox-gbm, probes-lr, probes-gbm. */
MC_API mc_status mc_config_set_methods(mc_config* cfg, const char* comma_list);

MC_API mc_status mc_config_seed(const mc_config* cfg, uint64_t* out);
MC_API mc_status mc_config_out_dir(const mc_config* cfg, const char** out);

MC_API void mc_config_free(mc_config* cfg);

/* ------------------------------------------------------------------ */
/* Pipeline                                                            */

/* Full pipeline: materialize data, train base model and probes, fit the
 * requested meta-models, evaluate, and write every report file plus the
 * artifact set under the config's output directory. */
MC_API mc_status mc_run_experiment(const mc_config* cfg);

/* One pipeline stage by name: "gen-data", "train-base", "train-probes",
 * "train-meta", "evaluate", "importance", or "quadrants". Stages re-derive
 * their inputs from the config and the artifact directory, so any stage
 * can rerun on its own once its prerequisites exist. */
MC_API mc_status mc_run_stage(const mc_config* cfg, const char* stage);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

/* CSV: one sample per row, label in the final integer column, optional
 * single header row auto-detected by a non-numeric first cell.
 * declared_classes 0 means infer the class count from the labels.
 * id_offset shifts the stable per-sample ids, letting separately loaded
 * sets keep disjoint identities. */
MC_API mc_status mc_dataset_load_csv(const char* path, int declared_classes,
                                     int64_t id_offset, mc_dataset** out);

/* Classic idx pair: big-endian image file (magic 0x803) + label file
 * (magic 0x801); pixel bytes are scaled to [0, 1]. */
MC_API mc_status mc_dataset_load_idx(const char* images_path, const char* labels_path,
                                     int declared_classes, int64_t id_offset,
                                     mc_dataset** out);

/* Synthetic benchmark generator: each class is a mixture of Gaussian
 * clusters (clusters_per_class of them), so linear models underfit while
 * a small multilayer net does well. Fully determined by the seed. */
MC_API mc_status mc_dataset_generate(int classes, int clusters_per_class, int dim,
                                     size_t samples, double center_scale,
                                     double cluster_scale, uint64_t seed,
                                     int64_t id_offset, mc_dataset** out);

MC_API mc_status mc_dataset_save_csv(const mc_dataset* data, const char* path);

MC_API mc_status mc_dataset_rows(const mc_dataset* data, size_t* out);
MC_API mc_status mc_dataset_dim(const mc_dataset* data, size_t* out);
MC_API mc_status mc_dataset_num_classes(const mc_dataset* data, int* out);
/* Label of one sample; -1 marks an out-of-domain sample. */
MC_API mc_status mc_dataset_label(const mc_dataset* data, size_t row, int* out);
/* Copies one feature row into out[0..len); len must equal the dataset dim. */
MC_API mc_status mc_dataset_row(const mc_dataset* data, size_t row, double* out,
                                size_t len);

MC_API void mc_dataset_free(mc_dataset* data);

/* ------------------------------------------------------------------ */
/* Base model                                                          */

MC_API mc_status mc_model_load(const char* path, mc_model** out);
MC_API mc_status mc_model_save(const mc_model* model, const char* path);

MC_API mc_status mc_model_input_dim(const mc_model* model, size_t* out);
MC_API mc_status mc_model_num_classes(const mc_model* model, int* out);
MC_API mc_status mc_model_depth(const mc_model* model, size_t* out);
/* Stable hash of architecture + parameters identifying this exact model. */
MC_API mc_status mc_model_fingerprint(const mc_model* model, uint64_t* out);

/* Predicted class for one sample of length dim (= input_dim). */
MC_API mc_status mc_model_predict(const mc_model* model, const double* x, size_t dim,
                                  int* out_class);
/* Class probabilities for one sample; out_len must equal num_classes. */
MC_API mc_status mc_model_predict_proba(const mc_model* model, const double* x,
                                        size_t dim, double* out_probs, size_t out_len);
/* Fraction of samples predicted correctly; out-of-domain samples count
 * as incorrect. */
MC_API mc_status mc_model_accuracy(const mc_model* model, const mc_dataset* data,
                                   double* out);

MC_API void mc_model_free(mc_model* model);

/* ------------------------------------------------------------------ */
/* Probes                                                              */

MC_API mc_status mc_probes_load(const char* path, mc_probes** out);
MC_API mc_status mc_probes_save(const mc_probes* probes, const char* path);

MC_API mc_status mc_probes_count(const mc_probes* probes, size_t* out);
/* Fingerprint of the base model these probes were fit against. */
MC_API mc_status mc_probes_base_fingerprint(const mc_probes* probes, uint64_t* out);

/* Per-layer probe accuracy over a dataset; out_len must equal the probe
 * count. MC_ERR_STALE_PROBE if the probes do not belong to this model. */
MC_API mc_status mc_probes_accuracy(const mc_probes* probes, const mc_model* model,
                                    const mc_dataset* data, double* out, size_t out_len);

MC_API void mc_probes_free(mc_probes* probes);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

/* Area under the ROC curve for confidence scores against 0/1 correctness
 * flags: the probability that a correct sample outranks an incorrect one,
 * ties counting half. MC_ERR_DEGENERATE_LABELS unless both outcomes are
 * present. */
MC_API mc_status mc_auc(const double* scores, const int* correct, size_t n,
                        double* out);

#undef MC_API

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* METACONF_H */
