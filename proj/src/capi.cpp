// C surface of the shared library. Every entry point follows the same
// shape: validate pointers, run the C++ implementation inside a catch-all
// guard, translate exceptions to status codes, and record the message in a
// thread-local slot for mc_last_error().

#include "metaconf.h"

#include <exception>
#include <new>
#include <string>
#include <utility>

#include "metaconf/base_model.hpp"
#include "metaconf/dataset.hpp"
#include "metaconf/errors.hpp"
#include "metaconf/eval.hpp"
#include "metaconf/experiment.hpp"
#include "metaconf/probes.hpp"

struct mc_config {
    metaconf::ExperimentConfig impl;
};
struct mc_dataset {
    metaconf::Dataset impl;
};
struct mc_model {
    metaconf::BaseModel impl;
};
struct mc_probes {
    metaconf::ProbeSet impl;
};

namespace {

std::string& error_slot() {
    thread_local std::string message;
    return message;
}

mc_status to_status(metaconf::ErrorCode code) {
    using metaconf::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return MC_ERR_INVALID_ARGUMENT;
        case ErrorCode::IoError: return MC_ERR_IO;
        case ErrorCode::FormatError: return MC_ERR_FORMAT;
        case ErrorCode::DegenerateLabels: return MC_ERR_DEGENERATE_LABELS;
        case ErrorCode::StaleProbe: return MC_ERR_STALE_PROBE;
        case ErrorCode::ConfigError: return MC_ERR_CONFIG;
        case ErrorCode::IncompatibleArtifact: return MC_ERR_INCOMPATIBLE_ARTIFACT;
        case ErrorCode::TrainingDiverged: return MC_ERR_TRAINING_DIVERGED;
        case ErrorCode::Internal: return MC_ERR_INTERNAL;
    }
    return MC_ERR_INTERNAL;
}

// Runs the body, clearing the error slot on success and filling it on any
// exception. The body never lets C++ exceptions escape into C callers.
template <typename Body>
mc_status guarded(Body&& body) noexcept {
    try {
        body();
        error_slot().clear();
        return MC_OK;
    } catch (const metaconf::Error& e) {
        error_slot() = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        error_slot() = "out of memory";
        return MC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        error_slot() = e.what();
        return MC_ERR_INTERNAL;
    } catch (...) {
        error_slot() = "unknown error";
        return MC_ERR_INTERNAL;
    }
}

mc_status invalid(const char* message) noexcept {
    try {
        error_slot() = message;
    } catch (...) {
    }
    return MC_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* mc_last_error(void) { return error_slot().c_str(); }

const char* mc_version(void) { return "1.0.0"; }

/* ------------------------------------------------------------------ */
/* Config                                                              */

mc_status mc_config_load(const char* path, mc_config** out) {
    if (!path) return invalid("mc_config_load: null path");
    if (!out) return invalid("mc_config_load: null out");
    return guarded([&] {
        auto handle = new mc_config{metaconf::ExperimentConfig::load(path)};
        *out = handle;
    });
}

mc_status mc_config_parse(const char* json_text, mc_config** out) {
    if (!json_text) return invalid("mc_config_parse: null json_text");
    if (!out) return invalid("mc_config_parse: null out");
    return guarded([&] {
        auto handle = new mc_config{metaconf::ExperimentConfig::parse(json_text, "config")};
        *out = handle;
    });
}

mc_status mc_config_set_seed(mc_config* cfg, uint64_t seed) {
    if (!cfg) return invalid("mc_config_set_seed: null config");
    return guarded([&] { cfg->impl.override_seed(seed); });
}

mc_status mc_config_set_out_dir(mc_config* cfg, const char* dir) {
    if (!cfg) return invalid("mc_config_set_out_dir: null config");
    if (!dir) return invalid("mc_config_set_out_dir: null dir");
    return guarded([&] {
        if (*dir == '\0')
            metaconf::fail(metaconf::ErrorCode::ConfigError,
                           "config field 'out_dir': must not be empty");
        cfg->impl.override_out(dir);
    });
}

mc_status mc_config_set_methods(mc_config* cfg, const char* comma_list) {
    if (!cfg) return invalid("mc_config_set_methods: null config");
    if (!comma_list) return invalid("mc_config_set_methods: null method list");
    return guarded([&] { cfg->impl.override_methods(comma_list); });
}

mc_status mc_config_seed(const mc_config* cfg, uint64_t* out) {
    if (!cfg) return invalid("mc_config_seed: null config");
    if (!out) return invalid("mc_config_seed: null out");
    return guarded([&] { *out = cfg->impl.seed; });
}

mc_status mc_config_out_dir(const mc_config* cfg, const char** out) {
    if (!cfg) return invalid("mc_config_out_dir: null config");
    if (!out) return invalid("mc_config_out_dir: null out");
    return guarded([&] { *out = cfg->impl.out_dir.c_str(); });
}

void mc_config_free(mc_config* cfg) { delete cfg; }

/* ------------------------------------------------------------------ */
/* Pipeline                                                            */

mc_status mc_run_experiment(const mc_config* cfg) {
    if (!cfg) return invalid("mc_run_experiment: null config");
    return guarded([&] { metaconf::run_experiment(cfg->impl); });
}

mc_status mc_run_stage(const mc_config* cfg, const char* stage) {
    if (!cfg) return invalid("mc_run_stage: null config");
    if (!stage) return invalid("mc_run_stage: null stage");
    return guarded([&] {
        const std::string name = stage;
        if (name == "gen-data")
            metaconf::stage_gen_data(cfg->impl);
        else if (name == "train-base")
            metaconf::stage_train_base(cfg->impl);
        else if (name == "train-probes")
            metaconf::stage_train_probes(cfg->impl);
        else if (name == "train-meta")
            metaconf::stage_train_meta(cfg->impl);
        else if (name == "evaluate")
            metaconf::stage_evaluate(cfg->impl);
        else if (name == "importance")
            metaconf::stage_importance(cfg->impl);
        else if (name == "quadrants")
            metaconf::stage_quadrants(cfg->impl);
        else
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "unknown stage '" + name +
                               "' (expected gen-data, train-base, train-probes, "
                               "train-meta, evaluate, importance, or quadrants)");
    });
}

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

mc_status mc_dataset_load_csv(const char* path, int declared_classes, int64_t id_offset,
                              mc_dataset** out) {
    if (!path) return invalid("mc_dataset_load_csv: null path");
    if (!out) return invalid("mc_dataset_load_csv: null out");
    return guarded([&] {
        auto handle = new mc_dataset{metaconf::load_csv(path, declared_classes, id_offset)};
        *out = handle;
    });
}

mc_status mc_dataset_load_idx(const char* images_path, const char* labels_path,
                              int declared_classes, int64_t id_offset, mc_dataset** out) {
    if (!images_path) return invalid("mc_dataset_load_idx: null images_path");
    if (!labels_path) return invalid("mc_dataset_load_idx: null labels_path");
    if (!out) return invalid("mc_dataset_load_idx: null out");
    return guarded([&] {
        auto handle = new mc_dataset{
            metaconf::load_idx_pair(images_path, labels_path, declared_classes, id_offset)};
        *out = handle;
    });
}

mc_status mc_dataset_generate(int classes, int clusters_per_class, int dim, size_t samples,
                              double center_scale, double cluster_scale, uint64_t seed,
                              int64_t id_offset, mc_dataset** out) {
    if (!out) return invalid("mc_dataset_generate: null out");
    return guarded([&] {
        metaconf::SyntheticSpec spec;
        spec.classes = classes;
        spec.clusters_per_class = clusters_per_class;
        spec.dim = dim;
        spec.samples = samples;
        spec.center_scale = center_scale;
        spec.cluster_scale = cluster_scale;
        spec.seed = seed;
        auto handle = new mc_dataset{metaconf::generate_clusters(spec, id_offset)};
        *out = handle;
    });
}

mc_status mc_dataset_save_csv(const mc_dataset* data, const char* path) {
    if (!data) return invalid("mc_dataset_save_csv: null dataset");
    if (!path) return invalid("mc_dataset_save_csv: null path");
    return guarded([&] { metaconf::save_csv(data->impl, path); });
}

mc_status mc_dataset_rows(const mc_dataset* data, size_t* out) {
    if (!data) return invalid("mc_dataset_rows: null dataset");
    if (!out) return invalid("mc_dataset_rows: null out");
    return guarded([&] { *out = data->impl.size(); });
}

mc_status mc_dataset_dim(const mc_dataset* data, size_t* out) {
    if (!data) return invalid("mc_dataset_dim: null dataset");
    if (!out) return invalid("mc_dataset_dim: null out");
    return guarded([&] { *out = data->impl.dim(); });
}

mc_status mc_dataset_num_classes(const mc_dataset* data, int* out) {
    if (!data) return invalid("mc_dataset_num_classes: null dataset");
    if (!out) return invalid("mc_dataset_num_classes: null out");
    return guarded([&] { *out = data->impl.num_classes; });
}

mc_status mc_dataset_label(const mc_dataset* data, size_t row, int* out) {
    if (!data) return invalid("mc_dataset_label: null dataset");
    if (!out) return invalid("mc_dataset_label: null out");
    return guarded([&] {
        if (row >= data->impl.size())
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_dataset_label: row out of range");
        *out = data->impl.labels[row];
    });
}

mc_status mc_dataset_row(const mc_dataset* data, size_t row, double* out, size_t len) {
    if (!data) return invalid("mc_dataset_row: null dataset");
    if (!out) return invalid("mc_dataset_row: null out");
    return guarded([&] {
        if (row >= data->impl.size())
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_dataset_row: row out of range");
        if (len != data->impl.dim())
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_dataset_row: buffer length does not match the dataset dim");
        for (size_t j = 0; j < len; ++j) out[j] = data->impl.features.at(row, j);
    });
}

void mc_dataset_free(mc_dataset* data) { delete data; }

/* ------------------------------------------------------------------ */
/* Base model                                                          */

mc_status mc_model_load(const char* path, mc_model** out) {
    if (!path) return invalid("mc_model_load: null path");
    if (!out) return invalid("mc_model_load: null out");
    return guarded([&] {
        auto handle = new mc_model{metaconf::BaseModel::load(path)};
        *out = handle;
    });
}

mc_status mc_model_save(const mc_model* model, const char* path) {
    if (!model) return invalid("mc_model_save: null model");
    if (!path) return invalid("mc_model_save: null path");
    return guarded([&] { model->impl.save(path); });
}

mc_status mc_model_input_dim(const mc_model* model, size_t* out) {
    if (!model) return invalid("mc_model_input_dim: null model");
    if (!out) return invalid("mc_model_input_dim: null out");
    return guarded([&] { *out = model->impl.input_dim; });
}

mc_status mc_model_num_classes(const mc_model* model, int* out) {
    if (!model) return invalid("mc_model_num_classes: null model");
    if (!out) return invalid("mc_model_num_classes: null out");
    return guarded([&] { *out = model->impl.num_classes; });
}

mc_status mc_model_depth(const mc_model* model, size_t* out) {
    if (!model) return invalid("mc_model_depth: null model");
    if (!out) return invalid("mc_model_depth: null out");
    return guarded([&] { *out = model->impl.depth(); });
}

mc_status mc_model_fingerprint(const mc_model* model, uint64_t* out) {
    if (!model) return invalid("mc_model_fingerprint: null model");
    if (!out) return invalid("mc_model_fingerprint: null out");
    return guarded([&] { *out = model->impl.fingerprint(); });
}

mc_status mc_model_predict(const mc_model* model, const double* x, size_t dim,
                           int* out_class) {
    if (!model) return invalid("mc_model_predict: null model");
    if (!x) return invalid("mc_model_predict: null input");
    if (!out_class) return invalid("mc_model_predict: null out");
    return guarded([&] {
        if (dim != model->impl.input_dim)
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_model_predict: input length does not match the model");
        *out_class = metaconf::predict(model->impl, std::span<const double>(x, dim));
    });
}

mc_status mc_model_predict_proba(const mc_model* model, const double* x, size_t dim,
                                 double* out_probs, size_t out_len) {
    if (!model) return invalid("mc_model_predict_proba: null model");
    if (!x) return invalid("mc_model_predict_proba: null input");
    if (!out_probs) return invalid("mc_model_predict_proba: null out");
    return guarded([&] {
        if (dim != model->impl.input_dim)
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_model_predict_proba: input length does not match the model");
        if (out_len != static_cast<size_t>(model->impl.num_classes))
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_model_predict_proba: buffer length does not match the "
                           "class count");
        auto probs = metaconf::predict_proba(model->impl, std::span<const double>(x, dim));
        for (size_t j = 0; j < out_len; ++j) out_probs[j] = probs[j];
    });
}

mc_status mc_model_accuracy(const mc_model* model, const mc_dataset* data, double* out) {
    if (!model) return invalid("mc_model_accuracy: null model");
    if (!data) return invalid("mc_model_accuracy: null dataset");
    if (!out) return invalid("mc_model_accuracy: null out");
    return guarded([&] { *out = metaconf::accuracy(model->impl, data->impl); });
}

void mc_model_free(mc_model* model) { delete model; }

/* ------------------------------------------------------------------ */
/* Probes                                                              */

mc_status mc_probes_load(const char* path, mc_probes** out) {
    if (!path) return invalid("mc_probes_load: null path");
    if (!out) return invalid("mc_probes_load: null out");
    return guarded([&] {
        auto handle = new mc_probes{metaconf::ProbeSet::load(path)};
        *out = handle;
    });
}

mc_status mc_probes_save(const mc_probes* probes, const char* path) {
    if (!probes) return invalid("mc_probes_save: null probes");
    if (!path) return invalid("mc_probes_save: null path");
    return guarded([&] { probes->impl.save(path); });
}

mc_status mc_probes_count(const mc_probes* probes, size_t* out) {
    if (!probes) return invalid("mc_probes_count: null probes");
    if (!out) return invalid("mc_probes_count: null out");
    return guarded([&] { *out = probes->impl.size(); });
}

mc_status mc_probes_base_fingerprint(const mc_probes* probes, uint64_t* out) {
    if (!probes) return invalid("mc_probes_base_fingerprint: null probes");
    if (!out) return invalid("mc_probes_base_fingerprint: null out");
    return guarded([&] { *out = probes->impl.base_fingerprint; });
}

mc_status mc_probes_accuracy(const mc_probes* probes, const mc_model* model,
                             const mc_dataset* data, double* out, size_t out_len) {
    if (!probes) return invalid("mc_probes_accuracy: null probes");
    if (!model) return invalid("mc_probes_accuracy: null model");
    if (!data) return invalid("mc_probes_accuracy: null dataset");
    if (!out) return invalid("mc_probes_accuracy: null out");
    return guarded([&] {
        if (probes->impl.base_fingerprint != model->impl.fingerprint())
            metaconf::fail(metaconf::ErrorCode::StaleProbe,
                           "probe set was fit against a different base model");
        if (out_len != probes->impl.size())
            metaconf::fail(metaconf::ErrorCode::InvalidArgument,
                           "mc_probes_accuracy: buffer length does not match the "
                           "probe count");
        auto acc = metaconf::probe_accuracy_report(probes->impl, model->impl, data->impl);
        for (size_t i = 0; i < out_len; ++i) out[i] = acc[i];
    });
}

void mc_probes_free(mc_probes* probes) { delete probes; }

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

mc_status mc_auc(const double* scores, const int* correct, size_t n, double* out) {
    if (!scores) return invalid("mc_auc: null scores");
    if (!correct) return invalid("mc_auc: null correctness flags");
    if (!out) return invalid("mc_auc: null out");
    return guarded([&] {
        metaconf::ScoredSet set;
        set.scores.assign(scores, scores + n);
        set.labels.assign(correct, correct + n);
        set.origin.assign(n, metaconf::Origin::InDomain);
        *out = metaconf::auc_of(set);
    });
}

} // extern "C"
