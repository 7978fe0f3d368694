#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaconf/base_model.hpp"
#include "metaconf/dataset.hpp"
#include "metaconf/meta.hpp"

namespace metaconf {

enum class Condition { Clean, Noisy };

enum class DataSource { Synthetic, Csv, Idx };

struct DataConfig {
    DataSource source = DataSource::Synthetic;
    // synthetic source
    int classes = 10;
    int clusters_per_class = 5;
    int dim = 24;
    std::size_t pool_samples = 10000;
    std::size_t test_samples = 2000;
    std::size_t ood_samples = 2000; // 0 disables the pooled task
    double center_scale = 1.0;
    double cluster_scale = 0.35;
    // file sources (csv: one path per set; idx: image/label pairs)
    std::string train_path, train_labels_path;
    std::string test_path, test_labels_path;
    std::string ood_path, ood_labels_path; // empty when absent
    int declared_classes = 0;
};

struct EvalConfig {
    double sweep_step = 0.01; // thresholds 0, step, ..., 1
    double quadrant_threshold = 0.5;
};

// One config file fully determines a run; every random stream is derived
// from the single master seed.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    Condition condition = Condition::Clean;
    double noise_rate = 0.3;
    DataConfig data;
    double split_train_base = 0.6;
    double split_train_meta = 0.2;
    double split_dev = 0.2;
    std::vector<int> base_hidden = {64, 48, 32, 16};
    TrainConfig base_train;  // seed field is derived, not read from config
    TrainConfig probe_train = default_probe_config(); // likewise
    std::vector<std::string> methods = {"softmax",      "temperature",  "blackbox-lr",
                                        "blackbox-gbm", "probes-lr",    "probes-gbm"};
    FeatureBasis basis = FeatureBasis::Probability;
    std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2};
    LRConfig lr_cfg;
    // gbm.stages is a training budget; the saved ensemble is cut back to the
    // stage count that ranks the dev set best.
    GbmConfig gbm;
    EvalConfig eval;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig parse(const std::string& json_text, const std::string& origin);
    void override_seed(std::uint64_t new_seed) { seed = new_seed; }
    void override_out(const std::string& dir) { out_dir = dir; }
    // comma-separated subset of the known method names
    void override_methods(const std::string& csv);
    void validate() const;
};

// The five materialized sets plus bookkeeping. Test labels stay clean in the
// noisy condition; noise lands on the pool before the three-way split.
struct PreparedData {
    Dataset train_base;
    Dataset train_meta;
    Dataset dev;
    Dataset test;
    Dataset ood;    // empty when has_ood is false
    Dataset pooled; // test + ood (== test when has_ood is false)
    bool has_ood = false;
    std::size_t noise_changed = 0;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

// Pipeline stages; each loads what it needs from cfg.out_dir/artifacts and
// re-derives datasets from the config, so any stage can rerun on its own.
void stage_gen_data(const ExperimentConfig& cfg);
void stage_train_base(const ExperimentConfig& cfg);
void stage_train_probes(const ExperimentConfig& cfg);
void stage_train_meta(const ExperimentConfig& cfg);
void stage_evaluate(const ExperimentConfig& cfg);
void stage_importance(const ExperimentConfig& cfg);
void stage_quadrants(const ExperimentConfig& cfg);

// split -> noise -> base -> probes -> meta -> evaluate -> importance ->
// quadrants, writing every report file.
void run_experiment(const ExperimentConfig& cfg);

// Per-method confidence scores for one dataset, used by evaluation stages.
std::vector<double> score_method(const std::string& method, const BaseModel& model,
                                 const ProbeSet* probes, const TemperatureScaler* scaler,
                                 const LRMeta* lr, const GBMMeta* gbm, const Dataset& data,
                                 FeatureBasis basis);

const std::vector<std::string>& known_methods();

} // namespace metaconf
