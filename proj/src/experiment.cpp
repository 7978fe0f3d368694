#include "metaconf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metaconf/errors.hpp"
#include "metaconf/eval.hpp"
#include "metaconf/numeric.hpp"
#include "metaconf/rng.hpp"

namespace metaconf {
namespace {

using nlohmann::json;

// Every pipeline stage draws from its own stream derived from the master
// seed under a fixed tag, so a stage rerun in isolation reproduces exactly
// what the full pipeline would have given it.
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamNoise = 2;
constexpr std::uint64_t kStreamBase = 3;
constexpr std::uint64_t kStreamProbes = 4;
constexpr std::uint64_t kStreamGbmBlackbox = 5;
constexpr std::uint64_t kStreamGbmWhitebox = 6;
constexpr std::uint64_t kStreamPoolData = 7;
constexpr std::uint64_t kStreamOodData = 8;

// %.17g round-trips doubles exactly, which keeps every report byte-stable.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, dir + ": cannot create directory (" + ec.message() + ")");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::IoError, path + ": write failed");
}

std::string artifacts_dir(const ExperimentConfig& cfg) { return cfg.out_dir + "/artifacts"; }
std::string base_artifact(const ExperimentConfig& cfg) {
    return artifacts_dir(cfg) + "/base_model.bin";
}
std::string probes_artifact(const ExperimentConfig& cfg) {
    return artifacts_dir(cfg) + "/probes.bin";
}
std::string temperature_artifact(const ExperimentConfig& cfg) {
    return artifacts_dir(cfg) + "/temperature.bin";
}
std::string meta_artifact(const ExperimentConfig& cfg, const std::string& method) {
    std::string slug = method;
    std::replace(slug.begin(), slug.end(), '-', '_');
    return artifacts_dir(cfg) + "/meta_" + slug + ".bin";
}

bool requested(const ExperimentConfig& cfg, const std::string& method) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end();
}

bool wants_whitebox(const ExperimentConfig& cfg) {
    return requested(cfg, "probes-lr") || requested(cfg, "probes-gbm");
}

bool wants_blackbox_meta(const ExperimentConfig& cfg) {
    return requested(cfg, "blackbox-lr") || requested(cfg, "blackbox-gbm");
}

// ---------------------------------------------------------------------------
// Config parsing: strict key set, every complaint names the offending field.

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    fail(ErrorCode::ConfigError, "config field '" + path + "': " + why);
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(ErrorCode::ConfigError, "config: unknown field '" + prefix + item.key() + "'");
    }
}

const json* section(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (v != nullptr && !v->is_object()) bad_field(path, "expected an object");
    return v;
}

double read_double(const json& obj, const std::string& prefix, const char* key, double fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) bad_field(prefix + key, "expected a number");
    return v->get<double>();
}

std::int64_t read_integer(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        const std::uint64_t u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            bad_field(path, "integer out of range");
        return static_cast<std::int64_t>(u);
    }
    if (v.is_number_integer()) return v.get<std::int64_t>();
    bad_field(path, "expected an integer");
}

int read_int(const json& obj, const std::string& prefix, const char* key, int fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    const std::int64_t raw = read_integer(*v, prefix + key);
    if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max())
        bad_field(prefix + key, "integer out of range");
    return static_cast<int>(raw);
}

std::size_t read_count(const json& obj, const std::string& prefix, const char* key,
                       std::size_t fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    const std::int64_t raw = read_integer(*v, prefix + key);
    if (raw < 0) bad_field(prefix + key, "expected a non-negative integer");
    return static_cast<std::size_t>(raw);
}

std::uint64_t read_u64(const json& obj, const std::string& prefix, const char* key,
                       std::uint64_t fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v->get<std::int64_t>());
    bad_field(prefix + key, "expected a non-negative integer");
}

std::string read_string(const json& obj, const std::string& prefix, const char* key,
                        const std::string& fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) bad_field(prefix + key, "expected a string");
    return v->get<std::string>();
}

std::vector<int> read_int_list(const json& obj, const std::string& prefix, const char* key,
                               const std::vector<int>& fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) bad_field(prefix + key, "expected an array of integers");
    std::vector<int> out;
    out.reserve(v->size());
    for (const json& item : *v) {
        const std::int64_t raw = read_integer(item, prefix + key);
        if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max())
            bad_field(prefix + key, "integer out of range");
        out.push_back(static_cast<int>(raw));
    }
    return out;
}

std::vector<double> read_double_list(const json& obj, const std::string& prefix, const char* key,
                                     const std::vector<double>& fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) bad_field(prefix + key, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v->size());
    for (const json& item : *v) {
        if (!item.is_number()) bad_field(prefix + key, "expected an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

std::vector<std::string> read_string_list(const json& obj, const std::string& prefix,
                                          const char* key,
                                          const std::vector<std::string>& fallback) {
    const json* v = find(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) bad_field(prefix + key, "expected an array of strings");
    std::vector<std::string> out;
    out.reserve(v->size());
    for (const json& item : *v) {
        if (!item.is_string()) bad_field(prefix + key, "expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void check_methods(const std::vector<std::string>& methods) {
    if (methods.empty()) bad_field("meta.methods", "at least one method is required");
    const std::vector<std::string>& known = known_methods();
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (std::find(known.begin(), known.end(), methods[i]) == known.end())
            bad_field("meta.methods", "unknown method '" + methods[i] + "'");
        for (std::size_t j = i + 1; j < methods.size(); ++j)
            if (methods[i] == methods[j])
                bad_field("meta.methods", "duplicate method '" + methods[i] + "'");
    }
}

void check_train_config(const TrainConfig& tc, const std::string& prefix) {
    if (tc.epochs < 1) bad_field(prefix + "epochs", "must be at least 1");
    if (tc.batch_size < 1) bad_field(prefix + "batch_size", "must be at least 1");
    if (!(tc.learning_rate > 0.0)) bad_field(prefix + "learning_rate", "must be positive");
    if (!(tc.l2 >= 0.0)) bad_field(prefix + "l2", "must be non-negative");
}

// ---------------------------------------------------------------------------
// Data preparation

Dataset slice_rows(const Dataset& d, std::size_t begin, std::size_t end) {
    Dataset out;
    out.num_classes = d.num_classes;
    out.features = Matrix(end - begin, d.dim());
    for (std::size_t i = begin; i < end; ++i) {
        const auto src = d.features.row(i);
        std::copy(src.begin(), src.end(), out.features.row(i - begin).begin());
    }
    const auto b = static_cast<std::ptrdiff_t>(begin);
    const auto e = static_cast<std::ptrdiff_t>(end);
    out.labels.assign(d.labels.begin() + b, d.labels.begin() + e);
    out.origin.assign(d.origin.begin() + b, d.origin.begin() + e);
    out.ids.assign(d.ids.begin() + b, d.ids.begin() + e);
    return out;
}

void assert_disjoint_ids(const PreparedData& d) {
    std::set<std::int64_t> seen;
    std::size_t total = 0;
    const auto add = [&](const Dataset& s) {
        for (std::int64_t id : s.ids) seen.insert(id);
        total += s.size();
    };
    add(d.train_base);
    add(d.train_meta);
    add(d.dev);
    add(d.test);
    if (d.has_ood) add(d.ood);
    if (seen.size() != total)
        fail(ErrorCode::Internal, "data hygiene: partitions share sample ids");
}

std::vector<LayerSpec> build_arch(const ExperimentConfig& cfg, int num_classes) {
    std::vector<LayerSpec> arch;
    arch.reserve(cfg.base_hidden.size() + 1);
    for (int w : cfg.base_hidden) arch.push_back({w, Activation::Relu});
    arch.push_back({num_classes, Activation::Identity});
    return arch;
}

Matrix collect_logits(const BaseModel& model, const Dataset& data) {
    Matrix logits(data.size(), static_cast<std::size_t>(model.num_classes));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const ActivationTrace tr = forward_with_trace(model, data.features.row(i));
        std::copy(tr.final_logits.begin(), tr.final_logits.end(), logits.row(i).begin());
    }
    return logits;
}

// ---------------------------------------------------------------------------
// Artifact plumbing shared by the downstream stages

struct LoadedArtifacts {
    BaseModel model;
    ProbeSet probes;
    TemperatureScaler scaler;
    LRMeta lr_blackbox;
    LRMeta lr_whitebox;
    GBMMeta gbm_blackbox;
    GBMMeta gbm_whitebox;
    bool has_probes = false;
    bool has_scaler = false;
    bool has_lr_blackbox = false;
    bool has_lr_whitebox = false;
    bool has_gbm_blackbox = false;
    bool has_gbm_whitebox = false;
};

LoadedArtifacts load_artifacts_for(const ExperimentConfig& cfg, bool want_probes) {
    LoadedArtifacts a;
    a.model = BaseModel::load(base_artifact(cfg));
    if (want_probes || wants_whitebox(cfg)) {
        a.probes = ProbeSet::load(probes_artifact(cfg));
        a.has_probes = true;
        if (a.probes.base_fingerprint != a.model.fingerprint())
            fail(ErrorCode::StaleProbe,
                 probes_artifact(cfg) + ": probe set was fit against a different base model");
    }
    if (requested(cfg, "temperature")) {
        a.scaler = TemperatureScaler::load(temperature_artifact(cfg));
        a.has_scaler = true;
    }
    if (requested(cfg, "blackbox-lr")) {
        a.lr_blackbox = LRMeta::load(meta_artifact(cfg, "blackbox-lr"));
        a.has_lr_blackbox = true;
    }
    if (requested(cfg, "probes-lr")) {
        a.lr_whitebox = LRMeta::load(meta_artifact(cfg, "probes-lr"));
        a.has_lr_whitebox = true;
    }
    if (requested(cfg, "blackbox-gbm")) {
        a.gbm_blackbox = GBMMeta::load(meta_artifact(cfg, "blackbox-gbm"));
        a.has_gbm_blackbox = true;
    }
    if (requested(cfg, "probes-gbm")) {
        a.gbm_whitebox = GBMMeta::load(meta_artifact(cfg, "probes-gbm"));
        a.has_gbm_whitebox = true;
    }
    return a;
}

std::vector<double> scores_for(const LoadedArtifacts& a, const std::string& method,
                               const Dataset& data, FeatureBasis basis) {
    const LRMeta* lr = (method == "blackbox-lr" && a.has_lr_blackbox) ? &a.lr_blackbox
                     : (method == "probes-lr" && a.has_lr_whitebox)   ? &a.lr_whitebox
                                                                      : nullptr;
    const GBMMeta* gbm = (method == "blackbox-gbm" && a.has_gbm_blackbox) ? &a.gbm_blackbox
                       : (method == "probes-gbm" && a.has_gbm_whitebox)   ? &a.gbm_whitebox
                                                                          : nullptr;
    return score_method(method, a.model, a.has_probes ? &a.probes : nullptr,
                        a.has_scaler ? &a.scaler : nullptr, lr, gbm, data, basis);
}

// Grid search over the regularization strengths, judged by dev-set AUC; on a
// tie the smaller lambda wins (the grid is scanned in ascending order).
// The boosting-stage count is the GBM hyperparameter chosen on dev: the
// ensemble is trained out to the configured budget, then cut back to the
// prefix whose dev ranking is best (ties -> fewer stages). The truncated
// artifact is self-describing: its stage count and loss history match the
// trees it keeps.
GBMMeta select_gbm_stages(GBMMeta meta, const MetaFeatures& dev_f,
                          const std::vector<int>& dev_y,
                          const std::vector<Origin>& dev_origin) {
    const std::size_t n = dev_f.values.rows();
    std::vector<double> raw(n, meta.f0);
    std::size_t best_count = meta.trees.empty() ? 0 : 1;
    double best_auc = -1.0;
    for (std::size_t m = 0; m < meta.trees.size(); ++m) {
        for (std::size_t i = 0; i < n; ++i)
            raw[i] += meta.cfg.learning_rate * tree_value(meta.trees[m], dev_f.values.row(i));
        // The sigmoid is monotone, so raw scores rank exactly like scores.
        const ScoredSet scored{raw, dev_y, dev_origin};
        const double a = auc_of(scored);
        if (a > best_auc) {
            best_auc = a;
            best_count = m + 1;
        }
    }
    meta.trees.resize(best_count);
    meta.stage_losses.resize(best_count + 1);
    meta.cfg.stages = static_cast<int>(best_count);
    return meta;
}

LRMeta select_lr_lambda(const MetaFeatures& train_f, const std::vector<int>& train_y,
                        const MetaFeatures& dev_f, const std::vector<int>& dev_y,
                        const std::vector<Origin>& dev_origin, const ExperimentConfig& cfg) {
    std::vector<double> grid = cfg.lambda_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    LRMeta best;
    double best_auc = -1.0;
    for (double lambda : grid) {
        LRMeta m = train_lr_meta(train_f, train_y, lambda, cfg.lr_cfg);
        const ScoredSet dev_scored{score_lr_batch(m, dev_f.values), dev_y, dev_origin};
        const double a = auc_of(dev_scored);
        if (a > best_auc) {
            best_auc = a;
            best = std::move(m);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Report rendering

std::vector<double> sweep_thresholds(const ExperimentConfig& cfg) {
    std::vector<double> ts;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.eval.sweep_step;
        if (t > 1.0 + 1e-12) break;
        ts.push_back(std::min(t, 1.0));
    }
    return ts;
}

std::string roc_csv(const RocCurve& curve) {
    std::string s = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points)
        s += fmt(p.threshold) + "," + fmt(p.fpr) + "," + fmt(p.tpr) + "\n";
    return s;
}

std::string pr_csv(const PrCurve& curve) {
    std::string s = "threshold,recall,precision\n";
    for (const PrPoint& p : curve.points)
        s += fmt(p.threshold) + "," + fmt(p.recall) + "," + fmt(p.precision) + "\n";
    return s;
}

// Undefined ratios keep their value cell empty and carry a 0 flag, so plots
// can skip them instead of reading a fabricated number.
std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string s =
        "threshold,in_accepted,in_precision,in_precision_defined,in_recall,in_recall_defined,"
        "pooled_accepted,pooled_precision,pooled_precision_defined,pooled_recall,"
        "pooled_recall_defined\n";
    const auto cell = [](double value, bool defined) {
        return (defined ? fmt(value) : std::string()) + "," + (defined ? "1" : "0");
    };
    for (const SweepRow& r : rows) {
        s += fmt(r.threshold) + "," + std::to_string(r.in_accepted) + ",";
        s += cell(r.in_precision, r.in_precision_defined) + ",";
        s += cell(r.in_recall, r.in_recall_defined) + ",";
        s += std::to_string(r.pooled_accepted) + ",";
        s += cell(r.pooled_precision, r.pooled_precision_defined) + ",";
        s += cell(r.pooled_recall, r.pooled_recall_defined) + "\n";
    }
    return s;
}

std::string probe_acc_csv(const std::vector<double>& train_meta_acc,
                          const std::vector<double>& test_acc) {
    std::string s = "layer,train_meta_accuracy,test_accuracy\n";
    for (std::size_t i = 0; i < train_meta_acc.size(); ++i)
        s += std::to_string(i + 1) + "," + fmt(train_meta_acc[i]) + "," + fmt(test_acc[i]) + "\n";
    return s;
}

std::string importance_csv(const GBMMeta& meta) {
    const Matrix grid = gbm_feature_importance(meta);
    std::string s;
    if (meta.mode == FeatureMode::Whitebox) {
        s = "layer,position,importance\n";
        for (std::size_t r = 0; r < grid.rows(); ++r)
            for (std::size_t c = 0; c < grid.cols(); ++c)
                s += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
                     fmt(grid.at(r, c)) + "\n";
    } else {
        s = "position,importance\n";
        for (std::size_t c = 0; c < grid.cols(); ++c)
            s += std::to_string(c + 1) + "," + fmt(grid.at(0, c)) + "\n";
    }
    return s;
}

std::string quadrants_csv(const Quadrants& q, const ScoredSet& sc, const Dataset& data) {
    std::string s = "quadrant,index,id,origin,score\n";
    const auto emit = [&](const char* name, const std::vector<std::size_t>& idx) {
        for (std::size_t i : idx)
            s += std::string(name) + "," + std::to_string(i) + "," + std::to_string(data.ids[i]) +
                 "," + (data.origin[i] == Origin::InDomain ? "in_domain" : "ood") + "," +
                 fmt(sc.scores[i]) + "\n";
    };
    emit("TP", q.tp);
    emit("FP", q.fp);
    emit("TN", q.tn);
    emit("FN", q.fn);
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> methods = {"softmax",      "temperature", "blackbox-lr",
                                                     "blackbox-gbm", "probes-lr",   "probes-gbm"};
    return methods;
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigError, origin + ": invalid json (" + std::string(e.what()) + ")");
    }
    if (!j.is_object()) fail(ErrorCode::ConfigError, origin + ": top level must be an object");
    check_keys(j, "", {"seed", "out_dir", "condition", "noise_rate", "data", "split", "base",
                       "probes", "meta", "eval"});

    ExperimentConfig cfg;
    cfg.seed = read_u64(j, "", "seed", cfg.seed);
    cfg.out_dir = read_string(j, "", "out_dir", cfg.out_dir);
    if (const json* v = find(j, "condition")) {
        if (!v->is_string()) bad_field("condition", "expected a string");
        const std::string s = v->get<std::string>();
        if (s == "clean") cfg.condition = Condition::Clean;
        else if (s == "noisy") cfg.condition = Condition::Noisy;
        else bad_field("condition", "expected \"clean\" or \"noisy\", got \"" + s + "\"");
    }
    cfg.noise_rate = read_double(j, "", "noise_rate", cfg.noise_rate);

    if (const json* d = section(j, "data", "data")) {
        check_keys(*d, "data.",
                   {"source", "classes", "clusters_per_class", "dim", "pool_samples",
                    "test_samples", "ood_samples", "center_scale", "cluster_scale", "train_path",
                    "train_labels_path", "test_path", "test_labels_path", "ood_path",
                    "ood_labels_path", "declared_classes"});
        if (const json* v = find(*d, "source")) {
            if (!v->is_string()) bad_field("data.source", "expected a string");
            const std::string s = v->get<std::string>();
            if (s == "synthetic") cfg.data.source = DataSource::Synthetic;
            else if (s == "csv") cfg.data.source = DataSource::Csv;
            else if (s == "idx") cfg.data.source = DataSource::Idx;
            else bad_field("data.source", "expected \"synthetic\", \"csv\" or \"idx\", got \"" + s + "\"");
        }
        cfg.data.classes = read_int(*d, "data.", "classes", cfg.data.classes);
        cfg.data.clusters_per_class =
            read_int(*d, "data.", "clusters_per_class", cfg.data.clusters_per_class);
        cfg.data.dim = read_int(*d, "data.", "dim", cfg.data.dim);
        cfg.data.pool_samples = read_count(*d, "data.", "pool_samples", cfg.data.pool_samples);
        cfg.data.test_samples = read_count(*d, "data.", "test_samples", cfg.data.test_samples);
        cfg.data.ood_samples = read_count(*d, "data.", "ood_samples", cfg.data.ood_samples);
        cfg.data.center_scale = read_double(*d, "data.", "center_scale", cfg.data.center_scale);
        cfg.data.cluster_scale = read_double(*d, "data.", "cluster_scale", cfg.data.cluster_scale);
        cfg.data.train_path = read_string(*d, "data.", "train_path", cfg.data.train_path);
        cfg.data.train_labels_path =
            read_string(*d, "data.", "train_labels_path", cfg.data.train_labels_path);
        cfg.data.test_path = read_string(*d, "data.", "test_path", cfg.data.test_path);
        cfg.data.test_labels_path =
            read_string(*d, "data.", "test_labels_path", cfg.data.test_labels_path);
        cfg.data.ood_path = read_string(*d, "data.", "ood_path", cfg.data.ood_path);
        cfg.data.ood_labels_path =
            read_string(*d, "data.", "ood_labels_path", cfg.data.ood_labels_path);
        cfg.data.declared_classes =
            read_int(*d, "data.", "declared_classes", cfg.data.declared_classes);
    }

    if (const json* s = section(j, "split", "split")) {
        check_keys(*s, "split.", {"train_base", "train_meta", "dev"});
        cfg.split_train_base = read_double(*s, "split.", "train_base", cfg.split_train_base);
        cfg.split_train_meta = read_double(*s, "split.", "train_meta", cfg.split_train_meta);
        cfg.split_dev = read_double(*s, "split.", "dev", cfg.split_dev);
    }

    if (const json* b = section(j, "base", "base")) {
        check_keys(*b, "base.", {"hidden", "epochs", "batch_size", "learning_rate", "l2"});
        cfg.base_hidden = read_int_list(*b, "base.", "hidden", cfg.base_hidden);
        cfg.base_train.epochs = read_int(*b, "base.", "epochs", cfg.base_train.epochs);
        cfg.base_train.batch_size = read_int(*b, "base.", "batch_size", cfg.base_train.batch_size);
        cfg.base_train.learning_rate =
            read_double(*b, "base.", "learning_rate", cfg.base_train.learning_rate);
        cfg.base_train.l2 = read_double(*b, "base.", "l2", cfg.base_train.l2);
    }

    if (const json* p = section(j, "probes", "probes")) {
        check_keys(*p, "probes.", {"epochs", "batch_size", "learning_rate", "l2"});
        cfg.probe_train.epochs = read_int(*p, "probes.", "epochs", cfg.probe_train.epochs);
        cfg.probe_train.batch_size =
            read_int(*p, "probes.", "batch_size", cfg.probe_train.batch_size);
        cfg.probe_train.learning_rate =
            read_double(*p, "probes.", "learning_rate", cfg.probe_train.learning_rate);
        cfg.probe_train.l2 = read_double(*p, "probes.", "l2", cfg.probe_train.l2);
    }

    if (const json* m = section(j, "meta", "meta")) {
        check_keys(*m, "meta.", {"methods", "basis", "lambda_grid", "lr_max_epochs", "lr_tol", "gbm"});
        cfg.methods = read_string_list(*m, "meta.", "methods", cfg.methods);
        if (const json* v = find(*m, "basis")) {
            if (!v->is_string()) bad_field("meta.basis", "expected a string");
            const std::string s = v->get<std::string>();
            if (s == "probability") cfg.basis = FeatureBasis::Probability;
            else if (s == "logit") cfg.basis = FeatureBasis::Logit;
            else bad_field("meta.basis", "expected \"probability\" or \"logit\", got \"" + s + "\"");
        }
        cfg.lambda_grid = read_double_list(*m, "meta.", "lambda_grid", cfg.lambda_grid);
        cfg.lr_cfg.max_epochs = read_int(*m, "meta.", "lr_max_epochs", cfg.lr_cfg.max_epochs);
        cfg.lr_cfg.tol = read_double(*m, "meta.", "lr_tol", cfg.lr_cfg.tol);
        if (const json* g = section(*m, "gbm", "meta.gbm")) {
            check_keys(*g, "meta.gbm.",
                       {"learning_rate", "stages", "max_depth", "subsample", "min_samples_leaf"});
            cfg.gbm.learning_rate =
                read_double(*g, "meta.gbm.", "learning_rate", cfg.gbm.learning_rate);
            cfg.gbm.stages = read_int(*g, "meta.gbm.", "stages", cfg.gbm.stages);
            cfg.gbm.max_depth = read_int(*g, "meta.gbm.", "max_depth", cfg.gbm.max_depth);
            cfg.gbm.subsample = read_double(*g, "meta.gbm.", "subsample", cfg.gbm.subsample);
            cfg.gbm.min_samples_leaf =
                read_int(*g, "meta.gbm.", "min_samples_leaf", cfg.gbm.min_samples_leaf);
        }
    }

    if (const json* e = section(j, "eval", "eval")) {
        check_keys(*e, "eval.", {"sweep_step", "quadrant_threshold"});
        cfg.eval.sweep_step = read_double(*e, "eval.", "sweep_step", cfg.eval.sweep_step);
        cfg.eval.quadrant_threshold =
            read_double(*e, "eval.", "quadrant_threshold", cfg.eval.quadrant_threshold);
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open config file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::IoError, path + ": read failed");
    return parse(text, path);
}

void ExperimentConfig::override_methods(const std::string& csv) {
    std::vector<std::string> picked;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        std::string token = csv.substr(start, comma - start);
        const auto first = token.find_first_not_of(" \t");
        if (first != std::string::npos) {
            const auto last = token.find_last_not_of(" \t");
            picked.push_back(token.substr(first, last - first + 1));
        }
        start = comma + 1;
    }
    check_methods(picked);
    methods = std::move(picked);
}

void ExperimentConfig::validate() const {
    if (out_dir.empty()) bad_field("out_dir", "must not be empty");
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) bad_field("noise_rate", "must lie in [0, 1]");

    if (!(split_train_base > 0.0)) bad_field("split.train_base", "must be positive");
    if (!(split_train_meta > 0.0)) bad_field("split.train_meta", "must be positive");
    if (!(split_dev > 0.0)) bad_field("split.dev", "must be positive");
    const double frac_sum = split_train_base + split_train_meta + split_dev;
    if (std::abs(frac_sum - 1.0) > 1e-9) bad_field("split", "fractions must sum to 1");

    const auto require_path = [](const std::string& value, const char* field) {
        if (value.empty()) bad_field(field, "required for this data source");
    };
    const auto forbid_path = [](const std::string& value, const char* field, const char* source) {
        if (!value.empty())
            bad_field(field, std::string("not used by the ") + source + " source");
    };
    switch (data.source) {
    case DataSource::Synthetic:
        if (data.classes < 2) bad_field("data.classes", "need at least 2 classes");
        if (data.clusters_per_class < 1) bad_field("data.clusters_per_class", "must be at least 1");
        if (data.dim < 1) bad_field("data.dim", "must be at least 1");
        if (data.pool_samples < 1) bad_field("data.pool_samples", "must be at least 1");
        if (data.test_samples < 1) bad_field("data.test_samples", "must be at least 1");
        if (!(data.center_scale > 0.0)) bad_field("data.center_scale", "must be positive");
        if (!(data.cluster_scale > 0.0)) bad_field("data.cluster_scale", "must be positive");
        forbid_path(data.train_path, "data.train_path", "synthetic");
        forbid_path(data.train_labels_path, "data.train_labels_path", "synthetic");
        forbid_path(data.test_path, "data.test_path", "synthetic");
        forbid_path(data.test_labels_path, "data.test_labels_path", "synthetic");
        forbid_path(data.ood_path, "data.ood_path", "synthetic");
        forbid_path(data.ood_labels_path, "data.ood_labels_path", "synthetic");
        break;
    case DataSource::Csv:
        require_path(data.train_path, "data.train_path");
        require_path(data.test_path, "data.test_path");
        forbid_path(data.train_labels_path, "data.train_labels_path", "csv");
        forbid_path(data.test_labels_path, "data.test_labels_path", "csv");
        forbid_path(data.ood_labels_path, "data.ood_labels_path", "csv");
        break;
    case DataSource::Idx:
        require_path(data.train_path, "data.train_path");
        require_path(data.train_labels_path, "data.train_labels_path");
        require_path(data.test_path, "data.test_path");
        require_path(data.test_labels_path, "data.test_labels_path");
        if (data.ood_path.empty() != data.ood_labels_path.empty())
            bad_field("data.ood_labels_path", "idx out-of-domain data needs both files");
        break;
    }
    if (data.declared_classes < 0) bad_field("data.declared_classes", "must be non-negative");

    if (base_hidden.empty()) bad_field("base.hidden", "need at least one hidden layer");
    for (int w : base_hidden)
        if (w < 1) bad_field("base.hidden", "layer widths must be positive");
    check_train_config(base_train, "base.");
    check_train_config(probe_train, "probes.");

    check_methods(methods);
    if (lambda_grid.empty()) bad_field("meta.lambda_grid", "need at least one value");
    for (double l : lambda_grid)
        if (!(l >= 0.0) || !std::isfinite(l))
            bad_field("meta.lambda_grid", "values must be finite and non-negative");
    if (lr_cfg.max_epochs < 1) bad_field("meta.lr_max_epochs", "must be at least 1");
    if (!(lr_cfg.tol > 0.0)) bad_field("meta.lr_tol", "must be positive");
    if (!(lr_cfg.step_scale > 0.0)) bad_field("meta.lr_step_scale", "must be positive");
    if (!(gbm.learning_rate > 0.0)) bad_field("meta.gbm.learning_rate", "must be positive");
    if (gbm.stages < 1) bad_field("meta.gbm.stages", "must be at least 1");
    if (gbm.max_depth < 1) bad_field("meta.gbm.max_depth", "must be at least 1");
    if (!(gbm.subsample > 0.0 && gbm.subsample <= 1.0))
        bad_field("meta.gbm.subsample", "must lie in (0, 1]");
    if (gbm.min_samples_leaf < 1) bad_field("meta.gbm.min_samples_leaf", "must be at least 1");

    if (!(eval.sweep_step > 0.0 && eval.sweep_step <= 1.0))
        bad_field("eval.sweep_step", "must lie in (0, 1]");
    if (eval.sweep_step < 1e-6) bad_field("eval.sweep_step", "steps below 1e-6 are not supported");
    if (!(eval.quadrant_threshold >= 0.0 && eval.quadrant_threshold <= 1.0))
        bad_field("eval.quadrant_threshold", "must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Pipeline

PreparedData prepare_data(const ExperimentConfig& cfg) {
    cfg.validate();
    const DataConfig& dc = cfg.data;
    Dataset pool, test, ood;
    bool has_ood = false;

    switch (dc.source) {
    case DataSource::Synthetic: {
        // Pool and test are carved from one generator call, so they share the
        // exact cluster geometry; the out-of-domain set takes a fresh seed and
        // therefore disjoint class structure in the same feature space.
        SyntheticSpec spec;
        spec.classes = dc.classes;
        spec.clusters_per_class = dc.clusters_per_class;
        spec.dim = dc.dim;
        spec.samples = dc.pool_samples + dc.test_samples;
        spec.center_scale = dc.center_scale;
        spec.cluster_scale = dc.cluster_scale;
        spec.seed = Rng::derive(cfg.seed, kStreamPoolData);
        const Dataset both = generate_clusters(spec, 0);
        pool = slice_rows(both, 0, dc.pool_samples);
        test = slice_rows(both, dc.pool_samples, both.size());
        if (dc.ood_samples > 0) {
            SyntheticSpec ood_spec = spec;
            ood_spec.samples = dc.ood_samples;
            ood_spec.seed = Rng::derive(cfg.seed, kStreamOodData);
            ood = generate_clusters(ood_spec,
                                    static_cast<std::int64_t>(dc.pool_samples + dc.test_samples));
            has_ood = true;
        }
        break;
    }
    case DataSource::Csv: {
        pool = load_csv(dc.train_path, dc.declared_classes, 0);
        test = load_csv(dc.test_path, dc.declared_classes,
                        static_cast<std::int64_t>(pool.size()));
        if (!dc.ood_path.empty()) {
            ood = load_csv(dc.ood_path, 0, static_cast<std::int64_t>(pool.size() + test.size()));
            has_ood = true;
        }
        break;
    }
    case DataSource::Idx: {
        pool = load_idx_pair(dc.train_path, dc.train_labels_path, dc.declared_classes, 0);
        test = load_idx_pair(dc.test_path, dc.test_labels_path, dc.declared_classes,
                             static_cast<std::int64_t>(pool.size()));
        if (!dc.ood_path.empty()) {
            ood = load_idx_pair(dc.ood_path, dc.ood_labels_path, 0,
                                static_cast<std::int64_t>(pool.size() + test.size()));
            has_ood = true;
        }
        break;
    }
    }

    if (test.dim() != pool.dim())
        fail(ErrorCode::FormatError, "data: train and test feature widths differ");
    if (has_ood && ood.dim() != pool.dim())
        fail(ErrorCode::FormatError, "data: out-of-domain feature width differs from train");
    // The two in-domain sets must agree on the label space even if one of
    // them happens to miss a class.
    const int k = std::max(pool.num_classes, test.num_classes);
    pool.num_classes = k;
    test.num_classes = k;

    PreparedData out;
    out.has_ood = has_ood;
    // Label noise lands on the whole pool before the split, so base and meta
    // training and the dev set all see the same corrupted world. The test
    // and out-of-domain sets are never touched.
    if (cfg.condition == Condition::Noisy && cfg.noise_rate > 0.0) {
        const std::vector<int> before = pool.labels;
        pool = inject_label_noise(pool, {cfg.noise_rate, Rng::derive(cfg.seed, kStreamNoise)});
        for (std::size_t i = 0; i < before.size(); ++i)
            if (pool.labels[i] != before[i]) ++out.noise_changed;
    }

    SplitSpec ss;
    ss.train_base = cfg.split_train_base;
    ss.train_meta = cfg.split_train_meta;
    ss.dev = cfg.split_dev;
    ss.seed = Rng::derive(cfg.seed, kStreamSplit);
    SplitResult sr = split(pool, ss);
    out.train_base = std::move(sr.train_base);
    out.train_meta = std::move(sr.train_meta);
    out.dev = std::move(sr.dev);
    out.test = std::move(test);
    out.ood = std::move(ood);
    out.pooled = out.has_ood ? pool_ood(out.test, out.ood) : out.test;
    assert_disjoint_ids(out);
    return out;
}

void stage_gen_data(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    const std::string dir = cfg.out_dir + "/data";
    ensure_dir(dir);
    save_csv(d.train_base, dir + "/train_base.csv");
    save_csv(d.train_meta, dir + "/train_meta.csv");
    save_csv(d.dev, dir + "/dev.csv");
    save_csv(d.test, dir + "/test.csv");
    if (d.has_ood) save_csv(d.ood, dir + "/ood.csv");
}

void stage_train_base(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    TrainConfig tc = cfg.base_train;
    tc.seed = Rng::derive(cfg.seed, kStreamBase);
    const BaseModel model = train_base(d.train_base, build_arch(cfg, d.train_base.num_classes), tc);
    ensure_dir(artifacts_dir(cfg));
    model.save(base_artifact(cfg));
}

void stage_train_probes(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    const BaseModel model = BaseModel::load(base_artifact(cfg));
    TrainConfig tc = cfg.probe_train;
    tc.seed = Rng::derive(cfg.seed, kStreamProbes);
    const ProbeSet probes = train_probes(model, d.train_meta, tc);
    ensure_dir(artifacts_dir(cfg));
    probes.save(probes_artifact(cfg));
}

void stage_train_meta(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    const BaseModel model = BaseModel::load(base_artifact(cfg));
    ProbeSet probes;
    if (wants_whitebox(cfg)) {
        probes = ProbeSet::load(probes_artifact(cfg));
        if (probes.base_fingerprint != model.fingerprint())
            fail(ErrorCode::StaleProbe,
                 probes_artifact(cfg) + ": probe set was fit against a different base model");
    }

    const std::vector<int> train_y = meta_labels(model, d.train_meta);
    const std::vector<int> dev_y = meta_labels(model, d.dev);
    MetaFeatures bb_train, bb_dev, wb_train, wb_dev;
    if (wants_blackbox_meta(cfg)) {
        bb_train = assemble_blackbox_matrix(model, d.train_meta, cfg.basis);
        bb_dev = assemble_blackbox_matrix(model, d.dev, cfg.basis);
    }
    if (wants_whitebox(cfg)) {
        wb_train = assemble_whitebox_matrix(model, probes, d.train_meta, cfg.basis);
        wb_dev = assemble_whitebox_matrix(model, probes, d.dev, cfg.basis);
    }

    ensure_dir(artifacts_dir(cfg));
    for (const std::string& method : cfg.methods) {
        if (method == "softmax") continue; // scored straight off the base model
        if (method == "temperature") {
            const TemperatureScaler scaler =
                fit_temperature(collect_logits(model, d.dev), d.dev.labels);
            scaler.save(temperature_artifact(cfg));
        } else if (method == "blackbox-lr") {
            select_lr_lambda(bb_train, train_y, bb_dev, dev_y, d.dev.origin, cfg)
                .save(meta_artifact(cfg, method));
        } else if (method == "probes-lr") {
            select_lr_lambda(wb_train, train_y, wb_dev, dev_y, d.dev.origin, cfg)
                .save(meta_artifact(cfg, method));
        } else if (method == "blackbox-gbm") {
            GbmConfig g = cfg.gbm;
            g.seed = Rng::derive(cfg.seed, kStreamGbmBlackbox);
            select_gbm_stages(train_gbm_meta(bb_train, train_y, g), bb_dev, dev_y,
                              d.dev.origin)
                .save(meta_artifact(cfg, method));
        } else if (method == "probes-gbm") {
            GbmConfig g = cfg.gbm;
            g.seed = Rng::derive(cfg.seed, kStreamGbmWhitebox);
            select_gbm_stages(train_gbm_meta(wb_train, train_y, g), wb_dev, dev_y,
                              d.dev.origin)
                .save(meta_artifact(cfg, method));
        }
    }
}

void stage_evaluate(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    const LoadedArtifacts a = load_artifacts_for(cfg, /*want_probes=*/true);
    ensure_dir(cfg.out_dir);

    const std::vector<int> test_y = meta_labels(a.model, d.test);
    const std::vector<int> pooled_y = meta_labels(a.model, d.pooled);
    const std::vector<double> thresholds = sweep_thresholds(cfg);
    const std::vector<double> probe_train_acc = probe_accuracy_report(a.probes, a.model, d.train_meta);
    const std::vector<double> probe_test_acc = probe_accuracy_report(a.probes, a.model, d.test);

    json summary;
    summary["schema_version"] = 1;
    summary["seed"] = cfg.seed;
    summary["condition"] = cfg.condition == Condition::Noisy ? "noisy" : "clean";
    summary["basis"] = cfg.basis == FeatureBasis::Logit ? "logit" : "probability";
    summary["methods"] = cfg.methods;
    summary["noise"] = {{"applied", cfg.condition == Condition::Noisy && cfg.noise_rate > 0.0},
                        {"rate", cfg.noise_rate},
                        {"changed", d.noise_changed}};
    summary["counts"] = {{"train_base", d.train_base.size()}, {"train_meta", d.train_meta.size()},
                         {"dev", d.dev.size()},               {"test", d.test.size()},
                         {"ood", d.has_ood ? d.ood.size() : 0}, {"pooled", d.pooled.size()}};
    summary["base_accuracy"] = {{"train_base", accuracy(a.model, d.train_base)},
                                {"train_meta", accuracy(a.model, d.train_meta)},
                                {"dev", accuracy(a.model, d.dev)},
                                {"test", accuracy(a.model, d.test)}};
    summary["probe_accuracy"] = {{"train_meta", probe_train_acc}, {"test", probe_test_acc}};
    if (a.has_scaler) summary["temperature"] = a.scaler.t;
    json lambdas = json::object();
    if (a.has_lr_blackbox) lambdas["blackbox-lr"] = a.lr_blackbox.lambda;
    if (a.has_lr_whitebox) lambdas["probes-lr"] = a.lr_whitebox.lambda;
    if (!lambdas.empty()) summary["lr_lambda"] = lambdas;
    json stages = json::object();
    if (a.has_gbm_blackbox) stages["blackbox-gbm"] = a.gbm_blackbox.trees.size();
    if (a.has_gbm_whitebox) stages["probes-gbm"] = a.gbm_whitebox.trees.size();
    if (!stages.empty()) summary["gbm_stages"] = stages;

    json auc_in = json::object();
    json auc_pooled = json::object();
    for (const std::string& method : cfg.methods) {
        const ScoredSet in_sc{scores_for(a, method, d.test, cfg.basis), test_y, d.test.origin};
        const ScoredSet pooled_sc{scores_for(a, method, d.pooled, cfg.basis), pooled_y,
                                  d.pooled.origin};
        auc_in[method] = auc_of(in_sc);
        auc_pooled[method] = auc_of(pooled_sc);
        write_text_file(cfg.out_dir + "/roc_" + method + "_in_domain.csv",
                        roc_csv(roc_curve(in_sc)));
        write_text_file(cfg.out_dir + "/roc_" + method + "_pooled.csv",
                        roc_csv(roc_curve(pooled_sc)));
        write_text_file(cfg.out_dir + "/pr_" + method + "_in_domain.csv", pr_csv(pr_curve(in_sc)));
        write_text_file(cfg.out_dir + "/pr_" + method + "_pooled.csv", pr_csv(pr_curve(pooled_sc)));
        write_text_file(cfg.out_dir + "/sweep_" + method + ".csv",
                        sweep_csv(threshold_sweep(in_sc, pooled_sc, thresholds)));
    }
    summary["auc"] = {{"in_domain", auc_in}, {"pooled", auc_pooled}};

    write_text_file(cfg.out_dir + "/probe_acc.csv", probe_acc_csv(probe_train_acc, probe_test_acc));
    write_text_file(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
}

void stage_importance(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    for (const std::string& method : cfg.methods) {
        if (method != "blackbox-gbm" && method != "probes-gbm") continue;
        const GBMMeta meta = GBMMeta::load(meta_artifact(cfg, method));
        write_text_file(cfg.out_dir + "/importance_" + method + ".csv", importance_csv(meta));
    }
}

void stage_quadrants(const ExperimentConfig& cfg) {
    const PreparedData d = prepare_data(cfg);
    const LoadedArtifacts a = load_artifacts_for(cfg, /*want_probes=*/false);
    ensure_dir(cfg.out_dir);
    const std::vector<int> pooled_y = meta_labels(a.model, d.pooled);
    for (const std::string& method : cfg.methods) {
        const ScoredSet sc{scores_for(a, method, d.pooled, cfg.basis), pooled_y, d.pooled.origin};
        const Quadrants q = confusion_quadrants(sc, cfg.eval.quadrant_threshold);
        write_text_file(cfg.out_dir + "/quadrants_" + method + ".csv",
                        quadrants_csv(q, sc, d.pooled));
    }
}

void run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    stage_train_base(cfg);
    stage_train_probes(cfg);
    stage_train_meta(cfg);
    stage_evaluate(cfg);
    stage_importance(cfg);
    stage_quadrants(cfg);
}

std::vector<double> score_method(const std::string& method, const BaseModel& model,
                                 const ProbeSet* probes, const TemperatureScaler* scaler,
                                 const LRMeta* lr, const GBMMeta* gbm, const Dataset& data,
                                 FeatureBasis basis) {
    data.validate();
    if (method == "softmax") {
        std::vector<double> out;
        out.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            out.push_back(softmax_response(predict_proba(model, data.features.row(i))));
        return out;
    }
    if (method == "temperature") {
        if (scaler == nullptr)
            fail(ErrorCode::InvalidArgument, "score: method 'temperature' needs a scaler");
        std::vector<double> out;
        out.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const ActivationTrace tr = forward_with_trace(model, data.features.row(i));
            out.push_back(softmax_response(apply_temperature(*scaler, tr.final_logits)));
        }
        return out;
    }

    const bool is_lr = method == "blackbox-lr" || method == "probes-lr";
    const bool is_gbm = method == "blackbox-gbm" || method == "probes-gbm";
    if (!is_lr && !is_gbm) fail(ErrorCode::ConfigError, "unknown method '" + method + "'");
    const bool whitebox = method == "probes-lr" || method == "probes-gbm";
    if (whitebox && probes == nullptr)
        fail(ErrorCode::InvalidArgument, "score: method '" + method + "' needs a probe set");
    const MetaFeatures f = whitebox ? assemble_whitebox_matrix(model, *probes, data, basis)
                                    : assemble_blackbox_matrix(model, data, basis);
    if (is_lr) {
        if (lr == nullptr)
            fail(ErrorCode::InvalidArgument, "score: method '" + method + "' needs an lr meta-model");
        if (lr->mode != f.mode || lr->basis != f.basis || lr->num_classes != f.num_classes ||
            lr->probe_count != f.probe_count)
            fail(ErrorCode::IncompatibleArtifact,
                 "score: lr meta-model does not match the feature layout of '" + method + "'");
        return score_lr_batch(*lr, f.values);
    }
    if (gbm == nullptr)
        fail(ErrorCode::InvalidArgument, "score: method '" + method + "' needs a gbm meta-model");
    if (gbm->mode != f.mode || gbm->basis != f.basis || gbm->num_classes != f.num_classes ||
        gbm->probe_count != f.probe_count)
        fail(ErrorCode::IncompatibleArtifact,
             "score: gbm meta-model does not match the feature layout of '" + method + "'");
    return score_gbm_batch(*gbm, f.values);
}

} // namespace metaconf
