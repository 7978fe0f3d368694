#include "metaconf/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaconf/errors.hpp"
#include "metaconf/numeric.hpp"
#include "metaconf/rng.hpp"
#include "metaconf/serialize.hpp"

namespace metaconf {

namespace {

// ln(1 + e^t) without overflow for large |t|.
double softplus(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}

// Binary log-loss of a raw (pre-sigmoid) score.
double logistic_loss(double raw, int label) {
    return label == 1 ? softplus(-raw) : softplus(raw);
}

} // namespace

std::vector<double> assemble_features(const std::vector<std::vector<double>>& probe_outputs,
                                      FeatureMode mode, FeatureBasis basis) {
    if (probe_outputs.empty())
        fail(ErrorCode::InvalidArgument, "features: no probe outputs");
    const std::size_t k = probe_outputs.front().size();
    if (k == 0) fail(ErrorCode::InvalidArgument, "features: empty probe output");
    for (const auto& y : probe_outputs)
        if (y.size() != k)
            fail(ErrorCode::InvalidArgument, "features: probe outputs disagree on class count");

    const std::vector<std::size_t> order = rank_order_desc(probe_outputs.back());
    const std::size_t first_block = mode == FeatureMode::Whitebox ? 0 : probe_outputs.size() - 1;

    std::vector<double> out;
    out.reserve((probe_outputs.size() - first_block) * k);
    for (std::size_t b = first_block; b < probe_outputs.size(); ++b) {
        for (std::size_t pos = 0; pos < k; ++pos) {
            double v = probe_outputs[b][order[pos]];
            if (basis == FeatureBasis::Logit) {
                if (!(v > 0.0))
                    fail(ErrorCode::InvalidArgument,
                         "features: logit basis needs strictly positive probabilities");
                v = std::log(v);
            }
            out.push_back(v);
        }
    }
    return out;
}

MetaFeatures assemble_whitebox_matrix(const BaseModel& model, const ProbeSet& probes,
                                      const Dataset& data, FeatureBasis basis) {
    model.validate();
    probes.validate();
    if (data.size() == 0) fail(ErrorCode::InvalidArgument, "features: empty dataset");

    MetaFeatures f;
    f.mode = FeatureMode::Whitebox;
    f.basis = basis;
    f.probe_count = static_cast<int>(probes.size());
    f.num_classes = model.num_classes;
    f.values = Matrix(data.size(), probes.size() * static_cast<std::size_t>(model.num_classes));
    for (std::size_t i = 0; i < data.size(); ++i) {
        ActivationTrace trace = forward_with_trace(model, data.features.row(i));
        std::vector<double> row =
            assemble_features(probe_forward(probes, trace), FeatureMode::Whitebox, basis);
        std::copy(row.begin(), row.end(), f.values.row(i).begin());
    }
    return f;
}

MetaFeatures assemble_blackbox_matrix(const BaseModel& model, const Dataset& data,
                                      FeatureBasis basis) {
    model.validate();
    if (data.size() == 0) fail(ErrorCode::InvalidArgument, "features: empty dataset");

    MetaFeatures f;
    f.mode = FeatureMode::Blackbox;
    f.basis = basis;
    f.probe_count = 1;
    f.num_classes = model.num_classes;
    f.values = Matrix(data.size(), static_cast<std::size_t>(model.num_classes));
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> yhat = predict_proba(model, data.features.row(i));
        std::vector<double> row = assemble_features({yhat}, FeatureMode::Blackbox, basis);
        std::copy(row.begin(), row.end(), f.values.row(i).begin());
    }
    return f;
}

std::vector<int> meta_labels(const BaseModel& model, const Dataset& data) {
    model.validate();
    std::vector<int> labels(data.size(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.origin[i] != Origin::InDomain) continue; // surely wrong
        labels[i] = predict(model, data.features.row(i)) == data.labels[i] ? 1 : 0;
    }
    return labels;
}

double softmax_response(std::span<const double> yhat) {
    if (yhat.empty()) fail(ErrorCode::InvalidArgument, "softmax response: empty vector");
    return *std::max_element(yhat.begin(), yhat.end());
}

// ---------------------------------------------------------------------------
// Logistic regression

double lr_loss_and_gradient(std::span<const double> weights, double intercept,
                            const Matrix& features, const std::vector<int>& labels,
                            double lambda, std::vector<double>& grad_w, double& grad_b) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (n == 0 || labels.size() != n)
        fail(ErrorCode::InvalidArgument, "lr: labels do not match feature rows");
    if (weights.size() != d) fail(ErrorCode::InvalidArgument, "lr: weight width mismatch");
    if (lambda < 0.0) fail(ErrorCode::InvalidArgument, "lr: lambda must be >= 0");

    grad_w.assign(d, 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = features.row(i).data();
        double raw = intercept;
        for (std::size_t j = 0; j < d; ++j) raw += weights[j] * x[j];
        loss += logistic_loss(raw, labels[i]);
        const double err = sigmoid(raw) - static_cast<double>(labels[i]);
        for (std::size_t j = 0; j < d; ++j) grad_w[j] += err * x[j];
        grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    grad_b *= inv_n;
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        grad_w[j] = grad_w[j] * inv_n + lambda * weights[j];
        sq += weights[j] * weights[j];
    }
    // intercept carries no penalty
    return loss + 0.5 * lambda * sq;
}

LRMeta train_lr_meta(const MetaFeatures& features, const std::vector<int>& labels,
                     double lambda, const LRConfig& cfg) {
    const Matrix& x = features.values;
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || d == 0) fail(ErrorCode::InvalidArgument, "lr: empty features");
    if (labels.size() != n) fail(ErrorCode::InvalidArgument, "lr: labels do not match feature rows");
    if (!x.all_finite()) fail(ErrorCode::InvalidArgument, "lr: non-finite feature value");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else fail(ErrorCode::InvalidArgument, "lr: labels must be 0/1");
    }
    if (!has0 || !has1)
        fail(ErrorCode::DegenerateLabels, "lr: training labels are single-class");
    if (cfg.max_epochs < 1 || !(cfg.step_scale > 0.0) || !(cfg.tol >= 0.0))
        fail(ErrorCode::InvalidArgument, "lr: bad training configuration");

    // Step size from the descent-guaranteeing Lipschitz bound of the
    // objective: L <= (1/4N) * (sum x^2 + N) + lambda, the +N covering the
    // implicit all-ones intercept column.
    double sum_sq = 0.0;
    for (double v : x.data()) sum_sq += v * v;
    const double lips =
        (sum_sq + static_cast<double>(n)) / (4.0 * static_cast<double>(n)) + lambda;
    const double step = cfg.step_scale / lips;

    LRMeta meta;
    meta.weights.assign(d, 0.0);
    meta.intercept = 0.0;
    meta.lambda = lambda;
    meta.mode = features.mode;
    meta.basis = features.basis;
    meta.probe_count = features.probe_count;
    meta.num_classes = features.num_classes;

    std::vector<double> gw;
    double gb = 0.0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        (void)lr_loss_and_gradient(meta.weights, meta.intercept, x, labels, lambda, gw, gb);
        double norm_sq = gb * gb;
        for (double g : gw) norm_sq += g * g;
        meta.final_grad_norm = std::sqrt(norm_sq);
        meta.epochs_run = epoch;
        if (meta.final_grad_norm < cfg.tol) return meta;
        for (std::size_t j = 0; j < d; ++j) meta.weights[j] -= step * gw[j];
        meta.intercept -= step * gb;
    }
    // record the norm after the final update as well
    (void)lr_loss_and_gradient(meta.weights, meta.intercept, x, labels, lambda, gw, gb);
    double norm_sq = gb * gb;
    for (double g : gw) norm_sq += g * g;
    meta.final_grad_norm = std::sqrt(norm_sq);
    meta.epochs_run = cfg.max_epochs;
    return meta;
}

double score_lr(const LRMeta& meta, std::span<const double> features) {
    if (features.size() != meta.weights.size())
        fail(ErrorCode::InvalidArgument, "lr: feature width " + std::to_string(features.size()) +
                                             " != model width " + std::to_string(meta.weights.size()));
    double raw = meta.intercept;
    for (std::size_t j = 0; j < features.size(); ++j) raw += meta.weights[j] * features[j];
    return sigmoid(raw);
}

std::vector<double> score_lr_batch(const LRMeta& meta, const Matrix& features) {
    std::vector<double> scores(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) scores[i] = score_lr(meta, features.row(i));
    return scores;
}

// ---------------------------------------------------------------------------
// Gradient boosting

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exact scan over sorted feature values; gain is the squared-error
// improvement sum_L^2/n_L + sum_R^2/n_R - sum^2/n of the residuals.
SplitChoice best_split(const Matrix& x, const std::vector<double>& residual,
                       const std::vector<std::size_t>& node_samples, int min_leaf) {
    SplitChoice best;
    const std::size_t n = node_samples.size();
    if (n < 2 * static_cast<std::size_t>(min_leaf)) return best;

    double total = 0.0;
    for (std::size_t s : node_samples) total += residual[s];
    const double parent_score = total * total / static_cast<double>(n);

    std::vector<std::pair<double, double>> vals(n); // (feature value, residual)
    for (std::size_t f = 0; f < x.cols(); ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t s = node_samples[i];
            vals[i] = {x.at(s, f), residual[s]};
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue; // no boundary here
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf))
                continue;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n_right) -
                                parent_score;
            if (gain > best.gain + 1e-12 && gain > 1e-12) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_node(Tree& tree, const Matrix& x, const std::vector<double>& residual,
              const std::vector<double>& hessian, std::vector<std::size_t>& node_samples,
              int depth, const GbmConfig& cfg) {
    SplitChoice split;
    if (depth < cfg.max_depth)
        split = best_split(x, residual, node_samples, cfg.min_samples_leaf);

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (!split.found) {
        double r_sum = 0.0, h_sum = 0.0;
        for (std::size_t s : node_samples) {
            r_sum += residual[s];
            h_sum += hessian[s];
        }
        // Newton step for the logistic loss, guarded and clamped so a nearly
        // pure leaf cannot fling the raw score to infinity.
        double value = r_sum / std::max(h_sum, 1e-12);
        value = std::clamp(value, -8.0, 8.0);
        tree.nodes[static_cast<std::size_t>(index)].value = value;
        return index;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t s : node_samples) {
        if (x.at(s, static_cast<std::size_t>(split.feature)) <= split.threshold)
            left.push_back(s);
        else
            right.push_back(s);
    }
    node_samples.clear();
    node_samples.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(index)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(index)].threshold = split.threshold;
    tree.nodes[static_cast<std::size_t>(index)].gain = split.gain;
    const int left_child = grow_node(tree, x, residual, hessian, left, depth + 1, cfg);
    tree.nodes[static_cast<std::size_t>(index)].left = left_child;
    const int right_child = grow_node(tree, x, residual, hessian, right, depth + 1, cfg);
    tree.nodes[static_cast<std::size_t>(index)].right = right_child;
    return index;
}

} // namespace

double tree_value(const Tree& tree, std::span<const double> features) {
    if (tree.nodes.empty()) fail(ErrorCode::InvalidArgument, "tree: no nodes");
    std::size_t idx = 0;
    while (true) {
        const TreeNode& node = tree.nodes[idx];
        if (node.feature < 0) return node.value;
        if (static_cast<std::size_t>(node.feature) >= features.size())
            fail(ErrorCode::InvalidArgument, "tree: feature width smaller than training width");
        idx = static_cast<std::size_t>(
            features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                               : node.right);
    }
}

GBMMeta train_gbm_meta(const MetaFeatures& features, const std::vector<int>& labels,
                       const GbmConfig& cfg) {
    const Matrix& x = features.values;
    const std::size_t n = x.rows();
    if (n == 0 || x.cols() == 0) fail(ErrorCode::InvalidArgument, "gbm: empty features");
    if (labels.size() != n) fail(ErrorCode::InvalidArgument, "gbm: labels do not match feature rows");
    if (!x.all_finite()) fail(ErrorCode::InvalidArgument, "gbm: non-finite feature value");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) fail(ErrorCode::InvalidArgument, "gbm: labels must be 0/1");
        positives += static_cast<std::size_t>(y);
    }
    if (positives == 0 || positives == n)
        fail(ErrorCode::DegenerateLabels, "gbm: training labels are single-class");
    if (cfg.stages < 0 || cfg.max_depth < 1 || cfg.min_samples_leaf < 1)
        fail(ErrorCode::InvalidArgument, "gbm: bad hyperparameters");
    if (!(cfg.learning_rate > 0.0))
        fail(ErrorCode::InvalidArgument, "gbm: learning rate must be positive");
    if (!(cfg.subsample > 0.0) || cfg.subsample > 1.0)
        fail(ErrorCode::InvalidArgument, "gbm: subsample must lie in (0, 1]");

    GBMMeta meta;
    meta.cfg = cfg;
    meta.mode = features.mode;
    meta.basis = features.basis;
    meta.probe_count = features.probe_count;
    meta.num_classes = features.num_classes;
    meta.f0 = std::log(static_cast<double>(positives) /
                       static_cast<double>(n - positives));

    std::vector<double> raw(n, meta.f0);
    auto full_loss = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += logistic_loss(raw[i], labels[i]);
        return loss / static_cast<double>(n);
    };
    meta.stage_losses.push_back(full_loss());

    Rng rng(cfg.seed);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<double> residual(n), hessian(n);

    const std::size_t sub_n =
        cfg.subsample < 1.0
            ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                           cfg.subsample * static_cast<double>(n)))
            : n;
    for (int stage = 0; stage < cfg.stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(raw[i]);
            residual[i] = static_cast<double>(labels[i]) - p;
            hessian[i] = std::max(p * (1.0 - p), 1e-16);
        }
        std::vector<std::size_t> in_sample;
        if (cfg.subsample < 1.0) {
            rng.shuffle(all);
            in_sample.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(sub_n));
            std::sort(in_sample.begin(), in_sample.end());
        } else {
            in_sample = all;
        }

        Tree tree;
        grow_node(tree, x, residual, hessian, in_sample, 0, cfg);
        for (std::size_t i = 0; i < n; ++i)
            raw[i] += cfg.learning_rate * tree_value(tree, x.row(i));
        meta.trees.push_back(std::move(tree));
        meta.stage_losses.push_back(full_loss());
    }
    return meta;
}

double score_gbm(const GBMMeta& meta, std::span<const double> features) {
    double raw = meta.f0;
    for (const Tree& tree : meta.trees) {
        for (const TreeNode& node : tree.nodes)
            if (node.feature >= 0 && static_cast<std::size_t>(node.feature) >= features.size())
                fail(ErrorCode::InvalidArgument, "gbm: feature width smaller than training width");
        raw += meta.cfg.learning_rate * tree_value(tree, features);
    }
    return sigmoid(raw);
}

std::vector<double> score_gbm_batch(const GBMMeta& meta, const Matrix& features) {
    std::vector<double> scores(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        scores[i] = score_gbm(meta, features.row(i));
    return scores;
}

Matrix gbm_feature_importance(const GBMMeta& meta) {
    if (meta.probe_count < 1 || meta.num_classes < 1)
        fail(ErrorCode::InvalidArgument, "gbm importance: unknown feature layout");
    const std::size_t rows =
        meta.mode == FeatureMode::Whitebox ? static_cast<std::size_t>(meta.probe_count) : 1;
    const std::size_t cols = static_cast<std::size_t>(meta.num_classes);
    std::vector<double> totals(rows * cols, 0.0);
    double sum = 0.0;
    for (const Tree& tree : meta.trees) {
        for (const TreeNode& node : tree.nodes) {
            if (node.feature < 0) continue;
            if (static_cast<std::size_t>(node.feature) >= totals.size())
                fail(ErrorCode::InvalidArgument, "gbm importance: split outside feature grid");
            totals[static_cast<std::size_t>(node.feature)] += node.gain;
            sum += node.gain;
        }
    }
    Matrix grid(rows, cols);
    if (sum > 0.0)
        for (std::size_t i = 0; i < totals.size(); ++i)
            grid.data()[i] = totals[i] / sum;
    return grid;
}

// ---------------------------------------------------------------------------
// Temperature scaling

double mean_nll(const Matrix& logits, const std::vector<int>& labels, double temperature) {
    const std::size_t n = logits.rows();
    if (n == 0 || labels.size() != n)
        fail(ErrorCode::InvalidArgument, "temperature: labels do not match logit rows");
    if (!(temperature > 0.0))
        fail(ErrorCode::InvalidArgument, "temperature: T must be positive");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols())
            fail(ErrorCode::InvalidArgument, "temperature: label out of range");
        auto row = logits.row(i);
        double max_z = row[0] / temperature;
        for (std::size_t j = 1; j < row.size(); ++j)
            max_z = std::max(max_z, row[j] / temperature);
        double lse = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j)
            lse += std::exp(row[j] / temperature - max_z);
        total += -(row[static_cast<std::size_t>(y)] / temperature - max_z - std::log(lse));
    }
    return total / static_cast<double>(n);
}

TemperatureScaler fit_temperature(const Matrix& logits, const std::vector<int>& labels) {
    // Golden-section search on ln T over [ln 0.05, ln 20]; the objective is
    // smooth and unimodal in practice, and T = 1 is restored whenever the
    // search fails to beat it.
    double lo = std::log(0.05), hi = std::log(20.0);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto eval = [&](double u) { return mean_nll(logits, labels, std::exp(u)); };
    double a = hi - phi * (hi - lo);
    double b = lo + phi * (hi - lo);
    double fa = eval(a), fb = eval(b);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = eval(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = eval(b);
        }
    }
    TemperatureScaler scaler;
    const double candidate = std::exp(0.5 * (lo + hi));
    scaler.t = mean_nll(logits, labels, candidate) <= mean_nll(logits, labels, 1.0) ? candidate
                                                                                   : 1.0;
    return scaler;
}

std::vector<double> apply_temperature(const TemperatureScaler& scaler,
                                      std::span<const double> logits) {
    if (!(scaler.t > 0.0)) fail(ErrorCode::InvalidArgument, "temperature: T must be positive");
    if (scaler.t == 1.0) return softmax(logits);
    std::vector<double> scaled(logits.begin(), logits.end());
    for (double& v : scaled) v /= scaler.t;
    return softmax(scaled);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr std::uint32_t kLrMagic = 0x4D434C52u;   // "MCLR"
constexpr std::uint32_t kGbmMagic = 0x4D434742u;  // "MCGB"
constexpr std::uint32_t kTempMagic = 0x4D435453u; // "MCTS"
constexpr std::uint32_t kMetaVersion = 1;
} // namespace

void LRMeta::save(const std::string& path) const {
    BinaryWriter w;
    w.u32(kLrMagic);
    w.u32(kMetaVersion);
    w.u8(static_cast<std::uint8_t>(mode));
    w.u8(static_cast<std::uint8_t>(basis));
    w.u32(static_cast<std::uint32_t>(probe_count));
    w.u32(static_cast<std::uint32_t>(num_classes));
    w.f64(lambda);
    w.f64(intercept);
    w.f64_vec(weights);
    w.f64(final_grad_norm);
    w.u32(static_cast<std::uint32_t>(epochs_run));
    w.write_file(path);
}

LRMeta LRMeta::load(const std::string& path) {
    BinaryReader r = BinaryReader::from_file(path);
    if (r.u32() != kLrMagic) fail(ErrorCode::FormatError, path + ": not an lr meta-model file");
    if (r.u32() != kMetaVersion) fail(ErrorCode::IncompatibleArtifact, path + ": unsupported version");
    LRMeta meta;
    meta.mode = static_cast<FeatureMode>(r.u8());
    meta.basis = static_cast<FeatureBasis>(r.u8());
    meta.probe_count = static_cast<int>(r.u32());
    meta.num_classes = static_cast<int>(r.u32());
    meta.lambda = r.f64();
    meta.intercept = r.f64();
    meta.weights = r.f64_vec();
    meta.final_grad_norm = r.f64();
    meta.epochs_run = static_cast<int>(r.u32());
    return meta;
}

void GBMMeta::save(const std::string& path) const {
    BinaryWriter w;
    w.u32(kGbmMagic);
    w.u32(kMetaVersion);
    w.u8(static_cast<std::uint8_t>(mode));
    w.u8(static_cast<std::uint8_t>(basis));
    w.u32(static_cast<std::uint32_t>(probe_count));
    w.u32(static_cast<std::uint32_t>(num_classes));
    w.f64(cfg.learning_rate);
    w.u32(static_cast<std::uint32_t>(cfg.stages));
    w.u32(static_cast<std::uint32_t>(cfg.max_depth));
    w.f64(cfg.subsample);
    w.u32(static_cast<std::uint32_t>(cfg.min_samples_leaf));
    w.u64(cfg.seed);
    w.f64(f0);
    w.f64_vec(stage_losses);
    w.u32(static_cast<std::uint32_t>(trees.size()));
    for (const Tree& tree : trees) {
        w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
        for (const TreeNode& node : tree.nodes) {
            w.i64(node.feature);
            w.f64(node.threshold);
            w.f64(node.gain);
            w.i64(node.left);
            w.i64(node.right);
            w.f64(node.value);
        }
    }
    w.write_file(path);
}

GBMMeta GBMMeta::load(const std::string& path) {
    BinaryReader r = BinaryReader::from_file(path);
    if (r.u32() != kGbmMagic) fail(ErrorCode::FormatError, path + ": not a gbm meta-model file");
    if (r.u32() != kMetaVersion) fail(ErrorCode::IncompatibleArtifact, path + ": unsupported version");
    GBMMeta meta;
    meta.mode = static_cast<FeatureMode>(r.u8());
    meta.basis = static_cast<FeatureBasis>(r.u8());
    meta.probe_count = static_cast<int>(r.u32());
    meta.num_classes = static_cast<int>(r.u32());
    meta.cfg.learning_rate = r.f64();
    meta.cfg.stages = static_cast<int>(r.u32());
    meta.cfg.max_depth = static_cast<int>(r.u32());
    meta.cfg.subsample = r.f64();
    meta.cfg.min_samples_leaf = static_cast<int>(r.u32());
    meta.cfg.seed = r.u64();
    meta.f0 = r.f64();
    meta.stage_losses = r.f64_vec();
    const std::uint32_t n_trees = r.u32();
    for (std::uint32_t t = 0; t < n_trees; ++t) {
        Tree tree;
        const std::uint32_t n_nodes = r.u32();
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
            TreeNode node;
            node.feature = static_cast<int>(r.i64());
            node.threshold = r.f64();
            node.gain = r.f64();
            node.left = static_cast<int>(r.i64());
            node.right = static_cast<int>(r.i64());
            node.value = r.f64();
            tree.nodes.push_back(node);
        }
        meta.trees.push_back(std::move(tree));
    }
    return meta;
}

void TemperatureScaler::save(const std::string& path) const {
    BinaryWriter w;
    w.u32(kTempMagic);
    w.u32(kMetaVersion);
    w.f64(t);
    w.write_file(path);
}

TemperatureScaler TemperatureScaler::load(const std::string& path) {
    BinaryReader r = BinaryReader::from_file(path);
    if (r.u32() != kTempMagic) fail(ErrorCode::FormatError, path + ": not a temperature file");
    if (r.u32() != kMetaVersion) fail(ErrorCode::IncompatibleArtifact, path + ": unsupported version");
    TemperatureScaler s;
    s.t = r.f64();
    if (!(s.t > 0.0)) fail(ErrorCode::FormatError, path + ": non-positive temperature");
    return s;
}

} // namespace metaconf
