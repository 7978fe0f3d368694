#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaconf/base_model.hpp"
#include "metaconf/dataset.hpp"
#include "metaconf/matrix.hpp"
#include "metaconf/probes.hpp"

namespace metaconf {

enum class FeatureMode : std::uint8_t { Whitebox = 0, Blackbox = 1 };

// Probability basis keeps the probe outputs as-is; logit basis takes their
// natural log (well defined because probe outputs are strictly positive).
enum class FeatureBasis : std::uint8_t { Probability = 0, Logit = 1 };

struct MetaFeatures {
    Matrix values; // N x (n*k) whitebox, N x k blackbox
    FeatureMode mode = FeatureMode::Whitebox;
    FeatureBasis basis = FeatureBasis::Probability;
    int probe_count = 0; // n (1 in blackbox mode)
    int num_classes = 0; // k
};

// Per-sample assembly: each probe's k probabilities are permuted so position
// 1 is the class the final vector ranks highest, position 2 the runner-up,
// and so on; whitebox concatenates every block, blackbox keeps only the last.
std::vector<double> assemble_features(const std::vector<std::vector<double>>& probe_outputs,
                                      FeatureMode mode, FeatureBasis basis);

// Whitebox features: all probe outputs for every sample in `data`.
MetaFeatures assemble_whitebox_matrix(const BaseModel& model, const ProbeSet& probes,
                                      const Dataset& data, FeatureBasis basis);

// Blackbox features: the base model's own output vector per sample.
MetaFeatures assemble_blackbox_matrix(const BaseModel& model, const Dataset& data,
                                      FeatureBasis basis);

// 1 where the base model's prediction matches the label; out-of-domain
// samples are always 0.
std::vector<int> meta_labels(const BaseModel& model, const Dataset& data);

// Maximum class probability (the classic softmax-response confidence).
double softmax_response(std::span<const double> yhat);

// ---------------------------------------------------------------------------
// Logistic-regression meta-model

struct LRMeta {
    std::vector<double> weights;
    double intercept = 0.0;
    double lambda = 0.0;
    FeatureMode mode = FeatureMode::Whitebox;
    FeatureBasis basis = FeatureBasis::Probability;
    int probe_count = 0;
    int num_classes = 0;
    double final_grad_norm = 0.0;
    int epochs_run = 0;

    void save(const std::string& path) const;
    static LRMeta load(const std::string& path);
};

struct LRConfig {
    // Full-batch gradient descent. The step size is derived from a Lipschitz
    // bound on the objective so descent is guaranteed; step_scale rescales it.
    int max_epochs = 5000;
    double tol = 1e-6; // stop when the gradient norm falls below this
    double step_scale = 1.0;
};

// L2-regularized binary cross-entropy (intercept unregularized), with
// analytic gradients exposed so they can be checked independently.
double lr_loss_and_gradient(std::span<const double> weights, double intercept,
                            const Matrix& features, const std::vector<int>& labels,
                            double lambda, std::vector<double>& grad_w, double& grad_b);

LRMeta train_lr_meta(const MetaFeatures& features, const std::vector<int>& labels,
                     double lambda, const LRConfig& cfg = {});

double score_lr(const LRMeta& meta, std::span<const double> features);
std::vector<double> score_lr_batch(const LRMeta& meta, const Matrix& features);

// ---------------------------------------------------------------------------
// Gradient-boosting meta-model

struct GbmConfig {
    double learning_rate = 0.1;
    int stages = 200;
    int max_depth = 3;
    double subsample = 0.8;
    int min_samples_leaf = 5;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0; // squared-error improvement of this split
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf payload
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root
};

struct GBMMeta {
    double f0 = 0.0; // initial raw score: log-odds of the positive rate
    std::vector<Tree> trees;
    GbmConfig cfg;
    FeatureMode mode = FeatureMode::Whitebox;
    FeatureBasis basis = FeatureBasis::Probability;
    int probe_count = 0;
    int num_classes = 0;
    // Full-training-set log-loss: entry 0 is the F0-only loss, entry m the
    // loss after stage m.
    std::vector<double> stage_losses;

    void save(const std::string& path) const;
    static GBMMeta load(const std::string& path);
};

GBMMeta train_gbm_meta(const MetaFeatures& features, const std::vector<int>& labels,
                       const GbmConfig& cfg);

// Leaf payload of one decision tree at a feature vector. score_gbm is the
// sigmoid of f0 plus the learning-rate-weighted sum of these over all trees.
double tree_value(const Tree& tree, std::span<const double> features);

double score_gbm(const GBMMeta& meta, std::span<const double> features);
std::vector<double> score_gbm_batch(const GBMMeta& meta, const Matrix& features);

// Split-gain importance, normalized to sum 1, laid out probe-layer by rank
// position. Whitebox models give an n x k grid, blackbox models a 1 x k row.
// An ensemble with no splits at all yields an all-zero grid.
Matrix gbm_feature_importance(const GBMMeta& meta);

// ---------------------------------------------------------------------------
// Temperature scaling

struct TemperatureScaler {
    double t = 1.0;

    void save(const std::string& path) const;
    static TemperatureScaler load(const std::string& path);
};

// Minimizes dev negative log-likelihood by golden-section search on ln T over
// [ln 0.05, ln 20]; falls back to T = 1 whenever the search does not beat it.
TemperatureScaler fit_temperature(const Matrix& logits, const std::vector<int>& labels);

std::vector<double> apply_temperature(const TemperatureScaler& scaler,
                                      std::span<const double> logits);

double mean_nll(const Matrix& logits, const std::vector<int>& labels, double temperature);

} // namespace metaconf
