#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metaconf/dataset.hpp"
#include "metaconf/matrix.hpp"

namespace metaconf {

enum class Activation : std::uint8_t { Relu = 0, Identity = 1 };

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::Relu;
};

struct TrainConfig {
    int epochs = 40;
    int batch_size = 64;
    double learning_rate = 0.05;
    double l2 = 0.0;
    std::uint64_t seed = 0;
};

// One affine transform plus its activation. The final layer's activation is
// applied before the implicit softmax (use Identity there for plain logits).
struct Layer {
    Matrix weight;             // out x in
    std::vector<double> bias;  // out
    Activation activation = Activation::Relu;
};

// Per-layer outputs for one sample: layers[0..n-1] are x_1..x_n, where the
// last entry is the softmax probability vector. Pre-softmax logits are kept
// alongside so downstream consumers can rescale them.
struct ActivationTrace {
    std::vector<std::vector<double>> layers;
    std::vector<double> final_logits;
    std::uint64_t model_fingerprint = 0;

    const std::vector<double>& probabilities() const { return layers.back(); }
};

class BaseModel {
  public:
    std::vector<Layer> layers;
    int num_classes = 0;
    std::size_t input_dim = 0;
    // End-of-epoch mean cross-entropy on the training set, one entry per epoch.
    std::vector<double> epoch_losses;

    std::size_t depth() const { return layers.size(); }
    void validate() const;

    // Stable hash of the architecture and parameters (not the loss history);
    // identifies the exact model instance probes were fit against.
    std::uint64_t fingerprint() const;

    void save(const std::string& path) const;
    static BaseModel load(const std::string& path);
};

// Parameter gradients in the same shapes as the model's layers.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
};

// Mean cross-entropy over the batch plus (l2/2) * sum of squared weights,
// with analytic gradients for every parameter. This is the single gradient
// routine used by all training paths.
double loss_and_gradients(const BaseModel& model, const Matrix& inputs,
                          const std::vector<int>& labels, double l2, Gradients& out);

BaseModel train_base(const Dataset& train, const std::vector<LayerSpec>& arch,
                     const TrainConfig& cfg);

std::vector<double> predict_proba(const BaseModel& model, std::span<const double> x);
ActivationTrace forward_with_trace(const BaseModel& model, std::span<const double> x);
int predict(const BaseModel& model, std::span<const double> x);

// Batched wrappers; semantically identical to looping the per-sample calls.
Matrix predict_proba_batch(const BaseModel& model, const Matrix& inputs);
std::vector<ActivationTrace> trace_batch(const BaseModel& model, const Matrix& inputs);

// Fraction of samples whose predicted class matches the label; out-of-domain
// samples count as incorrect.
double accuracy(const BaseModel& model, const Dataset& data);

} // namespace metaconf
