#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaconf/base_model.hpp"

namespace metaconf {

// Linear classifier probe for one layer: softmax(W x_i + b) over the base
// model's classes, trained with the base parameters fixed.
struct Probe {
    int layer_index = 0; // 1-based position in the layer stack
    Matrix weight;       // k x dim(x_i)
    std::vector<double> bias;
    std::vector<double> epoch_losses;
};

struct ProbeSet {
    std::vector<Probe> probes; // one per layer, ordered 1..n
    std::uint64_t base_fingerprint = 0;

    std::size_t size() const { return probes.size(); }
    void validate() const;
    void save(const std::string& path) const;
    static ProbeSet load(const std::string& path);
};

inline TrainConfig default_probe_config() {
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 64;
    cfg.learning_rate = 0.05;
    cfg.l2 = 0.0;
    return cfg;
}

// Trains one probe per layer on (x_i, label) pairs from the given in-domain
// set. Each probe's RNG stream is derived from cfg.seed and its layer index,
// so per-layer results do not depend on the order the probes are fit in.
ProbeSet train_probes(const BaseModel& model, const Dataset& train_meta, const TrainConfig& cfg);

// Applies every probe to one sample's activation trace.
std::vector<std::vector<double>> probe_forward(const ProbeSet& probes, const ActivationTrace& trace);

// Per-layer label accuracy of the probe predictions over an in-domain set.
std::vector<double> probe_accuracy_report(const ProbeSet& probes, const BaseModel& model,
                                          const Dataset& data);

} // namespace metaconf
