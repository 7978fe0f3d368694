#include "metaconf/probes.hpp"

#include <cmath>
#include <utility>

#include "metaconf/errors.hpp"
#include "metaconf/numeric.hpp"
#include "metaconf/rng.hpp"
#include "metaconf/serialize.hpp"

namespace metaconf {

void ProbeSet::validate() const {
    if (probes.empty()) fail(ErrorCode::InvalidArgument, "probes: empty set");
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Probe& p = probes[i];
        if (p.layer_index != static_cast<int>(i + 1))
            fail(ErrorCode::InvalidArgument, "probes: layer indices must run 1..n in order");
        if (p.weight.rows() == 0 || p.bias.size() != p.weight.rows())
            fail(ErrorCode::InvalidArgument,
                 "probes: bad shapes at layer " + std::to_string(i + 1));
        if (!p.weight.all_finite())
            fail(ErrorCode::InvalidArgument,
                 "probes: non-finite weight at layer " + std::to_string(i + 1));
        for (double b : p.bias)
            if (!std::isfinite(b))
                fail(ErrorCode::InvalidArgument,
                     "probes: non-finite bias at layer " + std::to_string(i + 1));
    }
}

ProbeSet train_probes(const BaseModel& model, const Dataset& train_meta, const TrainConfig& cfg) {
    model.validate();
    train_meta.validate();
    if (train_meta.size() == 0) fail(ErrorCode::InvalidArgument, "probes: empty training set");
    for (auto o : train_meta.origin)
        if (o != Origin::InDomain)
            fail(ErrorCode::InvalidArgument, "probes: out-of-domain samples in training set");
    if (train_meta.num_classes != model.num_classes)
        fail(ErrorCode::InvalidArgument, "probes: dataset class count != model class count");
    if (train_meta.dim() != model.input_dim)
        fail(ErrorCode::InvalidArgument, "probes: dataset dimension != model input dimension");

    std::vector<ActivationTrace> traces = trace_batch(model, train_meta.features);

    ProbeSet set;
    set.base_fingerprint = model.fingerprint();
    for (std::size_t li = 0; li < model.depth(); ++li) {
        // Layer activations become a plain dataset; the probe is a one-layer
        // softmax classifier fit with the shared trainer. Seeds are derived
        // per layer so fitting order cannot matter.
        Dataset layer_data;
        layer_data.features = Matrix(train_meta.size(), traces[0].layers[li].size());
        layer_data.labels = train_meta.labels;
        layer_data.num_classes = train_meta.num_classes;
        layer_data.origin = train_meta.origin;
        layer_data.ids = train_meta.ids;
        for (std::size_t s = 0; s < train_meta.size(); ++s)
            std::copy(traces[s].layers[li].begin(), traces[s].layers[li].end(),
                      layer_data.features.row(s).begin());

        TrainConfig probe_cfg = cfg;
        probe_cfg.seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(li + 1));
        BaseModel fitted = train_base(
            layer_data, {{model.num_classes, Activation::Identity}}, probe_cfg);

        Probe p;
        p.layer_index = static_cast<int>(li + 1);
        p.weight = std::move(fitted.layers[0].weight);
        p.bias = std::move(fitted.layers[0].bias);
        p.epoch_losses = std::move(fitted.epoch_losses);
        set.probes.push_back(std::move(p));
    }
    set.validate();
    return set;
}

std::vector<std::vector<double>> probe_forward(const ProbeSet& probes, const ActivationTrace& trace) {
    probes.validate();
    if (trace.model_fingerprint != probes.base_fingerprint)
        fail(ErrorCode::StaleProbe, "probes: trace comes from a different base model");
    if (trace.layers.size() != probes.size())
        fail(ErrorCode::InvalidArgument, "probes: trace depth != probe count");

    std::vector<std::vector<double>> outputs;
    outputs.reserve(probes.size());
    std::vector<double> z;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Probe& p = probes.probes[i];
        const std::vector<double>& x = trace.layers[i];
        if (x.size() != p.weight.cols())
            fail(ErrorCode::InvalidArgument,
                 "probes: layer " + std::to_string(i + 1) + " activation size mismatch");
        z.assign(p.weight.rows(), 0.0);
        for (std::size_t r = 0; r < p.weight.rows(); ++r) {
            const double* wrow = p.weight.row(r).data();
            double acc = p.bias[r];
            for (std::size_t c = 0; c < x.size(); ++c) acc += wrow[c] * x[c];
            z[r] = acc;
        }
        outputs.push_back(softmax(z));
    }
    return outputs;
}

std::vector<double> probe_accuracy_report(const ProbeSet& probes, const BaseModel& model,
                                          const Dataset& data) {
    probes.validate();
    data.validate();
    if (data.size() == 0) fail(ErrorCode::InvalidArgument, "probe report: empty dataset");
    for (auto o : data.origin)
        if (o != Origin::InDomain)
            fail(ErrorCode::InvalidArgument, "probe report: out-of-domain samples present");
    if (probes.base_fingerprint != model.fingerprint())
        fail(ErrorCode::StaleProbe, "probe report: probes were fit against a different base model");

    std::vector<std::size_t> correct(probes.size(), 0);
    for (std::size_t s = 0; s < data.size(); ++s) {
        ActivationTrace trace = forward_with_trace(model, data.features.row(s));
        auto outputs = probe_forward(probes, trace);
        for (std::size_t i = 0; i < outputs.size(); ++i)
            if (static_cast<int>(argmax(outputs[i])) == data.labels[s]) ++correct[i];
    }
    std::vector<double> report(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i)
        report[i] = static_cast<double>(correct[i]) / static_cast<double>(data.size());
    return report;
}

namespace {
constexpr std::uint32_t kProbeMagic = 0x4D435052u; // "MCPR"
constexpr std::uint32_t kProbeVersion = 1;
} // namespace

void ProbeSet::save(const std::string& path) const {
    validate();
    BinaryWriter w;
    w.u32(kProbeMagic);
    w.u32(kProbeVersion);
    w.u64(base_fingerprint);
    w.u32(static_cast<std::uint32_t>(probes.size()));
    for (const Probe& p : probes) {
        w.u32(static_cast<std::uint32_t>(p.layer_index));
        w.matrix(p.weight);
        w.f64_vec(p.bias);
        w.f64_vec(p.epoch_losses);
    }
    w.write_file(path);
}

ProbeSet ProbeSet::load(const std::string& path) {
    BinaryReader r = BinaryReader::from_file(path);
    if (r.u32() != kProbeMagic) fail(ErrorCode::FormatError, path + ": not a probe file");
    if (r.u32() != kProbeVersion)
        fail(ErrorCode::IncompatibleArtifact, path + ": unsupported probe version");
    ProbeSet set;
    set.base_fingerprint = r.u64();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        Probe p;
        p.layer_index = static_cast<int>(r.u32());
        p.weight = r.matrix();
        p.bias = r.f64_vec();
        p.epoch_losses = r.f64_vec();
        set.probes.push_back(std::move(p));
    }
    set.validate();
    return set;
}

} // namespace metaconf
