#include "metaconf/base_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaconf/errors.hpp"
#include "metaconf/numeric.hpp"
#include "metaconf/rng.hpp"
#include "metaconf/serialize.hpp"

namespace metaconf {

void BaseModel::validate() const {
    if (layers.empty()) fail(ErrorCode::InvalidArgument, "model: no layers");
    if (num_classes < 2) fail(ErrorCode::InvalidArgument, "model: needs at least 2 classes");
    if (input_dim == 0) fail(ErrorCode::InvalidArgument, "model: zero input dimension");
    std::size_t in = input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        if (l.weight.rows() == 0)
            fail(ErrorCode::InvalidArgument, "model: empty layer " + std::to_string(i + 1));
        if (l.weight.cols() != in)
            fail(ErrorCode::InvalidArgument,
                 "model: layer " + std::to_string(i + 1) + " expects " +
                     std::to_string(l.weight.cols()) + " inputs, got " + std::to_string(in));
        if (l.bias.size() != l.weight.rows())
            fail(ErrorCode::InvalidArgument,
                 "model: layer " + std::to_string(i + 1) + " bias size mismatch");
        if (!l.weight.all_finite())
            fail(ErrorCode::InvalidArgument,
                 "model: non-finite weight in layer " + std::to_string(i + 1));
        for (double b : l.bias)
            if (!std::isfinite(b))
                fail(ErrorCode::InvalidArgument,
                     "model: non-finite bias in layer " + std::to_string(i + 1));
        in = l.weight.rows();
    }
    if (in != static_cast<std::size_t>(num_classes))
        fail(ErrorCode::InvalidArgument, "model: final layer width " + std::to_string(in) +
                                             " != class count " + std::to_string(num_classes));
}

namespace {

void write_parameters(const BaseModel& m, BinaryWriter& w) {
    w.u64(m.input_dim);
    w.u32(static_cast<std::uint32_t>(m.num_classes));
    w.u32(static_cast<std::uint32_t>(m.layers.size()));
    for (const Layer& l : m.layers) {
        w.u8(static_cast<std::uint8_t>(l.activation));
        w.matrix(l.weight);
        w.f64_vec(l.bias);
    }
}

void read_parameters(BaseModel& m, BinaryReader& r) {
    m.input_dim = r.u64();
    m.num_classes = static_cast<int>(r.u32());
    const std::uint32_t n_layers = r.u32();
    m.layers.clear();
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        Layer l;
        const std::uint8_t act = r.u8();
        if (act > 1) fail(ErrorCode::FormatError, "model file: unknown activation code");
        l.activation = static_cast<Activation>(act);
        l.weight = r.matrix();
        l.bias = r.f64_vec();
        m.layers.push_back(std::move(l));
    }
}

constexpr std::uint32_t kModelMagic = 0x4D43424Du; // "MCBM"
constexpr std::uint32_t kModelVersion = 1;

} // namespace

std::uint64_t BaseModel::fingerprint() const {
    BinaryWriter w;
    write_parameters(*this, w);
    return fnv1a64(w.bytes());
}

void BaseModel::save(const std::string& path) const {
    validate();
    BinaryWriter w;
    w.u32(kModelMagic);
    w.u32(kModelVersion);
    write_parameters(*this, w);
    w.f64_vec(epoch_losses);
    w.write_file(path);
}

BaseModel BaseModel::load(const std::string& path) {
    BinaryReader r = BinaryReader::from_file(path);
    if (r.u32() != kModelMagic) fail(ErrorCode::FormatError, path + ": not a model file");
    if (r.u32() != kModelVersion)
        fail(ErrorCode::IncompatibleArtifact, path + ": unsupported model version");
    BaseModel m;
    read_parameters(m, r);
    m.epoch_losses = r.f64_vec();
    m.validate();
    return m;
}

namespace {

// Shared forward kernel: fills pre-activation and post-activation vectors for
// every layer. The final layer's post-activation is the softmax output. All
// public forward paths go through this so batch and single-sample results are
// bit-identical.
void forward_kernel(const BaseModel& m, std::span<const double> x,
                    std::vector<std::vector<double>>& pre,
                    std::vector<std::vector<double>>& post) {
    if (x.size() != m.input_dim)
        fail(ErrorCode::InvalidArgument, "forward: input length " + std::to_string(x.size()) +
                                             " != model dimension " + std::to_string(m.input_dim));
    const std::size_t n = m.layers.size();
    pre.resize(n);
    post.resize(n);
    std::span<const double> cur = x;
    for (std::size_t li = 0; li < n; ++li) {
        const Layer& l = m.layers[li];
        const std::size_t out = l.weight.rows();
        pre[li].assign(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            const double* wrow = l.weight.row(r).data();
            double acc = l.bias[r];
            for (std::size_t c = 0; c < cur.size(); ++c) acc += wrow[c] * cur[c];
            pre[li][r] = acc;
        }
        if (li + 1 < n) {
            post[li] = pre[li];
            if (l.activation == Activation::Relu)
                for (double& v : post[li]) v = v > 0.0 ? v : 0.0;
        } else {
            // Final layer: activation applies to the logits, then softmax.
            std::vector<double> logits = pre[li];
            if (l.activation == Activation::Relu)
                for (double& v : logits) v = v > 0.0 ? v : 0.0;
            pre[li] = logits;
            post[li] = softmax(logits);
        }
        cur = post[li];
    }
}

} // namespace

std::vector<double> predict_proba(const BaseModel& model, std::span<const double> x) {
    std::vector<std::vector<double>> pre, post;
    forward_kernel(model, x, pre, post);
    return std::move(post.back());
}

ActivationTrace forward_with_trace(const BaseModel& model, std::span<const double> x) {
    ActivationTrace t;
    std::vector<std::vector<double>> pre;
    forward_kernel(model, x, pre, t.layers);
    t.final_logits = std::move(pre.back());
    t.model_fingerprint = model.fingerprint();
    return t;
}

int predict(const BaseModel& model, std::span<const double> x) {
    return static_cast<int>(argmax(predict_proba(model, x)));
}

Matrix predict_proba_batch(const BaseModel& model, const Matrix& inputs) {
    Matrix out(inputs.rows(), static_cast<std::size_t>(model.num_classes));
    std::vector<std::vector<double>> pre, post;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        forward_kernel(model, inputs.row(i), pre, post);
        std::copy(post.back().begin(), post.back().end(), out.row(i).begin());
    }
    return out;
}

std::vector<ActivationTrace> trace_batch(const BaseModel& model, const Matrix& inputs) {
    std::vector<ActivationTrace> traces(inputs.rows());
    const std::uint64_t fp = model.fingerprint();
    std::vector<std::vector<double>> pre;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        forward_kernel(model, inputs.row(i), pre, traces[i].layers);
        traces[i].final_logits = pre.back();
        traces[i].model_fingerprint = fp;
    }
    return traces;
}

double accuracy(const BaseModel& model, const Dataset& data) {
    if (data.size() == 0) fail(ErrorCode::InvalidArgument, "accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.origin[i] != Origin::InDomain) continue; // counts as incorrect
        if (predict(model, data.features.row(i)) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double loss_and_gradients(const BaseModel& model, const Matrix& inputs,
                          const std::vector<int>& labels, double l2, Gradients& out) {
    if (inputs.rows() == 0 || inputs.rows() != labels.size())
        fail(ErrorCode::InvalidArgument, "loss: batch size mismatch");
    const std::size_t n_layers = model.layers.size();
    const std::size_t batch = inputs.rows();

    out.weight.resize(n_layers);
    out.bias.resize(n_layers);
    for (std::size_t li = 0; li < n_layers; ++li) {
        const Layer& l = model.layers[li];
        if (out.weight[li].rows() != l.weight.rows() || out.weight[li].cols() != l.weight.cols())
            out.weight[li] = Matrix(l.weight.rows(), l.weight.cols());
        else
            std::fill(out.weight[li].data().begin(), out.weight[li].data().end(), 0.0);
        out.bias[li].assign(l.bias.size(), 0.0);
    }

    double loss = 0.0;
    std::vector<std::vector<double>> pre, post;
    std::vector<double> delta, prev_delta;
    for (std::size_t s = 0; s < batch; ++s) {
        const int label = labels[s];
        if (label < 0 || label >= model.num_classes)
            fail(ErrorCode::InvalidArgument, "loss: label out of range");
        forward_kernel(model, inputs.row(s), pre, post);
        const std::vector<double>& prob = post.back();
        loss += -std::log(prob[static_cast<std::size_t>(label)]);

        // Backward pass. delta holds dLoss/d(pre-activation) per layer; for
        // the softmax + cross-entropy head that is simply prob - onehot.
        delta = prob;
        delta[static_cast<std::size_t>(label)] -= 1.0;
        if (model.layers.back().activation == Activation::Relu)
            for (std::size_t r = 0; r < delta.size(); ++r)
                if (pre.back()[r] <= 0.0) delta[r] = 0.0;
        for (std::size_t li = n_layers; li-- > 0;) {
            const Layer& l = model.layers[li];
            std::span<const double> input =
                li == 0 ? inputs.row(s) : std::span<const double>(post[li - 1]);
            Matrix& gw = out.weight[li];
            std::vector<double>& gb = out.bias[li];
            for (std::size_t r = 0; r < l.weight.rows(); ++r) {
                const double d = delta[r];
                double* grow = gw.row(r).data();
                for (std::size_t c = 0; c < input.size(); ++c) grow[c] += d * input[c];
                gb[r] += d;
            }
            if (li == 0) break;
            prev_delta.assign(l.weight.cols(), 0.0);
            for (std::size_t r = 0; r < l.weight.rows(); ++r) {
                const double d = delta[r];
                const double* wrow = l.weight.row(r).data();
                for (std::size_t c = 0; c < l.weight.cols(); ++c) prev_delta[c] += d * wrow[c];
            }
            // Gate through the previous layer's relu (identity passes through).
            if (model.layers[li - 1].activation == Activation::Relu)
                for (std::size_t c = 0; c < prev_delta.size(); ++c)
                    if (pre[li - 1][c] <= 0.0) prev_delta[c] = 0.0;
            delta = prev_delta;
        }
    }

    const double inv_batch = 1.0 / static_cast<double>(batch);
    loss *= inv_batch;
    for (std::size_t li = 0; li < n_layers; ++li) {
        const Layer& l = model.layers[li];
        double sq = 0.0;
        for (std::size_t i = 0; i < l.weight.data().size(); ++i) {
            const double w = l.weight.data()[i];
            out.weight[li].data()[i] = out.weight[li].data()[i] * inv_batch + l2 * w;
            sq += w * w;
        }
        for (double& g : out.bias[li]) g *= inv_batch;
        loss += 0.5 * l2 * sq;
    }
    return loss;
}

BaseModel train_base(const Dataset& train, const std::vector<LayerSpec>& arch,
                     const TrainConfig& cfg) {
    train.validate();
    for (auto o : train.origin)
        if (o != Origin::InDomain)
            fail(ErrorCode::InvalidArgument, "train: out-of-domain samples in training set");
    if (arch.empty()) fail(ErrorCode::InvalidArgument, "train: empty architecture");
    for (const LayerSpec& l : arch)
        if (l.width < 1) fail(ErrorCode::InvalidArgument, "train: layer width must be >= 1");
    if (arch.back().width != train.num_classes)
        fail(ErrorCode::InvalidArgument,
             "train: final layer width " + std::to_string(arch.back().width) +
                 " != class count " + std::to_string(train.num_classes));
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        fail(ErrorCode::InvalidArgument, "train: epochs and batch size must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        fail(ErrorCode::InvalidArgument, "train: learning rate must be positive");
    if (cfg.l2 < 0.0) fail(ErrorCode::InvalidArgument, "train: l2 must be >= 0");

    BaseModel m;
    m.input_dim = train.dim();
    m.num_classes = train.num_classes;
    Rng rng(cfg.seed);
    std::size_t in = m.input_dim;
    for (const LayerSpec& spec : arch) {
        Layer layer;
        layer.weight = Matrix(static_cast<std::size_t>(spec.width), in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (double& v : layer.weight.data()) v = rng.uniform(-scale, scale);
        layer.bias.assign(static_cast<std::size_t>(spec.width), 0.0);
        layer.activation = spec.activation;
        m.layers.push_back(std::move(layer));
        in = static_cast<std::size_t>(spec.width);
    }
    m.validate();

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Gradients g;
    Matrix batch_x(static_cast<std::size_t>(cfg.batch_size), m.input_dim);
    std::vector<int> batch_y;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count = std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
            if (batch_x.rows() != count) batch_x = Matrix(count, m.input_dim);
            batch_y.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                auto row = train.features.row(src);
                std::copy(row.begin(), row.end(), batch_x.row(i).begin());
                batch_y[i] = train.labels[src];
            }
            double batch_loss;
            try {
                batch_loss = loss_and_gradients(m, batch_x, batch_y, cfg.l2, g);
            } catch (const Error& e) {
                // Inputs and labels were validated up front, so a rejected
                // forward pass here means the parameters blew up.
                if (e.code() == ErrorCode::InvalidArgument)
                    fail(ErrorCode::TrainingDiverged,
                         "train: non-finite forward pass at epoch " + std::to_string(epoch + 1));
                throw;
            }
            if (!std::isfinite(batch_loss))
                fail(ErrorCode::TrainingDiverged,
                     "train: non-finite loss at epoch " + std::to_string(epoch + 1));
            for (std::size_t li = 0; li < m.layers.size(); ++li) {
                Layer& l = m.layers[li];
                for (std::size_t i = 0; i < l.weight.data().size(); ++i)
                    l.weight.data()[i] -= cfg.learning_rate * g.weight[li].data()[i];
                for (std::size_t i = 0; i < l.bias.size(); ++i)
                    l.bias[i] -= cfg.learning_rate * g.bias[li][i];
            }
        }
        for (const Layer& l : m.layers)
            if (!l.weight.all_finite())
                fail(ErrorCode::TrainingDiverged,
                     "train: non-finite parameters at epoch " + std::to_string(epoch + 1));

        // End-of-epoch training loss (data term only) over the full set.
        double epoch_loss = 0.0;
        std::vector<std::vector<double>> pre, post;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> prob = predict_proba(m, train.features.row(i));
            epoch_loss += -std::log(prob[static_cast<std::size_t>(train.labels[i])]);
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            fail(ErrorCode::TrainingDiverged,
                 "train: non-finite loss at epoch " + std::to_string(epoch + 1));
        m.epoch_losses.push_back(epoch_loss);
    }
    return m;
}

} // namespace metaconf
