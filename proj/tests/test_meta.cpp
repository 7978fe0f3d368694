#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "metaconf/base_model.hpp"
#include "metaconf/errors.hpp"
#include "metaconf/meta.hpp"
#include "metaconf/numeric.hpp"
#include "metaconf/probes.hpp"
#include "metaconf/rng.hpp"

using namespace metaconf;

namespace {

const std::string kTmp = "/tmp/metaconf_meta_test";

struct TmpDir {
    TmpDir() {
        std::filesystem::remove_all(kTmp);
        std::filesystem::create_directories(kTmp);
    }
} tmp_dir_guard;

MetaFeatures make_features(const Matrix& values, FeatureMode mode = FeatureMode::Blackbox,
                           int probe_count = 1, int num_classes = -1) {
    MetaFeatures f;
    f.values = values;
    f.mode = mode;
    f.basis = FeatureBasis::Probability;
    f.probe_count = probe_count;
    f.num_classes = num_classes < 0 ? static_cast<int>(values.cols()) : num_classes;
    return f;
}

// Brute-force separation check: every positive scored above every negative.
bool perfectly_separated(const std::vector<double>& scores, const std::vector<int>& labels) {
    double min_pos = 1e300, max_neg = -1e300;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1)
            min_pos = std::min(min_pos, scores[i]);
        else
            max_neg = std::max(max_neg, scores[i]);
    }
    return min_pos > max_neg;
}

} // namespace

TEST_CASE("feature assembly applies the final-layer rank permutation") {
    // Final vector [0.1,0.6,0.3] ranks the classes [1,2,0]; both blocks get
    // rearranged into that order.
    std::vector<std::vector<double>> probes_out = {{0.2, 0.5, 0.3}, {0.1, 0.6, 0.3}};
    std::vector<double> white =
        assemble_features(probes_out, FeatureMode::Whitebox, FeatureBasis::Probability);
    const std::vector<double> expect_white = {0.5, 0.3, 0.2, 0.6, 0.3, 0.1};
    REQUIRE(white.size() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(white[i] == doctest::Approx(expect_white[i]).epsilon(1e-15));

    std::vector<double> black =
        assemble_features(probes_out, FeatureMode::Blackbox, FeatureBasis::Probability);
    const std::vector<double> expect_black = {0.6, 0.3, 0.1};
    REQUIRE(black.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(black[i] == doctest::Approx(expect_black[i]).epsilon(1e-15));
}

TEST_CASE("feature assembly keeps already-sorted outputs in place") {
    std::vector<std::vector<double>> probes_out = {{0.4, 0.35, 0.25}, {0.7, 0.2, 0.1}};
    std::vector<double> white =
        assemble_features(probes_out, FeatureMode::Whitebox, FeatureBasis::Probability);
    const std::vector<double> expect = {0.4, 0.35, 0.25, 0.7, 0.2, 0.1};
    for (std::size_t i = 0; i < 6; ++i) CHECK(white[i] == expect[i]);
}

TEST_CASE("feature assembly rejects inconsistent widths and empty input") {
    std::vector<std::vector<double>> bad = {{0.5, 0.5}, {0.2, 0.3, 0.5}};
    CHECK_THROWS_AS(
        (void)assemble_features(bad, FeatureMode::Whitebox, FeatureBasis::Probability), Error);
    std::vector<std::vector<double>> empty;
    CHECK_THROWS_AS(
        (void)assemble_features(empty, FeatureMode::Whitebox, FeatureBasis::Probability), Error);
}

TEST_CASE("each assembled block is a permutation of its probe output") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(6);
        const std::size_t n = 1 + rng.below(4);
        std::vector<std::vector<double>> outs(n);
        for (auto& v : outs) {
            std::vector<double> z(k);
            for (double& x : z) x = rng.uniform(-2.0, 2.0);
            v = softmax(z);
        }
        std::vector<double> feats =
            assemble_features(outs, FeatureMode::Whitebox, FeatureBasis::Probability);
        REQUIRE(feats.size() == n * k);
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<double> block(feats.begin() + static_cast<std::ptrdiff_t>(b * k),
                                      feats.begin() + static_cast<std::ptrdiff_t>((b + 1) * k));
            std::vector<double> source = outs[b];
            std::sort(block.begin(), block.end());
            std::sort(source.begin(), source.end());
            CHECK(block == source);
            // first entry of each block is the top-ranked class's probability
            CHECK(feats[b * k] == outs[b][rank_order_desc(outs.back())[0]]);
        }
    }
}

TEST_CASE("logit basis logs the same permuted values") {
    std::vector<std::vector<double>> outs = {{0.2, 0.5, 0.3}, {0.1, 0.6, 0.3}};
    std::vector<double> prob =
        assemble_features(outs, FeatureMode::Whitebox, FeatureBasis::Probability);
    std::vector<double> logit =
        assemble_features(outs, FeatureMode::Whitebox, FeatureBasis::Logit);
    REQUIRE(prob.size() == logit.size());
    for (std::size_t i = 0; i < prob.size(); ++i)
        CHECK(logit[i] == doctest::Approx(std::log(prob[i])).epsilon(1e-15));
}

TEST_CASE("meta labels: correct, incorrect, and out-of-domain") {
    // Identity model: prediction = argmax of the scaled one-hot feature.
    BaseModel m;
    m.input_dim = 3;
    m.num_classes = 3;
    Layer l;
    l.weight = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) l.weight.at(i, i) = 5.0;
    l.bias.assign(3, 0.0);
    l.activation = Activation::Identity;
    m.layers.push_back(std::move(l));

    Dataset d;
    d.features = Matrix(3, 3);
    d.features.at(0, 0) = 1.0; // predicts 0
    d.features.at(1, 1) = 1.0; // predicts 1
    d.features.at(2, 2) = 1.0; // predicts 2, but sample is OOD
    d.labels = {0, 2, kOodLabel};
    d.num_classes = 3;
    d.origin = {Origin::InDomain, Origin::InDomain, Origin::OutOfDomain};
    d.ids = {0, 1, 2};

    std::vector<int> labels = meta_labels(m, d);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0] == 1); // correct
    CHECK(labels[1] == 0); // wrong class
    CHECK(labels[2] == 0); // ood is always wrong
}

TEST_CASE("softmax response picks the maximum") {
    std::vector<double> a = {0.1, 0.7, 0.2};
    CHECK(softmax_response(a) == 0.7);
    std::vector<double> onehot = {0.0, 0.0, 1.0};
    CHECK(softmax_response(onehot) == 1.0);
    std::vector<double> uniform(10, 0.1);
    CHECK(softmax_response(uniform) == doctest::Approx(0.1).epsilon(1e-15));
}

// ---------------------------------------------------------------------------
// Logistic regression

TEST_CASE("lr gradient matches central finite differences") {
    Rng rng(5);
    const std::size_t n = 40, d = 7;
    Matrix x(n, d);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(static_cast<int>(rng.below(2)));
    std::vector<double> w(d);
    for (double& v : w) v = rng.uniform(-0.5, 0.5);
    double b = 0.3;
    const double lambda = 0.01;

    std::vector<double> gw;
    double gb;
    (void)lr_loss_and_gradient(w, b, x, y, lambda, gw, gb);

    const double h = 1e-5;
    std::vector<double> scratch;
    double scratch_b;
    auto loss_at = [&](std::vector<double>& wv, double bv) {
        return lr_loss_and_gradient(wv, bv, x, y, lambda, scratch, scratch_b);
    };
    for (std::size_t j = 0; j < d; ++j) {
        const double saved = w[j];
        w[j] = saved + h;
        const double up = loss_at(w, b);
        w[j] = saved - h;
        const double down = loss_at(w, b);
        w[j] = saved;
        const double fd = (up - down) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(gw[j]), 1e-8});
        CHECK(std::abs(fd - gw[j]) / denom < 1e-4);
    }
    const double up = loss_at(w, b + h);
    const double down = loss_at(w, b - h);
    const double fd_b = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd_b), std::abs(gb), 1e-8});
    CHECK(std::abs(fd_b - gb) / denom < 1e-4);
}

TEST_CASE("lr intercept is unregularized") {
    // With all-one labels... not allowed; use mixed labels but zero features:
    // the weight gradient then comes only from the l2 term.
    Matrix x(4, 2); // all zeros
    std::vector<int> y = {1, 0, 1, 0};
    std::vector<double> w = {2.0, -3.0};
    std::vector<double> gw;
    double gb;
    (void)lr_loss_and_gradient(w, 5.0, x, y, 0.5, gw, gb);
    // d/dw of (lambda/2)||w||^2 = lambda*w exactly, since features are zero
    CHECK(gw[0] == doctest::Approx(0.5 * 2.0).epsilon(1e-12));
    CHECK(gw[1] == doctest::Approx(0.5 * -3.0).epsilon(1e-12));
    // intercept gradient has no l2 part: it is mean(sigmoid(b) - y)
    const double p = 1.0 / (1.0 + std::exp(-5.0));
    CHECK(gb == doctest::Approx(p - 0.5).epsilon(1e-12));
}

TEST_CASE("lr zero model scores one half; ln3 scores three quarters") {
    LRMeta meta;
    meta.weights = {0.0, 0.0};
    meta.intercept = 0.0;
    std::vector<double> x = {3.0, -1.0};
    CHECK(score_lr(meta, x) == 0.5);

    meta.weights = {1.0986122886681097, 0.0}; // w.x + b = ln 3
    CHECK(score_lr(meta, {std::vector<double>{1.0, 9.9}}) == doctest::Approx(0.75).epsilon(1e-15));

    // monotone in a positively weighted feature
    meta.weights = {0.8, -0.2};
    meta.intercept = 0.1;
    double prev = score_lr(meta, {std::vector<double>{-1.0, 0.5}});
    for (double v = -0.5; v <= 2.0; v += 0.25) {
        double cur = score_lr(meta, {std::vector<double>{v, 0.5}});
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("lr separates 1-d separable data with auc 1") {
    Matrix x(20, 1);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        y[i] = i < 10 ? 1 : 0;
        x.at(i, 0) = y[i] == 1 ? 1.0 : -1.0;
    }
    LRMeta meta = train_lr_meta(make_features(x), y, 1e-4);
    std::vector<double> scores = score_lr_batch(meta, x);
    CHECK(perfectly_separated(scores, y));
    for (double s : scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}

TEST_CASE("lr descent never ends above the zero-weight loss") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 60, d = 4;
        Matrix x(n, d);
        for (double& v : x.data()) v = rng.uniform(-2.0, 2.0);
        std::vector<int> y;
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            y.push_back(static_cast<int>(rng.below(2)));
            (y.back() ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        const double lambda = 1e-3;
        LRMeta meta = train_lr_meta(make_features(x), y, lambda);
        std::vector<double> gw;
        double gb;
        std::vector<double> zero(d, 0.0);
        const double loss0 = lr_loss_and_gradient(zero, 0.0, x, y, lambda, gw, gb);
        const double loss_fit =
            lr_loss_and_gradient(meta.weights, meta.intercept, x, y, lambda, gw, gb);
        CHECK(loss_fit <= loss0 + 1e-12);
    }
}

TEST_CASE("lr rejects degenerate labels and mismatched widths") {
    Matrix x(4, 2);
    std::vector<int> ones = {1, 1, 1, 1};
    try {
        (void)train_lr_meta(make_features(x), ones, 1e-3);
        FAIL("expected degenerate-labels rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
    LRMeta meta;
    meta.weights = {1.0, 2.0};
    std::vector<double> narrow = {1.0};
    CHECK_THROWS_AS((void)score_lr(meta, narrow), Error);
}

TEST_CASE("lr serialization round-trips scores exactly") {
    Rng rng(41);
    Matrix x(30, 3);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 30; ++i) y.push_back(static_cast<int>(i % 2));
    LRMeta meta = train_lr_meta(make_features(x), y, 1e-3);
    const std::string path = kTmp + "/lr.bin";
    meta.save(path);
    LRMeta loaded = LRMeta::load(path);
    CHECK(loaded.weights == meta.weights);
    CHECK(loaded.intercept == meta.intercept);
    CHECK(loaded.lambda == meta.lambda);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(score_lr(loaded, x.row(i)) == score_lr(meta, x.row(i)));
}

// ---------------------------------------------------------------------------
// Gradient boosting

TEST_CASE("gbm zero stages reduces to the closed-form log-odds") {
    Matrix x(4, 2);
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 2.0;
    x.at(2, 0) = 3.0;
    x.at(3, 0) = 4.0;
    std::vector<int> y = {1, 1, 1, 0};
    GbmConfig cfg;
    cfg.stages = 0;
    cfg.subsample = 1.0;
    GBMMeta meta = train_gbm_meta(make_features(x), y, cfg);
    CHECK(meta.f0 == doctest::Approx(1.0986122886681097).epsilon(1e-12));
    CHECK(meta.trees.empty());
    // all samples score sigmoid(F0) = 0.75
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(score_gbm(meta, x.row(i)) == doctest::Approx(0.75).epsilon(1e-12));
    REQUIRE(meta.stage_losses.size() == 1);
}

TEST_CASE("gbm one stump on a perfect split matches the hand computation") {
    // Hand fit: F0 = 0 (balanced), residuals +-0.5, split at x <= 0, Newton
    // leaf values -2/+2, nu = 0.5 gives raw scores -1/+1. Frozen long-double
    // losses: ln 2 before, ln(1+e^-1) after.
    Matrix x(4, 1);
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 2.0;
    x.at(2, 0) = -1.0;
    x.at(3, 0) = -2.0;
    std::vector<int> y = {1, 1, 0, 0};
    GbmConfig cfg;
    cfg.stages = 1;
    cfg.max_depth = 1;
    cfg.learning_rate = 0.5;
    cfg.subsample = 1.0;
    cfg.min_samples_leaf = 1;
    GBMMeta meta = train_gbm_meta(make_features(x), y, cfg);

    CHECK(meta.f0 == 0.0);
    REQUIRE(meta.trees.size() == 1);
    const Tree& t = meta.trees[0];
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == doctest::Approx(0.0).epsilon(1e-12));
    const TreeNode& left = t.nodes[static_cast<std::size_t>(t.nodes[0].left)];
    const TreeNode& right = t.nodes[static_cast<std::size_t>(t.nodes[0].right)];
    CHECK(left.feature == -1);
    CHECK(right.feature == -1);
    CHECK(left.value == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(right.value == doctest::Approx(2.0).epsilon(1e-12));

    REQUIRE(meta.stage_losses.size() == 2);
    CHECK(meta.stage_losses[0] == doctest::Approx(0.69314718055994531).epsilon(1e-12));
    CHECK(meta.stage_losses[1] == doctest::Approx(0.31326168751822283).epsilon(1e-12));
    CHECK(meta.stage_losses[1] < meta.stage_losses[0]);

    CHECK(score_gbm(meta, x.row(0)) == doctest::Approx(0.73105857863000488).epsilon(1e-12));
    CHECK(score_gbm(meta, x.row(2)) == doctest::Approx(0.26894142136999512).epsilon(1e-12));
}

TEST_CASE("gbm training is deterministic") {
    Rng rng(71);
    Matrix x(80, 5);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 80; ++i)
        y.push_back(x.at(i, 2) + 0.3 * rng.normal() > 0.5 ? 1 : 0);
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    if (std::count(y.begin(), y.end(), 0) == 0) y[0] = 0;

    GbmConfig cfg;
    cfg.stages = 25;
    cfg.subsample = 0.8;
    cfg.seed = 5;
    GBMMeta a = train_gbm_meta(make_features(x), y, cfg);
    GBMMeta b = train_gbm_meta(make_features(x), y, cfg);
    CHECK(a.f0 == b.f0);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
            CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
            CHECK(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
            CHECK(a.trees[t].nodes[n].value == b.trees[t].nodes[n].value);
        }
    }
    CHECK(a.stage_losses == b.stage_losses);
}

TEST_CASE("gbm full-sample training loss is stagewise non-increasing") {
    Rng rng(73);
    Matrix x(120, 4);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 120; ++i)
        y.push_back(x.at(i, 0) - 0.5 * x.at(i, 3) + 0.4 * rng.normal() > 0.0 ? 1 : 0);

    GbmConfig cfg;
    cfg.stages = 40;
    cfg.subsample = 1.0; // monotonicity is only promised without subsampling
    GBMMeta meta = train_gbm_meta(make_features(x), y, cfg);
    REQUIRE(meta.stage_losses.size() == 41);
    for (std::size_t m = 0; m + 1 < meta.stage_losses.size(); ++m)
        CHECK(meta.stage_losses[m + 1] <= meta.stage_losses[m] + 1e-12);
}

TEST_CASE("gbm depth limit is respected") {
    Rng rng(79);
    Matrix x(200, 6);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 200; ++i) y.push_back(rng.below(2) ? 1 : 0);

    GbmConfig cfg;
    cfg.stages = 10;
    cfg.max_depth = 3;
    cfg.subsample = 1.0;
    GBMMeta meta = train_gbm_meta(make_features(x), y, cfg);
    // depth check: walk each tree; no path may pass more than 3 splits
    for (const Tree& t : meta.trees) {
        std::vector<std::pair<int, int>> stack = {{0, 0}}; // node, depth
        while (!stack.empty()) {
            auto [idx, depth] = stack.back();
            stack.pop_back();
            const TreeNode& node = t.nodes[static_cast<std::size_t>(idx)];
            if (node.feature < 0) continue;
            CHECK(depth < 3);
            stack.push_back({node.left, depth + 1});
            stack.push_back({node.right, depth + 1});
        }
    }
}

TEST_CASE("gbm manual ensemble composes f0, shrinkage, and leaf value") {
    GBMMeta meta;
    meta.f0 = 0.4;
    meta.cfg.learning_rate = 0.25;
    meta.mode = FeatureMode::Blackbox;
    meta.probe_count = 1;
    meta.num_classes = 2;
    Tree stump;
    stump.nodes.resize(3);
    stump.nodes[0] = {0, 0.5, 1.0, 1, 2, 0.0};
    stump.nodes[1] = {-1, 0.0, 0.0, -1, -1, -3.0};
    stump.nodes[2] = {-1, 0.0, 0.0, -1, -1, 2.0};
    meta.trees.push_back(stump);

    std::vector<double> lo = {0.2, 9.0};
    std::vector<double> hi = {0.9, -4.0};
    const double z_lo = 1.0 / (1.0 + std::exp(-(0.4 + 0.25 * -3.0)));
    const double z_hi = 1.0 / (1.0 + std::exp(-(0.4 + 0.25 * 2.0)));
    CHECK(score_gbm(meta, lo) == doctest::Approx(z_lo).epsilon(1e-15));
    CHECK(score_gbm(meta, hi) == doctest::Approx(z_hi).epsilon(1e-15));

    // feature 1 is never split on: changing it cannot move the score
    std::vector<double> lo2 = {0.2, -123.0};
    CHECK(score_gbm(meta, lo2) == score_gbm(meta, lo));
}

TEST_CASE("gbm rejects degenerate labels") {
    Matrix x(6, 2);
    std::vector<int> y(6, 1);
    GbmConfig cfg;
    try {
        (void)train_gbm_meta(make_features(x), y, cfg);
        FAIL("expected degenerate-labels rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
}

TEST_CASE("gbm importance: single informative feature takes all the mass") {
    // Only feature 2 carries signal; a one-stump ensemble must put every bit
    // of importance there.
    Matrix x(40, 4);
    Rng rng(83);
    std::vector<int> y;
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = rng.uniform(0.0, 1.0);
        y.push_back(i % 2 == 0 ? 1 : 0);
        x.at(i, 2) = y.back() ? 10.0 + x.at(i, 2) : -10.0 - x.at(i, 2);
    }
    GbmConfig cfg;
    cfg.stages = 1;
    cfg.max_depth = 1;
    cfg.subsample = 1.0;
    cfg.min_samples_leaf = 5;
    MetaFeatures f = make_features(x, FeatureMode::Blackbox, 1, 4);
    GBMMeta meta = train_gbm_meta(f, y, cfg);
    Matrix imp = gbm_feature_importance(meta);
    REQUIRE(imp.rows() == 1);
    REQUIRE(imp.cols() == 4);
    CHECK(imp.at(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(imp.at(0, 0) == 0.0);
    CHECK(imp.at(0, 1) == 0.0);
    CHECK(imp.at(0, 3) == 0.0);
}

TEST_CASE("gbm importance normalizes to one and reshapes whitebox grids") {
    Rng rng(89);
    const int n_probes = 3, k = 4;
    Matrix x(150, static_cast<std::size_t>(n_probes * k));
    std::vector<int> y;
    for (std::size_t i = 0; i < 150; ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) x.at(i, j) = rng.uniform(0.0, 1.0);
        y.push_back(x.at(i, 5) > 0.5 ? 1 : 0);
    }
    GbmConfig cfg;
    cfg.stages = 20;
    cfg.subsample = 1.0;
    MetaFeatures f = make_features(x, FeatureMode::Whitebox, n_probes, k);
    GBMMeta meta = train_gbm_meta(f, y, cfg);
    Matrix imp = gbm_feature_importance(meta);
    REQUIRE(imp.rows() == static_cast<std::size_t>(n_probes));
    REQUIRE(imp.cols() == static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double v : imp.data()) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    // feature 5 = probe row 1, rank column 1 in the grid; it drives the labels
    std::size_t best_r = 0, best_c = 0;
    for (std::size_t r = 0; r < imp.rows(); ++r)
        for (std::size_t c = 0; c < imp.cols(); ++c)
            if (imp.at(r, c) > imp.at(best_r, best_c)) { best_r = r; best_c = c; }
    CHECK(best_r == 1);
    CHECK(best_c == 1);
}

TEST_CASE("gbm serialization round-trips scores exactly") {
    Rng rng(97);
    Matrix x(100, 5);
    for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 100; ++i)
        y.push_back(x.at(i, 1) + 0.2 * rng.normal() > 0.5 ? 1 : 0);
    GbmConfig cfg;
    cfg.stages = 30;
    cfg.seed = 13;
    GBMMeta meta = train_gbm_meta(make_features(x), y, cfg);
    const std::string p1 = kTmp + "/gbm.bin";
    const std::string p2 = kTmp + "/gbm_b.bin";
    meta.save(p1);
    GBMMeta loaded = GBMMeta::load(p1);
    loaded.save(p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::vector<char> b1{std::istreambuf_iterator<char>(f1), std::istreambuf_iterator<char>()};
    std::vector<char> b2{std::istreambuf_iterator<char>(f2), std::istreambuf_iterator<char>()};
    CHECK(b1 == b2);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(score_gbm(loaded, x.row(i)) == score_gbm(meta, x.row(i)));

    // scores always within [0,1]
    for (std::size_t i = 0; i < 100; ++i) {
        const double z = score_gbm(meta, x.row(i));
        CHECK(z >= 0.0);
        CHECK(z <= 1.0);
    }
}

// ---------------------------------------------------------------------------
// Temperature scaling

TEST_CASE("temperature one is the identity") {
    TemperatureScaler s;
    s.t = 1.0;
    std::vector<double> logits = {0.3, -1.2, 2.0};
    CHECK(apply_temperature(s, logits) == softmax(logits));
}

TEST_CASE("temperature never changes the argmax") {
    Rng rng(101);
    for (double t : {0.05, 0.3, 1.0, 2.5, 20.0}) {
        TemperatureScaler s;
        s.t = t;
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<double> logits(5);
            for (double& v : logits) v = rng.uniform(-4.0, 4.0);
            CHECK(argmax(apply_temperature(s, logits)) == argmax(softmax(logits)));
        }
    }
}

TEST_CASE("equal logits stay uniform at every temperature") {
    for (double t : {0.1, 1.0, 7.0}) {
        TemperatureScaler s;
        s.t = t;
        std::vector<double> logits = {1.7, 1.7, 1.7, 1.7};
        for (double p : apply_temperature(s, logits))
            CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("fitted temperature never loses to t = 1 and fixes overconfidence") {
    // Overconfident model: logits scaled 5x beyond what the noise warrants.
    Rng rng(103);
    const std::size_t n = 400;
    Matrix logits(n, 3);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int true_label = static_cast<int>(rng.below(3));
        // correct class usually leads, but with modest real margin
        for (std::size_t j = 0; j < 3; ++j) logits.at(i, j) = rng.normal();
        logits.at(i, static_cast<std::size_t>(true_label)) += 1.0;
        for (std::size_t j = 0; j < 3; ++j) logits.at(i, j) *= 5.0; // overconfident
        labels[i] = true_label;
    }
    TemperatureScaler s = fit_temperature(logits, labels);
    CHECK(s.t > 0.0);
    CHECK(s.t > 1.5); // softening required
    CHECK(mean_nll(logits, labels, s.t) <= mean_nll(logits, labels, 1.0) + 1e-9);

    const std::string path = kTmp + "/temp.bin";
    s.save(path);
    TemperatureScaler loaded = TemperatureScaler::load(path);
    CHECK(loaded.t == s.t);
}

TEST_CASE("well-calibrated logits keep temperature near one") {
    // Logits already equal to the true log-probabilities: T = 1 is optimal.
    Matrix logits(4, 2);
    std::vector<int> labels = {0, 1, 0, 1};
    logits.at(0, 0) = 2.0;
    logits.at(1, 1) = 2.0;
    logits.at(2, 0) = 2.0;
    logits.at(3, 1) = 2.0;
    TemperatureScaler s = fit_temperature(logits, labels);
    // separable data wants T -> 0; the search domain floor keeps it positive
    CHECK(s.t > 0.0);
    CHECK(mean_nll(logits, labels, s.t) <= mean_nll(logits, labels, 1.0) + 1e-9);
}
