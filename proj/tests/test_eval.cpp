#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "metaconf/errors.hpp"
#include "metaconf/eval.hpp"
#include "metaconf/rng.hpp"

using namespace metaconf;

namespace {

ScoredSet make_set(std::vector<double> scores, std::vector<int> labels) {
    ScoredSet s;
    s.scores = std::move(scores);
    s.labels = std::move(labels);
    s.origin.assign(s.scores.size(), Origin::InDomain);
    return s;
}

// Independent oracle: brute-force pairwise rank statistic with half credit
// for ties.
double pairwise_auc(const ScoredSet& s) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.labels[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s.labels[j] != 0) continue;
            ++pairs;
            if (s.scores[i] > s.scores[j])
                wins += 1.0;
            else if (s.scores[i] == s.scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

bool curve_passes_through(const RocCurve& c, double fpr, double tpr) {
    for (const RocPoint& p : c.points)
        if (p.fpr == fpr && p.tpr == tpr) return true;
    return false;
}

} // namespace

TEST_CASE("roc: perfect scorer passes through the top-left corner") {
    ScoredSet s = make_set({0.9, 0.8, 0.4, 0.3}, {1, 1, 0, 0});
    RocCurve c = roc_curve(s);
    CHECK(curve_passes_through(c, 0.0, 1.0));
    CHECK(c.points.front().fpr == 0.0);
    CHECK(c.points.front().tpr == 0.0);
    CHECK(c.points.back().fpr == 1.0);
    CHECK(c.points.back().tpr == 1.0);
    CHECK(auc(c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roc: all scores tied collapse to the diagonal endpoints") {
    ScoredSet s = make_set({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0});
    RocCurve c = roc_curve(s);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[0].fpr == 0.0);
    CHECK(c.points[0].tpr == 0.0);
    CHECK(c.points[1].fpr == 1.0);
    CHECK(c.points[1].tpr == 1.0);
    CHECK(auc(c) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("roc: anti-perfect scorer passes through the bottom-right corner") {
    ScoredSet s = make_set({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0});
    RocCurve c = roc_curve(s);
    CHECK(curve_passes_through(c, 1.0, 0.0));
    CHECK(auc(c) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("roc: monotone non-decreasing in both coordinates") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(40);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool h0 = false, h1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.below(8) / 8.0; // force ties
            labels[i] = static_cast<int>(rng.below(2));
            (labels[i] ? h1 : h0) = true;
        }
        if (!h0 || !h1) continue;
        RocCurve c = roc_curve(make_set(scores, labels));
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
            CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
            CHECK(c.points[i].threshold < c.points[i - 1].threshold);
        }
    }
}

TEST_CASE("auc: hand case with half the pairs ordered correctly") {
    // positives score {0.2, 0.8}, negatives {0.9, 0.1}: 2 of 4 pairs win
    ScoredSet s = make_set({0.2, 0.9, 0.8, 0.1}, {1, 0, 1, 0});
    CHECK(pairwise_auc(s) == doctest::Approx(0.5).epsilon(1e-15)); // oracle sanity
    CHECK(auc_of(s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("auc equals the pairwise rank statistic on 1000 random sets") {
    Rng rng(12345);
    int tested = 0;
    while (tested < 1000) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool h0 = false, h1 = false;
        // coarse grid scores so tie groups appear often
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.below(10) / 10.0;
            labels[i] = static_cast<int>(rng.below(2));
            (labels[i] ? h1 : h0) = true;
        }
        if (!h0 || !h1) continue;
        ++tested;
        ScoredSet s = make_set(scores, labels);
        CHECK(std::abs(auc_of(s) - pairwise_auc(s)) < 1e-9);
    }
}

TEST_CASE("roc and auc reject degenerate label sets") {
    try {
        (void)roc_curve(make_set({0.4, 0.6}, {1, 1}));
        FAIL("expected degenerate-labels rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
    CHECK_THROWS_AS((void)auc_of(make_set({0.4, 0.6}, {0, 0})), Error);
}

TEST_CASE("pr: perfect scorer holds precision one at every achievable recall") {
    ScoredSet s = make_set({0.9, 0.8, 0.4, 0.3}, {1, 1, 0, 0});
    PrCurve c = pr_curve(s);
    // best precision at each distinct recall must be 1.0
    std::vector<double> recalls;
    for (const PrPoint& p : c.points) recalls.push_back(p.recall);
    std::sort(recalls.begin(), recalls.end());
    recalls.erase(std::unique(recalls.begin(), recalls.end()), recalls.end());
    for (double r : recalls) {
        double best = 0.0;
        for (const PrPoint& p : c.points)
            if (p.recall == r) best = std::max(best, p.precision);
        CHECK(best == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pr: accept-all point has recall one and base-rate precision") {
    ScoredSet s = make_set({0.9, 0.6, 0.4, 0.2, 0.1}, {1, 0, 1, 0, 0});
    PrCurve c = pr_curve(s);
    const PrPoint& last = c.points.back(); // lowest threshold = accept all
    CHECK(last.recall == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(last.precision == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
}

TEST_CASE("pr: three-sample hand case at threshold 0.5") {
    // Accepting z >= 0.5 keeps {0.9, 0.6}: TP = 1, FP = 1, P = 2.
    ScoredSet s = make_set({0.9, 0.6, 0.4}, {1, 0, 1});
    PrCurve c = pr_curve(s);
    // the acceptance set at 0.5 equals the curve point at threshold 0.6
    bool found = false;
    for (const PrPoint& p : c.points) {
        if (p.threshold == 0.6) {
            found = true;
            CHECK(p.precision == doctest::Approx(0.5).epsilon(1e-15));
            CHECK(p.recall == doctest::Approx(0.5).epsilon(1e-15));
        }
    }
    CHECK(found);

    // threshold_sweep at literal t = 0.5 gives the same numbers
    std::vector<SweepRow> rows = threshold_sweep(s, s, {0.5});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].in_precision_defined);
    CHECK(rows[0].in_precision == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rows[0].in_recall == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pr rejects sets without positives") {
    try {
        (void)pr_curve(make_set({0.4, 0.6}, {0, 0}));
        FAIL("expected degenerate-labels rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
}

TEST_CASE("sweep: below-minimum threshold accepts everything") {
    ScoredSet in = make_set({0.9, 0.6, 0.4}, {1, 0, 1});
    ScoredSet pooled = make_set({0.9, 0.6, 0.4, 0.2}, {1, 0, 1, 0});
    std::vector<SweepRow> rows = threshold_sweep(in, pooled, {0.0});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].in_accepted == 3);
    CHECK(rows[0].in_recall == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rows[0].pooled_accepted == 4);
    CHECK(rows[0].pooled_recall == doctest::Approx(1.0).epsilon(1e-15));
    // accept-all precision IS the positive rate, exactly
    CHECK(rows[0].in_precision == 2.0 / 3.0);
    CHECK(rows[0].pooled_precision == 2.0 / 4.0);
}

TEST_CASE("sweep: above-maximum threshold flags precision undefined") {
    ScoredSet in = make_set({0.9, 0.6}, {1, 0});
    std::vector<SweepRow> rows = threshold_sweep(in, in, {0.95});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].in_accepted == 0);
    CHECK_FALSE(rows[0].in_precision_defined);
    CHECK(rows[0].in_recall_defined);
    CHECK(rows[0].in_recall == 0.0);
    CHECK_FALSE(rows[0].pooled_precision_defined);
}

TEST_CASE("sweep: at the minimum score the accept-all precision is exact") {
    Rng rng(9);
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t pos = 0;
    for (int i = 0; i < 37; ++i) {
        scores.push_back(rng.below(20) / 20.0);
        labels.push_back(static_cast<int>(rng.below(2)));
        pos += static_cast<std::size_t>(labels.back());
    }
    ScoredSet s = make_set(scores, labels);
    const double t_min = *std::min_element(scores.begin(), scores.end());
    std::vector<SweepRow> rows = threshold_sweep(s, s, {t_min});
    CHECK(rows[0].in_accepted == 37);
    CHECK(rows[0].in_precision == static_cast<double>(pos) / 37.0);
}

TEST_CASE("sweep requires ascending thresholds") {
    ScoredSet s = make_set({0.9, 0.6}, {1, 0});
    CHECK_THROWS_AS((void)threshold_sweep(s, s, {0.5, 0.3}), Error);
}

TEST_CASE("residual precision: no rejection gives overall accuracy") {
    ScoredSet s = make_set({0.5, 0.1, 0.8, 0.9}, {1, 0, 0, 1});
    CHECK(residual_precision_at_rejection(s, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("residual precision: hand case rejecting the two lowest") {
    ScoredSet s = make_set({0.1, 0.2, 0.9, 0.8}, {0, 0, 1, 1});
    CHECK(residual_precision_at_rejection(s, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("residual precision: non-decreasing for a perfect scorer") {
    // scores rank all correct samples above all incorrect ones
    ScoredSet s = make_set({0.9, 0.85, 0.8, 0.75, 0.3, 0.25, 0.2, 0.15},
                           {1, 1, 1, 1, 0, 0, 0, 0});
    double prev = residual_precision_at_rejection(s, 0.0);
    for (double f : {0.125, 0.25, 0.375, 0.5}) {
        double cur = residual_precision_at_rejection(s, f);
        CHECK(cur >= prev);
        prev = cur;
    }
    CHECK(residual_precision_at_rejection(s, 0.5) == 1.0);
}

TEST_CASE("residual precision: score ties drop by ascending index") {
    // Both middle samples score 0.5; rejecting 1 of 4 must drop index 1
    // (the lower index among the tied lowest) ... index ordering is over the
    // lowest-scoring group.
    ScoredSet s = make_set({0.9, 0.5, 0.5, 0.8}, {1, 0, 1, 1});
    // fraction 0.25 -> drop one sample: the tied pair starts at index 1
    CHECK(residual_precision_at_rejection(s, 0.25) ==
          doctest::Approx(3.0 / 3.0).epsilon(1e-15));
    // fraction 0.5 -> drop both tied samples
    CHECK(residual_precision_at_rejection(s, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("residual precision: rejecting everything is an error") {
    ScoredSet s = make_set({0.4, 0.6}, {1, 0});
    CHECK_THROWS_AS((void)residual_precision_at_rejection(s, 1.0), Error);
    CHECK_THROWS_AS((void)residual_precision_at_rejection(s, -0.1), Error);
    CHECK_THROWS_AS((void)residual_precision_at_rejection(s, 1.5), Error);
}

TEST_CASE("quadrants: accept-all and reject-all conventions") {
    ScoredSet s = make_set({0.0, 0.3, 0.7}, {1, 0, 1});
    Quadrants all = confusion_quadrants(s, 0.0); // z >= 0 accepts score 0 too
    CHECK(all.tp.size() + all.fp.size() == 3);
    CHECK(all.tn.empty());
    CHECK(all.fn.empty());

    Quadrants none = confusion_quadrants(s, 0.71);
    CHECK(none.tn.size() + none.fn.size() == 3);
    CHECK(none.tp.empty());
    CHECK(none.fp.empty());
}

TEST_CASE("quadrants partition every index exactly once") {
    Rng rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.below(6) / 6.0;
            labels[i] = static_cast<int>(rng.below(2));
        }
        ScoredSet s = make_set(scores, labels);
        const double t = rng.below(8) / 8.0;
        Quadrants q = confusion_quadrants(s, t);
        std::vector<std::size_t> all;
        for (const auto* part : {&q.tp, &q.fp, &q.tn, &q.fn})
            all.insert(all.end(), part->begin(), part->end());
        std::sort(all.begin(), all.end());
        REQUIRE(all.size() == n);
        for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
        // membership rules spot-checked
        for (std::size_t i : q.tp) {
            CHECK(s.scores[i] >= t);
            CHECK(s.labels[i] == 1);
        }
        for (std::size_t i : q.tn) {
            CHECK(s.scores[i] < t);
            CHECK(s.labels[i] == 0);
        }
    }
}

TEST_CASE("strictly increasing score transforms change nothing") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool h0 = false, h1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.below(10) / 10.0;
            labels[i] = static_cast<int>(rng.below(2));
            (labels[i] ? h1 : h0) = true;
        }
        if (!h0 || !h1) continue;
        ScoredSet s = make_set(scores, labels);
        ScoredSet warped = s;
        auto f = [](double z) { return std::exp(2.0 * z) - 0.5; }; // strictly increasing
        for (double& z : warped.scores) z = f(z);

        RocCurve c1 = roc_curve(s), c2 = roc_curve(warped);
        REQUIRE(c1.points.size() == c2.points.size());
        for (std::size_t i = 0; i < c1.points.size(); ++i) {
            CHECK(c1.points[i].fpr == c2.points[i].fpr);
            CHECK(c1.points[i].tpr == c2.points[i].tpr);
        }
        CHECK(auc(c1) == auc(c2));

        const double t = rng.below(10) / 10.0;
        Quadrants q1 = confusion_quadrants(s, t);
        Quadrants q2 = confusion_quadrants(warped, f(t));
        CHECK(q1.tp == q2.tp);
        CHECK(q1.fp == q2.fp);
        CHECK(q1.tn == q2.tn);
        CHECK(q1.fn == q2.fn);
    }
}

TEST_CASE("scored sets validate their shape") {
    ScoredSet bad;
    bad.scores = {0.5, 0.6};
    bad.labels = {1};
    bad.origin = {Origin::InDomain, Origin::InDomain};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.labels = {1, 2};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.labels = {1, 0};
    bad.scores[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), Error);
}
