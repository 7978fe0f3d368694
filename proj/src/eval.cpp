#include "metaconf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metaconf/errors.hpp"

namespace metaconf {

void ScoredSet::validate() const {
    if (labels.size() != scores.size() || origin.size() != scores.size())
        fail(ErrorCode::InvalidArgument, "scored set: per-sample arrays disagree");
    for (double z : scores)
        if (!std::isfinite(z)) fail(ErrorCode::InvalidArgument, "scored set: non-finite score");
    for (int y : labels)
        if (y != 0 && y != 1) fail(ErrorCode::InvalidArgument, "scored set: labels must be 0/1");
}

namespace {

struct Counts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

Counts count_classes(const ScoredSet& s) {
    Counts c;
    for (int y : s.labels) (y == 1 ? c.pos : c.neg) += 1;
    return c;
}

// Indices sorted by descending score; ties keep ascending index order.
std::vector<std::size_t> descending_order(const ScoredSet& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });
    return order;
}

} // namespace

RocCurve roc_curve(const ScoredSet& s) {
    s.validate();
    const Counts c = count_classes(s);
    if (c.pos == 0 || c.neg == 0)
        fail(ErrorCode::DegenerateLabels, "roc: needs both correct and incorrect samples");

    const std::vector<std::size_t> order = descending_order(s);
    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = s.scores[order[i]];
        // absorb the whole tie group into one operating point
        while (i < order.size() && s.scores[order[i]] == score) {
            (s.labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({score, static_cast<double>(fp) / static_cast<double>(c.neg),
                                static_cast<double>(tp) / static_cast<double>(c.pos)});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    if (curve.points.size() < 2) fail(ErrorCode::InvalidArgument, "auc: degenerate curve");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    return area;
}

double auc_of(const ScoredSet& s) { return auc(roc_curve(s)); }

PrCurve pr_curve(const ScoredSet& s) {
    s.validate();
    const Counts c = count_classes(s);
    if (c.pos == 0) fail(ErrorCode::DegenerateLabels, "pr: needs at least one correct sample");

    const std::vector<std::size_t> order = descending_order(s);
    PrCurve curve;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = s.scores[order[i]];
        while (i < order.size() && s.scores[order[i]] == score) {
            (s.labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({score, static_cast<double>(tp) / static_cast<double>(c.pos),
                                static_cast<double>(tp) / static_cast<double>(tp + fp)});
    }
    return curve;
}

namespace {

void fill_sweep_side(const ScoredSet& s, double threshold, std::size_t& accepted,
                     double& precision, bool& precision_defined, double& recall,
                     bool& recall_defined) {
    std::size_t tp = 0, acc = 0, pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool is_pos = s.labels[i] == 1;
        pos += static_cast<std::size_t>(is_pos);
        if (s.scores[i] >= threshold) {
            ++acc;
            tp += static_cast<std::size_t>(is_pos);
        }
    }
    accepted = acc;
    precision_defined = acc > 0;
    precision = acc > 0 ? static_cast<double>(tp) / static_cast<double>(acc) : 0.0;
    recall_defined = pos > 0;
    recall = pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
}

} // namespace

std::vector<SweepRow> threshold_sweep(const ScoredSet& in_domain, const ScoredSet& pooled,
                                      const std::vector<double>& thresholds) {
    in_domain.validate();
    pooled.validate();
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            fail(ErrorCode::InvalidArgument, "sweep: thresholds must be sorted ascending");

    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        SweepRow row;
        row.threshold = t;
        fill_sweep_side(in_domain, t, row.in_accepted, row.in_precision,
                        row.in_precision_defined, row.in_recall, row.in_recall_defined);
        fill_sweep_side(pooled, t, row.pooled_accepted, row.pooled_precision,
                        row.pooled_precision_defined, row.pooled_recall,
                        row.pooled_recall_defined);
        rows.push_back(row);
    }
    return rows;
}

double residual_precision_at_rejection(const ScoredSet& s, double fraction) {
    s.validate();
    if (s.size() == 0) fail(ErrorCode::InvalidArgument, "residual: empty set");
    if (!(fraction >= 0.0) || fraction > 1.0)
        fail(ErrorCode::InvalidArgument, "residual: fraction must lie in [0,1]");

    const std::size_t drop =
        static_cast<std::size_t>(fraction * static_cast<double>(s.size()));
    if (drop >= s.size())
        fail(ErrorCode::InvalidArgument, "residual: rejection leaves no samples");

    // ascending by score, ties by ascending index (stable over iota order)
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] < s.scores[b];
    });
    std::size_t correct = 0;
    for (std::size_t i = drop; i < order.size(); ++i)
        correct += static_cast<std::size_t>(s.labels[order[i]] == 1);
    return static_cast<double>(correct) / static_cast<double>(s.size() - drop);
}

Quadrants confusion_quadrants(const ScoredSet& s, double threshold) {
    s.validate();
    Quadrants q;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool accepted = s.scores[i] >= threshold;
        const bool correct = s.labels[i] == 1;
        if (accepted && correct)
            q.tp.push_back(i);
        else if (accepted)
            q.fp.push_back(i);
        else if (!correct)
            q.tn.push_back(i);
        else
            q.fn.push_back(i);
    }
    return q;
}

} // namespace metaconf
