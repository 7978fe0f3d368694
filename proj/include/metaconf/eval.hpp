#pragma once

#include <cstddef>
#include <vector>

#include "metaconf/dataset.hpp"

namespace metaconf {

// Confidence scores paired with correctness labels (1 = the base model got
// the sample right). Origin flags ride along so pooled sets can be sliced.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<Origin> origin;

    std::size_t size() const { return scores.size(); }
    void validate() const;
};

struct RocPoint {
    double threshold; // accept when score >= threshold
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points; // thresholds descending, (0,0) .. (1,1)
};

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

struct PrCurve {
    std::vector<PrPoint> points; // thresholds descending
};

// One sweep row per requested threshold; *_defined flags are false where the
// ratio has an empty denominator (zero accepted, or no positives at all).
struct SweepRow {
    double threshold = 0.0;
    std::size_t in_accepted = 0;
    double in_precision = 0.0;
    bool in_precision_defined = false;
    double in_recall = 0.0;
    bool in_recall_defined = false;
    std::size_t pooled_accepted = 0;
    double pooled_precision = 0.0;
    bool pooled_precision_defined = false;
    double pooled_recall = 0.0;
    bool pooled_recall_defined = false;
};

// Index partition at one threshold: accepted/rejected crossed with
// correct/incorrect.
struct Quadrants {
    std::vector<std::size_t> tp; // accepted and correct
    std::vector<std::size_t> fp; // accepted but incorrect
    std::vector<std::size_t> tn; // rejected and incorrect
    std::vector<std::size_t> fn; // rejected but correct
};

// Operating points at every distinct score (ties grouped), descending, with
// a leading accept-nothing sentinel.
RocCurve roc_curve(const ScoredSet& s);

// Trapezoidal area; equals the pairwise rank statistic with half credit for
// ties.
double auc(const RocCurve& curve);
double auc_of(const ScoredSet& s);

PrCurve pr_curve(const ScoredSet& s);

std::vector<SweepRow> threshold_sweep(const ScoredSet& in_domain, const ScoredSet& pooled,
                                      const std::vector<double>& thresholds);

// Drops the floor(fraction*N) lowest-scored samples (ties resolved by
// ascending index) and returns the accuracy of what remains.
double residual_precision_at_rejection(const ScoredSet& s, double fraction);

Quadrants confusion_quadrants(const ScoredSet& s, double threshold);

} // namespace metaconf
