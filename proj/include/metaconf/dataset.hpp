#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaconf/matrix.hpp"

namespace metaconf {

enum class Origin : std::uint8_t { InDomain = 0, OutOfDomain = 1 };

/// Sentinel label carried by out-of-domain samples after pooling.
inline constexpr int kOodLabel = -1;

/// Feature matrix plus integer class labels. `ids` gives every sample a
/// stable identity so the pipeline can assert that its partitions never
/// overlap.
struct Dataset {
    Matrix features;                 // N x d
    std::vector<int> labels;         // in [0, num_classes) or kOodLabel
    int num_classes = 0;
    std::vector<Origin> origin;      // per sample
    std::vector<std::int64_t> ids;   // stable sample identity

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }

    /// Checks the type invariants; throws invalid-argument on violation.
    void validate() const;
};

struct SplitSpec {
    double train_base = 0.6;
    double train_meta = 0.2;
    double dev = 0.2;
    std::uint64_t seed = 0;
};

struct NoiseSpec {
    double rate = 0.0;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train_base;
    Dataset train_meta;
    Dataset dev;
};

/// CSV: one sample per row, label in the final integer column, optional
/// header auto-detected by a non-numeric first cell. `declared_classes`
/// of 0 means infer from the labels; otherwise labels >= the declared
/// count are a format error.
Dataset load_csv(const std::string& path, int declared_classes = 0,
                 std::int64_t id_offset = 0);

/// Classic idx pair: images file with magic 0x00000803, labels file with
/// magic 0x00000801, big-endian headers, pixels scaled to [0, 1].
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path,
                      int declared_classes = 0, std::int64_t id_offset = 0);

void save_csv(const Dataset& dataset, const std::string& path);

/// Deterministic three-way partition driven solely by spec.seed. Sizes are
/// floor(fraction * N) with the remainder assigned to train-base.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

/// Replaces the labels of exactly floor(rate * N) samples, chosen without
/// replacement, by a uniform draw over the other num_classes - 1 labels.
Dataset inject_label_noise(const Dataset& dataset, const NoiseSpec& spec);

/// Concatenates the in-domain test set with an out-of-domain set whose
/// samples are flagged OutOfDomain and relabeled with the sentinel.
Dataset pool_ood(const Dataset& in_test, const Dataset& ood);

/// Synthetic generator for the desk-scale recipe: each class is a mixture
/// of Gaussian clusters, so linear models underfit while a small MLP does
/// well. A fresh seed yields a class-disjoint set in the same feature
/// space, which serves as the out-of-domain pool.
struct SyntheticSpec {
    int classes = 10;
    int clusters_per_class = 5;
    int dim = 24;
    std::size_t samples = 10000;
    double center_scale = 1.0;   // spread of cluster centers
    double cluster_scale = 0.35; // within-cluster spread
    std::uint64_t seed = 0;
};

Dataset generate_clusters(const SyntheticSpec& spec, std::int64_t id_offset = 0);

} // namespace metaconf
