#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metaconf {

/// Numerically stable softmax: the row maximum is subtracted before
/// exponentiation. Throws invalid-argument on empty or non-finite input.
std::vector<double> softmax(std::span<const double> values);

/// In-place variant used by the batch forward passes. No validation.
void softmax_inplace(std::span<double> values);

/// Logistic function, saturating at the extremes without producing NaN.
double sigmoid(double s);

/// Indices that order `values` descending; ties broken by lower index.
std::vector<std::size_t> rank_order_desc(std::span<const double> values);

/// Argmax with lowest-index tie-break.
std::size_t argmax(std::span<const double> values);

} // namespace metaconf
