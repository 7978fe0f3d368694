#include "metaconf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metaconf/errors.hpp"
#include "metaconf/matrix.hpp"

namespace metaconf {

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

void softmax_inplace(std::span<double> values) {
    double max = values[0];
    for (double v : values) max = std::max(max, v);
    double sum = 0.0;
    for (double& v : values) {
        // Floor at DBL_MIN so entries stay strictly positive (and their
        // logs finite) even when exp underflows.
        v = std::max(std::exp(v - max), std::numeric_limits<double>::min());
        sum += v;
    }
    for (double& v : values) v /= sum;
}

std::vector<double> softmax(std::span<const double> values) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "softmax: empty input");
    for (double v : values) {
        if (!std::isfinite(v))
            fail(ErrorCode::InvalidArgument, "softmax: non-finite input");
    }
    std::vector<double> out(values.begin(), values.end());
    softmax_inplace(out);
    return out;
}

double sigmoid(double s) {
    if (s >= 0.0) {
        return 1.0 / (1.0 + std::exp(-s));
    }
    double e = std::exp(s);
    return e / (1.0 + e);
}

std::vector<std::size_t> rank_order_desc(std::span<const double> values) {
    if (values.empty())
        fail(ErrorCode::InvalidArgument, "rank_order_desc: empty input");
    for (double v : values) {
        if (!std::isfinite(v))
            fail(ErrorCode::InvalidArgument, "rank_order_desc: non-finite input");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

} // namespace metaconf
