#pragma once

#include <cstdint>
#include <vector>

#include "mipred/matrix.hpp"

namespace mipred::gbdt {

// Quantile bin edges for one feature. Values bin as: first k with
// x <= edges[k], else edges.size() (the open-ended top bin). Code
// edges.size()+1 is the dedicated missing bin.
struct BinMapper {
    std::vector<std::vector<double>> edges;  // per feature, ascending, finite

    std::size_t n_features() const { return edges.size(); }
    std::size_t n_bins(std::size_t feature) const { return edges[feature].size() + 2; }
    std::size_t missing_bin(std::size_t feature) const { return edges[feature].size() + 1; }

    std::uint16_t bin_of(std::size_t feature, double value) const;

    // Edges from training-data quantiles: at most max_bins-1 finite edges,
    // placed midway between adjacent distinct candidate values so every
    // stored threshold falls strictly between observed values.
    static BinMapper fit(const FeatureMatrix& features, std::size_t max_bins);
};

// Pre-binned dataset: one code per cell, row-major.
struct BinnedMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint16_t> codes;

    std::uint16_t at(std::size_t r, std::size_t c) const { return codes[r * n_cols + c]; }

    static BinnedMatrix from(const FeatureMatrix& features, const BinMapper& mapper);
};

struct BinStats {
    double grad = 0.0;
    double hess = 0.0;
    std::int64_t count = 0;
};

// Histogram of one feature over a set of rows; bins include the missing bin.
using FeatureHistogram = std::vector<BinStats>;

FeatureHistogram build_histogram(const BinnedMatrix& binned, std::size_t feature,
                                 std::size_t n_bins, const std::vector<std::size_t>& rows,
                                 const std::vector<double>& grad,
                                 const std::vector<double>& hess);

// parent - left, bin-wise; the standard sibling trick.
FeatureHistogram subtract_histogram(const FeatureHistogram& parent,
                                    const FeatureHistogram& left);

}  // namespace mipred::gbdt
