#include "mipred/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "mipred/error.hpp"

namespace mipred::gbdt {

std::uint16_t BinMapper::bin_of(std::size_t feature, double value) const {
    if (std::isnan(value)) return static_cast<std::uint16_t>(missing_bin(feature));
    const auto& e = edges[feature];
    const auto it = std::lower_bound(e.begin(), e.end(), value);
    return static_cast<std::uint16_t>(it - e.begin());
}

BinMapper BinMapper::fit(const FeatureMatrix& features, std::size_t max_bins) {
    if (max_bins < 2 || max_bins > 256) throw ParamError("max_bins must lie in [2, 256]");
    BinMapper mapper;
    mapper.edges.resize(features.n_cols);
    std::vector<double> values;
    for (std::size_t c = 0; c < features.n_cols; ++c) {
        values.clear();
        for (std::size_t r = 0; r < features.n_rows; ++r) {
            const double v = features.at(r, c);
            if (!std::isnan(v)) values.push_back(v);
        }
        std::sort(values.begin(), values.end());

        // Candidate cut values: every distinct value when few, otherwise the
        // distinct values found at max_bins-1 evenly spaced quantile ranks.
        std::vector<double> candidates;
        if (values.empty()) {
            mapper.edges[c] = {};
            continue;
        }
        std::vector<double> distinct;
        for (double v : values)
            if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
        if (distinct.size() <= max_bins) {
            candidates = std::move(distinct);
        } else {
            for (std::size_t k = 1; k < max_bins; ++k) {
                const std::size_t rank = k * values.size() / max_bins;
                const double v = values[rank];
                if (candidates.empty() || candidates.back() != v) candidates.push_back(v);
            }
        }
        auto& edges = mapper.edges[c];
        edges.reserve(candidates.size());
        for (std::size_t i = 0; i + 1 < candidates.size(); ++i)
            edges.push_back(0.5 * (candidates[i] + candidates[i + 1]));
    }
    return mapper;
}

BinnedMatrix BinnedMatrix::from(const FeatureMatrix& features, const BinMapper& mapper) {
    BinnedMatrix binned;
    binned.n_rows = features.n_rows;
    binned.n_cols = features.n_cols;
    binned.codes.resize(features.n_rows * features.n_cols);
    for (std::size_t r = 0; r < features.n_rows; ++r)
        for (std::size_t c = 0; c < features.n_cols; ++c)
            binned.codes[r * features.n_cols + c] = mapper.bin_of(c, features.at(r, c));
    return binned;
}

FeatureHistogram build_histogram(const BinnedMatrix& binned, std::size_t feature,
                                 std::size_t n_bins, const std::vector<std::size_t>& rows,
                                 const std::vector<double>& grad,
                                 const std::vector<double>& hess) {
    FeatureHistogram hist(n_bins);
    for (std::size_t row : rows) {
        auto& bin = hist[binned.at(row, feature)];
        bin.grad += grad[row];
        bin.hess += hess[row];
        ++bin.count;
    }
    return hist;
}

FeatureHistogram subtract_histogram(const FeatureHistogram& parent,
                                    const FeatureHistogram& left) {
    FeatureHistogram right(parent.size());
    for (std::size_t b = 0; b < parent.size(); ++b) {
        right[b].grad = parent[b].grad - left[b].grad;
        right[b].hess = parent[b].hess - left[b].hess;
        right[b].count = parent[b].count - left[b].count;
    }
    return right;
}

}  // namespace mipred::gbdt
