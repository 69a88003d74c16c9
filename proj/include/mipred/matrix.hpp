#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace mipred {

// Dense row-major feature matrix. NaN marks a missing cell; pipelines that
// promise dense output never leave NaN behind.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), data(rows * cols, 0.0) {}

    double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * n_cols; }

    static bool is_missing(double v) { return std::isnan(v); }

    bool has_missing() const {
        for (double v : data)
            if (std::isnan(v)) return true;
        return false;
    }

    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const {
        FeatureMatrix out(rows.size(), n_cols);
        out.names = names;
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < n_cols; ++c) out.at(i, c) = at(rows[i], c);
        return out;
    }
};

}  // namespace mipred
