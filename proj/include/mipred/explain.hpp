#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mipred/gbdt.hpp"
#include "mipred/matrix.hpp"

namespace mipred::explain {

struct ShapMatrix {
    double base_value = 0.0;  // expected margin over the training distribution
    std::vector<std::string> feature_names;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major attributions in margin space

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }

    std::string to_json() const;
    // Delimited text: header of feature names, one attribution row per
    // instance.
    void save_csv(const std::string& path) const;
};

// Exact path-dependent Tree SHAP: at splits on features outside the
// conditioning set the expectation branches by child cover / parent cover;
// features inside the set follow the instance (missing cells take the
// split's default direction). Polynomial in tree size via the path-weight
// extend/unwind recursion. Attributions are in margin (log-odds) space.
ShapMatrix tree_shap(const gbdt::Forest& model, const FeatureMatrix& features);

// Shapley values by explicit subset enumeration over the distinct features
// the model uses (at most 20); the independent oracle for tree_shap.
std::vector<double> brute_force_shap(const gbdt::Forest& model, const double* row,
                                     std::size_t n_features);

// Cover-weighted expectation of the forest margin conditioned on the feature
// subset `in_set` (by feature index). Shared by the oracle and tests.
double conditional_expectation(const gbdt::Forest& model, const double* row,
                               const std::vector<bool>& in_set);

struct GlobalImportance {
    // Parallel arrays sorted by descending importance, name ascending on ties.
    std::vector<std::string> ranking;
    std::vector<double> mean_abs_shap;
};

GlobalImportance global_importance(const ShapMatrix& shap);

}  // namespace mipred::explain
