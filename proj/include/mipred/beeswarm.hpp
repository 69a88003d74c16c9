#pragma once

#include <cstdint>
#include <string>

#include "mipred/explain.hpp"
#include "mipred/matrix.hpp"

namespace mipred::explain {

struct BeeswarmOptions {
    std::size_t max_features = 20;  // rows plotted, ordered by importance
    double width = 880.0;
    double row_height = 30.0;
    std::uint64_t seed = 0;  // vertical jitter stream
};

// Summary beeswarm: one dot per (instance, feature) at x = attribution, one
// <g> row per feature ordered by global importance, dot color mapped from
// the min-max normalized feature value (grey when missing).
std::string beeswarm_svg(const ShapMatrix& shap, const FeatureMatrix& features,
                         const GlobalImportance& importance,
                         const BeeswarmOptions& options = {});

void save_beeswarm_svg(const ShapMatrix& shap, const FeatureMatrix& features,
                       const GlobalImportance& importance, const std::string& path,
                       const BeeswarmOptions& options = {});

}  // namespace mipred::explain
