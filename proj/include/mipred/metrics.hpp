#pragma once

#include <cstddef>
#include <vector>

#include "mipred/table.hpp"

namespace mipred::eval {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool undefined_precision = false;  // zero denominator reported as 0
    bool undefined_recall = false;
};

struct MetricsReport {
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;  // equals accuracy exactly (single-label identity)
    double weighted_f1 = 0.0;
    ClassMetrics per_class[2];
    ConfusionMatrix confusion;
};

// Class-support-weighted precision/recall/F1 plus accuracy for binary labels.
MetricsReport metrics(const std::vector<int>& predictions,
                      const tabular::BinaryTarget& truth);

}  // namespace mipred::eval
