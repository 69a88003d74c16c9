#include "mipred/metrics.hpp"

#include "mipred/error.hpp"

namespace mipred::eval {

MetricsReport metrics(const std::vector<int>& predictions, const tabular::BinaryTarget& truth) {
    if (predictions.size() != truth.values.size())
        throw DataError("predictions and truth have different lengths");
    if (predictions.empty()) throw DataError("metrics need at least one row");

    MetricsReport report;
    auto& cm = report.confusion;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i] != 0 ? 1 : 0;
        const int t = truth.values[i];
        if (p == 1 && t == 1) ++cm.tp;
        else if (p == 1 && t == 0) ++cm.fp;
        else if (p == 0 && t == 1) ++cm.fn;
        else ++cm.tn;
    }
    const auto n = static_cast<double>(predictions.size());

    // Per class: class 1 = deceased, class 0 = alive.
    const std::size_t pred_pos[2] = {cm.tn + cm.fn, cm.tp + cm.fp};
    const std::size_t true_pos[2] = {cm.tn, cm.tp};
    const std::size_t support[2] = {cm.tn + cm.fp, cm.tp + cm.fn};
    for (int c = 0; c < 2; ++c) {
        ClassMetrics& m = report.per_class[c];
        m.support = support[c];
        if (pred_pos[c] == 0) {
            m.undefined_precision = true;  // reported as 0
        } else {
            m.precision = static_cast<double>(true_pos[c]) / static_cast<double>(pred_pos[c]);
        }
        if (support[c] == 0) {
            m.undefined_recall = true;
        } else {
            m.recall = static_cast<double>(true_pos[c]) / static_cast<double>(support[c]);
        }
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        report.weighted_precision += static_cast<double>(support[c]) / n * m.precision;
        report.weighted_f1 += static_cast<double>(support[c]) / n * m.f1;
    }

    report.accuracy = static_cast<double>(cm.tp + cm.tn) / n;
    // support_c * recall_c collapses to the correct count, so the weighted
    // recall is the accuracy; computing it through the integer path keeps the
    // identity exact in floating point.
    report.weighted_recall = static_cast<double>(cm.tp + cm.tn) / n;
    return report;
}

}  // namespace mipred::eval
