#include "mipred/eval.hpp"

#include <algorithm>
#include <cmath>

#include "mipred/error.hpp"
#include "mipred/rng.hpp"

namespace mipred::eval {

std::vector<std::size_t> stratified_kfold(const BinaryTarget& target, std::size_t k,
                                          std::uint64_t seed) {
    if (k < 2) throw ParamError("stratified k-fold requires k >= 2");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < target.values.size(); ++i)
        by_class[target.values[i]].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < k)
            throw DataError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " rows, fewer than k = " +
                            std::to_string(k));

    auto gen = rng::substream(seed, "folds");
    std::vector<std::size_t> fold_of(target.values.size(), 0);
    // Remainder rows rotate across folds so total fold sizes stay within one.
    std::size_t offset = 0;
    for (int c = 0; c < 2; ++c) {
        auto rows = by_class[c];
        rng::shuffle(rows, gen);
        const std::size_t base = rows.size() / k;
        const std::size_t rem = rows.size() % k;
        std::size_t cursor = 0;
        for (std::size_t f = 0; f < k; ++f) {
            std::size_t take = base;
            if ((f + k - offset) % k < rem) ++take;
            for (std::size_t i = 0; i < take; ++i) fold_of[rows[cursor++]] = f;
        }
        offset = (offset + rem) % k;
    }
    return fold_of;
}

void CvResult::summarize() {
    auto summary = [&](auto getter) {
        MetricSummary s;
        const auto n = static_cast<double>(fold_metrics.size());
        for (const auto& m : fold_metrics) s.mean += getter(m);
        s.mean /= n;
        if (fold_metrics.size() > 1) {
            double ss = 0.0;
            for (const auto& m : fold_metrics) {
                const double d = getter(m) - s.mean;
                ss += d * d;
            }
            s.sd = std::sqrt(ss / (n - 1.0));
        }
        return s;
    };
    f1 = summary([](const MetricsReport& m) { return m.weighted_f1; });
    precision = summary([](const MetricsReport& m) { return m.weighted_precision; });
    recall = summary([](const MetricsReport& m) { return m.weighted_recall; });
    accuracy = summary([](const MetricsReport& m) { return m.accuracy; });
}

DatasetViews DatasetViews::prepare(const Table& table, const std::string& target_column) {
    DatasetViews views;
    views.target = tabular::binarize_target(table, target_column);
    auto [cleaned, report] = preprocess::clean(table, target_column);
    views.cleaned = std::move(cleaned);
    views.cleaning = std::move(report);
    views.raw = preprocess::raw_matrix(table);
    return views;
}

CvResult cross_validate(const DatasetViews& data, const Candidate& candidate,
                        const std::vector<std::size_t>& partition, std::size_t k,
                        std::uint64_t seed) {
    CvResult result;
    result.partition = partition;
    result.seed = seed;

    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_rows, val_rows;
        for (std::size_t i = 0; i < partition.size(); ++i)
            (partition[i] == fold ? val_rows : train_rows).push_back(i);

        BinaryTarget val_y;
        for (std::size_t r : val_rows) val_y.values.push_back(data.target.values[r]);

        std::vector<int> labels;
        if (candidate.pipeline.mode == PipelineMode::preprocessed) {
            const Table fold_train = data.cleaned.select_rows(train_rows);
            BinaryTarget train_y;
            for (std::size_t r : train_rows) train_y.values.push_back(data.target.values[r]);
            auto fitted = preprocess::fit_transform(fold_train, train_y, candidate.pipeline);
            BinaryTarget sampled_y;
            for (std::size_t r : fitted.sampled_rows)
                sampled_y.values.push_back(train_y.values[r]);
            const auto model = gbdt::fit(fitted.matrix, sampled_y, candidate.params);
            const Table fold_val = data.cleaned.select_rows(val_rows);
            const auto val_x = preprocess::transform(fold_val, fitted.state);
            labels = gbdt::predict_label(model, val_x);
        } else {
            const auto train_x = data.raw.select_rows(train_rows);
            BinaryTarget train_y;
            for (std::size_t r : train_rows) train_y.values.push_back(data.target.values[r]);
            const auto model = gbdt::fit(train_x, train_y, candidate.params);
            const auto val_x = data.raw.select_rows(val_rows);
            labels = gbdt::predict_label(model, val_x);
        }
        result.fold_metrics.push_back(metrics(labels, val_y));
    }
    result.summarize();
    return result;
}

GridSearchResult grid_search(const DatasetViews& data, const GridSpec& spec,
                             std::uint64_t seed) {
    if (spec.candidates.empty()) throw ParamError("grid search needs at least one candidate");
    const auto partition = stratified_kfold(data.target, spec.cv_folds, seed);

    GridSearchResult result;
    double best_f1 = -1.0;
    bool any_ok = false;
    for (std::size_t i = 0; i < spec.candidates.size(); ++i) {
        CandidateResult cr;
        cr.candidate = spec.candidates[i];
        try {
            cr.cv = cross_validate(data, cr.candidate, partition, spec.cv_folds, seed);
            any_ok = true;
            // Strict comparison: ties resolve to the first candidate in
            // enumeration order.
            if (cr.cv.f1.mean > best_f1) {
                best_f1 = cr.cv.f1.mean;
                result.best_index = i;
            }
        } catch (const Error& e) {
            cr.failed = true;
            cr.error = e.what();
        }
        result.results.push_back(std::move(cr));
    }
    if (!any_ok) throw DataError("every grid-search candidate failed");
    return result;
}

std::uint64_t partition_hash(const std::vector<std::size_t>& partition) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t fold : partition) {
        const auto v = static_cast<std::uint64_t>(fold);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

AblationResult run_ablation(const DatasetViews& data, const PipelineConfig& pipeline1,
                            const gbdt::GbdtParams& params, std::size_t folds,
                            std::uint64_t seed) {
    AblationResult result;
    result.seed = seed;
    const auto partition = stratified_kfold(data.target, folds, seed);
    result.partition_hash = partition_hash(partition);

    Candidate c1{params, pipeline1};
    c1.pipeline.mode = PipelineMode::preprocessed;
    Candidate c2{params, pipeline1};
    c2.pipeline.mode = PipelineMode::raw;

    result.preprocessed = cross_validate(data, c1, partition, folds, seed);
    result.raw = cross_validate(data, c2, partition, folds, seed);

    std::vector<double> f1_a, f1_b;
    for (const auto& m : result.preprocessed.fold_metrics) f1_a.push_back(m.weighted_f1);
    for (const auto& m : result.raw.fold_metrics) f1_b.push_back(m.weighted_f1);
    result.f1_ttest = paired_t_test(f1_a, f1_b);
    return result;
}

}  // namespace mipred::eval
