#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mipred/matrix.hpp"
#include "mipred/table.hpp"

namespace mipred::preprocess {

using tabular::BinaryTarget;
using tabular::Table;

struct CleaningReport {
    struct Drop {
        std::string name;
        double fraction = 0.0;  // missing fraction or dominance fraction
    };
    std::vector<Drop> dropped_missing;   // missing fraction > 0.10 (over all rows)
    std::vector<Drop> dropped_dominant;  // top value fraction > 0.95 (over non-missing)
    std::vector<std::string> surviving_features;
    // The source text is ambiguous about whether "instances with missing
    // values" counts rows or cells, so the report carries both.
    double missing_row_fraction = 0.0;
    double missing_cell_fraction = 0.0;
};

// Drops the id column and every target column except `target_column`, then
// drops features with missing fraction strictly > 0.10 (denominator: all
// rows) and features whose most frequent non-missing value covers strictly
// > 0.95 of non-missing cells. Returns the cleaned table (surviving features
// plus the kept target) and the report.
std::pair<Table, CleaningReport> clean(const Table& table, const std::string& target_column);

// Keeps all minority rows and uniformly samples floor(n_min / alpha) majority
// rows without replacement; a no-op when the majority is already at or below
// that size. `rows` index into `target`. Deterministic per seed.
std::vector<std::size_t> random_undersample(const std::vector<std::size_t>& rows,
                                            const BinaryTarget& target, double alpha,
                                            std::uint64_t seed);

enum class PipelineMode { preprocessed, raw };

struct PipelineConfig {
    PipelineMode mode = PipelineMode::preprocessed;
    double alpha = 0.5;  // undersampling ratio n_min / n_maj
    std::size_t k = 50;  // chi2-selected feature count
    std::uint64_t seed = 0;
};

// Everything fitted on training rows; immutable once fitted.
struct PipelineFitState {
    PipelineMode mode = PipelineMode::preprocessed;
    double alpha = 0.5;
    std::size_t k = 0;
    std::uint64_t seed = 0;

    struct ColumnCodec {
        tabular::ColumnKind kind = tabular::ColumnKind::numeric;
        std::vector<std::string> categories;  // nominal: sorted seen categories;
                                              // ordinal: schema order
        double impute_value = 0.0;            // encoded-space median or mode
    };
    // Keyed by source column name, iterated in source column order.
    std::vector<std::string> source_columns;
    std::map<std::string, ColumnCodec> codecs;

    std::vector<std::string> encoded_names;           // post-encoding column names
    std::vector<std::pair<double, double>> min_max;   // per encoded column
    std::vector<double> chi2;                         // per encoded column
    std::vector<std::size_t> selected;                // encoded column indices, ascending
    std::vector<std::string> selected_names;

    std::string to_json() const;
    static PipelineFitState from_json(const std::string& text);
};

struct FitResult {
    FeatureMatrix matrix;                  // rows = sampled_rows
    std::vector<std::size_t> sampled_rows; // indices into the fitted table
    PipelineFitState state;
};

// Pipeline 1 fit: undersample -> encode (nominal one-hot, ordinal rank,
// numeric/binary passthrough) -> impute (median / mode) -> min-max normalize
// to [0,1] -> chi2 top-k. The result matrix is dense.
// Requires config.mode == preprocessed and a cleaned input table.
FitResult fit_transform(const Table& train, const BinaryTarget& target,
                        const PipelineConfig& config);

// Applies a fitted state to new rows: stored encoders, imputers, normalizer,
// selector; never recomputes statistics, never undersamples, never clamps.
// Unseen nominal categories encode as an all-zero indicator block.
FeatureMatrix transform(const Table& table, const PipelineFitState& state);

// Pipeline 2: the raw numeric view. Numeric/binary parse, ordinal ranks,
// missing stays NaN. Nominal columns have no fit-free numeric form and are
// rejected.
FeatureMatrix raw_matrix(const Table& table);

// Identity state for the raw pipeline (no fitted statistics).
PipelineFitState raw_state(const PipelineConfig& config);

// chi2 statistic between each non-negative feature column and the binary
// target: per class, observed = sum of the feature over that class, expected
// = total * class share; score = sum (o-e)^2/e, 0 for an all-zero feature.
std::vector<double> chi2_scores(const FeatureMatrix& features, const BinaryTarget& target);

std::string cleaning_report_to_json(const CleaningReport& report);

}  // namespace mipred::preprocess
