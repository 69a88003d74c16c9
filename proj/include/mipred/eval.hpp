#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mipred/gbdt.hpp"
#include "mipred/metrics.hpp"
#include "mipred/preprocess.hpp"
#include "mipred/stats.hpp"
#include "mipred/table.hpp"

namespace mipred::eval {

using preprocess::PipelineConfig;
using preprocess::PipelineMode;
using tabular::BinaryTarget;
using tabular::Table;

// Stratified k-fold partition: fold id per row. Fold sizes differ by at most
// one and per-fold class counts stay within one of proportional.
std::vector<std::size_t> stratified_kfold(const BinaryTarget& target, std::size_t k,
                                          std::uint64_t seed);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample sd, n-1
};

struct CvResult {
    std::vector<MetricsReport> fold_metrics;
    MetricSummary f1, precision, recall, accuracy;  // weighted metrics + accuracy
    std::vector<std::size_t> partition;             // fold id per row
    std::uint64_t seed = 0;

    void summarize();  // fills the four summaries from fold_metrics
};

struct Candidate {
    gbdt::GbdtParams params;
    PipelineConfig pipeline;
};

struct GridSpec {
    std::vector<Candidate> candidates;
    std::size_t cv_folds = 5;
};

struct CandidateResult {
    Candidate candidate;
    CvResult cv;
    bool failed = false;
    std::string error;
};

struct GridSearchResult {
    std::size_t best_index = 0;
    std::vector<CandidateResult> results;
};

// Pre-derived views of one dataset so CV loops never refit the cleaning
// stage (cleaning precedes the split in the fixed operation order).
struct DatasetViews {
    Table cleaned;          // surviving features + target column
    FeatureMatrix raw;      // all input features, NaN for missing
    BinaryTarget target;
    preprocess::CleaningReport cleaning;

    static DatasetViews prepare(const Table& table, const std::string& target_column);
};

// Cross-validates one candidate on a fixed fold partition. Pipeline fitting
// happens inside each fold on the fold's training rows only.
CvResult cross_validate(const DatasetViews& data, const Candidate& candidate,
                        const std::vector<std::size_t>& partition, std::size_t k,
                        std::uint64_t seed);

// Mean-weighted-F1 argmax over the candidates on a shared fold partition.
// Failing candidates are recorded; the search fails only when all do.
GridSearchResult grid_search(const DatasetViews& data, const GridSpec& spec,
                             std::uint64_t seed);

struct AblationResult {
    CvResult preprocessed;  // Pipeline 1
    CvResult raw;           // Pipeline 2
    TTestResult f1_ttest;   // paired fold-wise weighted F1, pipeline1 vs pipeline2
    std::uint64_t seed = 0;
    std::uint64_t partition_hash = 0;
};

// The two pipelines on one shared fold partition plus the paired t-test on
// fold-wise weighted F1.
AblationResult run_ablation(const DatasetViews& data, const PipelineConfig& pipeline1,
                            const gbdt::GbdtParams& params, std::size_t folds,
                            std::uint64_t seed);

std::uint64_t partition_hash(const std::vector<std::size_t>& partition);

}  // namespace mipred::eval
