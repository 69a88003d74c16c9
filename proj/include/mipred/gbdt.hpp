#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mipred/matrix.hpp"
#include "mipred/table.hpp"

namespace mipred::gbdt {

struct GbdtParams {
    std::size_t n_trees = 300;
    double learning_rate = 0.1;
    std::size_t max_leaves = 31;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_leaf = 20;
    double min_hessian_leaf = 1e-3;
    double lambda_l2 = 1.0;  // leaf value regularizer
    double gamma = 0.0;      // per-split gain penalty
    std::size_t max_bins = 255;
    std::uint64_t seed = 0;

    void validate() const;  // throws ParamError
};

// Flat tree node; nodes are stored in preorder with explicit child indices.
struct TreeNode {
    bool is_leaf = true;
    double value = 0.0;        // leaf margin contribution (learning rate applied)
    double cover = 0.0;        // hessian sum of training rows reaching the node
    int feature = -1;          // split feature (split nodes)
    double threshold = 0.0;    // x <= threshold goes left
    bool default_left = true;  // where missing values go
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const double* row) const;
};

struct Forest {
    double base_score = 0.0;  // initial log-odds
    std::vector<std::string> feature_names;
    GbdtParams params;
    std::vector<Tree> trees;

    std::string to_json() const;
    static Forest from_json(const std::string& text);
    void save(const std::string& path) const;
    static Forest load(const std::string& path);
};

// Second-order terms of the logistic loss at one row. The hessian is floored
// at 1e-16 so leaf values stay finite.
std::pair<double, double> logistic_grad_hess(double margin, int label);

// Numerically safe sigmoid: the margin is clamped to +-700 before exp and the
// result nudged off exactly 1 so probabilities stay inside (0,1).
double sigmoid(double margin);

// Stable binary log-loss for a raw margin.
double logistic_loss(double margin, int label);

// Trains a boosted ensemble by leaf-wise growth with histogram split finding.
// Missing cells (NaN) get a learned default direction per split. Deterministic
// for fixed inputs and params.
Forest fit(const FeatureMatrix& features, const tabular::BinaryTarget& target,
           const GbdtParams& params);

std::vector<double> predict_margin(const Forest& model, const FeatureMatrix& features);
std::vector<double> predict_proba(const Forest& model, const FeatureMatrix& features);
std::vector<int> predict_label(const Forest& model, const FeatureMatrix& features);

}  // namespace mipred::gbdt
