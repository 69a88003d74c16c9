#include "mipred/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "mipred/error.hpp"

namespace mipred::explain {

using gbdt::Forest;
using gbdt::Tree;
using gbdt::TreeNode;

namespace {

// One element of the active split path in the Shapley recursion.
struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;  // cover share reaching here when excluded
    double one_fraction = 0.0;   // 1 when the instance follows this path
    double pweight = 0.0;        // accumulated subset-permutation weight
};

using Path = std::vector<PathElement>;

void extend(Path& path, double zero_fraction, double one_fraction, int feature) {
    const std::size_t depth = path.size();
    path.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
    for (std::size_t i = depth; i-- > 0;) {
        path[i + 1].pweight += one_fraction * path[i].pweight * static_cast<double>(i + 1) /
                               static_cast<double>(depth + 1);
        path[i].pweight = zero_fraction * path[i].pweight * static_cast<double>(depth - i) /
                          static_cast<double>(depth + 1);
    }
}

void unwind(Path& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double carry = path[depth].pweight;
    for (std::size_t j = depth; j-- > 0;) {
        if (one_fraction != 0.0) {
            const double tmp = path[j].pweight;
            path[j].pweight = carry * static_cast<double>(depth + 1) /
                              (static_cast<double>(j + 1) * one_fraction);
            carry = tmp - path[j].pweight * zero_fraction * static_cast<double>(depth - j) /
                              static_cast<double>(depth + 1);
        } else {
            path[j].pweight = path[j].pweight * static_cast<double>(depth + 1) /
                              (zero_fraction * static_cast<double>(depth - j));
        }
    }
    for (std::size_t j = index; j < depth; ++j) {
        path[j].feature = path[j + 1].feature;
        path[j].zero_fraction = path[j + 1].zero_fraction;
        path[j].one_fraction = path[j + 1].one_fraction;
    }
    path.pop_back();
}

double unwound_sum(const Path& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double total = 0.0;
    if (one_fraction != 0.0) {
        double carry = path[depth].pweight;
        for (std::size_t j = depth; j-- > 0;) {
            const double tmp = carry / (static_cast<double>(j + 1) * one_fraction);
            total += tmp;
            carry = path[j].pweight - tmp * zero_fraction * static_cast<double>(depth - j);
        }
    } else {
        for (std::size_t j = depth; j-- > 0;) {
            total += path[j].pweight / (zero_fraction * static_cast<double>(depth - j));
        }
    }
    return total * static_cast<double>(depth + 1);
}

// Which child the instance follows at a split; missing takes the default.
int hot_child(const TreeNode& node, const double* row) {
    const double v = row[node.feature];
    if (std::isnan(v)) return node.default_left ? node.left : node.right;
    return v <= node.threshold ? node.left : node.right;
}

void shap_recurse(const Tree& tree, std::size_t node_index, const double* row, Path path,
                  double zero_fraction, double one_fraction, int parent_feature,
                  std::vector<double>& phi) {
    extend(path, zero_fraction, one_fraction, parent_feature);
    const TreeNode& node = tree.nodes[node_index];

    if (node.is_leaf) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            const double w = unwound_sum(path, i);
            phi[path[i].feature] +=
                w * (path[i].one_fraction - path[i].zero_fraction) * node.value;
        }
        return;
    }

    const int hot = hot_child(node, row);
    const int cold = hot == node.left ? node.right : node.left;
    const double cover = node.cover;
    const double hot_cover = tree.nodes[hot].cover;
    const double cold_cover = tree.nodes[cold].cover;

    // A repeat split on a feature already on the path: undo its extension and
    // carry its fractions into the children.
    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        if (path[k].feature == node.feature) {
            incoming_zero = path[k].zero_fraction;
            incoming_one = path[k].one_fraction;
            unwind(path, k);
            break;
        }
    }

    shap_recurse(tree, static_cast<std::size_t>(hot), row, path,
                 incoming_zero * hot_cover / cover, incoming_one, node.feature, phi);
    shap_recurse(tree, static_cast<std::size_t>(cold), row, path,
                 incoming_zero * cold_cover / cover, 0.0, node.feature, phi);
}

double tree_expectation(const Tree& tree, std::size_t node_index) {
    const TreeNode& node = tree.nodes[node_index];
    if (node.is_leaf) return node.value;
    const double wl = tree.nodes[node.left].cover / node.cover;
    const double wr = tree.nodes[node.right].cover / node.cover;
    return wl * tree_expectation(tree, node.left) + wr * tree_expectation(tree, node.right);
}

}  // namespace

ShapMatrix tree_shap(const Forest& model, const FeatureMatrix& features) {
    if (features.n_cols != model.feature_names.size())
        throw SchemaError("feature matrix does not match the model's feature count");
    for (const Tree& tree : model.trees)
        if (tree.nodes[0].cover <= 0.0)
            throw DataError("model has a tree with zero cover at the root");

    ShapMatrix shap;
    shap.feature_names = model.feature_names;
    shap.n_rows = features.n_rows;
    shap.n_cols = features.n_cols;
    shap.values.assign(features.n_rows * features.n_cols, 0.0);
    shap.base_value = model.base_score;
    for (const Tree& tree : model.trees) shap.base_value += tree_expectation(tree, 0);

    std::vector<double> phi(features.n_cols);
    for (std::size_t r = 0; r < features.n_rows; ++r) {
        std::fill(phi.begin(), phi.end(), 0.0);
        const double* row = features.row(r);
        for (const Tree& tree : model.trees)
            shap_recurse(tree, 0, row, Path{}, 1.0, 1.0, -1, phi);
        for (std::size_t c = 0; c < features.n_cols; ++c) shap.at(r, c) = phi[c];
    }
    return shap;
}

double conditional_expectation(const gbdt::Forest& model, const double* row,
                               const std::vector<bool>& in_set) {
    double total = model.base_score;
    for (const Tree& tree : model.trees) {
        // v(S) per tree by direct recursion.
        auto rec = [&](auto&& self, std::size_t i) -> double {
            const TreeNode& node = tree.nodes[i];
            if (node.is_leaf) return node.value;
            if (in_set[static_cast<std::size_t>(node.feature)])
                return self(self, static_cast<std::size_t>(hot_child(node, row)));
            const double wl = tree.nodes[node.left].cover / node.cover;
            const double wr = tree.nodes[node.right].cover / node.cover;
            return wl * self(self, static_cast<std::size_t>(node.left)) +
                   wr * self(self, static_cast<std::size_t>(node.right));
        };
        total += rec(rec, 0);
    }
    return total;
}

std::vector<double> brute_force_shap(const Forest& model, const double* row,
                                     std::size_t n_features) {
    std::set<int> used;
    for (const Tree& tree : model.trees)
        for (const TreeNode& node : tree.nodes)
            if (!node.is_leaf) used.insert(node.feature);
    const std::vector<int> players(used.begin(), used.end());
    const std::size_t f_count = players.size();
    if (f_count > 20)
        throw CapacityError("brute-force Shapley enumeration is capped at 20 features, model uses " +
                            std::to_string(f_count));

    std::vector<double> phi(n_features, 0.0);
    if (f_count == 0) return phi;

    // Pascal triangle keeps the subset weights exact in double precision.
    std::vector<std::vector<double>> binom(f_count, std::vector<double>(f_count, 0.0));
    for (std::size_t i = 0; i < f_count; ++i) {
        binom[i][0] = 1.0;
        for (std::size_t j = 1; j <= i; ++j)
            binom[i][j] = (j ? binom[i - 1][j - 1] : 0.0) + (j <= i - 1 ? binom[i - 1][j] : 0.0);
    }

    std::vector<bool> in_set(n_features, false);
    const std::size_t n_subsets = std::size_t{1} << f_count;
    std::vector<double> value_of(n_subsets);
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
        std::fill(in_set.begin(), in_set.end(), false);
        for (std::size_t b = 0; b < f_count; ++b)
            if (mask & (std::size_t{1} << b)) in_set[static_cast<std::size_t>(players[b])] = true;
        value_of[mask] = conditional_expectation(model, row, in_set);
    }

    for (std::size_t b = 0; b < f_count; ++b) {
        const std::size_t bit = std::size_t{1} << b;
        double contribution = 0.0;
        for (std::size_t mask = 0; mask < n_subsets; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            // weight = |S|! (F-|S|-1)! / F! = 1 / (F * C(F-1, |S|))
            const double weight = 1.0 / (static_cast<double>(f_count) * binom[f_count - 1][s]);
            contribution += weight * (value_of[mask | bit] - value_of[mask]);
        }
        phi[static_cast<std::size_t>(players[b])] = contribution;
    }
    return phi;
}

GlobalImportance global_importance(const ShapMatrix& shap) {
    if (shap.n_rows == 0) throw DataError("global importance needs at least one explained row");
    std::vector<double> mean_abs(shap.n_cols, 0.0);
    for (std::size_t r = 0; r < shap.n_rows; ++r)
        for (std::size_t c = 0; c < shap.n_cols; ++c) mean_abs[c] += std::abs(shap.at(r, c));
    for (double& v : mean_abs) v /= static_cast<double>(shap.n_rows);

    std::vector<std::size_t> order(shap.n_cols);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mean_abs[a] != mean_abs[b]) return mean_abs[a] > mean_abs[b];
        return shap.feature_names[a] < shap.feature_names[b];
    });

    GlobalImportance importance;
    for (std::size_t c : order) {
        importance.ranking.push_back(shap.feature_names[c]);
        importance.mean_abs_shap.push_back(mean_abs[c]);
    }
    return importance;
}

std::string ShapMatrix::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.shap";
    j["base_value"] = base_value;
    j["feature_names"] = feature_names;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < n_rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < n_cols; ++c) row.push_back(at(r, c));
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

void ShapMatrix::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c) out << ',';
        out << feature_names[c];
    }
    out << '\n';
    out.precision(17);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c) out << ',';
            out << at(r, c);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace mipred::explain
