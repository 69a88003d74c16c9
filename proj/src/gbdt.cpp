#include "mipred/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mipred/error.hpp"
#include "mipred/histogram.hpp"

namespace mipred::gbdt {

void GbdtParams::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ParamError("learning_rate must lie in (0,1]");
    if (max_leaves < 2) throw ParamError("max_leaves must be at least 2");
    if (min_samples_leaf < 1) throw ParamError("min_samples_leaf must be at least 1");
    if (min_hessian_leaf < 0.0) throw ParamError("min_hessian_leaf must be non-negative");
    if (lambda_l2 < 0.0) throw ParamError("lambda_l2 must be non-negative");
    if (gamma < 0.0) throw ParamError("gamma must be non-negative");
    if (max_bins < 2 || max_bins > 256) throw ParamError("max_bins must lie in [2, 256]");
}

std::pair<double, double> logistic_grad_hess(double margin, int label) {
    const double m = std::clamp(margin, -700.0, 700.0);
    const double p = 1.0 / (1.0 + std::exp(-m));
    const double hess = std::max(p * (1.0 - p), 1e-16);
    return {p - static_cast<double>(label), hess};
}

double sigmoid(double margin) {
    const double m = std::clamp(margin, -700.0, 700.0);
    double p = 1.0 / (1.0 + std::exp(-m));
    if (p >= 1.0) p = std::nextafter(1.0, 0.0);
    return p;
}

double logistic_loss(double margin, int label) {
    // log(1 + exp(-m)) + (1-y) m, evaluated without overflow.
    const double m = margin;
    const double softplus_neg = m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    return softplus_neg + (1 - label) * m;
}

double Tree::predict(const double* row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf) {
        const TreeNode& node = nodes[i];
        const double v = row[node.feature];
        if (std::isnan(v))
            i = node.default_left ? node.left : node.right;
        else
            i = v <= node.threshold ? node.left : node.right;
    }
    return nodes[i].value;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SplitCandidate {
    bool valid = false;
    double gain = kNegInf;
    std::size_t feature = 0;
    std::size_t boundary = 0;  // left takes finite bins [0..boundary]
    double threshold = 0.0;
    bool missing_left = true;
    double grad_left = 0.0, hess_left = 0.0;
    std::int64_t count_left = 0;
};

struct LeafState {
    int node = -1;
    std::size_t seq = 0;  // creation order, used for deterministic tie-breaks
    std::size_t depth = 0;
    std::vector<std::size_t> rows;
    double grad_sum = 0.0, hess_sum = 0.0;
    std::vector<FeatureHistogram> hist;
    SplitCandidate best;
};

double leaf_objective(double grad, double hess, double lambda) {
    return grad * grad / (hess + lambda);
}

// Best split for one leaf: every finite bin boundary of every feature, with
// the missing bin tried on both sides when the leaf has missing rows.
SplitCandidate find_best_split(const LeafState& leaf, const BinMapper& mapper,
                               const GbdtParams& params) {
    SplitCandidate best;
    const double lambda = params.lambda_l2;
    const double parent_objective = leaf_objective(leaf.grad_sum, leaf.hess_sum, lambda);
    const auto count_total = static_cast<std::int64_t>(leaf.rows.size());

    for (std::size_t f = 0; f < mapper.n_features(); ++f) {
        const auto& hist = leaf.hist[f];
        const std::size_t n_finite = mapper.edges[f].size() + 1;
        if (n_finite < 2) continue;
        const BinStats& miss = hist[n_finite];

        double grad_acc = 0.0, hess_acc = 0.0;
        std::int64_t count_acc = 0;
        for (std::size_t b = 0; b + 1 < n_finite; ++b) {
            grad_acc += hist[b].grad;
            hess_acc += hist[b].hess;
            count_acc += hist[b].count;

            const int placements = miss.count > 0 ? 2 : 1;
            for (int p = 0; p < placements; ++p) {
                const bool missing_left = p == 0;
                double gl = grad_acc, hl = hess_acc;
                std::int64_t cl = count_acc;
                if (missing_left) {
                    gl += miss.grad;
                    hl += miss.hess;
                    cl += miss.count;
                }
                const double gr = leaf.grad_sum - gl;
                const double hr = leaf.hess_sum - hl;
                const std::int64_t cr = count_total - cl;
                if (cl < static_cast<std::int64_t>(params.min_samples_leaf) ||
                    cr < static_cast<std::int64_t>(params.min_samples_leaf))
                    continue;
                if (hl < params.min_hessian_leaf || hr < params.min_hessian_leaf) continue;
                const double gain = 0.5 * (leaf_objective(gl, hl, lambda) +
                                           leaf_objective(gr, hr, lambda) - parent_objective) -
                                    params.gamma;
                if (gain > best.gain) {
                    best.valid = true;
                    best.gain = gain;
                    best.feature = f;
                    best.boundary = b;
                    best.threshold = mapper.edges[f][b];
                    best.grad_left = gl;
                    best.hess_left = hl;
                    best.count_left = cl;
                    if (miss.count > 0) {
                        best.missing_left = missing_left;
                    } else {
                        // No missing rows observed here: route unseen missing
                        // values toward the child with the larger cover.
                        best.missing_left = hl >= hr;
                    }
                }
            }
        }
    }
    if (best.valid && !(best.gain > 0.0)) best.valid = false;
    return best;
}

struct BuildNode {
    bool is_leaf = true;
    double value = 0.0;
    double cover = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    int left = -1, right = -1;
};

// Re-index into preorder so the in-memory layout matches the file layout.
Tree to_preorder(const std::vector<BuildNode>& nodes) {
    Tree tree;
    tree.nodes.reserve(nodes.size());
    std::vector<int> stack = {0};
    std::vector<int> remap(nodes.size(), -1);
    // First pass: preorder positions.
    std::vector<int> order;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        remap[i] = static_cast<int>(order.size());
        order.push_back(i);
        if (!nodes[i].is_leaf) {
            stack.push_back(nodes[i].right);  // right pushed first so left pops first
            stack.push_back(nodes[i].left);
        }
    }
    for (int i : order) {
        const BuildNode& b = nodes[i];
        TreeNode node;
        node.is_leaf = b.is_leaf;
        node.value = b.value;
        node.cover = b.cover;
        node.feature = b.feature;
        node.threshold = b.threshold;
        node.default_left = b.default_left;
        node.left = b.is_leaf ? -1 : remap[b.left];
        node.right = b.is_leaf ? -1 : remap[b.right];
        tree.nodes.push_back(node);
    }
    return tree;
}

}  // namespace

Forest fit(const FeatureMatrix& features, const tabular::BinaryTarget& target,
           const GbdtParams& params) {
    params.validate();
    if (features.n_cols == 0) throw DataError("training requires at least one feature");
    if (features.n_rows != target.values.size())
        throw DataError("target length does not match feature rows");
    const std::size_t n = features.n_rows;
    const std::size_t n_pos = target.count_positive();
    if (n_pos == 0 || n_pos == n)
        throw DataError("training requires both classes in the target");

    Forest forest;
    forest.params = params;
    forest.feature_names = features.names;

    const double p_mean =
        std::clamp(static_cast<double>(n_pos) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    forest.base_score = std::log(p_mean / (1.0 - p_mean));

    if (params.n_trees == 0) return forest;

    const BinMapper mapper = BinMapper::fit(features, params.max_bins);
    const BinnedMatrix binned = BinnedMatrix::from(features, mapper);

    std::vector<double> margin(n, forest.base_score);
    std::vector<double> grad(n), hess(n);

    for (std::size_t round = 0; round < params.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [g, h] = logistic_grad_hess(margin[i], target.values[i]);
            grad[i] = g;
            hess[i] = h;
        }

        std::vector<BuildNode> nodes(1);
        std::vector<LeafState> leaves(1);
        LeafState& root = leaves[0];
        root.node = 0;
        root.seq = 0;
        root.rows.resize(n);
        for (std::size_t i = 0; i < n; ++i) root.rows[i] = i;
        for (std::size_t i = 0; i < n; ++i) {
            root.grad_sum += grad[i];
            root.hess_sum += hess[i];
        }
        nodes[0].cover = root.hess_sum;
        root.hist.resize(features.n_cols);
        for (std::size_t f = 0; f < features.n_cols; ++f)
            root.hist[f] = build_histogram(binned, f, mapper.n_bins(f), root.rows, grad, hess);
        root.best = find_best_split(root, mapper, params);
        std::size_t next_seq = 1;

        while (leaves.size() < params.max_leaves) {
            // Leaf with the largest positive gain; ties go to the oldest leaf.
            int pick = -1;
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (!leaves[i].best.valid) continue;
                if (pick < 0 || leaves[i].best.gain > leaves[pick].best.gain ||
                    (leaves[i].best.gain == leaves[pick].best.gain &&
                     leaves[i].seq < leaves[static_cast<std::size_t>(pick)].seq))
                    pick = static_cast<int>(i);
            }
            if (pick < 0) break;

            LeafState leaf = std::move(leaves[pick]);
            leaves.erase(leaves.begin() + pick);
            const SplitCandidate& split = leaf.best;

            LeafState left, right;
            left.depth = right.depth = leaf.depth + 1;
            left.seq = next_seq++;
            right.seq = next_seq++;
            const std::size_t missing_code = mapper.missing_bin(split.feature);
            for (std::size_t row : leaf.rows) {
                const std::uint16_t code = binned.at(row, split.feature);
                const bool go_left = code == missing_code
                                         ? split.missing_left
                                         : code <= split.boundary;
                (go_left ? left.rows : right.rows).push_back(row);
            }
            left.grad_sum = split.grad_left;
            left.hess_sum = split.hess_left;
            right.grad_sum = leaf.grad_sum - split.grad_left;
            right.hess_sum = leaf.hess_sum - split.hess_left;

            left.node = static_cast<int>(nodes.size());
            nodes.emplace_back();
            right.node = static_cast<int>(nodes.size());
            nodes.emplace_back();
            BuildNode& parent = nodes[leaf.node];
            parent.is_leaf = false;
            parent.feature = static_cast<int>(split.feature);
            parent.threshold = split.threshold;
            parent.default_left = split.missing_left;
            parent.left = left.node;
            parent.right = right.node;
            nodes[left.node].cover = left.hess_sum;
            nodes[right.node].cover = right.hess_sum;

            // Histograms: build the smaller child directly, derive the other
            // from the parent by subtraction.
            const bool left_smaller = left.rows.size() <= right.rows.size();
            LeafState& small = left_smaller ? left : right;
            LeafState& large = left_smaller ? right : left;
            small.hist.resize(features.n_cols);
            large.hist.resize(features.n_cols);
            for (std::size_t f = 0; f < features.n_cols; ++f) {
                small.hist[f] =
                    build_histogram(binned, f, mapper.n_bins(f), small.rows, grad, hess);
                large.hist[f] = subtract_histogram(leaf.hist[f], small.hist[f]);
            }
            leaf.hist.clear();

            const bool depth_open =
                params.max_depth == 0 || left.depth < params.max_depth;
            if (depth_open) {
                left.best = find_best_split(left, mapper, params);
                right.best = find_best_split(right, mapper, params);
            }
            leaves.push_back(std::move(left));
            leaves.push_back(std::move(right));
        }

        for (const LeafState& leaf : leaves) {
            const double value =
                -params.learning_rate * leaf.grad_sum / (leaf.hess_sum + params.lambda_l2);
            nodes[leaf.node].is_leaf = true;
            nodes[leaf.node].value = value;
            for (std::size_t row : leaf.rows) margin[row] += value;
        }
        // Children were carved out of the parent by subtraction, which costs
        // an ulp; restating each split cover as the sum of its children keeps
        // cover conservation exact. Children always follow their parent in
        // creation order, so one reverse pass suffices.
        for (std::size_t i = nodes.size(); i-- > 0;)
            if (!nodes[i].is_leaf)
                nodes[i].cover = nodes[nodes[i].left].cover + nodes[nodes[i].right].cover;
        forest.trees.push_back(to_preorder(nodes));
    }
    return forest;
}

std::vector<double> predict_margin(const Forest& model, const FeatureMatrix& features) {
    if (features.n_cols != model.feature_names.size())
        throw SchemaError("feature matrix has " + std::to_string(features.n_cols) +
                          " columns, model expects " +
                          std::to_string(model.feature_names.size()));
    std::vector<double> margins(features.n_rows, model.base_score);
    for (std::size_t r = 0; r < features.n_rows; ++r) {
        const double* row = features.row(r);
        for (const Tree& tree : model.trees) margins[r] += tree.predict(row);
    }
    return margins;
}

std::vector<double> predict_proba(const Forest& model, const FeatureMatrix& features) {
    auto margins = predict_margin(model, features);
    for (double& m : margins) m = sigmoid(m);
    return margins;
}

std::vector<int> predict_label(const Forest& model, const FeatureMatrix& features) {
    const auto probas = predict_proba(model, features);
    std::vector<int> labels(probas.size());
    for (std::size_t i = 0; i < probas.size(); ++i) labels[i] = probas[i] >= 0.5 ? 1 : 0;
    return labels;
}

// ---------------------------------------------------------------------------
// Serialization (format documented in docs/FORMATS.md)

namespace {

using nlohmann::json;
constexpr int kForestFormatVersion = 1;

json params_to_json(const GbdtParams& p) {
    json j;
    j["n_trees"] = p.n_trees;
    j["learning_rate"] = p.learning_rate;
    j["max_leaves"] = p.max_leaves;
    j["max_depth"] = p.max_depth;
    j["min_samples_leaf"] = p.min_samples_leaf;
    j["min_hessian_leaf"] = p.min_hessian_leaf;
    j["lambda_l2"] = p.lambda_l2;
    j["gamma"] = p.gamma;
    j["max_bins"] = p.max_bins;
    j["seed"] = p.seed;
    return j;
}

GbdtParams params_from_json(const json& j) {
    GbdtParams p;
    p.n_trees = j.at("n_trees").get<std::size_t>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.max_leaves = j.at("max_leaves").get<std::size_t>();
    p.max_depth = j.at("max_depth").get<std::size_t>();
    p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    p.min_hessian_leaf = j.at("min_hessian_leaf").get<double>();
    p.lambda_l2 = j.at("lambda_l2").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.max_bins = j.at("max_bins").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

}  // namespace

std::string Forest::to_json() const {
    json j;
    j["format_version"] = kForestFormatVersion;
    j["kind"] = "mipred.forest";
    j["base_score"] = base_score;
    j["feature_names"] = feature_names;
    j["params"] = params_to_json(params);
    json trees_json = json::array();
    for (const Tree& tree : trees) {
        json nodes_json = json::array();
        for (const TreeNode& node : tree.nodes) {
            json nj;
            nj["cover"] = node.cover;
            if (node.is_leaf) {
                nj["value"] = node.value;
            } else {
                nj["feature"] = node.feature;
                nj["threshold"] = node.threshold;
                nj["default_left"] = node.default_left;
                nj["left"] = node.left;
                nj["right"] = node.right;
            }
            nodes_json.push_back(nj);
        }
        trees_json.push_back({{"nodes", nodes_json}});
    }
    j["trees"] = trees_json;
    return j.dump(2) + "\n";
}

Forest Forest::from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.contains("format_version") || j["format_version"].get<int>() != kForestFormatVersion)
        throw DataError("unsupported forest format version");
    Forest forest;
    forest.base_score = j.at("base_score").get<double>();
    forest.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    forest.params = params_from_json(j.at("params"));
    for (const auto& tj : j.at("trees")) {
        Tree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode node;
            node.cover = nj.at("cover").get<double>();
            if (nj.contains("feature")) {
                node.is_leaf = false;
                node.feature = nj.at("feature").get<int>();
                node.threshold = nj.at("threshold").get<double>();
                node.default_left = nj.at("default_left").get<bool>();
                node.left = nj.at("left").get<int>();
                node.right = nj.at("right").get<int>();
            } else {
                node.is_leaf = true;
                node.value = nj.at("value").get<double>();
            }
            tree.nodes.push_back(node);
        }
        if (tree.nodes.empty()) throw DataError("forest tree has no nodes");
        for (const TreeNode& node : tree.nodes)
            if (!node.is_leaf &&
                (node.left < 0 || node.right < 0 ||
                 node.left >= static_cast<int>(tree.nodes.size()) ||
                 node.right >= static_cast<int>(tree.nodes.size())))
                throw DataError("forest node child index out of range");
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

void Forest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    out << to_json();
    if (!out) throw IoError("failed writing model file '" + path + "'");
}

Forest Forest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

}  // namespace mipred::gbdt
