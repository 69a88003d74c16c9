#include <doctest.h>

#include <cmath>
#include <random>

#include "mipred/beeswarm.hpp"
#include "mipred/error.hpp"
#include "mipred/explain.hpp"
#include "mipred/gbdt.hpp"
#include "test_support.hpp"

using namespace mipred;
using namespace mipred::explain;
using gbdt::Forest;
using gbdt::Tree;
using gbdt::TreeNode;

namespace {

Forest single_leaf_forest(double value, double base) {
    Forest forest;
    forest.base_score = base;
    forest.feature_names = {"f0", "f1"};
    Tree tree;
    tree.nodes.push_back({true, value, 10.0, -1, 0.0, true, -1, -1});
    forest.trees.push_back(tree);
    return forest;
}

// Depth-1 stump on feature 0: cover shares w_l + w_r = 1.
Forest stump(double w_left, double a, double b, std::size_t n_features = 2) {
    Forest forest;
    forest.base_score = 0.0;
    for (std::size_t f = 0; f < n_features; ++f)
        forest.feature_names.push_back("f" + std::to_string(f));
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0] = {false, 0.0, 1.0, 0, 0.5, true, 1, 2};
    tree.nodes[1] = {true, a, w_left, -1, 0.0, true, -1, -1};
    tree.nodes[2] = {true, b, 1.0 - w_left, -1, 0.0, true, -1, -1};
    forest.trees.push_back(tree);
    return forest;
}

FeatureMatrix one_row(std::vector<double> values) {
    FeatureMatrix m(1, values.size());
    for (std::size_t c = 0; c < values.size(); ++c) {
        m.names.push_back("f" + std::to_string(c));
        m.at(0, c) = values[c];
    }
    return m;
}

}  // namespace

TEST_CASE("single-leaf tree: zero attributions, base absorbs everything") {
    const auto forest = single_leaf_forest(1.7, 0.3);
    const auto x = one_row({0.1, 0.2});
    const auto shap = tree_shap(forest, x);
    CHECK(shap.base_value == doctest::Approx(2.0));
    CHECK(shap.at(0, 0) == 0.0);
    CHECK(shap.at(0, 1) == 0.0);

    const auto brute = brute_force_shap(forest, x.row(0), 2);
    CHECK(brute[0] == 0.0);
    CHECK(brute[1] == 0.0);
}

TEST_CASE("depth-1 stump matches the one-feature Shapley closed form") {
    // Instance routed left: phi_f = w_r * (a - b), base = w_l a + w_r b.
    const double w_l = 0.3, a = 2.0, b = -1.0;
    const auto forest = stump(w_l, a, b);
    const auto x = one_row({0.2, 9.9});
    const auto shap = tree_shap(forest, x);
    CHECK(shap.base_value == doctest::Approx(w_l * a + (1 - w_l) * b));
    CHECK(shap.at(0, 0) == doctest::Approx((1 - w_l) * (a - b)));
    CHECK(shap.at(0, 1) == 0.0);
    // Local accuracy: base + contributions = margin (= a here).
    CHECK(shap.base_value + shap.at(0, 0) + shap.at(0, 1) == doctest::Approx(a));
}

TEST_CASE("hand-enumerated depth-2 tree with two features") {
    // Root splits f0 at .5 (left cover .6); left child splits f1 at .5
    // (left cover .4 of total). Leaves: ll=4, lr=1, r=-2.
    Forest forest;
    forest.base_score = 0.0;
    forest.feature_names = {"f0", "f1"};
    Tree tree;
    tree.nodes.resize(5);
    tree.nodes[0] = {false, 0.0, 1.0, 0, 0.5, true, 1, 2};
    tree.nodes[1] = {false, 0.0, 0.6, 1, 0.5, true, 3, 4};
    tree.nodes[2] = {true, -2.0, 0.4, -1, 0.0, true, -1, -1};
    tree.nodes[3] = {true, 4.0, 0.4, -1, 0.0, true, -1, -1};
    tree.nodes[4] = {true, 1.0, 0.2, -1, 0.0, true, -1, -1};
    forest.trees.push_back(tree);

    // Instance (0.2, 0.2): follows left, left -> leaf value 4.
    // v({})      = .4*4 + .2*1 + .4*(-2) = 1.0
    // v({0})     = .6 going left, then f1 unknown: (.4*4+.2*1)/.6 = 3
    // v({1})     = .6*(left with f1 known: 4) + .4*(-2) = 1.6
    // v({0,1})   = 4
    // phi_0 = 1/2[v({0})-v({})] + 1/2[v({0,1})-v({1})] = 1.0 + 1.2 = 2.2
    // phi_1 = 1/2[v({1})-v({})] + 1/2[v({0,1})-v({0})] = 0.3 + 0.5 = 0.8
    const auto x = one_row({0.2, 0.2});
    const auto shap = tree_shap(forest, x);
    CHECK(shap.base_value == doctest::Approx(1.0));
    CHECK(shap.at(0, 0) == doctest::Approx(2.2));
    CHECK(shap.at(0, 1) == doctest::Approx(0.8));

    const auto brute = brute_force_shap(forest, x.row(0), 2);
    CHECK(brute[0] == doctest::Approx(2.2));
    CHECK(brute[1] == doctest::Approx(0.8));
}

TEST_CASE("brute force efficiency axiom on random forests") {
    for (std::uint32_t seed = 0; seed < 25; ++seed) {
        const auto forest = testsupport::random_forest(
            seed, {.n_trees = 2, .max_depth = 3, .n_features = 5, .p_leaf = 0.25});
        const auto x = testsupport::random_instances(seed + 1000, 1, 5, 0.2);
        const auto phi = brute_force_shap(forest, x.row(0), 5);
        const double margin = testsupport::naive_margin(forest, x.row(0));
        std::vector<bool> empty(5, false);
        const double v_empty = conditional_expectation(forest, x.row(0), empty);
        double total = 0.0;
        for (double p : phi) total += p;
        CHECK(total == doctest::Approx(margin - v_empty).epsilon(1e-10));
    }
}

TEST_CASE("tree_shap equals subset enumeration on random forests") {
    // The paper-scale oracle: 100 random small forests, every attribution
    // within 1e-8 of the exact Shapley enumeration.
    double worst = 0.0;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        testsupport::RandomForestSpec spec;
        spec.n_trees = 1 + seed % 3;
        spec.max_depth = 3;
        spec.n_features = 2 + seed % 7;  // up to 8
        const auto forest = testsupport::random_forest(seed, spec);
        const auto x = testsupport::random_instances(seed + 9000, 3, spec.n_features, 0.2);
        const auto shap = tree_shap(forest, x);
        for (std::size_t r = 0; r < x.n_rows; ++r) {
            const auto brute = brute_force_shap(forest, x.row(r), spec.n_features);
            for (std::size_t c = 0; c < spec.n_features; ++c)
                worst = std::max(worst, std::abs(shap.at(r, c) - brute[c]));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("local accuracy holds on trained models") {
    std::mt19937 gen(40);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FeatureMatrix x(250, 6);
    for (std::size_t c = 0; c < 6; ++c) x.names.push_back("f" + std::to_string(c));
    tabular::BinaryTarget y;
    y.values.resize(250);
    for (std::size_t r = 0; r < 250; ++r) {
        for (std::size_t c = 0; c < 6; ++c)
            x.at(r, c) = unit(gen) < 0.15 ? std::numeric_limits<double>::quiet_NaN()
                                          : normal(gen);
        const double v = std::isnan(x.at(r, 0)) ? 0.0 : x.at(r, 0);
        y.values[r] = v + 0.5 * normal(gen) > 0 ? 1 : 0;
    }
    y.values[0] = 0;
    y.values[1] = 1;
    gbdt::GbdtParams params;
    params.n_trees = 20;
    params.max_leaves = 8;
    params.min_samples_leaf = 3;
    const auto forest = gbdt::fit(x, y, params);
    const auto margins = gbdt::predict_margin(forest, x);
    const auto shap = tree_shap(forest, x);
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        double total = shap.base_value;
        for (std::size_t c = 0; c < x.n_cols; ++c) total += shap.at(r, c);
        CHECK(std::abs(total - margins[r]) <= 1e-9);
    }
}

TEST_CASE("additivity: forest attribution is the sum of per-tree attributions") {
    const auto forest = testsupport::random_forest(
        7, {.n_trees = 2, .max_depth = 3, .n_features = 4, .p_leaf = 0.2});
    const auto x = testsupport::random_instances(8, 4, 4, 0.15);

    Forest first, second;
    first.base_score = forest.base_score;
    second.base_score = 0.0;
    first.feature_names = second.feature_names = forest.feature_names;
    first.trees.push_back(forest.trees[0]);
    second.trees.push_back(forest.trees[1]);

    const auto whole = tree_shap(forest, x);
    const auto part_a = tree_shap(first, x);
    const auto part_b = tree_shap(second, x);
    for (std::size_t r = 0; r < x.n_rows; ++r)
        for (std::size_t c = 0; c < x.n_cols; ++c)
            CHECK(whole.at(r, c) ==
                  doctest::Approx(part_a.at(r, c) + part_b.at(r, c)).epsilon(1e-12));
}

TEST_CASE("dummy: unused features get exactly zero") {
    const auto forest = stump(0.4, 1.0, -1.0, 5);  // splits only f0
    const auto x = testsupport::random_instances(3, 6, 5, 0.1);
    const auto shap = tree_shap(forest, x);
    for (std::size_t r = 0; r < x.n_rows; ++r)
        for (std::size_t c = 1; c < 5; ++c) CHECK(shap.at(r, c) == 0.0);
}

TEST_CASE("symmetry: identically used features get equal attributions") {
    // f0 and f1 duplicate each other: same thresholds, same sub-structure.
    Forest forest;
    forest.base_score = 0.0;
    forest.feature_names = {"f0", "f1"};
    Tree tree;
    tree.nodes.resize(7);
    tree.nodes[0] = {false, 0.0, 1.0, 0, 0.0, true, 1, 2};
    tree.nodes[1] = {false, 0.0, 0.5, 1, 0.0, true, 3, 4};
    tree.nodes[2] = {false, 0.0, 0.5, 1, 0.0, true, 5, 6};
    tree.nodes[3] = {true, 1.0, 0.25, -1, 0.0, true, -1, -1};
    tree.nodes[4] = {true, -1.0, 0.25, -1, 0.0, true, -1, -1};
    tree.nodes[5] = {true, -1.0, 0.25, -1, 0.0, true, -1, -1};
    tree.nodes[6] = {true, 1.0, 0.25, -1, 0.0, true, -1, -1};
    forest.trees.push_back(tree);

    // Identical feature values keep the two features exchangeable.
    const auto x = one_row({-0.3, -0.3});
    const auto shap = tree_shap(forest, x);
    CHECK(std::abs(shap.at(0, 0) - shap.at(0, 1)) <= 1e-12);
}

TEST_CASE("brute force capacity bound") {
    testsupport::RandomForestSpec spec;
    spec.n_trees = 8;
    spec.max_depth = 6;
    spec.n_features = 24;
    spec.p_leaf = 0.0;
    const auto forest = testsupport::random_forest(1, spec);
    const auto x = testsupport::random_instances(2, 1, 24, 0.0);
    CHECK_THROWS_AS(brute_force_shap(forest, x.row(0), 24), CapacityError);
}

TEST_CASE("global importance ranks by mean absolute attribution") {
    ShapMatrix shap;
    shap.feature_names = {"b", "a", "c"};
    shap.n_rows = 2;
    shap.n_cols = 3;
    shap.values = {1.0, 0.0, -2.0,
                   -3.0, 0.0, 2.0};
    const auto importance = global_importance(shap);
    CHECK(importance.ranking == std::vector<std::string>{"b", "c", "a"});
    CHECK(importance.mean_abs_shap[0] == doctest::Approx(2.0));

    SUBCASE("all-zero matrix ranks alphabetically") {
        std::fill(shap.values.begin(), shap.values.end(), 0.0);
        const auto zero_rank = global_importance(shap);
        CHECK(zero_rank.ranking == std::vector<std::string>{"a", "b", "c"});
    }
}

TEST_CASE("beeswarm SVG is well-formed with one group per feature") {
    const auto forest = testsupport::random_forest(
        17, {.n_trees = 3, .max_depth = 3, .n_features = 5, .p_leaf = 0.2});
    const auto x = testsupport::random_instances(18, 40, 5, 0.1);
    const auto shap = tree_shap(forest, x);
    const auto importance = global_importance(shap);
    const auto svg = beeswarm_svg(shap, x, importance, {.max_features = 4, .seed = 3});
    std::size_t groups = 0;
    CHECK(testsupport::xml_well_formed(svg, &groups));
    CHECK(groups == 4);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
}
