#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "smp/gbdt.hpp"
#include "smp/rng.hpp"

using namespace smp;
using namespace smp::gbdt;
using linalg::Mat;

namespace {

Mat column_matrix(const std::vector<double>& x) {
    Mat m(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = x[i];
    return m;
}

double mse(const std::vector<double>& pred, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return s / static_cast<double>(y.size());
}

// predictions using only the first t trees
std::vector<double> predict_prefix(const GbdtModel& model, const Mat& X, std::size_t t) {
    std::vector<double> out(X.rows, model.base_score);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double acc = 0;
        for (std::size_t k = 0; k < t; ++k) acc += model.trees[k].predict_row(&X.a[i * X.cols]);
        out[i] += model.config.learning_rate * acc;
    }
    return out;
}

// rows reaching each leaf, for the min_samples_leaf check
void count_leaf_rows(const Tree& tree, const Mat& X, std::map<int, int>& counts) {
    for (std::size_t i = 0; i < X.rows; ++i) {
        int node = 0;
        while (tree.nodes[node].feature >= 0) {
            const auto& nd = tree.nodes[node];
            node = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        ++counts[node];
    }
}

}  // namespace

TEST_CASE("quantile bins: constant, quantile cut, exact binning, collapse") {
    CHECK(quantile_bins({5, 5, 5}, 16).empty());

    const auto edges = quantile_bins({1, 2, 3, 4}, 2);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0] == doctest::Approx(2.5));

    const auto exact = quantile_bins({3, 1, 2}, 255);
    REQUIRE(exact.size() == 2);
    CHECK(exact[0] == doctest::Approx(1.5));
    CHECK(exact[1] == doctest::Approx(2.5));

    // heavy duplication collapses coincident quantile cuts
    const auto collapsed = quantile_bins({1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 3, 4, 5}, 4);
    REQUIRE(collapsed.size() == 2);
    CHECK(collapsed[0] == doctest::Approx(1.0));
    CHECK(collapsed[1] == doctest::Approx(1.5));

    for (const auto& es : {edges, exact, collapsed})
        for (std::size_t i = 1; i < es.size(); ++i) CHECK(es[i] > es[i - 1]);
}

TEST_CASE("zero trees predict the target mean") {
    GbdtConfig cfg;
    cfg.num_trees = 0;
    cfg.min_samples_leaf = 1;
    const Mat X = column_matrix({0, 1, 2});
    const auto model = fit_gbdt(X, {2, 2, 2}, cfg);
    CHECK(model.base_score == doctest::Approx(2.0));
    for (double p : predict_gbdt(model, X)) CHECK(p == doctest::Approx(2.0));
}

TEST_CASE("one unit-rate tree recovers a separable step exactly") {
    std::vector<double> x(200), y(200);
    for (int i = 0; i < 200; ++i) {
        x[i] = i < 100 ? -1.0 - 0.01 * i : 1.0 + 0.01 * (i - 100);
        y[i] = x[i] >= 0 ? 10.0 : 0.0;
    }
    GbdtConfig cfg;
    cfg.num_trees = 1;
    cfg.learning_rate = 1.0;
    cfg.l2_reg = 0.0;
    cfg.max_leaves = 2;
    const Mat X = column_matrix(x);
    const auto model = fit_gbdt(X, y, cfg);
    const auto pred = predict_gbdt(model, X);
    for (int i = 0; i < 200; ++i) CHECK(pred[i] == y[i]);  // exact, not approximate
}

TEST_CASE("training loss is non-increasing per boosting iteration") {
    Rng rng(555);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 150;
        Mat X(n, 3);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 3; ++j) X(i, j) = rng.normal();
            y[i] = 2.0 * X(i, 0) - X(i, 1) * X(i, 2) + 0.3 * rng.normal();
        }
        GbdtConfig cfg;
        cfg.num_trees = 40;
        cfg.learning_rate = 0.2;
        cfg.min_samples_leaf = 5;
        cfg.seed = trial;
        const auto model = fit_gbdt(X, y, cfg);
        double prev = mse(predict_prefix(model, X, 0), y);
        for (std::size_t t = 1; t <= model.trees.size(); ++t) {
            const double cur = mse(predict_prefix(model, X, t), y);
            CHECK(cur <= prev + 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("root split matches an exhaustive search over bin boundaries") {
    Rng rng(777);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 4 + rng.bounded(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = std::floor(rng.uniform(0, 8));  // coarse values force ties into bins
            y[i] = rng.normal(0, 2);
        }
        GbdtConfig cfg;
        cfg.num_trees = 1;
        cfg.learning_rate = 1.0;
        cfg.max_leaves = 2;
        cfg.min_samples_leaf = 1;
        cfg.l2_reg = trial % 2 ? 1.0 : 0.0;

        const Mat X = column_matrix(x);
        const auto model = fit_gbdt(X, y, cfg);

        // gradients at the constant base prediction
        const double base = model.base_score;
        std::vector<double> g(n), h(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) g[i] = base - y[i];
        const auto edges = quantile_bins(x, cfg.max_bins);
        const auto best = oracle::exhaustive_split(x, g, h, edges, cfg.l2_reg,
                                                   cfg.min_samples_leaf);

        const auto& root = model.trees[0].nodes[0];
        if (best.bin < 0) {
            CHECK(root.feature == -1);  // no positive-gain split anywhere
        } else {
            REQUIRE(root.feature == 0);
            CHECK(root.threshold == doctest::Approx(edges[best.bin]).epsilon(1e-12));
        }
    }
}

TEST_CASE("interpolation: a deep fit reproduces 50 distinct points") {
    Rng rng(888);
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
        x[i] = i + rng.uniform01() * 0.5;
        y[i] = rng.normal(0, 3);
    }
    GbdtConfig cfg;
    cfg.num_trees = 4;
    cfg.learning_rate = 1.0;
    cfg.max_leaves = 50;
    cfg.min_samples_leaf = 1;
    cfg.l2_reg = 0.0;
    const Mat X = column_matrix(x);
    const auto model = fit_gbdt(X, y, cfg);
    const auto pred = predict_gbdt(model, X);
    CHECK(oracle::mae(y, pred) < 1e-6);
}

TEST_CASE("refits are byte-identical") {
    Rng rng(999);
    Mat X(80, 4);
    std::vector<double> y(80);
    for (auto& v : X.a) v = rng.normal();
    for (auto& v : y) v = rng.normal(1, 2);
    GbdtConfig cfg;
    cfg.num_trees = 25;
    cfg.min_samples_leaf = 3;
    const auto a = fit_gbdt(X, y, cfg);
    const auto b = fit_gbdt(X, y, cfg);
    CHECK(a.to_json_string() == b.to_json_string());

    const auto reloaded = GbdtModel::from_json_string(a.to_json_string());
    CHECK(reloaded.to_json_string() == a.to_json_string());
    CHECK(predict_gbdt(reloaded, X) == predict_gbdt(a, X));
}

TEST_CASE("min_samples_leaf is honored by every leaf") {
    Rng rng(1010);
    Mat X(120, 2);
    std::vector<double> y(120);
    for (auto& v : X.a) v = rng.normal();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = X(i, 0) + rng.normal();
    GbdtConfig cfg;
    cfg.num_trees = 10;
    cfg.min_samples_leaf = 7;
    cfg.learning_rate = 0.5;
    const auto model = fit_gbdt(X, y, cfg);
    for (const auto& tree : model.trees) {
        CHECK(tree.leaf_count() <= cfg.max_leaves);
        std::map<int, int> counts;
        count_leaf_rows(tree, X, counts);
        for (const auto& [node, count] : counts) CHECK(count >= cfg.min_samples_leaf);
    }
}

TEST_CASE("strictly increasing feature transforms leave the model unchanged") {
    Rng rng(1111);
    const std::size_t n = 90;
    Mat X(n, 3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) X(i, j) = std::floor(rng.uniform(-5, 5));
        y[i] = X(i, 0) - 2 * X(i, 1) + rng.normal();
    }
    Mat Xt = X;
    for (std::size_t i = 0; i < n; ++i) Xt(i, 1) = std::exp(0.4 * X(i, 1));

    GbdtConfig cfg;
    cfg.num_trees = 15;
    cfg.min_samples_leaf = 4;
    const auto a = fit_gbdt(X, y, cfg);
    const auto b = fit_gbdt(Xt, y, cfg);

    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
            CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
            CHECK(a.trees[t].nodes[k].left == b.trees[t].nodes[k].left);
            CHECK(a.trees[t].nodes[k].value == b.trees[t].nodes[k].value);
        }
    }
    CHECK(predict_gbdt(a, X) == predict_gbdt(b, Xt));
}

TEST_CASE("absolute loss trains and stays finite") {
    Rng rng(1212);
    Mat X(100, 2);
    std::vector<double> y(100);
    for (auto& v : X.a) v = rng.normal();
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = X(i, 0) + (rng.uniform01() < 0.05 ? 50.0 : rng.normal());  // outliers
    GbdtConfig cfg;
    cfg.loss = GbdtConfig::Loss::Absolute;
    cfg.num_trees = 30;
    cfg.min_samples_leaf = 5;
    const auto model = fit_gbdt(X, y, cfg);
    for (double p : predict_gbdt(model, X)) CHECK(std::isfinite(p));
}

TEST_CASE("config and input validation") {
    GbdtConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = GbdtConfig{};
    cfg.max_leaves = 1;
    CHECK_THROWS(cfg.validate());
    cfg = GbdtConfig{};
    cfg.max_bins = 300;
    CHECK_THROWS(cfg.validate());

    cfg = GbdtConfig{};
    cfg.min_samples_leaf = 1;
    const Mat X = column_matrix({1, 2, 3});
    CHECK_THROWS(fit_gbdt(X, {1, 2}, cfg));                                  // length mismatch
    CHECK_THROWS(fit_gbdt(X, {1, 2, std::numeric_limits<double>::quiet_NaN()}, cfg));

    const auto model = fit_gbdt(X, {1, 2, 3}, cfg);
    Mat wrong(2, 2);
    CHECK_THROWS(predict_gbdt(model, wrong));
}
