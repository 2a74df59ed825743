#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "smp/metrics.hpp"
#include "smp/rng.hpp"

using namespace smp;
using namespace smp::metrics;

namespace {

// random vector with roughly the requested tie mass (values drawn from a
// small integer pool tie; the rest stay continuous)
std::vector<double> with_ties(Rng& rng, std::size_t n, double tie_fraction) {
    std::vector<double> v(n);
    for (auto& x : v)
        x = rng.uniform01() < tie_fraction ? static_cast<double>(rng.bounded(8)) : rng.normal();
    return v;
}

// hand-built feature matrix: schema [(n,0,1), (eu,1,2)]
feat::FeatureMatrix small_matrix(const std::vector<double>& n_col,
                                 const std::vector<double>& eu_a,
                                 const std::vector<double>& eu_b) {
    feat::FeatureMatrix m;
    m.rows = n_col.size();
    m.cols = 3;
    m.schema.blocks = {{"n", 0, 1}, {"eu", 1, 2}};
    m.col_names = {"n.geoaccuracy", "eu.follower", "eu.totalViews"};
    m.values.resize(m.rows * 3);
    for (std::size_t i = 0; i < m.rows; ++i) {
        m.values[i * 3 + 0] = n_col[i];
        m.values[i * 3 + 1] = eu_a[i];
        m.values[i * 3 + 2] = eu_b[i];
    }
    m.pids.resize(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) m.pids[i] = i + 1;
    return m;
}

}  // namespace

TEST_CASE("spearman: monotone, reversed, and the tied hand example") {
    CHECK(spearman_src({1, 2, 3}, {10, 20, 30}).value == doctest::Approx(1.0));
    CHECK(spearman_src({1, 2, 3}, {3, 2, 1}).value == doctest::Approx(-1.0));

    // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4) -> 4.5 / sqrt(4.5 * 5)
    const auto r = spearman_src({1, 2, 2, 4}, {1, 3, 2, 4});
    CHECK_FALSE(r.degenerate);
    CHECK(r.value == doctest::Approx(4.5 / std::sqrt(22.5)).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(0.9487).epsilon(1e-4));
}

TEST_CASE("spearman: constant input degenerates to zero with a flag") {
    const auto r = spearman_src({5, 5, 5, 5}, {1, 2, 3, 4});
    CHECK(r.value == 0.0);
    CHECK(r.degenerate);
}

TEST_CASE("spearman: input validation") {
    CHECK_THROWS(spearman_src({1, 2}, {1}));
    CHECK_THROWS(spearman_src({1}, {1}));
    CHECK_THROWS(spearman_src({1, std::numeric_limits<double>::quiet_NaN()}, {1, 2}));
}

TEST_CASE("mae: examples and validation") {
    CHECK(mae({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(mae({0, 0}, {1, 3}) == doctest::Approx(2.0));
    CHECK(mae({1.0, 2.0, 4.0}, {1.5, 2.0, 3.0}) == doctest::Approx(0.5));
    CHECK_THROWS(mae({1, 2}, {1}));
    CHECK_THROWS(mae({}, {}));
}

TEST_CASE("spearman and mae agree with brute-force oracles on 1000 random pairs") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = with_ties(rng, 100, 0.3);
        const auto b = with_ties(rng, 100, 0.3);
        const auto got = spearman_src(a, b);
        const double want = oracle::spearman(a, b);
        CHECK(std::fabs(got.value - want) <= 1e-12);
        CHECK(std::fabs(mae(a, b) - oracle::mae(a, b)) <= 1e-12);
    }
}

TEST_CASE("spearman: invariance and symmetry properties") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = with_ties(rng, 60, 0.2);
        const auto b = with_ties(rng, 60, 0.2);
        const double base = spearman_src(a, b).value;

        // strictly increasing transforms change nothing
        auto a_exp = a;
        for (auto& x : a_exp) x = std::exp(x);
        auto b_cub = b;
        for (auto& x : b_cub) x = x * x * x + 2.0 * x;
        CHECK(spearman_src(a_exp, b).value == doctest::Approx(base).epsilon(1e-12));
        CHECK(spearman_src(a, b_cub).value == doctest::Approx(base).epsilon(1e-12));

        // symmetric in its arguments
        CHECK(spearman_src(b, a).value == doctest::Approx(base).epsilon(1e-12));
    }

    // negation flips the sign when ranks are tie-free
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    auto y_neg = y;
    for (auto& v : y_neg) v = -v;
    CHECK(spearman_src(x, y_neg).value ==
          doctest::Approx(-spearman_src(x, y).value).epsilon(1e-12));
}

TEST_CASE("mae: zero iff equal, translation invariant") {
    Rng rng(32);
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(a, b) > 0.0);

    auto a_shift = a, b_shift = b;
    for (auto& v : a_shift) v += 11.5;
    for (auto& v : b_shift) v += 11.5;
    CHECK(mae(a_shift, b_shift) == doctest::Approx(mae(a, b)).epsilon(1e-12));
}

TEST_CASE("correlation report: a monotone feature ranks first at 1.0") {
    Rng rng(33);
    const std::size_t n = 200;
    std::vector<double> follower(n), views(n), geoacc(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        follower[i] = std::floor(rng.uniform(0, 1e5));
        views[i] = rng.normal(100, 30);
        geoacc[i] = std::floor(rng.uniform(1, 17));
        labels[i] = std::log1p(follower[i]);  // strictly increasing in follower
    }
    const auto m = small_matrix(geoacc, follower, views);
    const auto report = feature_correlation_report(m, labels);
    REQUIRE_FALSE(report.rows.empty());
    CHECK(report.rows[0].feature == "eu.follower");
    CHECK(report.rows[0].abs_src == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation report: label-independent noise stays under 0.1 at n=1000") {
    Rng rng(34);
    const std::size_t n = 1000;
    std::vector<double> noise(n), other(n), geoacc(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        noise[i] = rng.normal();
        other[i] = rng.normal();
        geoacc[i] = std::floor(rng.uniform(1, 17));
        labels[i] = rng.normal(5, 2);
    }
    const auto m = small_matrix(geoacc, noise, other);
    const auto report = feature_correlation_report(m, labels);
    for (const auto& row : report.rows) CHECK(row.abs_src < 0.1);
}

TEST_CASE("correlation report: ties break by name, averages are exact means") {
    Rng rng(35);
    const std::size_t n = 50;
    std::vector<double> col(n), geoacc(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        col[i] = rng.normal();
        geoacc[i] = rng.normal();
        labels[i] = rng.normal();
    }
    // identical columns => identical |SRC| => name order decides
    const auto m = small_matrix(geoacc, col, col);
    const auto report = feature_correlation_report(m, labels);
    REQUIRE(report.rows.size() == 3);
    const auto fol = std::find_if(report.rows.begin(), report.rows.end(),
                                  [](const auto& r) { return r.feature == "eu.follower"; });
    const auto views = std::find_if(report.rows.begin(), report.rows.end(),
                                    [](const auto& r) { return r.feature == "eu.totalViews"; });
    CHECK(fol->abs_src == views->abs_src);
    CHECK(fol < views);  // "eu.follower" sorts before "eu.totalViews" on a tie

    // group averages: external = the two eu columns, other = geoaccuracy
    double ext = 0.0, other = 0.0;
    std::size_t next = 0, notx = 0;
    for (const auto& row : report.rows)
        if (row.external) {
            ext += row.abs_src;
            ++next;
        } else {
            other += row.abs_src;
            ++notx;
        }
    CHECK(report.external_average == doctest::Approx(ext / next).epsilon(1e-12));
    CHECK(report.other_average == doctest::Approx(other / notx).epsilon(1e-12));

    // the sorted rows are a permutation of the input columns
    CHECK(next == 2);
    CHECK(notx == 1);
}

TEST_CASE("correlation report: no numeric columns in scope is an error") {
    feat::FeatureMatrix m;
    m.rows = 3;
    m.cols = 1;
    m.values = {1, 2, 3};
    m.schema.blocks = {{"cat", 0, 1}};
    m.col_names = {"cat.category.unknown"};
    m.pids = {1, 2, 3};
    CHECK_THROWS(feature_correlation_report(m, {1, 2, 3}));
}
