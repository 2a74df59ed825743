#include "smp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "smp/io.hpp"

namespace smp::metrics {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_pair(const std::vector<double>& s, const std::vector<double>& s_hat,
                const char* op, std::size_t min_len) {
    if (s.size() != s_hat.size()) fail(std::string(op) + ": length mismatch");
    if (s.size() < min_len)
        fail(std::string(op) + ": need at least " + std::to_string(min_len) + " entries");
    for (double v : s)
        if (!std::isfinite(v)) fail(std::string(op) + ": non-finite entry");
    for (double v : s_hat)
        if (!std::isfinite(v)) fail(std::string(op) + ": non-finite entry");
}

}  // namespace

std::vector<double> fractional_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        // positions i..j (0-based) share the average 1-based rank
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

SrcResult spearman_src(const std::vector<double>& s, const std::vector<double>& s_hat) {
    check_pair(s, s_hat, "spearman_src", 2);

    const std::vector<double> ra = fractional_ranks(s);
    const std::vector<double> rb = fractional_ranks(s_hat);
    const std::size_t n = ra.size();

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - mean_a;
        const double db = rb[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }

    if (saa == 0.0 || sbb == 0.0) return {0.0, true};
    return {sab / std::sqrt(saa * sbb), false};
}

double mae(const std::vector<double>& s, const std::vector<double>& s_hat) {
    check_pair(s, s_hat, "mae", 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::fabs(s_hat[i] - s[i]);
    return acc / static_cast<double>(s.size());
}

CorrelationReport feature_correlation_report(const feat::FeatureMatrix& matrix,
                                             const std::vector<double>& labels,
                                             const std::set<std::string>& external_tags) {
    if (labels.size() != matrix.rows)
        fail("feature_correlation_report: label count does not match matrix rows");

    // numeric metadata blocks; one-hot and embedding blocks are out of scope
    static const std::set<std::string> kNumericBlocks = {"time", "n", "eu"};

    CorrelationReport report;
    for (const auto& span : matrix.schema.blocks) {
        if (!kNumericBlocks.count(span.name)) continue;
        const bool external = external_tags.count(span.name) > 0;
        for (std::size_t j = span.start; j < span.start + span.width; ++j) {
            const std::string& name = matrix.col_names[j];
            // indicator columns are imputation bookkeeping, not features
            if (name.ends_with(".missing") || name.ends_with(".profile_missing")) continue;
            std::vector<double> col(matrix.rows);
            for (std::size_t i = 0; i < matrix.rows; ++i) col[i] = matrix.at(i, j);
            const SrcResult src = spearman_src(col, labels);
            report.rows.push_back({name, std::fabs(src.value), external});
        }
    }
    if (report.rows.empty()) fail("feature_correlation_report: no numeric columns in scope");

    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const CorrelationRow& a, const CorrelationRow& b) {
                         if (a.abs_src != b.abs_src) return a.abs_src > b.abs_src;
                         return a.feature < b.feature;
                     });

    double ext_sum = 0.0, other_sum = 0.0;
    std::size_t ext_n = 0, other_n = 0;
    for (const auto& row : report.rows) {
        if (row.external) {
            ext_sum += row.abs_src;
            ++ext_n;
        } else {
            other_sum += row.abs_src;
            ++other_n;
        }
    }
    report.external_average = ext_n ? ext_sum / static_cast<double>(ext_n) : 0.0;
    report.other_average = other_n ? other_sum / static_cast<double>(other_n) : 0.0;
    return report;
}

void save_correlation_csv(const CorrelationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open file for writing: " + path);
    out << "feature,abs_src\n";
    for (const auto& row : report.rows)
        out << row.feature << ',' << io::format_double(row.abs_src) << '\n';
    out << "avg_external," << io::format_double(report.external_average) << '\n';
    out << "avg_other," << io::format_double(report.other_average) << '\n';
    if (!out) fail("write failed: " + path);
}

std::string render_correlation_text(const CorrelationReport& report) {
    std::size_t width = 12;
    for (const auto& row : report.rows) width = std::max(width, row.feature.size());

    std::ostringstream out;
    char buf[64];
    auto line = [&](const std::string& name, double v, const char* group) {
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        out << name << std::string(width + 2 - name.size(), ' ') << buf << "  " << group << '\n';
    };
    out << "feature" << std::string(width + 2 - 7, ' ') << "abs_src group\n";
    for (const auto& row : report.rows)
        line(row.feature, row.abs_src, row.external ? "external" : "other");
    line("avg_external", report.external_average, "");
    line("avg_other", report.other_average, "");
    return out.str();
}

}  // namespace smp::metrics
