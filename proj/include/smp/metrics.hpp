#ifndef SMP_METRICS_HPP
#define SMP_METRICS_HPP

#include <set>
#include <string>
#include <vector>

#include "smp/features.hpp"

namespace smp::metrics {

/// Fractional (average) ranks, 1-based; ties share the mean of their
/// positions.
std::vector<double> fractional_ranks(const std::vector<double>& v);

struct SrcResult {
    double value = 0.0;
    bool degenerate = false;  // a rank vector was constant; value forced to 0
};

/// Spearman's rank correlation: Pearson correlation of the fractional rank
/// vectors (sample statistics, n-1 denominator).
SrcResult spearman_src(const std::vector<double>& s, const std::vector<double>& s_hat);

/// (1/n) * sum |s_hat_i - s_i|.
double mae(const std::vector<double>& s, const std::vector<double>& s_hat);

struct CorrelationRow {
    std::string feature;
    double abs_src = 0.0;
    bool external = false;
};

/// Per-feature |SRC| against the label, sorted descending (ties by name),
/// with group averages for external-profile columns vs the other numeric
/// columns.
struct CorrelationReport {
    std::vector<CorrelationRow> rows;
    double external_average = 0.0;
    double other_average = 0.0;
};

/// Runs on the raw numeric metadata columns of the matrix: blocks time, n
/// and eu (indicator columns excluded). Blocks named in external_tags form
/// the external group.
CorrelationReport feature_correlation_report(const feat::FeatureMatrix& matrix,
                                             const std::vector<double>& labels,
                                             const std::set<std::string>& external_tags = {"eu"});

void save_correlation_csv(const CorrelationReport& report, const std::string& path);
std::string render_correlation_text(const CorrelationReport& report);

}  // namespace smp::metrics

#endif
