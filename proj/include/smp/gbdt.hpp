#ifndef SMP_GBDT_HPP
#define SMP_GBDT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "smp/linalg.hpp"

namespace smp::gbdt {

struct GbdtConfig {
    int num_trees = 500;
    double learning_rate = 0.05;
    int max_leaves = 31;
    int min_samples_leaf = 20;
    int max_bins = 255;
    double l2_reg = 1.0;
    enum class Loss { Squared, Absolute };
    Loss loss = Loss::Squared;
    std::uint64_t seed = 0;  // reserved; training is currently deterministic without it

    void validate() const;
};

std::string loss_name(GbdtConfig::Loss loss);
GbdtConfig::Loss loss_from_name(const std::string& name);

/// Flat node array; `feature < 0` marks a leaf. Routing: x[feature] <=
/// threshold goes left. default_left is reserved for missing bins (always
/// left; imputation upstream means trees never see missing values).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;
    double value = 0.0;  // leaf payload
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double predict_row(const double* x) const;
    int leaf_count() const;
};

struct GbdtModel {
    GbdtConfig config;
    double base_score = 0.0;
    std::size_t feature_count = 0;
    std::vector<std::vector<double>> bin_edges;  // per feature, strictly increasing
    std::vector<Tree> trees;

    std::string to_json_string() const;
    static GbdtModel from_json_string(const std::string& text);
};

/// Strictly increasing histogram edges at empirical quantiles; at most
/// max_bins - 1 of them. Columns with few distinct values get one bin per
/// value (edges at midpoints); constant columns get none.
std::vector<double> quantile_bins(const std::vector<double>& column, int max_bins);

/// Bin index = number of edges < x, so a row goes left on "x <= edge".
std::size_t bin_index(const std::vector<double>& edges, double x);

/// Gradient-boosted regression fit. Deterministic given config and input.
GbdtModel fit_gbdt(const linalg::Mat& X, const std::vector<double>& y, const GbdtConfig& cfg);

/// base_score + learning_rate * sum of per-tree leaf values.
std::vector<double> predict_gbdt(const GbdtModel& model, const linalg::Mat& X);

}  // namespace smp::gbdt

#endif
